//! Recall@k evaluation under the citation-list and context protocols, with
//! 6-fold statistics and diagnostic breakdowns.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::citation::{CitationClass, CitationVocabulary};
use crate::corpus::Document;
use crate::ranked::RankedList;
use crate::recommender::{CitationListRecommender, ContextRecommender};
use crate::windows::{all_instances, instance_rng, sample_instance, WindowSpec};

/// 1 iff the target appears among the first min(k, |ranked|) items.
pub fn recall_at_k(ranked: &RankedList, target: u32, k: usize) -> bool {
    ranked
        .rank_of(target)
        .map(|rank| rank <= k)
        .unwrap_or(false)
}

/// One scored evaluation instance; `rank` is the 1-based position of the
/// target in the model's ranked list, if present.
#[derive(Debug, Clone)]
pub struct EvalInstance {
    pub target: u32,
    pub rank: Option<usize>,
    pub fold: usize,
    pub class: CitationClass,
    pub year: i32,
    pub distance: Option<usize>,
    pub target_train_count: u64,
}

impl EvalInstance {
    pub fn hit(&self, k: usize) -> bool {
        self.rank.map(|r| r <= k).unwrap_or(false)
    }
}

/// Fold mean and standard error (sample standard deviation over √n).
/// Values are summed in sorted order so permutations of the input produce
/// bit-identical results.
pub fn fold_stats(per_fold: &[f64]) -> (f64, f64) {
    if per_fold.is_empty() {
        return (0.0, 0.0);
    }
    let mut sorted = per_fold.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    if sorted.len() < 2 {
        return (mean, 0.0);
    }
    let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / n.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecallReport {
    pub ks: Vec<usize>,
    /// Fold ids that contributed at least one instance, ascending.
    pub folds: Vec<usize>,
    pub per_fold_n: Vec<usize>,
    /// Per k: recall per fold, aligned with `folds`.
    pub per_fold_recall: BTreeMap<usize, Vec<f64>>,
    /// Per k: mean over folds.
    pub fold_mean: BTreeMap<usize, f64>,
    /// Per k: standard error over folds.
    pub fold_stderr: BTreeMap<usize, f64>,
    /// Per k: instance-weighted recall over all folds (differs from the fold
    /// mean when folds are unequal in size).
    pub instance_mean: BTreeMap<usize, f64>,
    pub n_instances: usize,
}

pub fn build_report(instances: &[EvalInstance], ks: &[usize]) -> RecallReport {
    let mut by_fold: BTreeMap<usize, Vec<&EvalInstance>> = BTreeMap::new();
    for inst in instances {
        by_fold.entry(inst.fold).or_default().push(inst);
    }
    let folds: Vec<usize> = by_fold.keys().copied().collect();
    let per_fold_n: Vec<usize> = by_fold.values().map(|v| v.len()).collect();

    let mut per_fold_recall: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut fold_mean = BTreeMap::new();
    let mut fold_stderr = BTreeMap::new();
    let mut instance_mean = BTreeMap::new();
    for &k in ks {
        let recalls: Vec<f64> = by_fold
            .values()
            .map(|fold| {
                let hits = fold.iter().filter(|i| i.hit(k)).count();
                hits as f64 / fold.len() as f64
            })
            .collect();
        let (mean, stderr) = fold_stats(&recalls);
        per_fold_recall.insert(k, recalls);
        fold_mean.insert(k, mean);
        fold_stderr.insert(k, stderr);
        let total_hits = instances.iter().filter(|i| i.hit(k)).count();
        instance_mean.insert(
            k,
            if instances.is_empty() {
                0.0
            } else {
                total_hits as f64 / instances.len() as f64
            },
        );
    }
    RecallReport {
        ks: ks.to_vec(),
        folds,
        per_fold_n,
        per_fold_recall,
        fold_mean,
        fold_stderr,
        instance_mean,
        n_instances: instances.len(),
    }
}

/// Citation-list protocol: for each test document with M ≥ 2 citations and
/// each m in 1..M, predict the (m+1)-th citation from the first m.
/// UNK targets are skipped. `max_instances_per_doc` of 0 means unlimited.
pub fn evaluate_citation_list<R: CitationListRecommender>(
    model: &R,
    docs: &[Document],
    fold_of: &HashMap<String, usize>,
    vocab: &CitationVocabulary,
    ks: &[usize],
    max_instances_per_doc: usize,
) -> (RecallReport, Vec<EvalInstance>) {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    let mut instances = Vec::new();
    for doc in docs {
        let Some(&fold) = fold_of.get(&doc.id) else {
            continue;
        };
        let seq = doc.citation_sequence();
        let mut taken = 0usize;
        for m in 1..seq.len() {
            if max_instances_per_doc > 0 && taken >= max_instances_per_doc {
                break;
            }
            let target = seq[m];
            if target == vocab.unk_index() {
                continue;
            }
            let ranked = model.recommend_citations(&seq[..m], &doc.metadata, max_k);
            instances.push(EvalInstance {
                target,
                rank: ranked.rank_of(target),
                fold,
                class: vocab.class_of(target),
                year: doc.metadata.year,
                distance: None,
                target_train_count: vocab.count_of(target),
            });
            taken += 1;
        }
    }
    (build_report(&instances, ks), instances)
}

/// Context protocol: one sampled window instance per document per pass (or
/// every valid offset when `exhaustive`), predicting the first citation in
/// the forecast window from the preceding context.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_context<R: ContextRecommender>(
    model: &R,
    docs: &[Document],
    fold_of: &HashMap<String, usize>,
    vocab: &CitationVocabulary,
    spec: WindowSpec,
    ks: &[usize],
    seed: u64,
    exhaustive: bool,
) -> (RecallReport, Vec<EvalInstance>) {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    let unk = vocab.unk_index();
    let mut instances = Vec::new();
    for doc in docs {
        let Some(&fold) = fold_of.get(&doc.id) else {
            continue;
        };
        let windows = if exhaustive {
            all_instances(doc, spec, unk)
        } else {
            let mut rng = instance_rng(seed, &doc.id, 0);
            sample_instance(doc, spec, unk, &mut rng).into_iter().collect()
        };
        for inst in windows {
            let ranked = model.recommend_context(&inst.context, &doc.metadata, max_k);
            instances.push(EvalInstance {
                target: inst.target,
                rank: ranked.rank_of(inst.target),
                fold,
                class: vocab.class_of(inst.target),
                year: doc.metadata.year,
                distance: Some(inst.distance),
                target_train_count: vocab.count_of(inst.target),
            });
        }
    }
    (build_report(&instances, ks), instances)
}

/// Distance bins of width 16 over [1, w]: 1-16, 17-32, … (the last bin is
/// clipped to w).
pub fn distance_bins(forecast_len: usize) -> Vec<(usize, usize)> {
    (1..=forecast_len)
        .step_by(16)
        .map(|lo| (lo, (lo + 15).min(forecast_len)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupRecall {
    pub n: usize,
    pub recall: BTreeMap<usize, f64>,
}

fn group_recall(instances: &[&EvalInstance], ks: &[usize]) -> GroupRecall {
    let mut recall = BTreeMap::new();
    for &k in ks {
        let hits = instances.iter().filter(|i| i.hit(k)).count();
        recall.insert(k, hits as f64 / instances.len() as f64);
    }
    GroupRecall {
        n: instances.len(),
        recall,
    }
}

/// Diagnostic recall breakdowns; groups with no instances are omitted.
#[derive(Debug, Clone, Serialize)]
pub struct Breakdowns {
    pub ks: Vec<usize>,
    pub by_class: Vec<(CitationClass, GroupRecall)>,
    pub by_year: Vec<(i32, GroupRecall)>,
    /// Present when instances carry distances; binned by `distance_bins`.
    pub by_distance: Vec<((usize, usize), GroupRecall)>,
    /// Per prediction target: (citation index, training count, recall).
    pub per_citation: Vec<(u32, u64, GroupRecall)>,
}

pub fn breakdowns(
    instances: &[EvalInstance],
    ks: &[usize],
    forecast_len: Option<usize>,
) -> Breakdowns {
    let mut by_class: BTreeMap<CitationClass, Vec<&EvalInstance>> = BTreeMap::new();
    let mut by_year: BTreeMap<i32, Vec<&EvalInstance>> = BTreeMap::new();
    let mut per_citation: BTreeMap<u32, Vec<&EvalInstance>> = BTreeMap::new();
    for inst in instances {
        by_class.entry(inst.class).or_default().push(inst);
        by_year.entry(inst.year).or_default().push(inst);
        per_citation.entry(inst.target).or_default().push(inst);
    }

    let by_distance = match forecast_len {
        Some(w) => distance_bins(w)
            .into_iter()
            .filter_map(|(lo, hi)| {
                let members: Vec<&EvalInstance> = instances
                    .iter()
                    .filter(|i| i.distance.map(|d| d >= lo && d <= hi).unwrap_or(false))
                    .collect();
                (!members.is_empty()).then(|| ((lo, hi), group_recall(&members, ks)))
            })
            .collect(),
        None => Vec::new(),
    };

    Breakdowns {
        ks: ks.to_vec(),
        by_class: by_class
            .into_iter()
            .map(|(c, v)| (c, group_recall(&v, ks)))
            .collect(),
        by_year: by_year
            .into_iter()
            .map(|(y, v)| (y, group_recall(&v, ks)))
            .collect(),
        by_distance,
        per_citation: per_citation
            .into_iter()
            .map(|(c, v)| (c, v[0].target_train_count, group_recall(&v, ks)))
            .collect(),
    }
}

fn recall_header(ks: &[usize]) -> String {
    ks.iter()
        .map(|k| format!("recall@{k}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn recall_cells(g: &GroupRecall, ks: &[usize]) -> String {
    ks.iter()
        .map(|k| format!("{}", g.recall[k]))
        .collect::<Vec<_>>()
        .join(",")
}

impl Breakdowns {
    pub fn class_csv(&self) -> String {
        let mut out = format!("class,n,{}\n", recall_header(&self.ks));
        for (class, g) in &self.by_class {
            out.push_str(&format!("{},{},{}\n", class.as_str(), g.n, recall_cells(g, &self.ks)));
        }
        out
    }

    pub fn year_csv(&self) -> String {
        let mut out = format!("year,n,{}\n", recall_header(&self.ks));
        for (year, g) in &self.by_year {
            out.push_str(&format!("{year},{},{}\n", g.n, recall_cells(g, &self.ks)));
        }
        out
    }

    pub fn distance_csv(&self) -> String {
        let mut out = format!("distance_lo,distance_hi,n,{}\n", recall_header(&self.ks));
        for ((lo, hi), g) in &self.by_distance {
            out.push_str(&format!("{lo},{hi},{},{}\n", g.n, recall_cells(g, &self.ks)));
        }
        out
    }

    /// Scatter data: per-target recall against training frequency.
    pub fn per_citation_csv(&self, vocab: &CitationVocabulary) -> String {
        let mut out = format!("citation_index,key,train_count,n,{}\n", recall_header(&self.ks));
        for (index, train_count, g) in &self.per_citation {
            out.push_str(&format!(
                "{index},{},{train_count},{},{}\n",
                vocab.key_of(*index),
                g.n,
                recall_cells(g, &self.ks)
            ));
        }
        out
    }
}
