//! Ranked recommendation output shared by every recommender.

use serde::{Deserialize, Serialize};

/// Citation recommendations ordered by non-increasing score; score ties break
/// by ascending citation index. Callers exclude the UNK index (and, where the
/// protocol demands it, the query's own citations) before construction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RankedList {
    items: Vec<(u32, f64)>,
}

impl RankedList {
    pub fn empty() -> Self {
        RankedList::default()
    }

    /// Sorts candidates into ranked order and keeps the top `top_n`.
    /// Duplicate indices and non-finite scores are contract violations.
    pub fn from_scores(mut scored: Vec<(u32, f64)>, top_n: usize) -> Self {
        debug_assert!(scored.iter().all(|&(_, s)| s.is_finite()));
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        scored.truncate(top_n);
        debug_assert!({
            let mut seen: Vec<u32> = scored.iter().map(|&(i, _)| i).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        });
        RankedList { items: scored }
    }

    pub fn items(&self) -> &[(u32, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// 1-based rank of a citation, if present.
    pub fn rank_of(&self, index: u32) -> Option<usize> {
        self.items.iter().position(|&(i, _)| i == index).map(|p| p + 1)
    }

    pub fn truncated(&self, top_n: usize) -> RankedList {
        RankedList {
            items: self.items.iter().take(top_n).copied().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn orders_by_score_then_index() {
        let list = RankedList::from_scores(vec![(4, 0.5), (1, 0.9), (3, 0.5), (2, 0.1)], 10);
        assert_eq!(
            list.items(),
            &[(1, 0.9), (3, 0.5), (4, 0.5), (2, 0.1)]
        );
        assert_eq!(list.rank_of(3), Some(2));
        assert_eq!(list.rank_of(9), None);
    }

    #[test]
    fn truncates_to_top_n() {
        let list = RankedList::from_scores(vec![(0, 0.1), (1, 0.2), (2, 0.3)], 2);
        assert_eq!(list.len(), 2);
        assert_eq!(list.items()[0].0, 2);
    }

    proptest! {
        #[test]
        fn scores_are_non_increasing(scores in proptest::collection::vec(0.0f64..1.0, 0..40),
                                     top_n in 0usize..50) {
            let scored: Vec<(u32, f64)> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| (i as u32, s))
                .collect();
            let list = RankedList::from_scores(scored, top_n);
            for w in list.items().windows(2) {
                prop_assert!(w[0].1 >= w[1].1);
                if w[0].1 == w[1].1 {
                    prop_assert!(w[0].0 < w[1].0);
                }
            }
        }
    }
}
