//! CLI contract tests: missing-artifact diagnostics, one-shot recommendation,
//! and summary output shapes.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{generate, write_inputs, SynthSpec};

fn citerec(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_citerec"))
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .expect("spawn citerec")
}

fn assert_ok(out: &Output, what: &str) -> String {
    assert!(
        out.status.success(),
        "{what} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

struct Fixture {
    _dir: tempfile::TempDir,
    config: PathBuf,
}

/// Inputs plus config written to a temp dir; no pipeline stages run yet.
fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate(SynthSpec::small());
    write_inputs(dir.path(), &corpus);
    let config = dir.path().join("config.json");
    let value = serde_json::json!({
        "corpus": dir.path().join("corpus.jsonl"),
        "authorities": dir.path().join("authorities.csv"),
        "artifacts_dir": dir.path().join("artifacts"),
        "seed": 7,
        "min_count": 3,
        "cf": {"scheme": "binary", "k": 10},
        "context": {"max_terms": 2000, "min_df": 3, "context_len": 50, "cap": 100},
        "fusion": {"sample_docs": 30, "epochs": 20, "pool": 15}
    });
    std::fs::write(&config, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    Fixture { _dir: dir, config }
}

#[test]
fn missing_artifacts_name_the_producing_stage() {
    let f = fixture();

    // vocab before split: the error must name the split stage.
    let out = citerec(&f.config, &["vocab"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("citerec split"), "stderr: {stderr}");

    // evaluate before anything: names the vocab stage.
    let out = citerec(&f.config, &["evaluate", "--model", "cf"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("citerec vocab"), "stderr: {stderr}");

    // after split+vocab+ingest, evaluating cf names train-cf.
    assert_ok(&citerec(&f.config, &["split"]), "split");
    assert_ok(&citerec(&f.config, &["vocab"]), "vocab");
    assert_ok(&citerec(&f.config, &["ingest"]), "ingest");
    let out = citerec(&f.config, &["evaluate", "--model", "cf"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("citerec train-cf"), "stderr: {stderr}");
}

#[test]
fn end_to_end_recommend_and_evaluate() {
    let f = fixture();
    assert_ok(&citerec(&f.config, &["split"]), "split");
    let vocab_line = assert_ok(&citerec(&f.config, &["vocab"]), "vocab");
    assert!(vocab_line.contains("vocabulary entries="), "line: {vocab_line}");
    assert_ok(&citerec(&f.config, &["ingest"]), "ingest");
    assert_ok(&citerec(&f.config, &["train-cf"]), "train-cf");
    assert_ok(&citerec(&f.config, &["train-context"]), "train-context");

    // Pull two real keys out of the vocabulary artifact.
    let stdout = assert_ok(&citerec(&f.config, &["evaluate", "--model", "cf"]), "evaluate");
    assert!(stdout.contains("recall@1="), "line: {stdout}");
    let report_path = stdout.rsplit(" -> ").next().unwrap().trim();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(report["format"], "citerec.eval-report");
    assert_eq!(report["protocol"], "citation-list");

    let vocab_tsv = Path::new(report_path).parent().unwrap().join("vocab.tsv");
    let vocab_text = std::fs::read_to_string(vocab_tsv).unwrap();
    let keys: Vec<&str> = vocab_text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(2).unwrap())
        .filter(|k| *k != "UNK_CITATION")
        .take(2)
        .collect();
    assert_eq!(keys.len(), 2);

    // One-shot citation-list recommendation prints ranked JSON.
    let out = citerec(
        &f.config,
        &["recommend", "--model", "cf", "--citations", &keys.join(","), "--top-n", "5"],
    );
    let stdout = assert_ok(&out, "recommend cf");
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["model"], "cf");
    let items = parsed["items"].as_array().unwrap();
    assert!(!items.is_empty() && items.len() <= 5);
    for item in items {
        assert!(item["score"].as_f64().unwrap() > 0.0);
        assert_ne!(item["key"].as_str().unwrap(), "UNK_CITATION");
        // The query's own citations are never recommended back.
        assert!(!keys.contains(&item["key"].as_str().unwrap()));
    }

    // Context recommendation from a text snippet on stdin.
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_citerec"))
        .arg("--config")
        .arg(&f.config)
        .args(["recommend", "--model", "context", "--top-n", "3"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"The veteran seeks service connection sigaaa sigaab sigaac for an injury.")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = assert_ok(&out, "recommend context");
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["model"], "context");
    assert!(parsed["items"].as_array().unwrap().len() <= 3);

    // Majority recommendation needs no query at all.
    let out = citerec(&f.config, &["recommend", "--model", "majority", "--top-n", "4"]);
    let stdout = assert_ok(&out, "recommend majority");
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["items"].as_array().unwrap().len(), 4);
}

#[test]
fn export_windows_writes_jsonl_instances() {
    let f = fixture();
    assert_ok(&citerec(&f.config, &["split"]), "split");
    assert_ok(&citerec(&f.config, &["vocab"]), "vocab");
    assert_ok(&citerec(&f.config, &["ingest"]), "ingest");
    let stdout = assert_ok(
        &citerec(
            &f.config,
            &["export-windows", "--split", "train", "--epochs", "2",
              "--context-len", "32", "--forecast-len", "16"],
        ),
        "export-windows",
    );
    let path = stdout.rsplit(" -> ").next().unwrap().trim();
    let text = std::fs::read_to_string(path).unwrap();
    let mut n = 0;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for field in ["doc_id", "offset", "context", "target", "distance", "year", "issue_area", "vlj"] {
            assert!(v.get(field).is_some(), "missing {field}");
        }
        let d = v["distance"].as_u64().unwrap();
        assert!((1..=16).contains(&d));
        n += 1;
    }
    assert!(n > 0);
    assert!(stdout.contains(&format!("instances={n}")));
}

#[test]
fn flag_overrides_rekey_artifacts() {
    let f = fixture();
    assert_ok(&citerec(&f.config, &["split"]), "split");
    // A different min-count changes the config hash, so vocab demands its
    // own split rather than silently reusing the other configuration's.
    let out = citerec(&f.config, &["vocab", "--min-count", "4"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("citerec split"));
}
