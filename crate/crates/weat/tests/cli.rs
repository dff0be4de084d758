mod support;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use weat::results::read_records;
use weat::store::save_store;

use support::{fixture, sample_suite_dir, synthetic_store, workspace_root};

fn weat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weat")).args(args).output().expect("spawn weat")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn collect(suite: &Path) -> Vec<String> {
    let out = weat(&["collect-texts", p(suite)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect()
}

fn store_file(dir: &Path, model: &str, texts: &[String]) -> PathBuf {
    let path = dir.join(format!("{model}.jsonl"));
    save_store(&synthetic_store(model, texts, 12), &path).unwrap();
    path
}

fn write_test(dir: &Path, name: &str, id: &str) {
    let body = format!(
        r#"{{"id": "{id}", "targ1": {{"category": "X", "examples": ["a1", "a2"]}}, "targ2": {{"category": "Y", "examples": ["b1", "b2"]}}, "attr1": {{"category": "A", "examples": ["c1"]}}, "attr2": {{"category": "B", "examples": ["d1"]}}}}"#
    );
    fs::write(dir.join(name), body).unwrap();
}

#[test]
fn validate_sample_suite() {
    let out = weat(&["validate", p(&sample_suite_dir())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("2 test(s), 0 error(s), 0 warning(s)"));
}

#[test]
fn validate_reports_duplicate_ids_with_both_files() {
    let dir = TempDir::new().unwrap();
    write_test(dir.path(), "one.json", "same");
    write_test(dir.path(), "two.json", "same");
    let out = weat(&["validate", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("one.json") && err.contains("two.json"), "{err}");
}

#[test]
fn validate_empty_directory() {
    let dir = TempDir::new().unwrap();
    let out = weat(&["validate", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no tests found"));
}

#[test]
fn validate_published_layout() {
    let out = weat(&["validate", p(&fixture("sent_bias_layout"))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("3 test(s), 0 error(s)"));
}

#[test]
fn collect_texts_is_stable_and_unique() {
    let suite = sample_suite_dir();
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for f in [&a, &b] {
        let out = weat(&["collect-texts", p(&suite), "--out", p(f)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let lines: Vec<&str> = std::str::from_utf8(&bytes).unwrap().lines().collect();
    // 32 words plus 96 sentences, no overlap between the two tests
    let unique: std::collections::BTreeSet<_> = lines.iter().collect();
    assert_eq!(unique.len(), lines.len());
    assert_eq!(lines.len(), 32 + 96);
    assert_eq!(lines[0], "Mustafa");
}

#[test]
fn collect_texts_rejects_missing_output_directory() {
    let dir = TempDir::new().unwrap();
    let out = weat(&["collect-texts", p(&sample_suite_dir()), "--out", p(&dir.path().join("no/such/file"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_report_round_trip() {
    let suite = sample_suite_dir();
    let dir = TempDir::new().unwrap();
    let texts = collect(&suite);
    let m1 = store_file(dir.path(), "model-a", &texts);
    let m2 = store_file(dir.path(), "model-b", &texts);
    let results = dir.path().join("results.jsonl");
    let out = weat(&[
        "run",
        p(&suite),
        "--embeddings",
        p(&m1),
        p(&m2),
        "--mc-samples",
        "2000",
        "--out",
        p(&results),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("tests: 2, models: 2, records: 4, failures: 0"));

    let records = read_records(std::io::BufReader::new(fs::File::open(&results).unwrap())).unwrap();
    assert_eq!(records.len(), 4);
    assert_eq!(records[0].test_id, "weat6");
    assert_eq!(records[0].model_id, "model-a");
    assert_eq!(records[1].model_id, "model-b");
    assert_eq!(records[2].test_id, "weat6_sent");
    let first = records[0].result.as_ref().unwrap();
    assert_eq!(first.count, 12870);
    assert_eq!(first.method.as_str(), "exact");
    let sent = records[2].result.as_ref().unwrap();
    assert_eq!(sent.method.as_str(), "monte_carlo");
    assert_eq!(sent.count, 2000);

    let csv = weat(&["report", p(&results), "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let csv = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(csv.lines().count(), 5);
    for line in csv.lines() {
        assert_eq!(line.split(',').count(), 14, "{line}");
    }

    let heat = weat(&["report", p(&results), "--format", "heatmap", "--value", "d"]);
    let heat = String::from_utf8(heat.stdout).unwrap();
    let rows: Vec<&str> = heat.lines().collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], "model_id,weat6,weat6_sent");

    let md = weat(&["report", p(&results), "--format", "markdown"]);
    let md = String::from_utf8(md.stdout).unwrap();
    assert!(md.contains("| weat6 | word | model-a | 8/8/8/8 |"));
    assert!(md.contains("Methodology:"));
}

#[test]
fn run_is_byte_identical_across_reruns_and_workers() {
    let suite = sample_suite_dir();
    let dir = TempDir::new().unwrap();
    let store = store_file(dir.path(), "m", &collect(&suite));
    let mut outputs = Vec::new();
    for workers in ["1", "4", "4"] {
        let out = weat(&["run", p(&suite), "--embeddings", p(&store), "--mc-samples", "1000", "--workers", workers]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        outputs.push(out.stdout);
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);

    let other = weat(&["run", p(&suite), "--embeddings", p(&store), "--mc-samples", "1000", "--seed", "7"]);
    assert_ne!(other.stdout, outputs[0], "a different seed must change the Monte-Carlo records");
}

#[test]
fn run_names_missing_texts() {
    let suite = sample_suite_dir();
    let dir = TempDir::new().unwrap();
    let texts: Vec<String> = collect(&suite).into_iter().filter(|t| t != "Zeynep").collect();
    let store = store_file(dir.path(), "partial", &texts);
    let out = weat(&["run", p(&suite), "--embeddings", p(&store)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("Zeynep") && err.contains("partial"), "{err}");
}

#[test]
fn run_records_unequal_targets_as_failures() {
    let dir = TempDir::new().unwrap();
    let suite = dir.path().join("suite");
    fs::create_dir(&suite).unwrap();
    fs::write(
        suite.join("uneven.json"),
        r#"{"targ1": {"category": "X", "examples": ["a1", "a2", "a3"]}, "targ2": {"category": "Y", "examples": ["b1", "b2"]}, "attr1": {"category": "A", "examples": ["c1"]}, "attr2": {"category": "B", "examples": ["d1"]}}"#,
    )
    .unwrap();
    let store = store_file(dir.path(), "m", &collect(&suite));
    let results = dir.path().join("r.jsonl");

    let out = weat(&["run", p(&suite), "--embeddings", p(&store), "--out", p(&results)]);
    assert_eq!(out.status.code(), Some(1));
    let records = read_records(std::io::BufReader::new(fs::File::open(&results).unwrap())).unwrap();
    assert!(records[0].is_failure());

    let out = weat(&["run", p(&suite), "--embeddings", p(&store), "--equal-size-policy", "subsample"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn report_rejects_unknown_format() {
    let dir = TempDir::new().unwrap();
    let results = dir.path().join("r.jsonl");
    fs::write(&results, "").unwrap();
    let out = weat(&["report", p(&results), "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn derive_reproduces_bundled_sentence_test() {
    let root = workspace_root();
    let out = weat(&[
        "derive",
        p(&root.join("data/sample-suite/weat6.jsonl")),
        "--target-templates",
        p(&root.join("data/templates/targets.json")),
        "--attribute-templates",
        p(&root.join("data/templates/attributes.json")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(out.stdout, fs::read(root.join("data/sample-suite/weat6_sent.jsonl")).unwrap());
}

#[test]
fn derive_uncased_and_argument_checks() {
    let root = workspace_root();
    let test = root.join("data/sample-suite/weat6.jsonl");
    let out = weat(&["derive", p(&test), "--uncased"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"weat6_uncased\""));
    assert!(text.contains("\"ayşe\""));

    assert_eq!(weat(&["derive", p(&test)]).status.code(), Some(1));
    let half = weat(&["derive", p(&test), "--target-templates", p(&root.join("data/templates/targets.json"))]);
    assert_eq!(half.status.code(), Some(2));
}
