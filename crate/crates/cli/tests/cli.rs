use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SPEC: &str = r#"{
  "window": "2012-01-01..2012-04-30",
  "seed": 42,
  "communities": [
    {"name": "funny", "docs_per_day": 3},
    {"name": "pics", "docs_per_day": 2},
    {"name": "gaming", "docs_per_day": 2}
  ],
  "background": {"words": 30, "rate": 2, "growth": 2},
  "plants": [
    {"phrase": "y tho", "profile": {"shape": "constant", "rate": 2}},
    {"phrase": "one does not simply", "profile": {"shape": "trapezoid", "start": 20, "rise": 3, "plateau": 30, "fall": 3, "height": 6}},
    {"phrase": "such wow", "profile": {"shape": "proportional", "p": 0.02}, "communities": ["pics", "gaming"]}
  ]
}"#;

fn memeco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memeco"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("spec.json");
    fs::write(&spec, SPEC).unwrap();
    let corpus = dir.join("corpus");
    let out = memeco(&["synth", "--spec", s(&spec), "--out", s(&corpus)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    corpus
}

#[test]
fn synth_scan_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out = dir.path().join("out");
    let scan = memeco(&[
        "scan",
        "--input",
        s(&corpus.join("corpus.ndjson")),
        "--phrases",
        s(&corpus.join("phrases.txt")),
        "--background",
        s(&corpus.join("background.txt")),
        "--out",
        s(&out),
        "--shards",
        "2",
    ]);
    assert!(scan.status.success(), "{}", String::from_utf8_lossy(&scan.stderr));
    assert!(out.join("counts.mec").exists());

    let report = memeco(&["report", "--out", s(&out), "--alpha", "0.01", "--alpha", "0.05"]);
    assert!(report.status.success(), "{}", String::from_utf8_lossy(&report.stderr));
    for name in [
        "attention", "diversity", "lifespans", "active", "trends", "peak_aligned", "velocity_fit",
        "velocity_hist", "entries", "rankings", "rank_shift", "activity",
    ] {
        assert!(out.join(format!("{name}.csv")).exists(), "{name}");
        assert!(out.join(format!("{name}.meta.json")).exists(), "{name}");
    }
    let lifespans = fs::read_to_string(out.join("lifespans.csv")).unwrap();
    let alphas: std::collections::BTreeSet<&str> =
        lifespans.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(alphas.into_iter().collect::<Vec<_>>(), vec!["0.01", "0.05"]);
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("top communities by MRR, 2012"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out = dir.path().join("out");
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        format!(
            "# run settings\ninput = {}\nphrases = {}\nbackground = {}\nout = {}\nalpha = 0.2\nmrr-mode = global\n",
            s(&corpus.join("corpus.ndjson")),
            s(&corpus.join("phrases.txt")),
            s(&corpus.join("background.txt")),
            s(&out),
        ),
    )
    .unwrap();
    assert!(memeco(&["scan", "--config", s(&config)]).status.success());
    let m = memeco(&["metrics", "--config", s(&config), "--alpha", "0.02"]);
    assert!(m.status.success(), "{}", String::from_utf8_lossy(&m.stderr));
    let lifespans = fs::read_to_string(out.join("lifespans.csv")).unwrap();
    assert!(lifespans.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0.02")));
}

#[test]
fn missing_phrase_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let missing = dir.path().join("no_such_phrases.txt");
    let out = memeco(&["scan", "--input", s(&corpus), "--phrases", s(&missing), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_phrases.txt"));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(memeco(&["metrics", "--count-mode", "sometimes"]).status.code(), Some(2));
    assert_eq!(memeco(&["metrics", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(memeco(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn stale_cache_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("old.mec");
    fs::write(&cache, b"MEC0rest").unwrap();
    let out = memeco(&["metrics", "--cache", s(&cache), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("re-scan required"));
}

#[test]
fn invalid_spec_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, SPEC.replace("\"p\": 0.02", "\"p\": 2.0")).unwrap();
    let out = memeco(&["synth", "--spec", s(&spec), "--out", s(&dir.path().join("c"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plants[2].profile.p"));
}
