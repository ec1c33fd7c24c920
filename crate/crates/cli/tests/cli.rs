use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driveaware")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path) -> String {
    let data = dir.join("data");
    ok(&[
        "synth", "--out", p(&data), "--subjects", "3", "--trials", "4", "--task", "attention", "--duration", "4",
        "--separation", "high", "--seed", "5",
    ]);
    p(&data.join("manifest.json")).to_string()
}

#[test]
fn evaluate_is_reproducible_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        ok(&["evaluate", "--manifest", &manifest, "--modality", "fused", "--pca", "6", "--out", p(out)]);
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    assert!(a.with_extension("png").is_file());

    let report_dir = dir.path().join("report");
    ok(&["report", p(&a), "--out-dir", p(&report_dir)]);
    let summary = std::fs::read_to_string(report_dir.join("summary.md")).unwrap();
    assert!(summary.contains("fused"), "{summary}");
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "--task", "hazard", "--modality", "eeg", "--pipeline", "trend", "--pca", "12", "--interval", "0.25",
        "--lstm-hidden", "16,8", "--epochs", "7", "--elm-seed", "3",
    ];
    let mut args = vec!["evaluate", "--manifest", "unused.json", "--out", "unused", "--print-config"];
    args.extend(flags);
    let from_flags = ok(&args);

    let cfg = dir.path().join("eval.json");
    std::fs::write(&cfg, &from_flags).unwrap();
    let from_file = ok(&[
        "evaluate", "--manifest", "unused.json", "--out", "unused", "--print-config", "--config", p(&cfg),
    ]);
    assert_eq!(from_flags, from_file);

    let defaults = ok(&["evaluate", "--manifest", "unused.json", "--out", "unused", "--print-config"]);
    assert_ne!(defaults, from_flags);

    // a flag overrides the file
    let overridden = ok(&[
        "evaluate", "--manifest", "unused.json", "--out", "unused", "--print-config", "--config", p(&cfg), "--epochs",
        "9",
    ]);
    assert_ne!(overridden, from_file);
    assert!(overridden.contains("\"epochs\":9"), "{overridden}");
}

#[test]
fn topomap_train_extract_and_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path());
    let entries: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let trial = entries["trials"][0]["trial_id"].as_str().unwrap();

    let png = dir.path().join("t.png");
    ok(&["topomap", "--manifest", &manifest, "--trial", trial, "--out", p(&png)]);
    assert_eq!(&std::fs::read(&png).unwrap()[1..4], b"PNG");

    let model = dir.path().join("model.damd");
    ok(&["train", "--manifest", &manifest, "--pca", "5", "--out", p(&model)]);
    assert!(std::fs::metadata(&model).unwrap().len() > 0);

    let feats = dir.path().join("features.json");
    let said = ok(&["extract", "--manifest", &manifest, "--out", p(&feats)]);
    assert!(said.contains("12 vectors, 0 excluded"), "{said}");

    let cat = ok(&["catalog", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&cat).unwrap();
    assert!(v.is_array() || v.is_object());
}

#[test]
fn missing_manifest_fails_cleanly() {
    let out = run(&["evaluate", "--manifest", "/nonexistent/manifest.json", "--out", "/tmp/never.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
}
