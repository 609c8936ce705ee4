//! End-to-end tests of the `revclass` binary: exit codes, artifact output,
//! and rerun determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use revclass_core::corpus::{save_corpus, Profile};
use revclass_core::{fixtures, synth};

fn revclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(path: PathBuf) -> String {
    path.to_str().unwrap().to_string()
}

fn write_synth(dir: &Path, profile: Profile, students: usize) -> String {
    let path = dir.join("synth.jsonl");
    save_corpus(&path, &synth::synth_corpus(profile, students, 99)).unwrap();
    fixture(path)
}

#[test]
fn validate_reports_fixture_contents() {
    let out = revclass(&[
        "validate",
        "--corpus",
        &fixture(fixtures::elementary_sample()),
        "--profile",
        "elementary",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("1 essay pairs"), "{stdout}");
    assert!(stdout.contains("3 evidence/reasoning revisions"), "{stdout}");
}

#[test]
fn missing_corpus_is_a_data_error() {
    let out = revclass(&[
        "validate",
        "--corpus",
        "/nonexistent/corpus.jsonl",
        "--profile",
        "elementary",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_profile_is_a_config_error() {
    let out = revclass(&[
        "validate",
        "--corpus",
        &fixture(fixtures::elementary_sample()),
        "--profile",
        "kindergarten",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extract_context_rows_are_one_based() {
    let out = revclass(&[
        "extract-context",
        "--corpus",
        &fixture(fixtures::elementary_sample()),
        "--profile",
        "elementary",
        "--mode",
        "lc",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<u64> = stdout
        .lines()
        .map(|line| {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            value["row"].as_u64().unwrap()
        })
        .collect();
    assert_eq!(rows, vec![3, 5, 9]);
}

#[test]
fn extract_revisions_emits_labels() {
    let out = revclass(&[
        "extract-revisions",
        "--corpus",
        &fixture(fixtures::elementary_sample()),
        "--profile",
        "elementary",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let labels: Vec<String> = stdout
        .lines()
        .map(|line| {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            value["label"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(labels, vec!["desirable", "desirable", "undesirable"]);
}

#[test]
fn feedback_variant_on_college_fails_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_synth(dir.path(), Profile::College, 6);
    let out_dir = dir.path().join("out");
    let out = revclass(&[
        "run",
        "--corpus",
        &corpus,
        "--profile",
        "college",
        "--purpose",
        "reasoning",
        "--variant",
        "m_f",
        "--out",
        out_dir.to_str().unwrap(),
        "--no-augment",
        "--encoder",
        "hash:16",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    // Validation aborts the run before any artifact is written.
    assert!(!out_dir.exists());
}

#[test]
fn unknown_variant_is_a_config_error() {
    let out = revclass(&[
        "run",
        "--corpus",
        &fixture(fixtures::elementary_sample()),
        "--profile",
        "elementary",
        "--purpose",
        "reasoning",
        "--variant",
        "m_xl",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_from_config_file_is_rerun_identical() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_synth(dir.path(), Profile::Elementary, 12);
    let out_dir = dir.path().join("artifacts");
    let config_path = dir.path().join("experiment.toml");
    let config = format!(
        r#"
corpus = "{corpus}"
profile = "elementary"
purpose = "reasoning"
variants = ["m"]
seed = 3
folds = 3
augment = true
lexicon = "{lexicon}"
encoder = "hash:16"
out = "{out}"

[hyper]
epochs = 1
hidden_size = 4
"#,
        corpus = corpus,
        lexicon = fixture(fixtures::synonyms_tsv()),
        out = out_dir.to_str().unwrap(),
    );
    std::fs::write(&config_path, config).unwrap();

    let first = revclass(&["run", "--config", config_path.to_str().unwrap()]);
    assert!(first.status.success(), "{first:?}");
    let read_all = || -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let path = e.unwrap().path();
                (
                    path.file_name().unwrap().to_str().unwrap().to_string(),
                    std::fs::read(&path).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };
    let before = read_all();
    assert!(before.iter().any(|(name, _)| name == "intrinsic.json"));

    // The manifest records the effective hyperparameters and seeds.
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["hyper"]["learning_rate"].as_f64(), Some(1e-3));
    assert_eq!(manifest["hyper"]["batch_size"].as_u64(), Some(16));
    assert_eq!(manifest["seed"].as_u64(), Some(3));
    assert!(manifest["config_hash"].as_str().unwrap().len() == 64);

    let second = revclass(&["run", "--config", config_path.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(before, read_all(), "rerun artifacts differ");
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_synth(dir.path(), Profile::Elementary, 8);
    let out_dir = dir.path().join("flagged");
    let config_path = dir.path().join("experiment.toml");
    let config = format!(
        r#"
corpus = "{corpus}"
profile = "elementary"
purpose = "evidence"
variants = ["m"]
seed = 3
folds = 3
augment = true
lexicon = "{lexicon}"
encoder = "hash:16"
out = "{out}"

[hyper]
epochs = 1
hidden_size = 4
"#,
        corpus = corpus,
        lexicon = fixture(fixtures::synonyms_tsv()),
        out = out_dir.to_str().unwrap(),
    );
    std::fs::write(&config_path, config).unwrap();
    let out = revclass(&[
        "eval-intrinsic",
        "--config",
        config_path.to_str().unwrap(),
        "--purpose",
        "reasoning",
        "--no-augment",
    ]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("elementary,reasoning,m"), "{stdout}");
}
