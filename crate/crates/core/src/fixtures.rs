//! Paths to the sample data bundled with the crate, used by tests and docs.

use std::path::PathBuf;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Elementary-profile corpus with one fully annotated essay pair.
pub fn elementary_sample() -> PathBuf {
    fixture_dir().join("elementary_sample.jsonl")
}

/// Elementary-profile corpus exercising context edge cases (deleted and
/// modified revisions next to unchanged rows).
pub fn context_edges() -> PathBuf {
    fixture_dir().join("context_edges.jsonl")
}

/// Flat TSV synonym lexicon.
pub fn synonyms_tsv() -> PathBuf {
    fixture_dir().join("synonyms.tsv")
}

/// Miniature lexicon directory in the dictionary-database layout.
pub fn wordnet_dir() -> PathBuf {
    fixture_dir().join("wordnet")
}

/// Small static word-vector table in the one-word-per-line text format.
pub fn vectors_8d() -> PathBuf {
    fixture_dir().join("vectors_8d.txt")
}
