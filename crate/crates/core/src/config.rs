//! Declarative experiment configuration. The CLI reads this from a TOML
//! file and applies flag overrides; the pipeline consumes the validated
//! struct.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::Profile;
use crate::error::{Error, Result};
use crate::models::{HyperParams, ModelVariant};
use crate::revisions::Purpose;

fn default_variants() -> Vec<ModelVariant> {
    vec![ModelVariant::M]
}

fn default_seed() -> u64 {
    7
}

fn default_folds() -> usize {
    10
}

fn default_augment() -> bool {
    true
}

fn default_encoder() -> String {
    "hash:768".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// JSONL corpus file.
    pub corpus: PathBuf,
    pub profile: Profile,
    pub purpose: Purpose,
    /// Neural variants to evaluate, in report order.
    #[serde(default = "default_variants")]
    pub variants: Vec<ModelVariant>,
    /// Also run the word-vector logistic-regression baseline.
    #[serde(default)]
    pub baseline: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Augment training folds (test folds are never augmented).
    #[serde(default = "default_augment")]
    pub augment: bool,
    /// Synonym lexicon: a TSV file or a dictionary-database directory.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    /// Static word-vector table, required by the baseline.
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    #[serde(default = "default_encoder")]
    pub encoder: String,
    /// Optional subword vocabulary replacing the bundled one.
    #[serde(default)]
    pub encoder_vocab: Option<PathBuf>,
    /// Artifact directory.
    pub out: PathBuf,
    #[serde(default)]
    pub hyper: HyperParams,
    /// Correlate normalized per-student counts instead of raw counts.
    #[serde(default)]
    pub normalize_counts: bool,
    /// Ablation: keep each student's revisions in a single fold.
    #[serde(default)]
    pub group_folds_by_student: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.corpus.exists() {
            return Err(Error::Config(format!(
                "corpus file {} does not exist",
                self.corpus.display()
            )));
        }
        if self.variants.is_empty() && !self.baseline {
            return Err(Error::Config(
                "no variants selected and baseline disabled".to_string(),
            ));
        }
        for variant in &self.variants {
            variant.validate_for(self.profile)?;
        }
        if self.folds < 2 {
            return Err(Error::Config("need at least 2 folds".to_string()));
        }
        if self.augment {
            match &self.lexicon {
                None => {
                    return Err(Error::Config(
                        "augmentation enabled but no lexicon configured".to_string(),
                    ))
                }
                Some(path) if !path.exists() => {
                    return Err(Error::Config(format!(
                        "lexicon {} does not exist",
                        path.display()
                    )))
                }
                _ => {}
            }
        }
        if self.baseline {
            match &self.vectors {
                None => {
                    return Err(Error::Config(
                        "baseline enabled but no vector table configured".to_string(),
                    ))
                }
                Some(path) if !path.exists() => {
                    return Err(Error::Config(format!(
                        "vector table {} does not exist",
                        path.display()
                    )))
                }
                _ => {}
            }
        }
        if let Some(vocab) = &self.encoder_vocab {
            if !vocab.exists() {
                return Err(Error::Config(format!(
                    "encoder vocabulary {} does not exist",
                    vocab.display()
                )));
            }
        }
        Ok(())
    }

    /// Canonical JSON used for the manifest's config hash. The output
    /// directory is excluded: it locates artifacts but does not change the
    /// experiment, and reruns into different directories must fingerprint
    /// identically.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("out");
        }
        serde_json::to_string(&value).expect("config value serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn base_config(dir: &std::path::Path) -> ExperimentConfig {
        ExperimentConfig {
            corpus: fixtures::elementary_sample(),
            profile: Profile::Elementary,
            purpose: Purpose::Reasoning,
            variants: vec![ModelVariant::M],
            baseline: false,
            seed: 7,
            folds: 2,
            augment: false,
            lexicon: None,
            vectors: None,
            encoder: "hash:16".to_string(),
            encoder_vocab: None,
            out: dir.to_path_buf(),
            hyper: HyperParams::default(),
            normalize_counts: false,
            group_folds_by_student: false,
        }
    }

    #[test]
    fn feedback_variant_on_college_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.profile = Profile::College;
        config.variants = vec![ModelVariant::MF];
        let err = config.validate().unwrap_err();
        assert_eq!(err.category(), crate::ErrorCategory::Config);
    }

    #[test]
    fn augment_without_lexicon_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.augment = true;
        assert!(config.validate().is_err());
        config.lexicon = Some(fixtures::synonyms_tsv());
        assert!(config.validate().is_ok());
    }

    #[test]
    fn baseline_requires_vectors() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.baseline = true;
        assert!(config.validate().is_err());
        config.vectors = Some(fixtures::vectors_8d());
        assert!(config.validate().is_ok());
    }

    #[test]
    fn missing_corpus_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.corpus = PathBuf::from("/nonexistent/corpus.jsonl");
        assert!(config.validate().is_err());
    }
}
