//! Desirability classifiers: the recurrent model with its context/feedback
//! variants, and the logistic-regression baseline over averaged word
//! vectors.

pub mod logreg;
pub mod nn;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::context::ContextMode;
use crate::corpus::{FeedbackSource, Profile};
use crate::encode::{EmbeddingSequence, Encoder};
use crate::error::{Error, Result};
use crate::revisions::DesirabilityLabel;

pub use logreg::{train_logreg_baseline, FeatureInstance, LogisticRegression};
pub use nn::{build_model, expected_param_count, BiLstmClassifier, ModelDims, TrainHistory};

/// The classifier variants: the bare revision-pair model `m`, plus simple
/// context (`m_sc`), longer context (`m_lc`), feedback (`m_f`), and longer
/// context with feedback (`m_lc_f`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    M,
    MSc,
    MLc,
    MF,
    MLcF,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 5] = [
        ModelVariant::M,
        ModelVariant::MSc,
        ModelVariant::MLc,
        ModelVariant::MF,
        ModelVariant::MLcF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::M => "m",
            ModelVariant::MSc => "m_sc",
            ModelVariant::MLc => "m_lc",
            ModelVariant::MF => "m_f",
            ModelVariant::MLcF => "m_lc_f",
        }
    }

    /// Row label used in result tables.
    pub fn table_label(self) -> &'static str {
        match self {
            ModelVariant::M => "M",
            ModelVariant::MSc => "+SC",
            ModelVariant::MLc => "+LC",
            ModelVariant::MF => "+F",
            ModelVariant::MLcF => "+LC&F",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(ModelVariant::M),
            "m_sc" => Ok(ModelVariant::MSc),
            "m_lc" => Ok(ModelVariant::MLc),
            "m_f" => Ok(ModelVariant::MF),
            "m_lc_f" => Ok(ModelVariant::MLcF),
            other => Err(Error::Config(format!("unknown model variant {other:?}"))),
        }
    }

    pub fn context_mode(self) -> Option<ContextMode> {
        match self {
            ModelVariant::MSc => Some(ContextMode::Sc),
            ModelVariant::MLc | ModelVariant::MLcF => Some(ContextMode::Lc),
            ModelVariant::M | ModelVariant::MF => None,
        }
    }

    pub fn uses_feedback(self) -> bool {
        matches!(self, ModelVariant::MF | ModelVariant::MLcF)
    }

    /// Feedback variants are invalid for profiles without feedback.
    pub fn validate_for(self, profile: Profile) -> Result<()> {
        if self.uses_feedback() && profile.spec().feedback_source == FeedbackSource::None {
            return Err(Error::VariantProfile {
                variant: self.as_str(),
                profile: profile.as_str(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training hyperparameters, defaulting to the published configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub hidden_size: usize,
    /// Dropout on LSTM inputs.
    pub lstm_dropout: f64,
    /// Dropout on the recurrent state.
    pub recurrent_dropout: f64,
    /// Dropout after the dense layer.
    pub dense_dropout: f64,
    /// Optional inverse-frequency class weighting (off by default).
    pub class_weights: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            learning_rate: 1e-3,
            batch_size: 16,
            epochs: 10,
            hidden_size: 64,
            lstm_dropout: 0.1,
            recurrent_dropout: 0.1,
            dense_dropout: 0.2,
            class_weights: false,
        }
    }
}

/// Where an instance came from: the corpus itself, or augmentation of one
/// of its instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Augmented { source_id: String },
}

impl Provenance {
    pub fn source_id(&self) -> Option<&str> {
        match self {
            Provenance::Original => None,
            Provenance::Augmented { source_id } => Some(source_id),
        }
    }
}

/// One classifier input: the revision texts plus whatever the variant
/// consumes (contexts, feedback) and the gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub id: String,
    pub student_id: String,
    /// Original-draft sentence; empty for added revisions.
    pub original: String,
    /// Revised-draft sentence; empty for deleted revisions.
    pub revised: String,
    pub context1: Option<String>,
    pub context2: Option<String>,
    pub feedback: Option<String>,
    pub label: DesirabilityLabel,
    pub provenance: Provenance,
}

/// An instance with its input already encoded for the neural model.
#[derive(Debug, Clone)]
pub struct AssembledInstance {
    pub id: String,
    pub student_id: String,
    pub input: EmbeddingSequence,
    pub label: DesirabilityLabel,
}

/// Encode the segments a variant consumes and concatenate them along the
/// time axis in the fixed order: revision pair, context1, context2,
/// feedback.
pub fn assemble_input(
    instance: &TrainingInstance,
    variant: ModelVariant,
    encoder: &dyn Encoder,
) -> Result<EmbeddingSequence> {
    let pair = encoder.encode_pair(&instance.original, &instance.revised)?;
    let mut parts: Vec<EmbeddingSequence> = vec![pair];
    if variant.context_mode().is_some() {
        let c1 = instance.context1.as_deref().ok_or(Error::MissingInput {
            variant: variant.as_str(),
            what: "context1",
        })?;
        let c2 = instance.context2.as_deref().ok_or(Error::MissingInput {
            variant: variant.as_str(),
            what: "context2",
        })?;
        parts.push(encoder.encode_text(c1));
        parts.push(encoder.encode_text(c2));
    }
    if variant.uses_feedback() {
        let feedback = instance.feedback.as_deref().ok_or(Error::MissingInput {
            variant: variant.as_str(),
            what: "feedback",
        })?;
        parts.push(encoder.encode_text(feedback));
    }
    let views: Vec<&EmbeddingSequence> = parts.iter().collect();
    Ok(EmbeddingSequence::concat(&views))
}

/// Assemble a whole instance list for one variant.
pub fn assemble_dataset(
    instances: &[TrainingInstance],
    variant: ModelVariant,
    encoder: &dyn Encoder,
) -> Result<Vec<AssembledInstance>> {
    instances
        .iter()
        .map(|inst| {
            Ok(AssembledInstance {
                id: inst.id.clone(),
                student_id: inst.student_id.clone(),
                input: assemble_input(inst, variant, encoder)?,
                label: inst.label,
            })
        })
        .collect()
}

/// Sigmoid output binarized at 0.5, desirable on ties.
pub fn predict(model: &BiLstmClassifier, input: &EmbeddingSequence) -> (f64, DesirabilityLabel) {
    let probability = model.predict_proba(input);
    (probability, label_from_probability(probability))
}

pub fn label_from_probability(probability: f64) -> DesirabilityLabel {
    if probability >= 0.5 {
        DesirabilityLabel::Desirable
    } else {
        DesirabilityLabel::Undesirable
    }
}

/// Everything needed to reload and audit a trained model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelManifest {
    pub variant: String,
    pub hyper: HyperParams,
    pub seed: u64,
    pub encoder_id: String,
    pub data_fingerprint: String,
    pub input_dim: usize,
    pub hidden: usize,
    pub param_count: usize,
}

/// Write a trained model as a self-describing directory: a JSON manifest
/// plus the flat little-endian parameter file.
pub fn save_model(dir: &Path, model: &BiLstmClassifier, manifest: &ModelManifest) -> Result<()> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let manifest_json =
        serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), manifest_json).map_err(io_err)?;
    let params = model.flat_params();
    let mut bytes = Vec::with_capacity(params.len() * 8);
    for value in params {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    fs::write(dir.join("weights.bin"), bytes).map_err(io_err)?;
    Ok(())
}

pub fn load_model(dir: &Path) -> Result<(BiLstmClassifier, ModelManifest)> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let manifest_text = fs::read_to_string(dir.join("manifest.json")).map_err(io_err)?;
    let manifest: ModelManifest =
        serde_json::from_str(&manifest_text).map_err(|e| Error::Training(format!(
            "unreadable model manifest in {}: {e}",
            dir.display()
        )))?;
    let bytes = fs::read(dir.join("weights.bin")).map_err(io_err)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Training(format!(
            "weights file in {} is not a whole number of f64 values",
            dir.display()
        )));
    }
    let params: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut model = build_model(
        ModelDims {
            input_dim: manifest.input_dim,
            hidden: manifest.hidden,
        },
        0,
    );
    model.set_flat_params(&params)?;
    Ok((model, manifest))
}
