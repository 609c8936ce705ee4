//! Error types shared across the pipeline.

use std::path::PathBuf;
use thiserror::Error;

/// Coarse failure family, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad experiment configuration (unknown variant, incompatible profile, missing path).
    Config,
    /// Corpus, lexicon, or vector-table problems.
    Data,
    /// Training or inference failures.
    Training,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {source}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("corpus validation for student {student_id}: {message}")]
    CorpusValidation { student_id: String, message: String },

    #[error("student {student_id}: {which} score required by profile is missing")]
    MissingScore {
        student_id: String,
        which: &'static str,
    },

    #[error("student {student_id}: improvement {value} outside the profile range")]
    ImprovementOutOfRange { student_id: String, value: i64 },

    #[error("student {student_id} row {row}: {message}")]
    RevisionAnnotation {
        student_id: String,
        row: usize,
        message: String,
    },

    #[error("unknown revision code {0:?}")]
    UnknownCode(String),

    #[error("{path}:{line}: bad lexicon entry: {message}")]
    LexiconFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: bad vector-table entry: {message}")]
    VectorTableFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown encoder id {0:?}")]
    UnknownEncoder(String),

    #[error("both sides of a revision pair are empty")]
    EmptyPair,

    #[error("variant {variant} requires {what}, which is not present")]
    MissingInput {
        variant: &'static str,
        what: &'static str,
    },

    #[error("variant {variant} is not valid for profile {profile}")]
    VariantProfile {
        variant: &'static str,
        profile: &'static str,
    },

    #[error("training set contains a single class; cannot fit a binary classifier")]
    SingleClass,

    #[error("label vectors differ in length: gold {gold}, predicted {pred}")]
    LengthMismatch { gold: usize, pred: usize },

    #[error("need at least {need} instances, have {have}")]
    TooFewInstances { have: usize, need: usize },

    #[error("{side} vector has zero variance; correlation is undefined")]
    ZeroVariance { side: &'static str },

    #[error("training: {0}")]
    Training(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Config(_) | VariantProfile { .. } | UnknownEncoder(_) => ErrorCategory::Config,
            Io { .. }
            | MalformedRecord { .. }
            | CorpusValidation { .. }
            | MissingScore { .. }
            | ImprovementOutOfRange { .. }
            | RevisionAnnotation { .. }
            | UnknownCode(_)
            | LexiconFormat { .. }
            | VectorTableFormat { .. }
            | LengthMismatch { .. }
            | TooFewInstances { .. }
            | ZeroVariance { .. } => ErrorCategory::Data,
            EmptyPair | MissingInput { .. } | SingleClass | Training(_) => ErrorCategory::Training,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
