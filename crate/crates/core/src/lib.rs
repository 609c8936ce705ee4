//! Classification of desirable evidence and reasoning revisions between
//! paired drafts of student argumentative essays.
//!
//! The library covers the full experiment pipeline: corpus loading, revision
//! extraction and labeling, context extraction around each revision, synonym
//! data augmentation, text encoding, a recurrent classifier plus a logistic
//! regression baseline, and intrinsic / extrinsic evaluation.

pub mod augment;
pub mod config;
pub mod context;
pub mod corpus;
pub mod encode;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod models;
pub mod pipeline;
pub mod revisions;
pub mod seeding;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
