//! Evaluation report payloads and their JSON/CSV renderings. All map keys
//! and row orders are fixed so identical runs produce byte-identical files.

use serde::{Deserialize, Serialize};

use super::{CvOutcome, ExtrinsicComparison};

/// Intrinsic results for one (profile, purpose) cell across models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrinsicReport {
    pub profile: String,
    pub purpose: String,
    pub folds: usize,
    pub seed: u64,
    pub augmented: bool,
    pub rows: Vec<IntrinsicRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrinsicRow {
    pub model: String,
    pub mean_macro_precision: f64,
    pub mean_macro_recall: f64,
    pub mean_macro_f1: f64,
    pub per_fold: Vec<super::FoldResult>,
}

impl IntrinsicRow {
    pub fn from_outcome(model: &str, outcome: &CvOutcome) -> Self {
        IntrinsicRow {
            model: model.to_string(),
            mean_macro_precision: outcome.mean.macro_precision,
            mean_macro_recall: outcome.mean.macro_recall,
            mean_macro_f1: outcome.mean.macro_f1,
            per_fold: outcome.folds.clone(),
        }
    }
}

impl IntrinsicReport {
    /// Three-decimal summary table, one row per model.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("profile,purpose,model,precision,recall,macro_f1\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.3},{:.3},{:.3}\n",
                self.profile,
                self.purpose,
                row.model,
                row.mean_macro_precision,
                row.mean_macro_recall,
                row.mean_macro_f1
            ));
        }
        out
    }
}

/// Extrinsic results for one (profile, purpose) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtrinsicReport {
    pub profile: String,
    pub purpose: String,
    pub normalized_counts: bool,
    #[serde(flatten)]
    pub comparison: ExtrinsicComparison,
}

impl ExtrinsicReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("profile,purpose,model,label,r,p,significant,consistent_with_gold\n");
        for entry in &self.comparison.entries {
            for (label, cell) in [("desirable", &entry.desirable), ("undesirable", &entry.undesirable)] {
                let (r, p, sig) = match cell {
                    Some(c) => (
                        format!("{:.3}", c.r),
                        format!("{:.4}", c.p),
                        c.significant.to_string(),
                    ),
                    None => (String::new(), String::new(), String::new()),
                };
                let consistent = match entry.consistent_with_gold {
                    Some(v) => v.to_string(),
                    None => String::new(),
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    self.profile, self.purpose, entry.model, label, r, p, sig, consistent
                ));
            }
        }
        out
    }
}
