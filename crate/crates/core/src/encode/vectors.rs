//! Static word-vector table and averaged features for the baseline
//! classifier. The file format is the common whitespace-separated text
//! layout: one word followed by its vector components per line.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::augment::tokenize_words;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct VectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl VectorTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut dim = 0;
        let mut vectors = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().ok_or_else(|| Error::VectorTableFormat {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "empty entry".to_string(),
            })?;
            let values: std::result::Result<Vec<f64>, _> =
                parts.map(str::parse::<f64>).collect();
            let values = values.map_err(|e| Error::VectorTableFormat {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            if values.is_empty() {
                return Err(Error::VectorTableFormat {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "no vector components".to_string(),
                });
            }
            if dim == 0 {
                dim = values.len();
            } else if values.len() != dim {
                return Err(Error::VectorTableFormat {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("expected {dim} components, found {}", values.len()),
                });
            }
            vectors.insert(word.to_lowercase(), values);
        }
        if vectors.is_empty() {
            return Err(Error::VectorTableFormat {
                path: path.to_path_buf(),
                line: 0,
                message: "empty vector table".to_string(),
            });
        }
        Ok(VectorTable { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// Mean of in-vocabulary token vectors; the zero vector when no token
    /// is covered.
    pub fn average(&self, text: &str) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        let mut count = 0usize;
        for (_, word) in tokenize_words(text) {
            if let Some(vec) = self.get(word) {
                for (s, v) in sum.iter_mut().zip(vec) {
                    *s += v;
                }
                count += 1;
            }
        }
        if count > 0 {
            for s in &mut sum {
                *s /= count as f64;
            }
        }
        sum
    }
}

/// Baseline features for a revision pair: the per-side vector averages
/// concatenated, length `2 * dim`.
pub fn avg_word_vectors(original: &str, revised: &str, table: &VectorTable) -> Vec<f64> {
    let mut features = table.average(original);
    features.extend(table.average(revised));
    features
}
