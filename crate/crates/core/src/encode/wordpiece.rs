//! Greedy longest-match-first subword tokenizer over a fixed vocabulary
//! (one piece per line; continuations prefixed with `##`). Lowercasing
//! matches the uncased reference encoder.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const UNK: &str = "[UNK]";

const BUNDLED_VOCAB: &str = include_str!("../../data/wordpiece_vocab.txt");
const MAX_CHARS_PER_WORD: usize = 100;

#[derive(Debug, Clone)]
pub struct WordPieceTokenizer {
    vocab: HashSet<String>,
    lowercase: bool,
}

impl Default for WordPieceTokenizer {
    fn default() -> Self {
        Self::from_vocab_text(BUNDLED_VOCAB)
    }
}

impl WordPieceTokenizer {
    pub fn from_vocab_text(text: &str) -> Self {
        WordPieceTokenizer {
            vocab: text
                .lines()
                .map(|l| l.trim_end().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
            lowercase: true,
        }
    }

    /// Load a vocabulary file in the standard one-piece-per-line format.
    pub fn from_vocab_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_vocab_text(&text))
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Whitespace split plus punctuation isolation, lowercased.
    fn basic_tokens(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut current = String::new();
        for ch in text.chars() {
            if ch.is_whitespace() {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
            } else if ch.is_ascii_punctuation() || (!ch.is_alphanumeric() && !ch.is_whitespace()) {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
                out.push(ch.to_string());
            } else if self.lowercase {
                current.extend(ch.to_lowercase());
            } else {
                current.push(ch);
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
        out
    }

    /// Greedy longest-match segmentation of one word into pieces.
    fn wordpiece(&self, word: &str) -> Vec<String> {
        if word.chars().count() > MAX_CHARS_PER_WORD {
            return vec![UNK.to_string()];
        }
        let chars: Vec<char> = word.chars().collect();
        let mut pieces = Vec::new();
        let mut start = 0;
        while start < chars.len() {
            let mut end = chars.len();
            let mut found: Option<String> = None;
            while end > start {
                let sub: String = chars[start..end].iter().collect();
                let candidate = if start == 0 { sub } else { format!("##{sub}") };
                if self.vocab.contains(&candidate) {
                    found = Some(candidate);
                    break;
                }
                end -= 1;
            }
            match found {
                Some(piece) => {
                    pieces.push(piece);
                    start = end;
                }
                None => return vec![UNK.to_string()],
            }
        }
        pieces
    }

    /// Subword tokens of a text, without special tokens.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        self.basic_tokens(text)
            .iter()
            .flat_map(|w| self.wordpiece(w))
            .collect()
    }
}
