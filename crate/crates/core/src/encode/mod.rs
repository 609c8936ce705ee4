//! Text-to-embedding layer.
//!
//! The neural models consume token-level embedding sequences produced by a
//! frozen sentence encoder behind the [`Encoder`] trait; the logistic
//! regression baseline consumes averaged static word vectors. Encoders are
//! selected by an id string (see [`build_encoder`]). The built-in
//! `hash:<dim>` encoder derives each token embedding deterministically from
//! the token, its position, and its segment, so pipelines run offline and
//! reproduce bit-for-bit; any backend honoring this trait (e.g. a real
//! pretrained transformer service) can be swapped in behind the same id
//! mechanism.

mod hash;
pub mod vectors;
pub mod wordpiece;

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use hash::HashEncoder;
pub use vectors::{avg_word_vectors, VectorTable};
pub use wordpiece::WordPieceTokenizer;

/// Hard cap on encoded sequence length.
pub const MAX_TOKENS: usize = 512;

/// A tokenized, truncated input: subword tokens with their segment ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub segments: Vec<u8>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Token-level embeddings, one row per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    pub data: Array2<f64>,
}

impl EmbeddingSequence {
    pub fn time(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Stack sequences along the time axis.
    pub fn concat(parts: &[&EmbeddingSequence]) -> EmbeddingSequence {
        let views: Vec<_> = parts.iter().map(|p| p.data.view()).collect();
        EmbeddingSequence {
            data: ndarray::concatenate(ndarray::Axis(0), &views)
                .expect("sequences share the embedding dimension"),
        }
    }
}

/// Tokenize a single text into `[CLS] tokens [SEP]` and cut everything past
/// `max_tokens` off the end. Empty text yields the classification token
/// alone.
pub fn tokenize_and_truncate(
    tokenizer: &WordPieceTokenizer,
    text: &str,
    max_tokens: usize,
) -> TokenSequence {
    let mut tokens = vec![wordpiece::CLS.to_string()];
    if !text.trim().is_empty() {
        tokens.extend(tokenizer.tokenize(text));
        tokens.push(wordpiece::SEP.to_string());
    }
    tokens.truncate(max_tokens);
    let segments = vec![0; tokens.len()];
    TokenSequence { tokens, segments }
}

/// Pair input: `[CLS] a [SEP] b [SEP]` with segment ids 0/1, truncated from
/// the end.
pub fn tokenize_pair_and_truncate(
    tokenizer: &WordPieceTokenizer,
    original: &str,
    revised: &str,
    max_tokens: usize,
) -> TokenSequence {
    let mut tokens = vec![wordpiece::CLS.to_string()];
    let mut segments = vec![0u8];
    tokens.extend(tokenizer.tokenize(original));
    tokens.push(wordpiece::SEP.to_string());
    segments.resize(tokens.len(), 0);
    tokens.extend(tokenizer.tokenize(revised));
    tokens.push(wordpiece::SEP.to_string());
    segments.resize(tokens.len(), 1);
    tokens.truncate(max_tokens);
    segments.truncate(max_tokens);
    TokenSequence { tokens, segments }
}

/// A frozen sentence encoder. Implementations must be deterministic in
/// inference mode and never emit more than [`MAX_TOKENS`] time steps.
pub trait Encoder: Send + Sync {
    /// Identifier recorded in run manifests.
    fn id(&self) -> &str;

    /// Embedding width.
    fn dim(&self) -> usize;

    fn tokenizer(&self) -> &WordPieceTokenizer;

    /// Encode a revision sentence pair jointly (segment-separated). At most
    /// one side may be empty.
    fn encode_pair(&self, original: &str, revised: &str) -> Result<EmbeddingSequence>;

    /// Encode a single text (context or feedback).
    fn encode_text(&self, text: &str) -> EmbeddingSequence;
}

/// Construct an encoder from its id string. Supported ids:
/// `hash:<dim>` (e.g. `hash:768`), the deterministic offline encoder. An
/// optional vocabulary file replaces the bundled subword vocabulary.
pub fn build_encoder(id: &str, vocab: Option<&Path>) -> Result<Box<dyn Encoder>> {
    let tokenizer = match vocab {
        Some(path) => WordPieceTokenizer::from_vocab_file(path)?,
        None => WordPieceTokenizer::default(),
    };
    if let Some(dim_str) = id.strip_prefix("hash:") {
        let dim: usize = dim_str
            .parse()
            .map_err(|_| Error::UnknownEncoder(id.to_string()))?;
        if dim == 0 {
            return Err(Error::UnknownEncoder(id.to_string()));
        }
        return Ok(Box::new(HashEncoder::new(id.to_string(), dim, tokenizer)));
    }
    Err(Error::UnknownEncoder(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encoder() -> Box<dyn Encoder> {
        build_encoder("hash:32", None).unwrap()
    }

    #[test]
    fn long_text_is_cut_to_the_cap() {
        let tok = WordPieceTokenizer::default();
        let long = "evidence ".repeat(600);
        let seq = tokenize_and_truncate(&tok, &long, MAX_TOKENS);
        assert_eq!(seq.len(), MAX_TOKENS);
        // The suffix is dropped, so the final separator is gone.
        assert_ne!(seq.tokens.last().map(String::as_str), Some(wordpiece::SEP));
    }

    #[test]
    fn short_text_is_unchanged() {
        let tok = WordPieceTokenizer::default();
        let seq = tokenize_and_truncate(&tok, "the evidence supports the claim", MAX_TOKENS);
        assert_eq!(seq.len(), 7);
        assert_eq!(seq.tokens[0], wordpiece::CLS);
        assert_eq!(seq.tokens.last().map(String::as_str), Some(wordpiece::SEP));
    }

    #[test]
    fn boundary_length_is_exact() {
        let tok = WordPieceTokenizer::default();
        // 510 single-piece words + [CLS] + [SEP] = exactly the cap.
        let text = vec!["evidence"; 510].join(" ");
        let seq = tokenize_and_truncate(&tok, &text, MAX_TOKENS);
        assert_eq!(seq.len(), MAX_TOKENS);
        assert_eq!(seq.tokens.last().map(String::as_str), Some(wordpiece::SEP));
    }

    #[test]
    fn empty_text_is_a_single_token() {
        let tok = WordPieceTokenizer::default();
        let seq = tokenize_and_truncate(&tok, "", MAX_TOKENS);
        assert_eq!(seq.tokens, vec![wordpiece::CLS.to_string()]);
        let enc = encoder();
        assert_eq!(enc.encode_text("").time(), 1);
    }

    #[test]
    fn pair_encoding_has_expected_shape() {
        let enc = encoder();
        let seq = enc
            .encode_pair("", "If the plans are going to be achieved in 2025.")
            .unwrap();
        assert_eq!(seq.dim(), 32);
        assert!(seq.time() >= 3);
        assert!(seq.time() <= MAX_TOKENS);
    }

    #[test]
    fn both_sides_empty_is_an_error() {
        let enc = encoder();
        assert!(matches!(enc.encode_pair("", " "), Err(Error::EmptyPair)));
    }

    #[test]
    fn encoding_is_deterministic() {
        let enc = encoder();
        let a = enc.encode_pair("the harvest", "the crop").unwrap();
        let b = enc.encode_pair("the harvest", "the crop").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pair_order_matters() {
        let enc = encoder();
        let ab = enc.encode_pair("the harvest", "the crop").unwrap();
        let ba = enc.encode_pair("the crop", "the harvest").unwrap();
        assert_ne!(ab, ba);
    }

    #[test]
    fn default_dim_is_reference_width() {
        let enc = build_encoder("hash:768", None).unwrap();
        let seq = enc.encode_pair("", "a new sentence").unwrap();
        assert_eq!(seq.dim(), 768);
    }

    #[test]
    fn unknown_ids_are_rejected() {
        assert!(build_encoder("hash:0", None).is_err());
        assert!(build_encoder("bert-base-uncased", None).is_err());
        assert!(build_encoder("hash:abc", None).is_err());
    }
}
