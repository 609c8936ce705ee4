//! Deterministic offline encoder. Each time step is the sum of a pseudo-
//! random token vector (a fixed function of the token string), a sinusoidal
//! position component, and a segment component, which makes the output
//! contextual in position and segment while staying reproducible across
//! machines and runs.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seeding;

use super::{
    tokenize_and_truncate, tokenize_pair_and_truncate, EmbeddingSequence, Encoder, TokenSequence,
    WordPieceTokenizer, MAX_TOKENS,
};

const TOKEN_SALT: u64 = 0x7265_7663_6c73_0001;
const SEGMENT_SALT: u64 = 0x7265_7663_6c73_0002;
const POSITION_SCALE: f64 = 0.1;
const SEGMENT_SCALE: f64 = 0.1;

pub struct HashEncoder {
    id: String,
    dim: usize,
    tokenizer: WordPieceTokenizer,
}

impl HashEncoder {
    pub fn new(id: String, dim: usize, tokenizer: WordPieceTokenizer) -> Self {
        HashEncoder { id, dim, tokenizer }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let seed = seeding::mix(TOKEN_SALT, seeding::fnv1a_64(token.as_bytes()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn segment_vector(&self, segment: u8) -> Vec<f64> {
        let seed = seeding::mix(SEGMENT_SALT, u64::from(segment));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.dim)
            .map(|_| SEGMENT_SCALE * rng.random_range(-1.0..1.0))
            .collect()
    }

    fn embed(&self, sequence: &TokenSequence) -> EmbeddingSequence {
        let time = sequence.len();
        let mut data = Array2::zeros((time, self.dim));
        for (t, (token, segment)) in sequence
            .tokens
            .iter()
            .zip(&sequence.segments)
            .enumerate()
        {
            let tok = self.token_vector(token);
            let seg = self.segment_vector(*segment);
            for k in 0..self.dim {
                data[(t, k)] = tok[k] + seg[k] + POSITION_SCALE * positional(t, k, self.dim);
            }
        }
        EmbeddingSequence { data }
    }
}

/// Interleaved sine/cosine position code.
fn positional(t: usize, k: usize, dim: usize) -> f64 {
    let pair = (k / 2) as f64;
    let rate = (10_000f64).powf(2.0 * pair / dim as f64);
    let angle = t as f64 / rate;
    if k % 2 == 0 {
        angle.sin()
    } else {
        angle.cos()
    }
}

impl Encoder for HashEncoder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn tokenizer(&self) -> &WordPieceTokenizer {
        &self.tokenizer
    }

    fn encode_pair(&self, original: &str, revised: &str) -> Result<EmbeddingSequence> {
        if original.trim().is_empty() && revised.trim().is_empty() {
            return Err(Error::EmptyPair);
        }
        let seq = tokenize_pair_and_truncate(&self.tokenizer, original, revised, MAX_TOKENS);
        Ok(self.embed(&seq))
    }

    fn encode_text(&self, text: &str) -> EmbeddingSequence {
        let seq = tokenize_and_truncate(&self.tokenizer, text, MAX_TOKENS);
        self.embed(&seq)
    }
}
