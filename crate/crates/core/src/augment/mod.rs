//! Synonym-replacement data augmentation.
//!
//! One random eligible word of a training instance is replaced by up to five
//! synonyms from a lexicon, yielding up to five new instances per source.
//! Eligibility: alphabetic, longer than five characters, not a stop word.
//! Only training folds are ever augmented; the leakage guard in the
//! evaluation module enforces that.

pub mod wordnet;

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs;
use std::ops::Range;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{Provenance, TrainingInstance};
use crate::seeding;

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");

/// Knobs of the augmentation scheme.
#[derive(Debug, Clone)]
pub struct AugmentationPolicy {
    /// Minimum word length in characters (6: words of more than five characters).
    pub min_word_length: usize,
    /// Cap on generated variants per picked word.
    pub max_synonyms_per_word: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for AugmentationPolicy {
    fn default() -> Self {
        AugmentationPolicy {
            min_word_length: 6,
            max_synonyms_per_word: 5,
            stopwords: STOPWORDS_EN
                .lines()
                .map(|w| w.trim().to_string())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }
}

/// Case-insensitive word-to-synonyms map. Multi-word synonyms and
/// self-synonyms are dropped at load; entry order is preserved so the
/// five-synonym cap is deterministic.
#[derive(Debug, Clone, Default)]
pub struct SynonymLexicon {
    map: BTreeMap<String, Vec<String>>,
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record synonyms for a headword, keeping insertion order and skipping
    /// duplicates, multi-word entries, and the headword itself.
    pub fn insert(&mut self, word: &str, synonyms: impl IntoIterator<Item = String>) {
        let key = word.to_lowercase();
        let entry = self.map.entry(key.clone()).or_default();
        for syn in synonyms {
            let syn = syn.trim().to_string();
            if syn.is_empty()
                || syn.contains(['_', ' '])
                || syn.to_lowercase() == key
                || entry.iter().any(|e| e.eq_ignore_ascii_case(&syn))
            {
                continue;
            }
            entry.push(syn);
        }
    }

    pub fn synonyms(&self, word: &str) -> &[String] {
        self.map
            .get(&word.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Flat `word<TAB>syn1,syn2,...` file.
    pub fn from_tsv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lexicon = SynonymLexicon::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, rest) = line.split_once('\t').ok_or_else(|| Error::LexiconFormat {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "expected word<TAB>synonyms".to_string(),
            })?;
            lexicon.insert(word.trim(), rest.split(',').map(str::to_string));
        }
        Ok(lexicon)
    }

    /// Dispatch on path type: a directory is read as a dictionary database,
    /// a file as TSV.
    pub fn load(path: &Path) -> Result<Self> {
        if path.is_dir() {
            wordnet::from_wordnet_dir(path)
        } else {
            Self::from_tsv(path)
        }
    }
}

/// An augmentation candidate inside a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EligibleWord {
    /// Token position counting every whitespace/punctuation-delimited token.
    pub position: usize,
    pub word: String,
    /// Byte range of the token in the sentence.
    pub span: Range<usize>,
}

/// Tokenize into maximal alphanumeric runs, keeping byte spans.
pub fn tokenize_words(sentence: &str) -> Vec<(Range<usize>, &str)> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (idx, ch) in sentence.char_indices() {
        if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some(idx);
            }
        } else if let Some(s) = start.take() {
            tokens.push((s..idx, &sentence[s..idx]));
        }
    }
    if let Some(s) = start {
        tokens.push((s..sentence.len(), &sentence[s..]));
    }
    tokens
}

/// Positions of replaceable words: alphabetic, longer than five characters,
/// and not stop words.
pub fn eligible_words(sentence: &str, policy: &AugmentationPolicy) -> Vec<EligibleWord> {
    tokenize_words(sentence)
        .into_iter()
        .enumerate()
        .filter(|(_, (_, w))| {
            w.chars().count() >= policy.min_word_length
                && w.chars().all(char::is_alphabetic)
                && !policy.stopwords.contains(&w.to_lowercase())
        })
        .map(|(position, (span, w))| EligibleWord {
            position,
            word: w.to_string(),
            span,
        })
        .collect()
}

/// The draft side a revision's augmentation edits: the revised sentence when
/// it exists (added and modified revisions), otherwise the original
/// (deleted revisions).
fn augmentation_side(instance: &TrainingInstance) -> Side {
    if instance.revised.trim().is_empty() {
        Side::Original
    } else {
        Side::Revised
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Original,
    Revised,
}

/// Generate up to `max_synonyms_per_word` variants of one instance by
/// replacing a single seeded-random eligible word with its synonyms.
/// Returns an empty vector when nothing is replaceable.
pub fn augment_instance(
    instance: &TrainingInstance,
    lexicon: &SynonymLexicon,
    policy: &AugmentationPolicy,
    rng_seed: u64,
) -> Vec<TrainingInstance> {
    let side = augmentation_side(instance);
    let text = match side {
        Side::Original => &instance.original,
        Side::Revised => &instance.revised,
    };
    let eligible = eligible_words(text, policy);
    if eligible.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let picked = &eligible[rng.random_range(0..eligible.len())];
    let synonyms = lexicon.synonyms(&picked.word);
    synonyms
        .iter()
        .take(policy.max_synonyms_per_word)
        .enumerate()
        .map(|(k, synonym)| {
            let mut replaced = String::with_capacity(text.len());
            replaced.push_str(&text[..picked.span.start]);
            replaced.push_str(synonym);
            replaced.push_str(&text[picked.span.end..]);
            let mut variant = instance.clone();
            variant.id = format!("{}#a{}", instance.id, k);
            variant.provenance = Provenance::Augmented {
                source_id: instance.id.clone(),
            };
            match side {
                Side::Original => variant.original = replaced,
                Side::Revised => variant.revised = replaced,
            }
            variant
        })
        .collect()
}

/// Augment one training fold: the originals plus every generated variant.
/// Each instance draws its own sub-seed from its id, so the output is
/// independent of instance order.
pub fn augment_training_fold(
    instances: &[TrainingInstance],
    lexicon: &SynonymLexicon,
    policy: &AugmentationPolicy,
    rng_seed: u64,
) -> Vec<TrainingInstance> {
    let mut out = Vec::with_capacity(instances.len());
    for instance in instances {
        out.push(instance.clone());
        let seed = seeding::mix_str(rng_seed, &instance.id);
        out.extend(augment_instance(instance, lexicon, policy, seed));
    }
    out
}
