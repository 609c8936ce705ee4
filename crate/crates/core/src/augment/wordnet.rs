//! Loader for lexicon directories in the Princeton dictionary-database
//! layout. Only the `data.*` files are needed: every lemma in a synset is a
//! synonym of every other lemma in the same synset. Collocations (lemmas
//! with underscores) are skipped so replacements stay single-token.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::SynonymLexicon;

const DATA_FILES: [&str; 4] = ["data.noun", "data.verb", "data.adj", "data.adv"];

/// Strip the adjective syntactic marker, e.g. `beautiful(ip)` -> `beautiful`.
fn strip_marker(lemma: &str) -> &str {
    match lemma.find('(') {
        Some(idx) => &lemma[..idx],
        None => lemma,
    }
}

pub fn from_wordnet_dir(dir: &Path) -> Result<SynonymLexicon> {
    let mut lexicon = SynonymLexicon::new();
    let mut found_any = false;
    for name in DATA_FILES {
        let path = dir.join(name);
        if !path.exists() {
            continue;
        }
        found_any = true;
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        for (idx, line) in text.lines().enumerate() {
            // License/header lines start with whitespace.
            if line.starts_with(' ') || line.trim().is_empty() {
                continue;
            }
            let words = parse_synset_words(line).ok_or_else(|| Error::LexiconFormat {
                path: path.clone(),
                line: idx + 1,
                message: "unparseable synset record".to_string(),
            })?;
            let words: Vec<String> = words
                .into_iter()
                .map(|w| strip_marker(&w).to_lowercase())
                .filter(|w| !w.is_empty() && !w.contains('_'))
                .collect();
            for word in &words {
                lexicon.insert(word, words.iter().filter(|w| *w != word).cloned());
            }
        }
    }
    if !found_any {
        return Err(Error::LexiconFormat {
            path: dir.to_path_buf(),
            line: 0,
            message: "no data.* files in lexicon directory".to_string(),
        });
    }
    Ok(lexicon)
}

/// Pull the lemma list out of one synset record:
/// `offset lex_filenum ss_type w_cnt (word lex_id)+ ...`.
fn parse_synset_words(line: &str) -> Option<Vec<String>> {
    let mut tokens = line.split_whitespace();
    let _offset = tokens.next()?;
    let _lex_filenum = tokens.next()?;
    let _ss_type = tokens.next()?;
    let w_cnt = usize::from_str_radix(tokens.next()?, 16).ok()?;
    if w_cnt == 0 {
        return None;
    }
    let mut words = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        words.push(tokens.next()?.to_string());
        let _lex_id = tokens.next()?;
    }
    Some(words)
}
