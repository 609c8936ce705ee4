//! Corpus loading and validation.
//!
//! A corpus is a JSONL file with one essay pair per line: two sentence-segmented
//! drafts, a manual sentence alignment, revision annotations keyed by alignment
//! row, feedback messages, and holistic scores. Three corpus profiles are
//! supported (elementary / high-school / college); each fixes which drafts are
//! paired, where feedback comes from, and the legal score ranges.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three corpus profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Elementary,
    HighSchool,
    College,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Elementary => "elementary",
            Profile::HighSchool => "high_school",
            Profile::College => "college",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "elementary" => Ok(Profile::Elementary),
            "high_school" | "high-school" => Ok(Profile::HighSchool),
            "college" => Ok(Profile::College),
            other => Err(Error::Config(format!("unknown profile {other:?}"))),
        }
    }

    /// Static profile description (draft pairing, feedback source, ranges).
    pub fn spec(self) -> &'static CorpusProfile {
        match self {
            Profile::Elementary => &ELEMENTARY,
            Profile::HighSchool => &HIGH_SCHOOL,
            Profile::College => &COLLEGE,
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the feedback students received came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackSource {
    Awe,
    Peer,
    None,
}

/// Legal range of per-essay improvement scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImprovementRange {
    /// Inclusive integer interval.
    Inclusive { lo: i64, hi: i64 },
    /// Exactly -1 or +1.
    Binary,
}

impl ImprovementRange {
    pub fn contains(&self, v: i64) -> bool {
        match *self {
            ImprovementRange::Inclusive { lo, hi } => lo <= v && v <= hi,
            ImprovementRange::Binary => v == -1 || v == 1,
        }
    }
}

/// Per-profile constants: which drafts are paired, feedback source, and
/// the legal score / improvement ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusProfile {
    pub name: Profile,
    pub draft_pair: (u8, u8),
    pub feedback_source: FeedbackSource,
    pub score_range: (i64, i64),
    pub improvement_range: ImprovementRange,
}

static ELEMENTARY: CorpusProfile = CorpusProfile {
    name: Profile::Elementary,
    draft_pair: (1, 2),
    feedback_source: FeedbackSource::Awe,
    score_range: (1, 4),
    improvement_range: ImprovementRange::Inclusive { lo: 0, hi: 3 },
};

static HIGH_SCHOOL: CorpusProfile = CorpusProfile {
    name: Profile::HighSchool,
    draft_pair: (1, 2),
    feedback_source: FeedbackSource::Peer,
    score_range: (0, 5),
    improvement_range: ImprovementRange::Inclusive { lo: -2, hi: 3 },
};

static COLLEGE: CorpusProfile = CorpusProfile {
    name: Profile::College,
    draft_pair: (2, 3),
    feedback_source: FeedbackSource::None,
    score_range: (15, 33),
    improvement_range: ImprovementRange::Binary,
};

/// Which writing dimension a feedback message addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackDimension {
    Evidence,
    Reasoning,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackOrigin {
    AweCatalog,
    PeerFreeform,
}

/// One feedback message a student received before revising.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackMessage {
    pub text: String,
    pub dimension: FeedbackDimension,
    pub origin: FeedbackOrigin,
}

/// One row of the manual sentence alignment. Serialized as a two-element
/// array `[index_a, index_b]`; a missing side is `null`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(Option<usize>, Option<usize>)", into = "(Option<usize>, Option<usize>)")]
pub struct AlignmentRow {
    pub index_a: Option<usize>,
    pub index_b: Option<usize>,
}

impl From<(Option<usize>, Option<usize>)> for AlignmentRow {
    fn from((index_a, index_b): (Option<usize>, Option<usize>)) -> Self {
        AlignmentRow { index_a, index_b }
    }
}

impl From<AlignmentRow> for (Option<usize>, Option<usize>) {
    fn from(r: AlignmentRow) -> Self {
        (r.index_a, r.index_b)
    }
}

/// The manual sentence alignment between the two drafts, ordered by
/// document position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct AlignmentMap {
    pub rows: Vec<AlignmentRow>,
}

impl AlignmentMap {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Purpose tag of a revision annotation. Only evidence and reasoning take
/// part in classification; every other purpose string is carried through
/// untouched and dropped at extraction time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum PurposeTag {
    Evidence,
    Reasoning,
    Other(String),
}

impl From<String> for PurposeTag {
    fn from(s: String) -> Self {
        match s.as_str() {
            "evidence" => PurposeTag::Evidence,
            "reasoning" => PurposeTag::Reasoning,
            _ => PurposeTag::Other(s),
        }
    }
}

impl From<PurposeTag> for String {
    fn from(p: PurposeTag) -> Self {
        match p {
            PurposeTag::Evidence => "evidence".to_string(),
            PurposeTag::Reasoning => "reasoning".to_string(),
            PurposeTag::Other(s) => s,
        }
    }
}

/// A gold (purpose, code) annotation attached to one alignment row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionAnnotation {
    pub row: usize,
    pub purpose: PurposeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
}

/// Two drafts of one student's essay plus alignment, annotations, feedback,
/// and scores. Immutable after load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssayPair {
    pub student_id: String,
    pub profile: Profile,
    pub draft_a: Vec<String>,
    pub draft_b: Vec<String>,
    pub alignment: AlignmentMap,
    pub feedback: Vec<FeedbackMessage>,
    pub score_a: Option<i64>,
    pub score_b: Option<i64>,
    pub improvement: Option<i64>,
    #[serde(default)]
    pub revisions: Vec<RevisionAnnotation>,
}

impl EssayPair {
    /// All retained feedback text joined into one message, in file order.
    /// `None` when the pair carries no feedback.
    pub fn feedback_text(&self) -> Option<String> {
        if self.feedback.is_empty() {
            return None;
        }
        let joined = self
            .feedback
            .iter()
            .map(|m| m.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        Some(joined)
    }
}

/// Load and validate a JSONL corpus file for one profile.
///
/// High-school feedback is reduced to evidence-dimension messages at load;
/// college pairs must carry no feedback at all.
pub fn load_corpus(path: &Path, profile: Profile) -> Result<Vec<EssayPair>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut pairs = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut pair: EssayPair =
            serde_json::from_str(line).map_err(|source| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                source,
            })?;
        if pair.profile != profile {
            return Err(Error::CorpusValidation {
                student_id: pair.student_id.clone(),
                message: format!(
                    "record profile {} does not match requested profile {}",
                    pair.profile, profile
                ),
            });
        }
        if !seen_ids.insert(pair.student_id.clone()) {
            return Err(Error::CorpusValidation {
                student_id: pair.student_id.clone(),
                message: "duplicate student_id".to_string(),
            });
        }
        validate_pair(&mut pair)?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Serialize a corpus back to canonical JSONL (one pair per line, field
/// order normalized).
pub fn corpus_to_jsonl(pairs: &[EssayPair]) -> String {
    let mut out = String::new();
    for pair in pairs {
        // EssayPair serialization cannot fail: all fields are plain data.
        out.push_str(&serde_json::to_string(pair).expect("essay pair serializes"));
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: &Path, pairs: &[EssayPair]) -> Result<()> {
    fs::write(path, corpus_to_jsonl(pairs)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn validate_pair(pair: &mut EssayPair) -> Result<()> {
    let id = pair.student_id.clone();
    let err = |message: String| Error::CorpusValidation {
        student_id: id.clone(),
        message,
    };

    // Alignment: every draft sentence appears in exactly one row, rows are
    // ordered by document position, and no row is empty on both sides.
    let mut seen_a = vec![false; pair.draft_a.len()];
    let mut seen_b = vec![false; pair.draft_b.len()];
    let mut last_a: Option<usize> = None;
    let mut last_b: Option<usize> = None;
    for (row_idx, row) in pair.alignment.rows.iter().enumerate() {
        if row.index_a.is_none() && row.index_b.is_none() {
            return Err(err(format!("alignment row {row_idx} has no sentence on either side")));
        }
        if let Some(a) = row.index_a {
            if a >= pair.draft_a.len() {
                return Err(err(format!(
                    "alignment row {row_idx}: draft_a index {a} out of range for {} sentences",
                    pair.draft_a.len()
                )));
            }
            if seen_a[a] {
                return Err(err(format!("draft_a index {a} appears in more than one alignment row")));
            }
            seen_a[a] = true;
            if last_a.is_some_and(|prev| a <= prev) {
                return Err(err(format!("alignment rows are not ordered by draft_a position at row {row_idx}")));
            }
            last_a = Some(a);
        }
        if let Some(b) = row.index_b {
            if b >= pair.draft_b.len() {
                return Err(err(format!(
                    "alignment row {row_idx}: draft_b index {b} out of range for {} sentences",
                    pair.draft_b.len()
                )));
            }
            if seen_b[b] {
                return Err(err(format!("draft_b index {b} appears in more than one alignment row")));
            }
            seen_b[b] = true;
            if last_b.is_some_and(|prev| b <= prev) {
                return Err(err(format!("alignment rows are not ordered by draft_b position at row {row_idx}")));
            }
            last_b = Some(b);
        }
    }
    if let Some(missing) = seen_a.iter().position(|s| !s) {
        return Err(err(format!("draft_a sentence {missing} is not covered by the alignment")));
    }
    if let Some(missing) = seen_b.iter().position(|s| !s) {
        return Err(err(format!("draft_b sentence {missing} is not covered by the alignment")));
    }

    // Annotations must reference alignment rows, one annotation per row.
    let mut annotated_rows = BTreeSet::new();
    for ann in &pair.revisions {
        if ann.row >= pair.alignment.len() {
            return Err(err(format!(
                "revision annotation references row {} but the alignment has {} rows",
                ann.row,
                pair.alignment.len()
            )));
        }
        if !annotated_rows.insert(ann.row) {
            return Err(err(format!("alignment row {} is annotated twice", ann.row)));
        }
    }

    // Feedback rules per profile.
    for msg in &pair.feedback {
        if msg.text.trim().is_empty() {
            return Err(err("feedback message with empty text".to_string()));
        }
    }
    match pair.profile {
        Profile::HighSchool => {
            pair.feedback.retain(|m| m.dimension == FeedbackDimension::Evidence);
        }
        Profile::College => {
            if !pair.feedback.is_empty() {
                return Err(err("college pairs must not carry feedback".to_string()));
            }
        }
        Profile::Elementary => {}
    }

    // Score sanity per profile.
    let spec = pair.profile.spec();
    for (label, score) in [("score_a", pair.score_a), ("score_b", pair.score_b)] {
        if let Some(s) = score {
            if s < spec.score_range.0 || s > spec.score_range.1 {
                return Err(err(format!(
                    "{label} = {s} outside the profile score range [{}, {}]",
                    spec.score_range.0, spec.score_range.1
                )));
            }
        }
    }
    if let Some(imp) = pair.improvement {
        if !spec.improvement_range.contains(imp) {
            return Err(Error::ImprovementOutOfRange {
                student_id: id,
                value: imp,
            });
        }
    }
    Ok(())
}

/// Per-essay improvement: graded directly (elementary), score difference
/// (high-school), or the sign of the change (college).
pub fn compute_improvement(pair: &EssayPair) -> Result<i64> {
    let missing = |which: &'static str| Error::MissingScore {
        student_id: pair.student_id.clone(),
        which,
    };
    let value = match pair.profile {
        Profile::Elementary => pair.improvement.ok_or_else(|| missing("improvement"))?,
        Profile::HighSchool => {
            let a = pair.score_a.ok_or_else(|| missing("score_a"))?;
            let b = pair.score_b.ok_or_else(|| missing("score_b"))?;
            b - a
        }
        Profile::College => {
            let a = pair.score_a.ok_or_else(|| missing("score_a"))?;
            let b = pair.score_b.ok_or_else(|| missing("score_b"))?;
            if b > a {
                1
            } else {
                -1
            }
        }
    };
    if !pair.profile.spec().improvement_range.contains(value) {
        return Err(Error::ImprovementOutOfRange {
            student_id: pair.student_id.clone(),
            value,
        });
    }
    Ok(value)
}
