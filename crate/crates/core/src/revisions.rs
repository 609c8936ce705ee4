//! Alignment operations, revision extraction, and the desirability mapping.

use serde::{Deserialize, Serialize};

use crate::corpus::{AlignmentMap, Profile, PurposeTag, RevisionAnnotation};
use crate::error::{Error, Result};

/// What happened to an aligned sentence pair between drafts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    NoChange,
    Modify,
    Added,
    Deleted,
}

impl Operation {
    pub fn is_changed(self) -> bool {
        self != Operation::NoChange
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::NoChange => "no_change",
            Operation::Modify => "modify",
            Operation::Added => "added",
            Operation::Deleted => "deleted",
        }
    }
}

/// One alignment row with its derived operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedUnit {
    pub row_index: usize,
    pub index_a: Option<usize>,
    pub index_b: Option<usize>,
    pub operation: Operation,
}

/// Revision purpose considered by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Evidence,
    Reasoning,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Evidence => "evidence",
            Purpose::Reasoning => "reasoning",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "evidence" => Ok(Purpose::Evidence),
            "reasoning" => Ok(Purpose::Reasoning),
            other => Err(Error::Config(format!("unknown purpose {other:?}"))),
        }
    }
}

impl std::fmt::Display for Purpose {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fine-grained revision code. Five evidence codes and six reasoning codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevisionCode {
    // Evidence codes.
    Relevant,
    Irrelevant,
    Repeat,
    NonTextBased,
    MinimalEv,
    // Reasoning codes.
    Lce,
    NotLce,
    Paraphrase,
    Generic,
    Commentary,
    MinimalRe,
}

impl RevisionCode {
    pub const ALL: [RevisionCode; 11] = [
        RevisionCode::Relevant,
        RevisionCode::Irrelevant,
        RevisionCode::Repeat,
        RevisionCode::NonTextBased,
        RevisionCode::MinimalEv,
        RevisionCode::Lce,
        RevisionCode::NotLce,
        RevisionCode::Paraphrase,
        RevisionCode::Generic,
        RevisionCode::Commentary,
        RevisionCode::MinimalRe,
    ];

    pub fn purpose(self) -> Purpose {
        match self {
            RevisionCode::Relevant
            | RevisionCode::Irrelevant
            | RevisionCode::Repeat
            | RevisionCode::NonTextBased
            | RevisionCode::MinimalEv => Purpose::Evidence,
            RevisionCode::Lce
            | RevisionCode::NotLce
            | RevisionCode::Paraphrase
            | RevisionCode::Generic
            | RevisionCode::Commentary
            | RevisionCode::MinimalRe => Purpose::Reasoning,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "relevant" => Ok(RevisionCode::Relevant),
            "irrelevant" => Ok(RevisionCode::Irrelevant),
            "repeat" => Ok(RevisionCode::Repeat),
            "non_text_based" => Ok(RevisionCode::NonTextBased),
            "minimal_ev" => Ok(RevisionCode::MinimalEv),
            "lce" => Ok(RevisionCode::Lce),
            "not_lce" => Ok(RevisionCode::NotLce),
            "paraphrase" => Ok(RevisionCode::Paraphrase),
            "generic" => Ok(RevisionCode::Generic),
            "commentary" => Ok(RevisionCode::Commentary),
            "minimal_re" => Ok(RevisionCode::MinimalRe),
            other => Err(Error::UnknownCode(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RevisionCode::Relevant => "relevant",
            RevisionCode::Irrelevant => "irrelevant",
            RevisionCode::Repeat => "repeat",
            RevisionCode::NonTextBased => "non_text_based",
            RevisionCode::MinimalEv => "minimal_ev",
            RevisionCode::Lce => "lce",
            RevisionCode::NotLce => "not_lce",
            RevisionCode::Paraphrase => "paraphrase",
            RevisionCode::Generic => "generic",
            RevisionCode::Commentary => "commentary",
            RevisionCode::MinimalRe => "minimal_re",
        }
    }
}

/// Binary classification target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesirabilityLabel {
    Desirable,
    Undesirable,
}

impl DesirabilityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DesirabilityLabel::Desirable => "desirable",
            DesirabilityLabel::Undesirable => "undesirable",
        }
    }
}

impl std::fmt::Display for DesirabilityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A changed aligned pair with its gold purpose, code, and binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub unit: AlignedUnit,
    pub purpose: Purpose,
    pub code: RevisionCode,
    pub label: DesirabilityLabel,
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Assign one of the four operations to each alignment row. Sides are
/// compared with whitespace-normalized exact string equality.
pub fn derive_operations(
    alignment: &AlignmentMap,
    draft_a: &[String],
    draft_b: &[String],
) -> Vec<AlignedUnit> {
    alignment
        .rows
        .iter()
        .enumerate()
        .map(|(row_index, row)| {
            let operation = match (row.index_a, row.index_b) {
                (None, Some(_)) => Operation::Added,
                (Some(_), None) => Operation::Deleted,
                (Some(a), Some(b)) => {
                    if normalize_ws(&draft_a[a]) == normalize_ws(&draft_b[b]) {
                        Operation::NoChange
                    } else {
                        Operation::Modify
                    }
                }
                (None, None) => unreachable!("validated alignment rows have a sentence on at least one side"),
            };
            AlignedUnit {
                row_index,
                index_a: row.index_a,
                index_b: row.index_b,
                operation,
            }
        })
        .collect()
}

/// Keep the changed units annotated as evidence or reasoning, attach their
/// parsed codes, and label them. Annotations with any other purpose are
/// dropped. `student_id` is used only for diagnostics.
pub fn extract_revisions(
    units: &[AlignedUnit],
    annotations: &[RevisionAnnotation],
    profile: Profile,
    student_id: &str,
) -> Result<Vec<Revision>> {
    let mut out = Vec::new();
    for ann in annotations {
        let purpose = match &ann.purpose {
            PurposeTag::Evidence => Purpose::Evidence,
            PurposeTag::Reasoning => Purpose::Reasoning,
            PurposeTag::Other(_) => continue,
        };
        let unit = *units.get(ann.row).ok_or_else(|| Error::RevisionAnnotation {
            student_id: student_id.to_string(),
            row: ann.row,
            message: format!("annotation row {} outside the alignment", ann.row),
        })?;
        if !unit.operation.is_changed() {
            return Err(Error::RevisionAnnotation {
                student_id: student_id.to_string(),
                row: ann.row,
                message: format!("{purpose} annotation on an unchanged row"),
            });
        }
        let code_str = ann.code.as_deref().ok_or_else(|| Error::RevisionAnnotation {
            student_id: student_id.to_string(),
            row: ann.row,
            message: format!("{purpose} revision is missing its code"),
        })?;
        let code = RevisionCode::parse(code_str)?;
        if code.purpose() != purpose {
            return Err(Error::RevisionAnnotation {
                student_id: student_id.to_string(),
                row: ann.row,
                message: format!("code {:?} is not a {} code", code.as_str(), purpose),
            });
        }
        out.push(Revision {
            unit,
            purpose,
            code,
            label: map_desirability(code, profile),
        });
    }
    out.sort_by_key(|r| r.unit.row_index);
    Ok(out)
}

/// Corpus-specific mapping from fine-grained codes to the binary label.
/// Relevant evidence and linked claim-evidence reasoning are desirable
/// everywhere; paraphrase reasoning is desirable only for the elementary
/// corpus; everything else is undesirable.
pub fn map_desirability(code: RevisionCode, profile: Profile) -> DesirabilityLabel {
    use DesirabilityLabel::{Desirable, Undesirable};
    match code {
        RevisionCode::Relevant => Desirable,
        RevisionCode::Irrelevant
        | RevisionCode::Repeat
        | RevisionCode::NonTextBased
        | RevisionCode::MinimalEv => Undesirable,
        RevisionCode::Lce => Desirable,
        RevisionCode::Paraphrase => match profile {
            Profile::Elementary => Desirable,
            Profile::HighSchool | Profile::College => Undesirable,
        },
        RevisionCode::NotLce
        | RevisionCode::Generic
        | RevisionCode::Commentary
        | RevisionCode::MinimalRe => Undesirable,
    }
}
