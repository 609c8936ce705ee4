//! Deterministic synthetic corpus generator for tests, benchmarks, and
//! demos. Every student gets two evidence and two reasoning revisions plus
//! unannotated fluency edits, so instance counts scale exactly with the
//! student count. Desirable and undesirable sentences draw from different
//! word pools, which keeps the generated task learnable, and the
//! improvement score tracks the desirable/undesirable balance so extrinsic
//! correlations are non-degenerate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    AlignmentMap, AlignmentRow, EssayPair, FeedbackDimension, FeedbackMessage, FeedbackOrigin,
    Profile, PurposeTag, RevisionAnnotation,
};
use crate::revisions::Purpose;
use crate::seeding;

const TOPICS: [&str; 8] = [
    "poverty", "harvest", "village", "council", "evidence", "school", "money", "water",
];

const DESIRABLE_EVIDENCE: &str =
    "the article clearly reports that {A} reached many families and improved the {B} program";
const UNDESIRABLE_EVIDENCE: &str =
    "someone once mentioned that {A} might possibly matter to somebody somewhere near the {B}";
const DESIRABLE_REASONING: &str =
    "this evidence supports the argument because {A} connects directly to the overall claim about {B}";
const UNDESIRABLE_REASONING: &str =
    "i just think {A} is interesting and that is merely my own commentary about the {B}";

fn fill(template: &str, a: &str, b: &str) -> String {
    template.replace("{A}", a).replace("{B}", b)
}

struct RowSpec {
    kind: RowKind,
    annotation: Option<(Purpose, &'static str, bool)>,
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    NoChange,
    Added,
    Deleted,
    Modify,
}

fn undesirable_code(purpose: Purpose, rng: &mut ChaCha8Rng) -> &'static str {
    match purpose {
        Purpose::Evidence => ["irrelevant", "repeat", "non_text_based", "minimal_ev"]
            [rng.random_range(0..4)],
        Purpose::Reasoning => ["not_lce", "generic", "commentary", "minimal_re"]
            [rng.random_range(0..4)],
    }
}

fn desirable_code(purpose: Purpose) -> &'static str {
    match purpose {
        Purpose::Evidence => "relevant",
        Purpose::Reasoning => "lce",
    }
}

fn changed_kind(rng: &mut ChaCha8Rng) -> RowKind {
    match rng.random_range(0..5) {
        0 => RowKind::Deleted,
        1 | 2 => RowKind::Modify,
        _ => RowKind::Added,
    }
}

/// Generate one student's essay pair.
fn synth_pair(profile: Profile, index: usize, seed: u64) -> EssayPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, index as u64));
    let student_id = format!("syn{index:04}");

    // Row plan: anchors around four annotated revisions and one dropped
    // fluency edit.
    let mut specs = vec![RowSpec {
        kind: RowKind::NoChange,
        annotation: None,
    }];
    for (purpose, slot) in [
        (Purpose::Evidence, 0),
        (Purpose::Reasoning, 1),
        (Purpose::Evidence, 2),
        (Purpose::Reasoning, 3),
    ] {
        let desirable = rng.random_range(0..100) < 55;
        let code = if desirable {
            desirable_code(purpose)
        } else {
            undesirable_code(purpose, &mut rng)
        };
        specs.push(RowSpec {
            kind: changed_kind(&mut rng),
            annotation: Some((purpose, code, desirable)),
        });
        if slot == 1 {
            specs.push(RowSpec {
                kind: RowKind::Modify,
                annotation: None,
            });
            specs.push(RowSpec {
                kind: RowKind::NoChange,
                annotation: None,
            });
        }
    }
    specs.push(RowSpec {
        kind: RowKind::NoChange,
        annotation: None,
    });

    let mut draft_a = Vec::new();
    let mut draft_b = Vec::new();
    let mut rows = Vec::new();
    let mut annotations = Vec::new();
    let mut desirable_total = 0i64;
    let mut undesirable_total = 0i64;

    for (row_idx, spec) in specs.iter().enumerate() {
        let topic_a = TOPICS[rng.random_range(0..TOPICS.len())];
        let topic_b = TOPICS[rng.random_range(0..TOPICS.len())];
        let filler = format!(
            "the {} draft section {} for student {} discusses the {} in plain terms",
            profile.as_str().replace('_', " "),
            row_idx,
            index,
            topic_a
        );
        let changed_sentence = match spec.annotation {
            Some((Purpose::Evidence, _, true)) => fill(DESIRABLE_EVIDENCE, topic_a, topic_b),
            Some((Purpose::Evidence, _, false)) => fill(UNDESIRABLE_EVIDENCE, topic_a, topic_b),
            Some((Purpose::Reasoning, _, true)) => fill(DESIRABLE_REASONING, topic_a, topic_b),
            Some((Purpose::Reasoning, _, false)) => fill(UNDESIRABLE_REASONING, topic_a, topic_b),
            None => format!("{filler} with a small edit"),
        };
        let (index_a, index_b) = match spec.kind {
            RowKind::NoChange => {
                draft_a.push(filler.clone());
                draft_b.push(filler.clone());
                (Some(draft_a.len() - 1), Some(draft_b.len() - 1))
            }
            RowKind::Added => {
                draft_b.push(changed_sentence.clone());
                (None, Some(draft_b.len() - 1))
            }
            RowKind::Deleted => {
                draft_a.push(changed_sentence.clone());
                (Some(draft_a.len() - 1), None)
            }
            RowKind::Modify => {
                draft_a.push(format!("{changed_sentence} as first written"));
                draft_b.push(format!("{changed_sentence} as finally revised"));
                (Some(draft_a.len() - 1), Some(draft_b.len() - 1))
            }
        };
        rows.push(AlignmentRow { index_a, index_b });
        if let Some((purpose, code, desirable)) = spec.annotation {
            if desirable {
                desirable_total += 1;
            } else {
                undesirable_total += 1;
            }
            annotations.push(RevisionAnnotation {
                row: row_idx,
                purpose: match purpose {
                    Purpose::Evidence => PurposeTag::Evidence,
                    Purpose::Reasoning => PurposeTag::Reasoning,
                },
                code: Some(code.to_string()),
            });
        } else if spec.kind != RowKind::NoChange {
            annotations.push(RevisionAnnotation {
                row: row_idx,
                purpose: PurposeTag::Other("word_usage".to_string()),
                code: None,
            });
        }
    }

    let balance = desirable_total - undesirable_total;
    let (score_a, score_b, improvement, feedback) = match profile {
        Profile::Elementary => {
            let improvement = (1 + balance).clamp(0, 3);
            (
                Some(2),
                Some((2 + improvement.min(2)).clamp(1, 4)),
                Some(improvement),
                vec![FeedbackMessage {
                    text: "use more evidence from the article and explain how it supports your argument"
                        .to_string(),
                    dimension: FeedbackDimension::Evidence,
                    origin: FeedbackOrigin::AweCatalog,
                }],
            )
        }
        Profile::HighSchool => {
            let improvement = balance.clamp(-2, 3);
            let score_a = 2;
            (
                Some(score_a),
                Some((score_a + improvement).clamp(0, 5)),
                None,
                vec![FeedbackMessage {
                    text: "your example for the second circle needs more detail from the story"
                        .to_string(),
                    dimension: FeedbackDimension::Evidence,
                    origin: FeedbackOrigin::PeerFreeform,
                }],
            )
        }
        Profile::College => {
            let improved = balance > 0;
            (
                Some(20),
                Some(if improved { 24 } else { 18 }),
                None,
                Vec::new(),
            )
        }
    };

    EssayPair {
        student_id,
        profile,
        draft_a,
        draft_b,
        alignment: AlignmentMap { rows },
        feedback,
        score_a,
        score_b,
        improvement,
        revisions: annotations,
    }
}

/// Generate a corpus of `students` essay pairs. Each pair carries exactly
/// two evidence and two reasoning revisions.
pub fn synth_corpus(profile: Profile, students: usize, seed: u64) -> Vec<EssayPair> {
    (0..students).map(|i| synth_pair(profile, i, seed)).collect()
}
