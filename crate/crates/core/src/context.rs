//! Simple-context (SC) and longer-context (LC) extraction around a revision.
//!
//! Both methods work over alignment rows and realize each row separately in
//! the two drafts: `context1` holds the window's sentences that exist in the
//! original draft, `context2` those that exist in the revised draft. An added
//! sentence therefore never shows up in `context1`, and a deleted one never
//! in `context2`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::revisions::{AlignedUnit, Operation};

/// Which extraction method to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    /// Immediate neighbors only.
    Sc,
    /// Maximal changed run bounded by unchanged sentences.
    Lc,
}

impl ContextMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextMode::Sc => "sc",
            ContextMode::Lc => "lc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(ContextMode::Sc),
            "lc" => Ok(ContextMode::Lc),
            other => Err(Error::Config(format!("unknown context mode {other:?}"))),
        }
    }

    pub fn extract(
        self,
        target_row: usize,
        units: &[AlignedUnit],
        draft_a: &[String],
        draft_b: &[String],
    ) -> ContextPair {
        match self {
            ContextMode::Sc => simple_context(target_row, units, draft_a, draft_b),
            ContextMode::Lc => longer_context(target_row, units, draft_a, draft_b),
        }
    }
}

impl std::fmt::Display for ContextMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Context realized per draft for one target revision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextPair {
    pub context1: Vec<String>,
    pub context2: Vec<String>,
    /// Contiguous inclusive range of alignment rows the context was drawn from.
    pub window_start: usize,
    pub window_end: usize,
}

impl ContextPair {
    pub fn window_rows(&self) -> RangeInclusive<usize> {
        self.window_start..=self.window_end
    }

    /// Context sentences joined with single spaces, the form handed to the
    /// encoder.
    pub fn joined(&self) -> (String, String) {
        (self.context1.join(" "), self.context2.join(" "))
    }
}

fn realize(units: &[AlignedUnit], rows: RangeInclusive<usize>, skip: Option<usize>, draft_a: &[String], draft_b: &[String]) -> ContextPair {
    let (start, end) = (*rows.start(), *rows.end());
    let mut context1 = Vec::new();
    let mut context2 = Vec::new();
    for unit in &units[start..=end] {
        if Some(unit.row_index) == skip {
            continue;
        }
        if let Some(a) = unit.index_a {
            context1.push(draft_a[a].clone());
        }
        if let Some(b) = unit.index_b {
            context2.push(draft_b[b].clone());
        }
    }
    ContextPair {
        context1,
        context2,
        window_start: start,
        window_end: end,
    }
}

/// The alignment rows immediately before and after the target, realized in
/// each draft. The target itself is excluded. Rows past a draft boundary
/// simply contribute nothing, so boundary revisions get shorter contexts.
pub fn simple_context(
    target_row: usize,
    units: &[AlignedUnit],
    draft_a: &[String],
    draft_b: &[String],
) -> ContextPair {
    let start = target_row.saturating_sub(1);
    let end = (target_row + 1).min(units.len() - 1);
    realize(units, start..=end, Some(target_row), draft_a, draft_b)
}

/// Expand from the target over consecutive changed rows in both directions,
/// stopping at and including the first unchanged row on each side (or the
/// draft boundary). The target contributes its own sentence on sides where
/// it exists.
pub fn longer_context(
    target_row: usize,
    units: &[AlignedUnit],
    draft_a: &[String],
    draft_b: &[String],
) -> ContextPair {
    let mut start = target_row;
    while start > 0 {
        start -= 1;
        if units[start].operation == Operation::NoChange {
            break;
        }
    }
    let mut end = target_row;
    while end + 1 < units.len() {
        end += 1;
        if units[end].operation == Operation::NoChange {
            break;
        }
    }
    realize(units, start..=end, None, draft_a, draft_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_corpus, Profile};
    use crate::fixtures;
    use crate::revisions::derive_operations;

    fn fixture(path: std::path::PathBuf) -> (Vec<AlignedUnit>, Vec<String>, Vec<String>) {
        let pairs = load_corpus(&path, Profile::Elementary).unwrap();
        let pair = pairs.into_iter().next().unwrap();
        let units = derive_operations(&pair.alignment, &pair.draft_a, &pair.draft_b);
        (units, pair.draft_a, pair.draft_b)
    }

    #[test]
    fn lc_for_added_reasoning_spans_to_enclosing_unchanged_rows() {
        let (units, a, b) = fixture(fixtures::elementary_sample());
        // Target: third alignment row (added reasoning sentence).
        let ctx = longer_context(2, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (0, 3));
        assert_eq!(ctx.context1, vec![a[0].clone(), a[1].clone()]);
        assert_eq!(ctx.context2, vec![b[0].clone(), b[1].clone(), b[2].clone(), b[3].clone()]);
    }

    #[test]
    fn lc_for_added_evidence_includes_modified_neighbor() {
        let (units, a, b) = fixture(fixtures::elementary_sample());
        // Target: fifth alignment row (added evidence sentence).
        let ctx = longer_context(4, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (3, 6));
        assert_eq!(ctx.context1, vec![a[1].clone(), a[2].clone(), a[3].clone()]);
        assert_eq!(ctx.context2, vec![b[3].clone(), b[4].clone(), b[5].clone(), b[6].clone()]);
    }

    #[test]
    fn sc_for_added_reasoning_uses_both_neighbors_in_revised_draft() {
        let (units, a, b) = fixture(fixtures::elementary_sample());
        let ctx = simple_context(2, &units, &a, &b);
        assert_eq!(ctx.context2, vec![b[1].clone(), b[3].clone()]);
        // The preceding row was added, so only the following row exists in
        // the original draft.
        assert_eq!(ctx.context1, vec![a[1].clone()]);
        assert_eq!((ctx.window_start, ctx.window_end), (1, 3));
    }

    fn synthetic_units(ops: &[Operation]) -> (Vec<AlignedUnit>, Vec<String>, Vec<String>) {
        let mut units = Vec::new();
        let mut draft_a = Vec::new();
        let mut draft_b = Vec::new();
        for (row_index, op) in ops.iter().enumerate() {
            let (index_a, index_b) = match op {
                Operation::Added => (None, Some(draft_b.len())),
                Operation::Deleted => (Some(draft_a.len()), None),
                _ => (Some(draft_a.len()), Some(draft_b.len())),
            };
            if index_a.is_some() {
                draft_a.push(format!("a{row_index}"));
            }
            if index_b.is_some() {
                draft_b.push(format!("b{row_index}"));
            }
            units.push(AlignedUnit {
                row_index,
                index_a,
                index_b,
                operation: *op,
            });
        }
        (units, draft_a, draft_b)
    }

    #[test]
    fn sc_at_first_row_has_no_preceding_sentence() {
        use Operation::*;
        let (units, a, b) = synthetic_units(&[Added, NoChange, NoChange]);
        let ctx = simple_context(0, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (0, 1));
        assert_eq!(ctx.context1, vec!["a1".to_string()]);
        assert_eq!(ctx.context2, vec!["b1".to_string()]);
    }

    #[test]
    fn lc_minimal_window_when_both_neighbors_unchanged() {
        use Operation::*;
        let (units, a, b) = synthetic_units(&[NoChange, NoChange, Modify, NoChange, NoChange]);
        let ctx = longer_context(2, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (1, 3));
        assert_eq!(ctx.context1.len(), 3);
        assert_eq!(ctx.context2.len(), 3);
    }

    #[test]
    fn sc_with_deleted_neighbor_before_and_unchanged_after() {
        let (units, a, b) = fixture(fixtures::context_edges());
        // Target: modified row 2 sits between a deleted row and an unchanged row.
        let ctx = simple_context(2, &units, &a, &b);
        assert_eq!(ctx.context1, vec![a[1].clone(), a[3].clone()]);
        assert_eq!(ctx.context2, vec![b[2].clone()]);
    }

    #[test]
    fn lc_windows_agree_within_one_changed_run() {
        let (units, a, b) = fixture(fixtures::context_edges());
        // Deleted row 1 and modified row 2 belong to the same changed run.
        let ctx = longer_context(1, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (0, 3));
        assert_eq!(ctx.context1, vec![a[0].clone(), a[1].clone(), a[2].clone(), a[3].clone()]);
        assert_eq!(ctx.context2, vec![b[0].clone(), b[1].clone(), b[2].clone()]);
        let ctx2 = longer_context(2, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (ctx2.window_start, ctx2.window_end));
    }

    #[test]
    fn lc_target_at_document_edges() {
        let (units, a, b) = fixture(fixtures::elementary_sample());
        // The run above the last row reaches back over the modified row 7
        // to the unchanged row 6; the document end bounds the other side.
        let ctx = longer_context(8, &units, &a, &b);
        assert_eq!((ctx.window_start, ctx.window_end), (6, 8));
        let ctx = longer_context(0, &units, &a, &b);
        assert_eq!(ctx.window_start, 0);
    }
}
