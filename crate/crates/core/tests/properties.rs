//! Property tests for the module invariants.

use proptest::prelude::*;

use revclass_core::augment::{
    augment_instance, eligible_words, tokenize_words, AugmentationPolicy, SynonymLexicon,
};
use revclass_core::corpus::{corpus_to_jsonl, load_corpus, Profile};
use revclass_core::encode::{build_encoder, MAX_TOKENS};
use revclass_core::eval::{macro_f1, make_folds, pearson_r};
use revclass_core::fixtures;
use revclass_core::models::{Provenance, TrainingInstance};
use revclass_core::revisions::{AlignedUnit, DesirabilityLabel, Operation};
use revclass_core::{context, synth};

fn units_from_ops(ops: &[Operation]) -> (Vec<AlignedUnit>, Vec<String>, Vec<String>) {
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
            draft_a.push(format!("sentence a {row_index}"));
        }
        if index_b.is_some() {
            draft_b.push(format!("sentence b {row_index}"));
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

fn op_strategy() -> impl Strategy<Value = Operation> {
    prop_oneof![
        Just(Operation::NoChange),
        Just(Operation::Modify),
        Just(Operation::Added),
        Just(Operation::Deleted),
    ]
}

proptest! {
    /// LC window endpoints are unchanged rows or document boundaries, every
    /// interior row is changed, and the window contains the target.
    #[test]
    fn lc_window_shape(ops in proptest::collection::vec(op_strategy(), 1..20), target_frac in 0.0f64..1.0) {
        let (units, a, b) = units_from_ops(&ops);
        let target = ((units.len() - 1) as f64 * target_frac) as usize;
        let ctx = context::longer_context(target, &units, &a, &b);
        let (start, end) = (ctx.window_start, ctx.window_end);
        prop_assert!(start <= target && target <= end);
        if start > 0 || units[start].operation == Operation::NoChange {
            prop_assert!(start == 0 || units[start].operation == Operation::NoChange);
        }
        prop_assert!(end == units.len() - 1 || units[end].operation == Operation::NoChange);
        for row in (start + 1)..end {
            if row != target {
                prop_assert!(units[row].operation.is_changed(),
                    "interior row {row} unchanged in window {start}..={end}");
            }
        }
    }

    /// Two changed rows in the same run share the same LC window.
    #[test]
    fn lc_windows_equal_within_run(ops in proptest::collection::vec(op_strategy(), 2..20)) {
        let (units, a, b) = units_from_ops(&ops);
        let changed: Vec<usize> = units
            .iter()
            .filter(|u| u.operation.is_changed())
            .map(|u| u.row_index)
            .collect();
        for pair in changed.windows(2) {
            // Adjacent changed rows belong to the same run.
            if pair[1] == pair[0] + 1 {
                let w1 = context::longer_context(pair[0], &units, &a, &b);
                let w2 = context::longer_context(pair[1], &units, &a, &b);
                prop_assert_eq!((w1.window_start, w1.window_end), (w2.window_start, w2.window_end));
            }
        }
    }

    /// When both neighbors of the target are unchanged, SC's revised-draft
    /// context is a subset of LC's.
    #[test]
    fn sc_subset_of_lc_between_unchanged_neighbors(mid in op_strategy()) {
        let ops = vec![Operation::NoChange, mid, Operation::NoChange];
        if !ops[1].is_changed() {
            return Ok(());
        }
        let (units, a, b) = units_from_ops(&ops);
        let sc = context::simple_context(1, &units, &a, &b);
        let lc = context::longer_context(1, &units, &a, &b);
        for sentence in &sc.context2 {
            prop_assert!(lc.context2.contains(sentence));
        }
    }

    /// Every augmented variant differs from its source by exactly one token
    /// and keeps the label; at most five variants are produced.
    #[test]
    fn augmentation_invariants(seed in any::<u64>(), pick in 0usize..8) {
        let lexicon = SynonymLexicon::from_tsv(&fixtures::synonyms_tsv()).unwrap();
        let policy = AugmentationPolicy::default();
        let sentences = [
            "the village council discussed the harvest and poverty",
            "families struggled while the economy kept failing them",
            "it is so very hard to say",
            "the passage describes how students achieve their goals",
            "evidence was barely visible in the second draft",
            "to be or not to be",
            "they wanted to stabilize the failing economy quickly",
            "short words only here now",
        ];
        let revised = sentences[pick];
        let instance = TrainingInstance {
            id: "p1".to_string(),
            student_id: "s1".to_string(),
            original: String::new(),
            revised: revised.to_string(),
            context1: None,
            context2: None,
            feedback: None,
            label: DesirabilityLabel::Undesirable,
            provenance: Provenance::Original,
        };
        let variants = augment_instance(&instance, &lexicon, &policy, seed);
        prop_assert!(variants.len() <= policy.max_synonyms_per_word);
        let src_tokens: Vec<&str> = tokenize_words(revised).iter().map(|(_, w)| *w).collect();
        for variant in &variants {
            prop_assert_eq!(variant.label, instance.label);
            prop_assert_eq!(
                variant.provenance.clone(),
                Provenance::Augmented { source_id: "p1".to_string() }
            );
            let new_tokens: Vec<&str> =
                tokenize_words(&variant.revised).iter().map(|(_, w)| *w).collect();
            prop_assert_eq!(src_tokens.len(), new_tokens.len());
            let diffs = src_tokens
                .iter()
                .zip(&new_tokens)
                .filter(|(a, b)| *a != *b)
                .count();
            prop_assert_eq!(diffs, 1);
        }
        // Reproducibility under the seed.
        prop_assert_eq!(variants, augment_instance(&instance, &lexicon, &policy, seed));
    }

    /// Replaced words always come from the eligible set.
    #[test]
    fn augmentation_replaces_only_eligible_words(seed in any::<u64>()) {
        let lexicon = SynonymLexicon::from_tsv(&fixtures::synonyms_tsv()).unwrap();
        let policy = AugmentationPolicy::default();
        let revised = "the village council discussed the harvest and poverty";
        let instance = TrainingInstance {
            id: "p1".to_string(),
            student_id: "s1".to_string(),
            original: String::new(),
            revised: revised.to_string(),
            context1: None,
            context2: None,
            feedback: None,
            label: DesirabilityLabel::Desirable,
            provenance: Provenance::Original,
        };
        let eligible: Vec<String> = eligible_words(revised, &policy)
            .into_iter()
            .map(|e| e.word)
            .collect();
        for variant in augment_instance(&instance, &lexicon, &policy, seed) {
            let src: Vec<&str> = tokenize_words(revised).iter().map(|(_, w)| *w).collect();
            let new: Vec<&str> = tokenize_words(&variant.revised).iter().map(|(_, w)| *w).collect();
            let (idx, _) = src
                .iter()
                .zip(&new)
                .enumerate()
                .find(|(_, (a, b))| *a != *b)
                .unwrap();
            prop_assert!(eligible.contains(&src[idx].to_string()));
        }
    }

    /// Macro-F1 is symmetric under relabeling both vectors.
    #[test]
    fn macro_f1_relabel_symmetry(labels in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40)) {
        let to = |v: bool| if v { DesirabilityLabel::Desirable } else { DesirabilityLabel::Undesirable };
        let gold: Vec<_> = labels.iter().map(|(g, _)| to(*g)).collect();
        let pred: Vec<_> = labels.iter().map(|(_, p)| to(*p)).collect();
        let flipped_gold: Vec<_> = labels.iter().map(|(g, _)| to(!*g)).collect();
        let flipped_pred: Vec<_> = labels.iter().map(|(_, p)| to(!*p)).collect();
        let a = macro_f1(&gold, &pred).unwrap();
        let b = macro_f1(&flipped_gold, &flipped_pred).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    /// Pearson correlation of a vector with a positive (negative) affine
    /// image of itself is exactly +1 (-1).
    #[test]
    fn pearson_affine_exactness(
        xs in proptest::collection::vec(-100.0f64..100.0, 3..20),
        a in 0.1f64..10.0,
        b in -5.0f64..5.0,
    ) {
        let distinct = xs.iter().any(|v| (v - xs[0]).abs() > 1e-6);
        prop_assume!(distinct);
        let y_pos: Vec<f64> = xs.iter().map(|v| a * v + b).collect();
        let (r, _) = pearson_r(&xs, &y_pos).unwrap();
        prop_assert!((r - 1.0).abs() < 1e-12, "r = {r}");
        let y_neg: Vec<f64> = xs.iter().map(|v| -a * v + b).collect();
        let (r, _) = pearson_r(&xs, &y_neg).unwrap();
        prop_assert!((r + 1.0).abs() < 1e-12, "r = {r}");
    }

    /// Encoded sequences never exceed the token cap.
    #[test]
    fn encoder_respects_cap(words in 1usize..1200) {
        let encoder = build_encoder("hash:8", None).unwrap();
        let text = vec!["evidence"; words].join(" ");
        let seq = encoder.encode_text(&text);
        prop_assert!(seq.time() <= MAX_TOKENS);
        prop_assert!(seq.time() >= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Serialize-then-load reproduces a corpus record for record.
    #[test]
    fn corpus_roundtrip(students in 1usize..5, seed in any::<u64>()) {
        let pairs = synth::synth_corpus(Profile::HighSchool, students, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(&path, corpus_to_jsonl(&pairs)).unwrap();
        let reloaded = load_corpus(&path, Profile::HighSchool).unwrap();
        prop_assert_eq!(&pairs, &reloaded);
        prop_assert_eq!(corpus_to_jsonl(&pairs), corpus_to_jsonl(&reloaded));
    }

    /// Stratified folds partition the instances with balanced sizes and are
    /// reproducible.
    #[test]
    fn fold_plan_invariants(students in 3usize..12, seed in any::<u64>(), k in 2usize..6) {
        let pairs = synth::synth_corpus(Profile::Elementary, students, seed);
        let instances = revclass_core::pipeline::build_instances(
            &pairs,
            Profile::Elementary,
            revclass_core::revisions::Purpose::Reasoning,
            None,
        ).unwrap();
        prop_assume!(instances.len() >= k);
        let desirable = instances.iter().filter(|i| i.label == DesirabilityLabel::Desirable).count();
        prop_assume!(desirable > 0 && desirable < instances.len());
        let plan = make_folds(&instances, k, seed).unwrap();
        prop_assert_eq!(plan.assignments.len(), instances.len());
        let mut sizes = vec![0usize; k];
        for fold in plan.assignments.values() {
            prop_assert!(*fold < k);
            sizes[*fold] += 1;
        }
        let (min, max) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        prop_assert!(max - min <= 1);
        let again = make_folds(&instances, k, seed).unwrap();
        prop_assert_eq!(plan.assignments, again.assignments);
    }
}
