//! Intrinsic (cross-validated macro-F1) and extrinsic (revision-count vs.
//! improvement correlation) evaluation.

pub mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::augment::{augment_training_fold, AugmentationPolicy, SynonymLexicon};
use crate::corpus::Profile;
use crate::encode::{avg_word_vectors, Encoder, VectorTable};
use crate::error::{Error, Result};
use crate::models::{
    assemble_dataset, assemble_input, build_model, label_from_probability,
    train_logreg_baseline, FeatureInstance, HyperParams, ModelDims, ModelVariant,
    TrainingInstance,
};
use crate::revisions::DesirabilityLabel;
use crate::seeding;

/// Assignment of original (un-augmented) instances to folds, stratified by
/// label, deterministic under the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    pub fn test_ids(&self, fold: usize) -> BTreeSet<&str> {
        self.assignments
            .iter()
            .filter(|(_, f)| **f == fold)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

fn shuffled_ids<'a, I: Iterator<Item = &'a TrainingInstance>>(
    instances: I,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<&'a str> {
    use rand::seq::SliceRandom;
    let mut ids: Vec<&str> = instances.map(|i| i.id.as_str()).collect();
    ids.shuffle(rng);
    ids
}

/// Stratified k-fold split. Within each class the shuffled instances are
/// dealt round-robin, with the dealing cursor carried across classes so
/// overall fold sizes differ by at most one.
pub fn make_folds(instances: &[TrainingInstance], k: usize, seed: u64) -> Result<FoldPlan> {
    use rand::SeedableRng;
    if k == 0 {
        return Err(Error::Config("fold count must be positive".to_string()));
    }
    if instances.len() < k {
        return Err(Error::TooFewInstances {
            have: instances.len(),
            need: k,
        });
    }
    let desirable = instances
        .iter()
        .filter(|i| i.label == DesirabilityLabel::Desirable)
        .count();
    if desirable == 0 || desirable == instances.len() {
        return Err(Error::SingleClass);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seeding::mix(seed, 0xf01d));
    let mut assignments = BTreeMap::new();
    let mut cursor = 0usize;
    for label in [DesirabilityLabel::Desirable, DesirabilityLabel::Undesirable] {
        let ids = shuffled_ids(instances.iter().filter(|i| i.label == label), &mut rng);
        for id in ids {
            assignments.insert(id.to_string(), cursor % k);
            cursor += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// Ablation split that keeps all of a student's revisions in one fold.
pub fn make_folds_by_student(
    instances: &[TrainingInstance],
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    if k == 0 {
        return Err(Error::Config("fold count must be positive".to_string()));
    }
    let mut students: Vec<&str> = instances
        .iter()
        .map(|i| i.student_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if students.len() < k {
        return Err(Error::TooFewInstances {
            have: students.len(),
            need: k,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seeding::mix(seed, 0xf02d));
    students.shuffle(&mut rng);
    let fold_of_student: BTreeMap<&str, usize> = students
        .iter()
        .enumerate()
        .map(|(idx, s)| (*s, idx % k))
        .collect();
    let assignments = instances
        .iter()
        .map(|i| (i.id.clone(), fold_of_student[i.student_id.as_str()]))
        .collect();
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// Precision/recall/F1 for one class.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassStats {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Two-class metrics with unweighted (macro) averages.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairMetrics {
    pub desirable: ClassStats,
    pub undesirable: ClassStats,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn class_stats(
    gold: &[DesirabilityLabel],
    pred: &[DesirabilityLabel],
    class: DesirabilityLabel,
) -> ClassStats {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        match (*g == class, *p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        // Covers the absent-from-both convention as well.
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassStats {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

/// Per-class and macro metrics over two equal-length label vectors.
pub fn pair_metrics(
    gold: &[DesirabilityLabel],
    pred: &[DesirabilityLabel],
) -> Result<PairMetrics> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::TooFewInstances { have: 0, need: 1 });
    }
    let desirable = class_stats(gold, pred, DesirabilityLabel::Desirable);
    let undesirable = class_stats(gold, pred, DesirabilityLabel::Undesirable);
    Ok(PairMetrics {
        desirable,
        undesirable,
        macro_precision: (desirable.precision + undesirable.precision) / 2.0,
        macro_recall: (desirable.recall + undesirable.recall) / 2.0,
        macro_f1: (desirable.f1 + undesirable.f1) / 2.0,
    })
}

/// Unweighted mean of the two per-class F1 scores. A class absent from both
/// vectors contributes zero.
pub fn macro_f1(gold: &[DesirabilityLabel], pred: &[DesirabilityLabel]) -> Result<f64> {
    Ok(pair_metrics(gold, pred)?.macro_f1)
}

/// Sample Pearson correlation with a two-tailed p-value from the
/// t-distribution with n-2 degrees of freedom.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            gold: x.len(),
            pred: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewInstances { have: n, need: 3 });
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (xv, yv) in x.iter().zip(y) {
        cov += (xv - mx) * (yv - my);
        var_x += (xv - mx) * (xv - mx);
        var_y += (yv - my) * (yv - my);
    }
    if var_x == 0.0 {
        return Err(Error::ZeroVariance { side: "x" });
    }
    if var_y == 0.0 {
        return Err(Error::ZeroVariance { side: "y" });
    }
    let r = (cov / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if (1.0 - r * r) < 1e-15 {
        0.0
    } else {
        let t = r.abs() * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df)
            .expect("degrees of freedom are positive");
        2.0 * (1.0 - dist.cdf(t))
    };
    Ok((r, p.clamp(0.0, 1.0)))
}

/// Whether counts come from gold annotations or model predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    Gold,
    Predicted,
}

/// One out-of-fold prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub student_id: String,
    pub fold: usize,
    pub probability: f64,
    pub predicted: DesirabilityLabel,
    pub gold: DesirabilityLabel,
}

/// Desirable/undesirable counts per student for one (profile, purpose)
/// cell. Students without revisions in the cell get (0, 0).
pub fn per_student_counts(
    records: &[PredictionRecord],
    students: &[String],
    source: LabelSource,
) -> BTreeMap<String, (usize, usize)> {
    let mut counts: BTreeMap<String, (usize, usize)> = students
        .iter()
        .map(|s| (s.clone(), (0usize, 0usize)))
        .collect();
    for record in records {
        let label = match source {
            LabelSource::Gold => record.gold,
            LabelSource::Predicted => record.predicted,
        };
        let entry = counts.entry(record.student_id.clone()).or_insert((0, 0));
        match label {
            DesirabilityLabel::Desirable => entry.0 += 1,
            DesirabilityLabel::Undesirable => entry.1 += 1,
        }
    }
    counts
}

/// Cross-validation knobs shared by the neural variants and the baseline.
pub struct CvSettings<'a> {
    pub k: usize,
    pub seed: u64,
    pub augment: bool,
    pub lexicon: Option<&'a SynonymLexicon>,
    pub policy: &'a AugmentationPolicy,
    pub group_by_student: bool,
}

impl CvSettings<'_> {
    fn plan(&self, instances: &[TrainingInstance]) -> Result<FoldPlan> {
        if self.group_by_student {
            make_folds_by_student(instances, self.k, self.seed)
        } else {
            make_folds(instances, self.k, self.seed)
        }
    }

    fn training_split(
        &self,
        instances: &[TrainingInstance],
        plan: &FoldPlan,
        fold: usize,
    ) -> Result<(Vec<TrainingInstance>, Vec<TrainingInstance>)> {
        let mut train: Vec<TrainingInstance> = Vec::new();
        let mut test: Vec<TrainingInstance> = Vec::new();
        for inst in instances {
            if plan.fold_of(&inst.id) == Some(fold) {
                test.push(inst.clone());
            } else {
                train.push(inst.clone());
            }
        }
        let train = if self.augment {
            let lexicon = self.lexicon.ok_or_else(|| {
                Error::Config("augmentation requested without a lexicon".to_string())
            })?;
            augment_training_fold(
                &train,
                lexicon,
                self.policy,
                seeding::mix(self.seed, 0xa06 + fold as u64),
            )
        } else {
            train
        };
        // Leakage guard: no augmented variant of a test instance may reach
        // the training set.
        let test_ids: BTreeSet<&str> = test.iter().map(|i| i.id.as_str()).collect();
        for inst in &train {
            if let Some(source) = inst.provenance.source_id() {
                if test_ids.contains(source) {
                    return Err(Error::Training(format!(
                        "fold {fold}: augmented variant of test instance {source} leaked into training"
                    )));
                }
            }
            if test_ids.contains(inst.id.as_str()) {
                return Err(Error::Training(format!(
                    "fold {fold}: test instance {} leaked into training",
                    inst.id
                )));
            }
        }
        Ok((train, test))
    }
}

/// Per-fold evaluation result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: PairMetrics,
}

/// Mean over folds of the macro metrics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// Everything a cross-validation run produces: per-fold metrics, their
/// mean, and one out-of-fold prediction per original instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvOutcome {
    pub folds: Vec<FoldResult>,
    pub mean: MeanMetrics,
    pub predictions: Vec<PredictionRecord>,
}

fn summarize(folds: Vec<FoldResult>, mut predictions: Vec<PredictionRecord>) -> CvOutcome {
    let n = folds.len().max(1) as f64;
    let mean = MeanMetrics {
        macro_precision: folds.iter().map(|f| f.metrics.macro_precision).sum::<f64>() / n,
        macro_recall: folds.iter().map(|f| f.metrics.macro_recall).sum::<f64>() / n,
        macro_f1: folds.iter().map(|f| f.metrics.macro_f1).sum::<f64>() / n,
    };
    predictions.sort_by(|a, b| a.id.cmp(&b.id));
    CvOutcome {
        folds,
        mean,
        predictions,
    }
}

/// K-fold evaluation of one neural variant: augment the training portion,
/// train from scratch, predict the untouched test portion.
pub fn cross_validate_model(
    instances: &[TrainingInstance],
    profile: Profile,
    variant: ModelVariant,
    encoder: &dyn Encoder,
    hyper: &HyperParams,
    settings: &CvSettings,
) -> Result<CvOutcome> {
    variant.validate_for(profile)?;
    let plan = settings.plan(instances)?;
    let dims = ModelDims {
        input_dim: encoder.dim(),
        hidden: hyper.hidden_size,
    };
    let mut folds = Vec::with_capacity(plan.k);
    let mut predictions = Vec::with_capacity(instances.len());
    for fold in 0..plan.k {
        let (train, test) = settings.training_split(instances, &plan, fold)?;
        let assembled = assemble_dataset(&train, variant, encoder)?;
        let mut model = build_model(
            dims,
            seeding::mix_str(settings.seed, &format!("{variant}:init:{fold}")),
        );
        model.train(
            &assembled,
            hyper,
            seeding::mix_str(settings.seed, &format!("{variant}:train:{fold}")),
        )?;
        let mut gold = Vec::with_capacity(test.len());
        let mut pred = Vec::with_capacity(test.len());
        for inst in &test {
            let input = assemble_input(inst, variant, encoder)?;
            let probability = model.predict_proba(&input);
            let predicted = label_from_probability(probability);
            gold.push(inst.label);
            pred.push(predicted);
            predictions.push(PredictionRecord {
                id: inst.id.clone(),
                student_id: inst.student_id.clone(),
                fold,
                probability,
                predicted,
                gold: inst.label,
            });
        }
        folds.push(FoldResult {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            metrics: pair_metrics(&gold, &pred)?,
        });
    }
    Ok(summarize(folds, predictions))
}

/// K-fold evaluation of the logistic-regression baseline over averaged
/// word-vector features, under the same folds and augmentation protocol.
pub fn cross_validate_baseline(
    instances: &[TrainingInstance],
    table: &VectorTable,
    settings: &CvSettings,
) -> Result<CvOutcome> {
    let plan = settings.plan(instances)?;
    let featurize = |inst: &TrainingInstance| FeatureInstance {
        id: inst.id.clone(),
        student_id: inst.student_id.clone(),
        features: ndarray::Array1::from_vec(avg_word_vectors(
            &inst.original,
            &inst.revised,
            table,
        )),
        label: inst.label,
    };
    let mut folds = Vec::with_capacity(plan.k);
    let mut predictions = Vec::with_capacity(instances.len());
    for fold in 0..plan.k {
        let (train, test) = settings.training_split(instances, &plan, fold)?;
        let features: Vec<FeatureInstance> = train.iter().map(featurize).collect();
        let model = train_logreg_baseline(&features, settings.seed)?;
        let mut gold = Vec::with_capacity(test.len());
        let mut pred = Vec::with_capacity(test.len());
        for inst in &test {
            let feats = featurize(inst);
            let (probability, predicted) = model.predict(feats.features.as_slice().unwrap());
            gold.push(inst.label);
            pred.push(predicted);
            predictions.push(PredictionRecord {
                id: inst.id.clone(),
                student_id: inst.student_id.clone(),
                fold,
                probability,
                predicted,
                gold: inst.label,
            });
        }
        folds.push(FoldResult {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            metrics: pair_metrics(&gold, &pred)?,
        });
    }
    Ok(summarize(folds, predictions))
}

/// One correlation cell of the extrinsic table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: f64,
    pub p: f64,
    pub significant: bool,
}

/// Extrinsic results for one label source (gold or one model).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtrinsicEntry {
    pub model: String,
    /// `None` when the count vector is constant (correlation undefined).
    pub desirable: Option<CorrelationCell>,
    pub undesirable: Option<CorrelationCell>,
    /// Whether the desirable-count correlation is significant-positive
    /// exactly when gold's is. `None` on the gold row itself.
    pub consistent_with_gold: Option<bool>,
}

/// The full extrinsic comparison for one (profile, purpose) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtrinsicComparison {
    pub students: usize,
    /// Students dropped for missing improvement scores.
    pub excluded_students: usize,
    pub entries: Vec<ExtrinsicEntry>,
}

const SIGNIFICANCE_LEVEL: f64 = 0.05;

fn correlation_cell(x: &[f64], y: &[f64]) -> Result<Option<CorrelationCell>> {
    match pearson_r(x, y) {
        Ok((r, p)) => Ok(Some(CorrelationCell {
            r,
            p,
            significant: p < SIGNIFICANCE_LEVEL,
        })),
        // A constant count vector has no defined correlation; report an
        // empty cell rather than failing the run.
        Err(Error::ZeroVariance { side: "x" }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn sig_positive(cell: &Option<CorrelationCell>) -> bool {
    cell.map(|c| c.significant && c.r > 0.0).unwrap_or(false)
}

/// Correlate per-student desirable/undesirable revision counts with the
/// essay improvement score, for gold labels and each model's predictions.
/// Students without an improvement score are excluded (their number is
/// reported); a constant improvement vector is an error.
pub fn extrinsic_eval(
    students: &[String],
    improvements: &BTreeMap<String, i64>,
    gold_records: &[PredictionRecord],
    models: &[(String, Vec<PredictionRecord>)],
    normalize_counts: bool,
) -> Result<ExtrinsicComparison> {
    let scored: Vec<&String> = students
        .iter()
        .filter(|s| improvements.contains_key(*s))
        .collect();
    let excluded = students.len() - scored.len();
    if scored.len() < 3 {
        return Err(Error::TooFewInstances {
            have: scored.len(),
            need: 3,
        });
    }
    let y: Vec<f64> = scored.iter().map(|s| improvements[*s] as f64).collect();

    let count_vectors = |records: &[PredictionRecord], source: LabelSource| -> (Vec<f64>, Vec<f64>) {
        let counts = per_student_counts(records, students, source);
        let mut xd = Vec::with_capacity(scored.len());
        let mut xu = Vec::with_capacity(scored.len());
        for s in &scored {
            let (d, u) = counts[*s];
            if normalize_counts {
                let total = (d + u) as f64;
                if total > 0.0 {
                    xd.push(d as f64 / total);
                    xu.push(u as f64 / total);
                } else {
                    xd.push(0.0);
                    xu.push(0.0);
                }
            } else {
                xd.push(d as f64);
                xu.push(u as f64);
            }
        }
        (xd, xu)
    };

    let (gold_d, gold_u) = count_vectors(gold_records, LabelSource::Gold);
    let gold_desirable = correlation_cell(&gold_d, &y)?;
    let gold_undesirable = correlation_cell(&gold_u, &y)?;
    let gold_sig_pos = sig_positive(&gold_desirable);

    let mut entries = vec![ExtrinsicEntry {
        model: "gold".to_string(),
        desirable: gold_desirable,
        undesirable: gold_undesirable,
        consistent_with_gold: None,
    }];
    for (name, records) in models {
        let (xd, xu) = count_vectors(records, LabelSource::Predicted);
        let desirable = correlation_cell(&xd, &y)?;
        let undesirable = correlation_cell(&xu, &y)?;
        entries.push(ExtrinsicEntry {
            model: name.clone(),
            consistent_with_gold: Some(sig_positive(&desirable) == gold_sig_pos),
            desirable,
            undesirable,
        });
    }
    Ok(ExtrinsicComparison {
        students: students.len(),
        excluded_students: excluded,
        entries,
    })
}
