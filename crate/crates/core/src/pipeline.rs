//! End-to-end orchestration: ingest, extract, context, folds, augmentation,
//! training, and both evaluations, with all artifacts written to disk.
//! Identical configurations produce byte-identical report payloads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::{augment_training_fold, AugmentationPolicy, SynonymLexicon};
use crate::config::ExperimentConfig;
use crate::context::ContextMode;
use crate::corpus::{compute_improvement, load_corpus, EssayPair, Profile};
use crate::encode::{build_encoder, Encoder, VectorTable};
use crate::error::{Error, Result};
use crate::eval::report::{ExtrinsicReport, IntrinsicReport, IntrinsicRow};
use crate::eval::{
    cross_validate_baseline, cross_validate_model, extrinsic_eval, make_folds,
    make_folds_by_student, CvOutcome, CvSettings, PredictionRecord,
};
use crate::models::{
    assemble_dataset, build_model, save_model, HyperParams, ModelDims, ModelManifest, Provenance,
    TrainingInstance,
};
use crate::revisions::{derive_operations, extract_revisions, Purpose, Revision};
use crate::seeding;

/// One row of the `extract-revisions` artifact. Rows are 1-based here, as
/// in all reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub student_id: String,
    pub row: usize,
    pub operation: String,
    pub purpose: String,
    pub code: String,
    pub label: String,
}

/// One row of the `extract-context` artifact (1-based rows).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextRecord {
    pub student_id: String,
    pub row: usize,
    pub context1: Vec<String>,
    pub context2: Vec<String>,
}

/// Reproducibility manifest embedded in every artifact directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub corpus_fingerprint: String,
    pub crate_version: String,
    pub profile: String,
    pub purpose: String,
    pub variants: Vec<String>,
    pub baseline: bool,
    pub seed: u64,
    pub folds: usize,
    pub augment: bool,
    pub encoder_id: String,
    pub normalize_counts: bool,
    pub group_folds_by_student: bool,
    pub hyper: HyperParams,
}

/// What `run` returns to the caller in addition to the files on disk.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub intrinsic: IntrinsicReport,
    pub extrinsic: ExtrinsicReport,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The corpus with everything the evaluations need precomputed.
pub struct LoadedCorpus {
    pub pairs: Vec<EssayPair>,
    /// All students, in file order.
    pub students: Vec<String>,
    /// Improvement per student where computable; students with missing
    /// scores are simply absent.
    pub improvements: BTreeMap<String, i64>,
}

pub fn load_for_run(config: &ExperimentConfig) -> Result<LoadedCorpus> {
    let pairs = load_corpus(&config.corpus, config.profile)?;
    let students: Vec<String> = pairs.iter().map(|p| p.student_id.clone()).collect();
    let mut improvements = BTreeMap::new();
    for pair in &pairs {
        match compute_improvement(pair) {
            Ok(value) => {
                improvements.insert(pair.student_id.clone(), value);
            }
            Err(Error::MissingScore { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(LoadedCorpus {
        pairs,
        students,
        improvements,
    })
}

fn pair_revisions(pair: &EssayPair, profile: Profile) -> Result<Vec<Revision>> {
    let units = derive_operations(&pair.alignment, &pair.draft_a, &pair.draft_b);
    extract_revisions(&units, &pair.revisions, profile, &pair.student_id)
}

/// Build classifier instances for one purpose, realizing contexts with the
/// given extraction mode (variants without context leave the fields empty).
pub fn build_instances(
    pairs: &[EssayPair],
    profile: Profile,
    purpose: Purpose,
    context_mode: Option<ContextMode>,
) -> Result<Vec<TrainingInstance>> {
    let mut out = Vec::new();
    for pair in pairs {
        let units = derive_operations(&pair.alignment, &pair.draft_a, &pair.draft_b);
        let revisions = extract_revisions(&units, &pair.revisions, profile, &pair.student_id)?;
        let feedback = pair.feedback_text();
        for revision in revisions {
            if revision.purpose != purpose {
                continue;
            }
            let unit = revision.unit;
            let original = unit
                .index_a
                .map(|i| pair.draft_a[i].clone())
                .unwrap_or_default();
            let revised = unit
                .index_b
                .map(|i| pair.draft_b[i].clone())
                .unwrap_or_default();
            let (context1, context2) = match context_mode {
                Some(mode) => {
                    let ctx = mode.extract(unit.row_index, &units, &pair.draft_a, &pair.draft_b);
                    let (c1, c2) = ctx.joined();
                    (Some(c1), Some(c2))
                }
                None => (None, None),
            };
            out.push(TrainingInstance {
                id: format!("{}:r{}", pair.student_id, unit.row_index),
                student_id: pair.student_id.clone(),
                original,
                revised,
                context1,
                context2,
                feedback: feedback.clone(),
                label: revision.label,
                provenance: Provenance::Original,
            });
        }
    }
    Ok(out)
}

/// Rows of the `extract-revisions` artifact for the whole corpus (both
/// purposes), in corpus order.
pub fn revision_records(pairs: &[EssayPair], profile: Profile) -> Result<Vec<RevisionRecord>> {
    let mut out = Vec::new();
    for pair in pairs {
        for revision in pair_revisions(pair, profile)? {
            out.push(RevisionRecord {
                student_id: pair.student_id.clone(),
                row: revision.unit.row_index + 1,
                operation: revision.unit.operation.as_str().to_string(),
                purpose: revision.purpose.as_str().to_string(),
                code: revision.code.as_str().to_string(),
                label: revision.label.as_str().to_string(),
            });
        }
    }
    Ok(out)
}

/// Rows of the `extract-context` artifact: one record per evidence or
/// reasoning revision, in corpus order.
pub fn context_records(
    pairs: &[EssayPair],
    profile: Profile,
    mode: ContextMode,
    purpose: Option<Purpose>,
) -> Result<Vec<ContextRecord>> {
    let mut out = Vec::new();
    for pair in pairs {
        let units = derive_operations(&pair.alignment, &pair.draft_a, &pair.draft_b);
        for revision in extract_revisions(&units, &pair.revisions, profile, &pair.student_id)? {
            if purpose.is_some_and(|p| p != revision.purpose) {
                continue;
            }
            let ctx = mode.extract(
                revision.unit.row_index,
                &units,
                &pair.draft_a,
                &pair.draft_b,
            );
            out.push(ContextRecord {
                student_id: pair.student_id.clone(),
                row: revision.unit.row_index + 1,
                context1: ctx.context1,
                context2: ctx.context2,
            });
        }
    }
    Ok(out)
}

fn jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}

struct RunContext {
    encoder: Box<dyn Encoder>,
    lexicon: Option<SynonymLexicon>,
    vectors: Option<VectorTable>,
    policy: AugmentationPolicy,
}

fn prepare(config: &ExperimentConfig) -> Result<RunContext> {
    config.validate()?;
    let encoder = build_encoder(&config.encoder, config.encoder_vocab.as_deref())?;
    let lexicon = match &config.lexicon {
        Some(path) => Some(SynonymLexicon::load(path)?),
        None => None,
    };
    let vectors = match &config.vectors {
        Some(path) => Some(VectorTable::load(path)?),
        None => None,
    };
    Ok(RunContext {
        encoder,
        lexicon,
        vectors,
        policy: AugmentationPolicy::default(),
    })
}

fn manifest_for(config: &ExperimentConfig) -> Result<RunManifest> {
    let corpus_bytes = fs::read(&config.corpus).map_err(|source| Error::Io {
        path: config.corpus.clone(),
        source,
    })?;
    Ok(RunManifest {
        config_hash: sha256_hex(config.canonical_json().as_bytes()),
        corpus_fingerprint: sha256_hex(&corpus_bytes),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        profile: config.profile.as_str().to_string(),
        purpose: config.purpose.as_str().to_string(),
        variants: config.variants.iter().map(|v| v.as_str().to_string()).collect(),
        baseline: config.baseline,
        seed: config.seed,
        folds: config.folds,
        augment: config.augment,
        encoder_id: config.encoder.clone(),
        normalize_counts: config.normalize_counts,
        group_folds_by_student: config.group_folds_by_student,
        hyper: config.hyper.clone(),
    })
}

/// Cross-validate the baseline (when enabled) and every configured variant.
/// Returns intrinsic rows plus per-model out-of-fold predictions, in report
/// order.
fn cv_all(
    config: &ExperimentConfig,
    ctx: &RunContext,
    corpus: &LoadedCorpus,
) -> Result<(Vec<IntrinsicRow>, Vec<(String, CvOutcome)>)> {
    let settings = CvSettings {
        k: config.folds,
        seed: config.seed,
        augment: config.augment,
        lexicon: ctx.lexicon.as_ref(),
        policy: &ctx.policy,
        group_by_student: config.group_folds_by_student,
    };
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    if config.baseline {
        let instances = build_instances(&corpus.pairs, config.profile, config.purpose, None)?;
        let table = ctx
            .vectors
            .as_ref()
            .expect("validated config has vectors when baseline is on");
        let outcome = cross_validate_baseline(&instances, table, &settings)?;
        rows.push(IntrinsicRow::from_outcome("logr", &outcome));
        outcomes.push(("logr".to_string(), outcome));
    }
    for variant in &config.variants {
        let instances = build_instances(
            &corpus.pairs,
            config.profile,
            config.purpose,
            variant.context_mode(),
        )?;
        let outcome = cross_validate_model(
            &instances,
            config.profile,
            *variant,
            ctx.encoder.as_ref(),
            &config.hyper,
            &settings,
        )?;
        rows.push(IntrinsicRow::from_outcome(variant.as_str(), &outcome));
        outcomes.push((variant.as_str().to_string(), outcome));
    }
    Ok((rows, outcomes))
}

fn gold_records(
    instances: &[TrainingInstance],
    plan_folds: &BTreeMap<String, usize>,
) -> Vec<PredictionRecord> {
    let mut records: Vec<PredictionRecord> = instances
        .iter()
        .map(|inst| PredictionRecord {
            id: inst.id.clone(),
            student_id: inst.student_id.clone(),
            fold: plan_folds.get(&inst.id).copied().unwrap_or(0),
            probability: match inst.label {
                crate::revisions::DesirabilityLabel::Desirable => 1.0,
                crate::revisions::DesirabilityLabel::Undesirable => 0.0,
            },
            predicted: inst.label,
            gold: inst.label,
        })
        .collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    records
}

/// Execute the full pipeline and write every artifact under `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    let ctx = prepare(config)?;
    let corpus = load_for_run(config)?;
    let out = &config.out;
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;

    // Stage artifacts: extracted revisions and any contexts variants use.
    let revisions = revision_records(&corpus.pairs, config.profile)?;
    write_file(&out.join("revisions.jsonl"), &jsonl(&revisions))?;
    let modes_used: Vec<ContextMode> = {
        let mut modes: Vec<ContextMode> = config
            .variants
            .iter()
            .filter_map(|v| v.context_mode())
            .collect();
        modes.sort_by_key(|m| m.as_str());
        modes.dedup();
        modes
    };
    for mode in modes_used {
        let records = context_records(&corpus.pairs, config.profile, mode, Some(config.purpose))?;
        write_file(
            &out.join(format!("context_{}.jsonl", mode.as_str())),
            &jsonl(&records),
        )?;
    }

    // Cross-validation for every model.
    let (rows, outcomes) = cv_all(config, &ctx, &corpus)?;
    let intrinsic = IntrinsicReport {
        profile: config.profile.as_str().to_string(),
        purpose: config.purpose.as_str().to_string(),
        folds: config.folds,
        seed: config.seed,
        augmented: config.augment,
        rows,
    };
    write_file(
        &out.join("intrinsic.json"),
        &serde_json::to_string_pretty(&intrinsic).expect("report serializes"),
    )?;
    write_file(&out.join("intrinsic.csv"), &intrinsic.to_csv())?;

    // Out-of-fold predictions, one line per (model, instance).
    let mut prediction_lines = String::new();
    for (model, outcome) in &outcomes {
        for record in &outcome.predictions {
            #[derive(Serialize)]
            struct Line<'a> {
                model: &'a str,
                #[serde(flatten)]
                record: &'a PredictionRecord,
            }
            prediction_lines.push_str(
                &serde_json::to_string(&Line { model, record }).expect("record serializes"),
            );
            prediction_lines.push('\n');
        }
    }
    write_file(&out.join("predictions.jsonl"), &prediction_lines)?;

    // Extrinsic correlations against gold.
    let base_instances = build_instances(&corpus.pairs, config.profile, config.purpose, None)?;
    let plan = if config.group_folds_by_student {
        make_folds_by_student(&base_instances, config.folds, config.seed)?
    } else {
        make_folds(&base_instances, config.folds, config.seed)?
    };
    let gold = gold_records(&base_instances, &plan.assignments);
    let models: Vec<(String, Vec<PredictionRecord>)> = outcomes
        .iter()
        .map(|(name, outcome)| (name.clone(), outcome.predictions.clone()))
        .collect();
    let comparison = extrinsic_eval(
        &corpus.students,
        &corpus.improvements,
        &gold,
        &models,
        config.normalize_counts,
    )?;
    let extrinsic = ExtrinsicReport {
        profile: config.profile.as_str().to_string(),
        purpose: config.purpose.as_str().to_string(),
        normalized_counts: config.normalize_counts,
        comparison,
    };
    write_file(
        &out.join("extrinsic.json"),
        &serde_json::to_string_pretty(&extrinsic).expect("report serializes"),
    )?;
    write_file(&out.join("extrinsic.csv"), &extrinsic.to_csv())?;

    // Manifest last, so a complete directory always carries one.
    let manifest = manifest_for(config)?;
    write_file(
        &out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;

    Ok(RunSummary {
        out_dir: out.clone(),
        intrinsic,
        extrinsic,
    })
}

/// Cross-validate and write the intrinsic report only.
pub fn run_intrinsic(config: &ExperimentConfig) -> Result<IntrinsicReport> {
    let ctx = prepare(config)?;
    let corpus = load_for_run(config)?;
    fs::create_dir_all(&config.out).map_err(|source| Error::Io {
        path: config.out.clone(),
        source,
    })?;
    let (rows, _) = cv_all(config, &ctx, &corpus)?;
    let intrinsic = IntrinsicReport {
        profile: config.profile.as_str().to_string(),
        purpose: config.purpose.as_str().to_string(),
        folds: config.folds,
        seed: config.seed,
        augmented: config.augment,
        rows,
    };
    write_file(
        &config.out.join("intrinsic.json"),
        &serde_json::to_string_pretty(&intrinsic).expect("report serializes"),
    )?;
    write_file(&config.out.join("intrinsic.csv"), &intrinsic.to_csv())?;
    Ok(intrinsic)
}

/// Cross-validate (for predictions) and write the extrinsic report only.
pub fn run_extrinsic(config: &ExperimentConfig) -> Result<ExtrinsicReport> {
    let ctx = prepare(config)?;
    let corpus = load_for_run(config)?;
    fs::create_dir_all(&config.out).map_err(|source| Error::Io {
        path: config.out.clone(),
        source,
    })?;
    let (_, outcomes) = cv_all(config, &ctx, &corpus)?;
    let base_instances = build_instances(&corpus.pairs, config.profile, config.purpose, None)?;
    let plan = if config.group_folds_by_student {
        make_folds_by_student(&base_instances, config.folds, config.seed)?
    } else {
        make_folds(&base_instances, config.folds, config.seed)?
    };
    let gold = gold_records(&base_instances, &plan.assignments);
    let models: Vec<(String, Vec<PredictionRecord>)> = outcomes
        .iter()
        .map(|(name, outcome)| (name.clone(), outcome.predictions.clone()))
        .collect();
    let comparison = extrinsic_eval(
        &corpus.students,
        &corpus.improvements,
        &gold,
        &models,
        config.normalize_counts,
    )?;
    let extrinsic = ExtrinsicReport {
        profile: config.profile.as_str().to_string(),
        purpose: config.purpose.as_str().to_string(),
        normalized_counts: config.normalize_counts,
        comparison,
    };
    write_file(
        &config.out.join("extrinsic.json"),
        &serde_json::to_string_pretty(&extrinsic).expect("report serializes"),
    )?;
    write_file(&config.out.join("extrinsic.csv"), &extrinsic.to_csv())?;
    Ok(extrinsic)
}

/// Train each configured variant on the full slice and save the models
/// under `out/models/<variant>/`.
pub fn train_full(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let ctx = prepare(config)?;
    let corpus = load_for_run(config)?;
    let manifest = manifest_for(config)?;
    let mut saved = Vec::new();
    for variant in &config.variants {
        let mut instances = build_instances(
            &corpus.pairs,
            config.profile,
            config.purpose,
            variant.context_mode(),
        )?;
        if config.augment {
            let lexicon = ctx
                .lexicon
                .as_ref()
                .expect("validated config has lexicon when augmenting");
            instances = augment_training_fold(
                &instances,
                lexicon,
                &ctx.policy,
                seeding::mix(config.seed, 0x0f51),
            );
        }
        let assembled = assemble_dataset(&instances, *variant, ctx.encoder.as_ref())?;
        let dims = ModelDims {
            input_dim: ctx.encoder.dim(),
            hidden: config.hyper.hidden_size,
        };
        let mut model = build_model(
            dims,
            seeding::mix_str(config.seed, &format!("{variant}:init:full")),
        );
        model.train(
            &assembled,
            &config.hyper,
            seeding::mix_str(config.seed, &format!("{variant}:train:full")),
        )?;
        let dir = config.out.join("models").join(variant.as_str());
        save_model(
            &dir,
            &model,
            &ModelManifest {
                variant: variant.as_str().to_string(),
                hyper: config.hyper.clone(),
                seed: config.seed,
                encoder_id: config.encoder.clone(),
                data_fingerprint: manifest.corpus_fingerprint.clone(),
                input_dim: dims.input_dim,
                hidden: dims.hidden,
                param_count: model.param_count(),
            },
        )?;
        saved.push(dir);
    }
    Ok(saved)
}

/// Apply the augmentation policy to every instance of the slice (an
/// inspection utility; fold-scoped augmentation lives in the evaluator).
pub fn augment_slice(config: &ExperimentConfig) -> Result<Vec<TrainingInstance>> {
    config.validate()?;
    let lexicon_path = config
        .lexicon
        .as_ref()
        .ok_or_else(|| Error::Config("augment requires a lexicon".to_string()))?;
    let lexicon = SynonymLexicon::load(lexicon_path)?;
    let corpus = load_for_run(config)?;
    let instances = build_instances(&corpus.pairs, config.profile, config.purpose, None)?;
    Ok(augment_training_fold(
        &instances,
        &lexicon,
        &AugmentationPolicy::default(),
        config.seed,
    ))
}
