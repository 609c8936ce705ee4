//! Command-line front end: validates corpora, emits extraction artifacts,
//! and drives training and evaluation from a declarative TOML configuration
//! with flag overrides.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use revclass_core::config::ExperimentConfig;
use revclass_core::context::ContextMode;
use revclass_core::corpus::{load_corpus, Profile};
use revclass_core::error::{Error, ErrorCategory};
use revclass_core::models::ModelVariant;
use revclass_core::pipeline;
use revclass_core::revisions::Purpose;

#[derive(Parser)]
#[command(
    name = "revclass",
    version,
    about = "Classify desirable evidence and reasoning revisions between essay drafts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus file and report what it contains
    Validate(ConfigArgs),
    /// Emit extracted revisions with labels as JSONL
    ExtractRevisions(ExtractRevisionsArgs),
    /// Emit revision contexts as JSONL
    ExtractContext(ExtractContextArgs),
    /// Apply synonym augmentation to the configured slice and emit JSONL
    Augment(ConfigArgs),
    /// Train the configured variants on the full slice and save the models
    Train(ConfigArgs),
    /// Cross-validated intrinsic evaluation
    EvalIntrinsic(ConfigArgs),
    /// Correlation of predicted revision counts with essay improvement
    EvalExtrinsic(ConfigArgs),
    /// Full pipeline: extract, evaluate intrinsically and extrinsically
    Run(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration file (TOML); flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// elementary | high_school | college
    #[arg(long)]
    profile: Option<String>,
    /// evidence | reasoning
    #[arg(long)]
    purpose: Option<String>,
    /// Model variant (m, m_sc, m_lc, m_f, m_lc_f); repeatable
    #[arg(long = "variant")]
    variants: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cross-validation fold count
    #[arg(long)]
    folds: Option<usize>,
    /// Disable training-fold augmentation (ablation)
    #[arg(long)]
    no_augment: bool,
    /// Encoder id, e.g. hash:768
    #[arg(long)]
    encoder: Option<String>,
    /// Synonym lexicon (TSV file or dictionary directory)
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Static word-vector table for the baseline
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Include the logistic-regression baseline
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct ExtractRevisionsArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Write here instead of stdout
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractContextArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Context extraction mode: sc | lc
    #[arg(long)]
    mode: String,
    /// Write here instead of stdout
    #[arg(long)]
    file: Option<PathBuf>,
}

impl ConfigArgs {
    /// Materialize the experiment configuration: start from the TOML file
    /// when given, then apply flag overrides.
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                toml::from_str::<ExperimentConfig>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig {
                corpus: self.corpus.clone().ok_or_else(|| {
                    Error::Config("--corpus is required without --config".to_string())
                })?,
                profile: Profile::parse(self.profile.as_deref().ok_or_else(|| {
                    Error::Config("--profile is required without --config".to_string())
                })?)?,
                purpose: Purpose::parse(self.purpose.as_deref().unwrap_or("reasoning"))?,
                variants: vec![ModelVariant::M],
                baseline: false,
                seed: 7,
                folds: 10,
                augment: true,
                lexicon: None,
                vectors: None,
                encoder: "hash:768".to_string(),
                encoder_vocab: None,
                out: PathBuf::from("out"),
                hyper: Default::default(),
                normalize_counts: false,
                group_folds_by_student: false,
            },
        };
        if let Some(corpus) = &self.corpus {
            config.corpus = corpus.clone();
        }
        if let Some(profile) = &self.profile {
            config.profile = Profile::parse(profile)?;
        }
        if let Some(purpose) = &self.purpose {
            config.purpose = Purpose::parse(purpose)?;
        }
        if !self.variants.is_empty() {
            config.variants = self
                .variants
                .iter()
                .map(|v| ModelVariant::parse(v))
                .collect::<Result<_, _>>()?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(folds) = self.folds {
            config.folds = folds;
        }
        if self.no_augment {
            config.augment = false;
        }
        if let Some(encoder) = &self.encoder {
            config.encoder = encoder.clone();
        }
        if let Some(lexicon) = &self.lexicon {
            config.lexicon = Some(lexicon.clone());
        }
        if let Some(vectors) = &self.vectors {
            config.vectors = Some(vectors.clone());
        }
        if self.baseline {
            config.baseline = true;
        }
        Ok(config)
    }
}

fn emit(file: &Option<PathBuf>, payload: &str) -> Result<(), Error> {
    match file {
        Some(path) => fs::write(path, payload).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{payload}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn jsonl<T: serde::Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate(args) => {
            let config = args.resolve()?;
            let pairs = load_corpus(&config.corpus, config.profile)?;
            let sentences: usize = pairs
                .iter()
                .map(|p| p.draft_a.len() + p.draft_b.len())
                .sum();
            let revisions = pipeline::revision_records(&pairs, config.profile)?;
            println!(
                "ok: {} essay pairs, {} sentences, {} evidence/reasoning revisions ({})",
                pairs.len(),
                sentences,
                revisions.len(),
                config.profile
            );
        }
        Command::ExtractRevisions(args) => {
            let config = args.common.resolve()?;
            let pairs = load_corpus(&config.corpus, config.profile)?;
            let records = pipeline::revision_records(&pairs, config.profile)?;
            emit(&args.file, &jsonl(&records))?;
        }
        Command::ExtractContext(args) => {
            let config = args.common.resolve()?;
            let mode = ContextMode::parse(&args.mode)?;
            let pairs = load_corpus(&config.corpus, config.profile)?;
            let purpose = args
                .common
                .purpose
                .as_deref()
                .map(Purpose::parse)
                .transpose()?;
            let records = pipeline::context_records(&pairs, config.profile, mode, purpose)?;
            emit(&args.file, &jsonl(&records))?;
        }
        Command::Augment(args) => {
            let config = args.resolve()?;
            let instances = pipeline::augment_slice(&config)?;
            fs::create_dir_all(&config.out).map_err(|source| Error::Io {
                path: config.out.clone(),
                source,
            })?;
            let path = config.out.join("augmented.jsonl");
            fs::write(&path, jsonl(&instances)).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            println!("wrote {} instances to {}", instances.len(), path.display());
        }
        Command::Train(args) => {
            let config = args.resolve()?;
            let dirs = pipeline::train_full(&config)?;
            for dir in dirs {
                println!("saved {}", dir.display());
            }
        }
        Command::EvalIntrinsic(args) => {
            let config = args.resolve()?;
            let report = pipeline::run_intrinsic(&config)?;
            print!("{}", report.to_csv());
        }
        Command::EvalExtrinsic(args) => {
            let config = args.resolve()?;
            let report = pipeline::run_extrinsic(&config)?;
            print!("{}", report.to_csv());
        }
        Command::Run(args) => {
            let config = args.resolve()?;
            let summary = pipeline::run(&config)?;
            print!("{}", summary.intrinsic.to_csv());
            print!("{}", summary.extrinsic.to_csv());
            println!("artifacts: {}", summary.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (tag, code) = match err.category() {
                ErrorCategory::Config => ("config", 2),
                ErrorCategory::Data => ("data", 3),
                ErrorCategory::Training => ("training", 4),
            };
            eprintln!("revclass: {tag} error: {err}");
            ExitCode::from(code)
        }
    }
}
