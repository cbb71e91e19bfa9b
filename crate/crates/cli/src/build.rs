use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gapq::builder::{build_dataset, BuildConfig, BuildError, BuildReport, Mode};
use gapq::corpus::{RecordKind, RecordReader};
use gapq::qg::Backend;

use crate::config::{backend_spec, ensure_distinct, sibling, BackendArgs, FileConfig};
use crate::io::{open, write_json, AtomicFile};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorpusKind {
    Prose,
    Dialogue,
}

impl From<CorpusKind> for RecordKind {
    fn from(k: CorpusKind) -> Self {
        match k {
            CorpusKind::Prose => RecordKind::Prose,
            CorpusKind::Dialogue => RecordKind::Dialogue,
        }
    }
}

/// Build a pretraining dataset from a JSONL corpus.
#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Input corpus, one JSON record per line.
    #[arg(long, value_name = "PATH")]
    pub corpus: PathBuf,
    /// Output dataset (JSONL).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Build report (JSON). Default: <out>.report.json.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// TOML file with defaults for any option below.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Gap sentence ratio. Default 0.45.
    #[arg(long)]
    pub gsr: Option<f64>,
    /// Share of selected sentences that get masked. Default 0.8.
    #[arg(long)]
    pub mask_rate: Option<f64>,
    /// Share of documents built in the question mode. Default 0.25.
    #[arg(long = "prop", value_name = "RATIO")]
    pub prop: Option<f64>,
    /// Question-bearing mode: ask, answer or ask-and-answer. Default
    /// ask-and-answer.
    #[arg(long, value_name = "MODE")]
    pub question_mode: Option<Mode>,
    /// Source budget in tokens. Default 512.
    #[arg(long)]
    pub input_budget: Option<usize>,
    /// Target budget in tokens. Default 256.
    #[arg(long)]
    pub target_budget: Option<usize>,
    /// Seed of every random choice. Default 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Abort (exit 2) once more than this share of documents is skipped.
    /// Default 0.1.
    #[arg(long)]
    pub max_skip_rate: Option<f64>,
    /// Record kind of the corpus. Default prose.
    #[arg(long, value_enum)]
    pub corpus_kind: Option<CorpusKind>,
    /// Worker threads. Default: available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

impl BuildArgs {
    fn resolve(&self, file: &FileConfig) -> Result<(BuildConfig, usize)> {
        let d = BuildConfig::default();
        let config = BuildConfig {
            gsr: self.gsr.or(file.gsr).unwrap_or(d.gsr),
            mask_rate: self.mask_rate.or(file.mask_rate).unwrap_or(d.mask_rate),
            ask_answer_proportion: self.prop.or(file.prop).unwrap_or(d.ask_answer_proportion),
            question_mode: self.question_mode.or(file.question_mode).unwrap_or(d.question_mode),
            input_budget: self.input_budget.or(file.input_budget).unwrap_or(d.input_budget),
            target_budget: self.target_budget.or(file.target_budget).unwrap_or(d.target_budget),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
            backend: backend_spec(&self.backend, file, &self.out)?,
            corpus_kind: self
                .corpus_kind
                .map(RecordKind::from)
                .or(file.corpus_kind)
                .unwrap_or(d.corpus_kind),
            max_skip_rate: self.max_skip_rate.or(file.max_skip_rate).unwrap_or(d.max_skip_rate),
        };
        config.validate()?;
        let workers = self
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        Ok((config, workers))
    }
}

fn print_summary(report: &BuildReport) {
    eprintln!(
        "{} records, {} documents: {} instances written, {} skipped",
        report.records, report.documents, report.emitted, report.skipped
    );
}

pub fn run(args: BuildArgs) -> Result<u8> {
    let file = FileConfig::load(args.config.as_deref())?;
    let (config, workers) = args.resolve(&file)?;
    let report_path = args.report.clone().unwrap_or_else(|| sibling(&args.out, "report.json"));
    let mut paths = vec![
        ("corpus", args.corpus.as_path()),
        ("out", &args.out),
        ("report", &report_path),
    ];
    if let Some(cache) = &config.backend.cache {
        paths.push(("cache", cache));
    }
    ensure_distinct(&paths)?;

    let records = RecordReader::new(open(&args.corpus)?);
    let backend = Backend::from_spec(&config.backend).context("setting up the question backend")?;
    let mut out = AtomicFile::create(&args.out)?;
    log::info!("building {} with {workers} workers", args.out.display());
    match build_dataset(records, out.writer(), &config, &backend, workers) {
        Ok(report) => {
            out.commit()?;
            write_json(&report_path, &report)?;
            print_summary(&report);
            Ok(0)
        }
        Err(BuildError::SkipRateExceeded {
            rate,
            limit,
            seen,
            report,
        }) => {
            write_json(&report_path, &report)?;
            print_summary(&report);
            eprintln!(
                "error: aborted after {seen} documents: skip rate {rate:.3} exceeds {limit:.3}; see {}",
                report_path.display()
            );
            Ok(2)
        }
        Err(e) => Err(e).with_context(|| format!("building from {}", args.corpus.display())),
    }
}
