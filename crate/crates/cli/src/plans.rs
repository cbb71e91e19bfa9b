use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use gapq::plans::{extract_plan, PlanError, PlanRecord, Strategy, SummaryRecord};
use gapq::qg::Backend;

use crate::config::{backend_spec, ensure_distinct, BackendArgs, FileConfig};
use crate::io::{open, AtomicFile};

/// Extract control plans from reference summaries.
#[derive(Debug, Args)]
pub struct PlansArgs {
    /// Plan strategy: content-questions, keywords or blueprint. Repeat to
    /// write several strategies into one file.
    #[arg(long = "strategy", value_name = "STRATEGY", required = true)]
    pub strategies: Vec<Strategy>,
    /// Summaries, one {"doc_id", "query_id", "summary"} object per line.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Plan file (JSONL).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// TOML file with backend defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

pub fn run(args: PlansArgs) -> Result<u8> {
    let file = FileConfig::load(args.config.as_deref())?;
    let spec = backend_spec(&args.backend, &file, &args.out)?;
    let mut paths = vec![("in", args.input.as_path()), ("out", &args.out)];
    if let Some(cache) = &spec.cache {
        paths.push(("cache", cache));
    }
    ensure_distinct(&paths)?;
    let backend = Backend::from_spec(&spec).context("setting up the question backend")?;

    let input = open(&args.input)?;
    let mut out = AtomicFile::create(&args.out)?;
    let (mut written, mut empty) = (0usize, 0usize);
    for (i, line) in input.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", args.input.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SummaryRecord =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", args.input.display(), i + 1))?;
        for &strategy in &args.strategies {
            match extract_plan(strategy, &record.summary, &backend) {
                Ok(plan) => {
                    let line = PlanRecord {
                        doc_id: record.doc_id.clone(),
                        query_id: record.query_id.clone(),
                        strategy,
                        plan_text: plan.text,
                        units: plan.units,
                    };
                    serde_json::to_writer(out.writer(), &line)?;
                    out.writer().write_all(b"\n")?;
                    written += 1;
                }
                Err(e @ (PlanError::EmptyPlan | PlanError::EmptySummary)) => {
                    log::warn!("{}/{} {strategy}: {e}", record.doc_id, record.query_id);
                    empty += 1;
                }
                Err(e) => {
                    return Err(e)
                        .with_context(|| format!("{} plan for {}/{}", strategy, record.doc_id, record.query_id))
                }
            }
        }
    }
    out.commit()?;
    eprintln!("{written} plans written, {empty} empty");
    Ok(0)
}
