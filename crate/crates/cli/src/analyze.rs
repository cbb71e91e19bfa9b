use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use gapq::plans::{analyze_plans, PlanRecord, PlanStats, Strategy, SummaryRecord};
use gapq::stats::{dataset_stats, DatasetStats};

use crate::io::{open, read_jsonl, write_json};

/// Plan statistics per strategy, or dataset statistics with --stats.
#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Plan files written by `gapq plans`. Repeatable.
    #[arg(
        long = "plans",
        value_name = "PATH",
        required_unless_present = "stats",
        conflicts_with = "stats"
    )]
    pub plans: Vec<PathBuf>,
    /// The summaries the plans were extracted from.
    #[arg(
        long,
        value_name = "PATH",
        required_unless_present = "stats",
        conflicts_with = "stats"
    )]
    pub summaries: Option<PathBuf>,
    /// Report dataset statistics of a JSONL file of
    /// {"doc_id", "query", "document", "summary" | "summaries"} examples.
    #[arg(long, value_name = "PATH")]
    pub stats: Option<PathBuf>,
    /// Also write the statistics as JSON.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

fn percent(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{:.1}%", 100.0 * v))
}

pub fn plan_table(stats: &BTreeMap<Strategy, PlanStats>) -> String {
    let mut out = format!(
        "{:<18} {:>6} {:>8} {:>13} {:>11} {:>10}\n",
        "strategy", "plans", "length", "summ_overlap", "cross_mean", "cross_max"
    );
    for (strategy, s) in stats {
        out += &format!(
            "{:<18} {:>6} {:>8} {:>13.1} {:>11} {:>10}\n",
            strategy.name(),
            s.plans,
            percent(Some(s.length_ratio)),
            100.0 * s.summary_overlap,
            percent(s.cross_query_mean),
            percent(s.cross_query_max)
        );
    }
    out
}

pub fn stats_table(s: &DatasetStats) -> String {
    format!(
        "examples            {}\ndocuments           {}\nreferences          {}\nmean_document_words {:.2}\nmean_summary_words  {:.2}\n",
        s.examples, s.documents, s.references, s.mean_document_words, s.mean_summary_words
    )
}

pub fn run(args: AnalyzeArgs) -> Result<u8> {
    if let Some(path) = &args.stats {
        let stats = dataset_stats(open(path)?).with_context(|| format!("reading {}", path.display()))?;
        print!("{}", stats_table(&stats));
        if let Some(json) = &args.json {
            write_json(json, &stats)?;
        }
        return Ok(0);
    }
    let summaries_path = args.summaries.as_ref().expect("clap requires --summaries");
    let summaries: Vec<SummaryRecord> = read_jsonl(summaries_path)?;
    let mut plans: Vec<PlanRecord> = Vec::new();
    for path in &args.plans {
        plans.extend(read_jsonl::<PlanRecord>(path)?);
    }
    let stats = analyze_plans(&plans, &summaries)?;
    print!("{}", plan_table(&stats));
    if let Some(json) = &args.json {
        write_json(json, &stats)?;
    }
    Ok(0)
}
