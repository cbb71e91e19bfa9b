use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gapq::metrics::{multi_ref_max, RougeScore, RougeVariant};
use gapq::text::rouge_tokens;
use serde::Serialize;

use crate::io::open;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MultiRef {
    /// Best reference per candidate, by F1.
    Max,
}

/// Score candidates against reference files.
///
/// Every file holds one text per line; line i of each reference file
/// belongs to candidate i.
#[derive(Debug, Args)]
pub struct RougeArgs {
    #[arg(long, value_name = "PATH")]
    pub candidates: PathBuf,
    /// Reference file. Repeat for several references per candidate.
    #[arg(long = "references", value_name = "PATH", required = true)]
    pub references: Vec<PathBuf>,
    /// How to combine several references. Required with more than one
    /// reference file.
    #[arg(long, value_enum)]
    pub multi_ref: Option<MultiRef>,
    /// rouge1, rouge2 or rougeL. Default: all three.
    #[arg(long)]
    pub variant: Option<RougeVariant>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
struct Row {
    variant: RougeVariant,
    /// Means over candidates.
    precision: f64,
    recall: f64,
    f1: f64,
    count: usize,
}

fn lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<std::io::Result<_>>()
        .with_context(|| format!("reading {}", path.display()))
}

pub fn run(args: RougeArgs) -> Result<u8> {
    if args.references.len() > 1 && args.multi_ref.is_none() {
        bail!("{} reference files given; pass --multi-ref max", args.references.len());
    }
    let candidates = lines(&args.candidates)?;
    let mut references = Vec::new();
    for path in &args.references {
        let refs = lines(path)?;
        if refs.len() != candidates.len() {
            bail!(
                "{} has {} lines but {} has {}",
                path.display(),
                refs.len(),
                args.candidates.display(),
                candidates.len()
            );
        }
        references.push(refs);
    }
    let variants: Vec<RougeVariant> = match args.variant {
        Some(v) => vec![v],
        None => RougeVariant::ALL.to_vec(),
    };
    let cand_tokens: Vec<Vec<String>> = candidates.iter().map(|c| rouge_tokens(c)).collect();
    let ref_tokens: Vec<Vec<Vec<String>>> = (0..candidates.len())
        .map(|i| references.iter().map(|r| rouge_tokens(&r[i])).collect())
        .collect();

    let rows: Vec<Row> = variants
        .into_iter()
        .map(|variant| {
            let scores: Vec<RougeScore> = cand_tokens
                .iter()
                .zip(&ref_tokens)
                .map(|(c, refs)| multi_ref_max(c, refs, variant).expect("at least one reference"))
                .collect();
            let n = scores.len().max(1) as f64;
            Row {
                variant,
                precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
                recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
                f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
                count: scores.len(),
            }
        })
        .collect();

    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!("{:<7} {:>9} {:>9} {:>9}", "variant", "precision", "recall", "f1");
        for r in &rows {
            println!(
                "{:<7} {:>9.6} {:>9.6} {:>9.6}",
                r.variant.name(),
                r.precision,
                r.recall,
                r.f1
            );
        }
    }
    Ok(0)
}
