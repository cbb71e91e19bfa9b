//! Settings shared by subcommands: the optional TOML file, backend flags and
//! their precedence (flag, then file, then built-in default).

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::Args;
use gapq::builder::Mode;
use gapq::corpus::RecordKind;
use gapq::qg::{BackendKind, BackendSpec, ENDPOINT_ENV};
use serde::Deserialize;

/// Keys accepted in a `--config` file. Paths are relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gsr: Option<f64>,
    pub mask_rate: Option<f64>,
    #[serde(alias = "ask_answer_proportion")]
    pub prop: Option<f64>,
    pub question_mode: Option<Mode>,
    pub input_budget: Option<usize>,
    pub target_budget: Option<usize>,
    pub seed: Option<u64>,
    pub max_skip_rate: Option<f64>,
    pub corpus_kind: Option<RecordKind>,
    pub workers: Option<usize>,
    pub backend: Option<String>,
    pub fixtures: Option<Vec<PathBuf>>,
    pub cache: Option<PathBuf>,
    /// Seconds.
    pub timeout: Option<f64>,
    pub max_retries: Option<u32>,
    /// Seconds.
    pub backoff: Option<f64>,
    pub max_in_flight: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(fixtures) = &mut config.fixtures {
            for f in fixtures.iter_mut() {
                *f = base.join(&*f);
            }
        }
        if let Some(cache) = &mut config.cache {
            *cache = base.join(&*cache);
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Question backend: heuristic, recorded, or the http:// URL of a model
    /// service. Default heuristic. The GAPQ_BACKEND_URL environment
    /// variable replaces the URL of a remote backend.
    #[arg(long, value_name = "KIND|URL")]
    pub backend: Option<String>,
    /// Recorded responses (JSONL) for the recorded backend. Repeatable.
    #[arg(long = "fixtures", value_name = "PATH")]
    pub fixtures: Vec<PathBuf>,
    /// Response cache of the remote backend. Default: beside the output.
    #[arg(long, value_name = "PATH")]
    pub cache: Option<PathBuf>,
    /// Per-request timeout of the remote backend, in seconds.
    #[arg(long, value_name = "SECS")]
    pub timeout: Option<f64>,
    /// Retries after a failed remote request.
    #[arg(long)]
    pub max_retries: Option<u32>,
    /// Initial retry delay in seconds; doubles per retry.
    #[arg(long, value_name = "SECS")]
    pub backoff: Option<f64>,
    /// Bound on concurrent remote requests.
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

fn seconds(name: &str, value: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(value).with_context(|| format!("{name} must be a non-negative number of seconds"))
}

/// Resolves the backend. `output` places the default remote cache.
pub fn backend_spec(args: &BackendArgs, file: &FileConfig, output: &Path) -> Result<BackendSpec> {
    let kind = args
        .backend
        .as_deref()
        .or(file.backend.as_deref())
        .unwrap_or("heuristic");
    let mut spec = BackendSpec::parse(kind)?;
    spec.fixtures = if args.fixtures.is_empty() {
        file.fixtures.clone().unwrap_or_default()
    } else {
        args.fixtures.clone()
    };
    if let Some(t) = args.timeout.or(file.timeout) {
        spec.timeout = seconds("timeout", t)?;
    }
    if let Some(b) = args.backoff.or(file.backoff) {
        spec.backoff = seconds("backoff", b)?;
    }
    if let Some(r) = args.max_retries.or(file.max_retries) {
        spec.max_retries = r;
    }
    if let Some(m) = args.max_in_flight.or(file.max_in_flight) {
        spec.max_in_flight = m;
    }
    match spec.kind {
        BackendKind::Remote => {
            if let Ok(url) = std::env::var(ENDPOINT_ENV) {
                if !url.is_empty() {
                    log::info!("{ENDPOINT_ENV} overrides the backend endpoint with {url}");
                    spec.endpoint = Some(url);
                }
            }
            spec.cache = Some(
                args.cache
                    .clone()
                    .or_else(|| file.cache.clone())
                    .unwrap_or_else(|| sibling(output, "qg-cache.jsonl")),
            );
        }
        BackendKind::Recorded if spec.fixtures.is_empty() => bail!("the recorded backend needs --fixtures"),
        _ => {}
    }
    spec.validate()?;
    Ok(spec)
}

/// `out.jsonl` -> `out.jsonl.<suffix>` in the same directory.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

/// Fails when two of the given paths name the same file.
pub fn ensure_distinct(paths: &[(&str, &Path)]) -> Result<()> {
    let canon = |p: &Path| {
        let abs = std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
        match (abs.parent().and_then(|d| d.canonicalize().ok()), abs.file_name()) {
            (Some(dir), Some(name)) => dir.join(name),
            _ => abs,
        }
    };
    for (i, (a, pa)) in paths.iter().enumerate() {
        for (b, pb) in &paths[i + 1..] {
            if canon(pa) == canon(pb) {
                bail!("--{a} and --{b} both point to {}", pa.display());
            }
        }
    }
    Ok(())
}
