//! Pretraining instance assembly in the four modes, budget enforcement and
//! the streaming dataset build.

mod assemble;
mod pipeline;

pub use assemble::{assemble_instance, enforce_budgets, render, InstanceMeta, PretrainInstance};
pub use pipeline::{build_dataset, process_document, BuildReport, Outcome, SkipReason};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, RecordKind};
use crate::gsg::{GsgError, DEFAULT_GSR, DEFAULT_MASK_RATE};
use crate::qg::{BackendError, BackendSpec};
use crate::rng::keyed_rng;
use crate::text::{ANSWER_TOKEN, ASK_ANSWER_TOKEN, ASK_TOKEN};

pub const DEFAULT_PROPORTION: f64 = 0.25;
pub const DEFAULT_INPUT_BUDGET: usize = 512;
pub const DEFAULT_TARGET_BUDGET: usize = 256;
pub const DEFAULT_MAX_SKIP_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Reconstruct,
    Ask,
    Answer,
    AskAndAnswer,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Reconstruct, Mode::Ask, Mode::Answer, Mode::AskAndAnswer];

    /// Token prepended to the source. Reconstruct has none.
    pub fn token(self) -> Option<&'static str> {
        match self {
            Mode::Reconstruct => None,
            Mode::Ask => Some(ASK_TOKEN),
            Mode::Answer => Some(ANSWER_TOKEN),
            Mode::AskAndAnswer => Some(ASK_ANSWER_TOKEN),
        }
    }

    pub fn has_questions(self) -> bool {
        self != Mode::Reconstruct
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Reconstruct => "reconstruct",
            Mode::Ask => "ask",
            Mode::Answer => "answer",
            Mode::AskAndAnswer => "ask_and_answer",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| BuildError::InvalidConfig(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("question count {questions} does not match {sentences} pseudo-summary sentences")]
    QuestionCountMismatch { questions: usize, sentences: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Gsg(#[from] GsgError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("skip rate {rate:.3} exceeds {limit:.3} after {seen} documents")]
    SkipRateExceeded {
        rate: f64,
        limit: f64,
        seen: usize,
        report: Box<BuildReport>,
    },
    #[error("writing dataset: {0}")]
    Output(#[source] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub gsr: f64,
    pub mask_rate: f64,
    /// Share of documents that get a question-bearing mode.
    pub ask_answer_proportion: f64,
    /// Mode used for that share. Ask&Answer unless running an ablation.
    pub question_mode: Mode,
    pub input_budget: usize,
    pub target_budget: usize,
    pub seed: u64,
    pub backend: BackendSpec,
    pub corpus_kind: RecordKind,
    /// Abort once more than this fraction of documents was skipped.
    pub max_skip_rate: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            gsr: DEFAULT_GSR,
            mask_rate: DEFAULT_MASK_RATE,
            ask_answer_proportion: DEFAULT_PROPORTION,
            question_mode: Mode::AskAndAnswer,
            input_budget: DEFAULT_INPUT_BUDGET,
            target_budget: DEFAULT_TARGET_BUDGET,
            seed: 0,
            backend: BackendSpec::heuristic(),
            corpus_kind: RecordKind::Prose,
            max_skip_rate: DEFAULT_MAX_SKIP_RATE,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<(), BuildError> {
        let ratio = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(BuildError::InvalidConfig(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        ratio("gsr", self.gsr)?;
        ratio("mask_rate", self.mask_rate)?;
        ratio("ask_answer_proportion", self.ask_answer_proportion)?;
        ratio("max_skip_rate", self.max_skip_rate)?;
        if self.gsr == 0.0 {
            return Err(BuildError::InvalidConfig("gsr must be greater than 0".into()));
        }
        if self.input_budget == 0 || self.target_budget == 0 {
            return Err(BuildError::InvalidConfig("budgets must be positive".into()));
        }
        if !self.question_mode.has_questions() {
            return Err(BuildError::InvalidConfig(
                "question_mode must be ask, answer or ask_and_answer".into(),
            ));
        }
        self.backend.validate()?;
        Ok(())
    }
}

/// Draws the mode of one document: `question_mode` with probability
/// `ask_answer_proportion`, otherwise reconstruct.
pub fn choose_mode(config: &BuildConfig, doc_id: &str) -> Mode {
    let p = config.ask_answer_proportion;
    if p <= 0.0 {
        return Mode::Reconstruct;
    }
    if p >= 1.0 {
        return config.question_mode;
    }
    if keyed_rng(config.seed, doc_id, "mode").random_bool(p) {
        config.question_mode
    } else {
        Mode::Reconstruct
    }
}
