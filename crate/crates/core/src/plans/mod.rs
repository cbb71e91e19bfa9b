//! Finegrained control plans extracted from reference summaries: content
//! questions, keywords and QA blueprints, with the blueprint filters and
//! plan statistics.

mod analyze;
mod extract;
mod filters;

pub use analyze::{analyze_plans, PlanRecord, PlanStats, SummaryRecord};
pub use extract::{
    extract_blueprint, extract_content_questions, extract_keywords_plan, extract_plan, summary_sentences,
};
pub use filters::{
    filter_coverage, filter_rheme, filter_round_trip, normalize_answer, round_trip, score_round_trip, RoundTrip,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qg::BackendError;

/// Separates keywords of one sentence.
pub const KEYWORD_SEP: &str = " | ";
/// Separates the keyword groups of consecutive sentences.
pub const SENTENCE_SEP: &str = " || ";
/// Separates blueprint QA pairs.
pub const PAIR_SEP: &str = " | ";

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("summary has no sentences")]
    EmptySummary,
    #[error("every QA pair was filtered out")]
    EmptyPlan,
    #[error("cannot parse {strategy} plan: {reason}")]
    Parse { strategy: Strategy, reason: String },
    #[error("plans without a matching summary: {}", .0.join(", "))]
    Orphans(Vec<String>),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ContentQuestions,
    Keywords,
    BlueprintQa,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::ContentQuestions, Strategy::Keywords, Strategy::BlueprintQa];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ContentQuestions => "content_questions",
            Strategy::Keywords => "keywords",
            Strategy::BlueprintQa => "blueprint_qa",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    /// Accepts the serialized names and the command-line spellings
    /// `content-questions`, `keywords` and `blueprint`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "content_questions" => Ok(Strategy::ContentQuestions),
            "keywords" => Ok(Strategy::Keywords),
            "blueprint" | "blueprint_qa" => Ok(Strategy::BlueprintQa),
            _ => Err(format!(
                "unknown strategy {s:?}; expected content-questions, keywords or blueprint"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanUnit {
    pub sentence_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keywords: Option<Vec<String>>,
}

impl PlanUnit {
    pub fn question(sentence_index: usize, question: impl Into<String>) -> Self {
        PlanUnit {
            sentence_index,
            question: Some(question.into()),
            answer: None,
            keywords: None,
        }
    }

    pub fn keywords(sentence_index: usize, keywords: Vec<String>) -> Self {
        PlanUnit {
            sentence_index,
            question: None,
            answer: None,
            keywords: Some(keywords),
        }
    }

    pub fn qa(sentence_index: usize, question: impl Into<String>, answer: impl Into<String>) -> Self {
        PlanUnit {
            sentence_index,
            question: Some(question.into()),
            answer: Some(answer.into()),
            keywords: None,
        }
    }
}

/// A QA pair proposed for a blueprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    /// A noun phrase of the summary sentence.
    pub answer: String,
    pub sentence_index: usize,
    pub round_trip: RoundTrip,
}

impl QaPair {
    pub fn new(question: impl Into<String>, answer: impl Into<String>, sentence_index: usize) -> Self {
        QaPair {
            question: question.into(),
            answer: answer.into(),
            sentence_index,
            round_trip: RoundTrip::Unchecked,
        }
    }

    pub fn round_trip_ok(&self) -> bool {
        self.round_trip.passed()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub strategy: Strategy,
    pub units: Vec<PlanUnit>,
    pub text: String,
}

impl Plan {
    pub fn new(strategy: Strategy, units: Vec<PlanUnit>) -> Self {
        let text = serialize_units(strategy, &units);
        Plan { strategy, units, text }
    }

    /// Parses a serialized plan. Blueprint text does not record sentence
    /// boundaries, so parsed blueprint units all get sentence index 0.
    pub fn parse(strategy: Strategy, text: &str) -> Result<Plan, PlanError> {
        let fail = |reason: String| PlanError::Parse { strategy, reason };
        let units = match strategy {
            Strategy::ContentQuestions => {
                let mut units = Vec::new();
                let mut rest = text.trim();
                while !rest.is_empty() {
                    let end = rest
                        .find('?')
                        .ok_or_else(|| fail(format!("trailing text without '?': {rest:?}")))?;
                    units.push(PlanUnit::question(units.len(), &rest[..=end]));
                    rest = rest[end + 1..].trim_start();
                }
                if units.is_empty() {
                    return Err(fail("no questions".into()));
                }
                units
            }
            Strategy::Keywords => text
                .split(SENTENCE_SEP)
                .enumerate()
                .map(|(i, segment)| {
                    let keywords = if segment.trim().is_empty() {
                        Vec::new()
                    } else {
                        segment.split(KEYWORD_SEP).map(|k| k.trim().to_string()).collect()
                    };
                    PlanUnit::keywords(i, keywords)
                })
                .collect(),
            Strategy::BlueprintQa => {
                if text.trim().is_empty() {
                    return Err(fail("no QA pairs".into()));
                }
                text.split(PAIR_SEP)
                    .map(|pair| {
                        let end = pair
                            .find("? ")
                            .ok_or_else(|| fail(format!("pair without \"? \": {pair:?}")))?;
                        Ok(PlanUnit::qa(0, &pair[..=end], pair[end + 2..].trim()))
                    })
                    .collect::<Result<_, PlanError>>()?
            }
        };
        Ok(Plan {
            strategy,
            units,
            text: text.to_string(),
        })
    }

    /// Units with sentence indices cleared, for comparisons that must not
    /// depend on information the text form lacks.
    pub fn content(&self) -> Vec<PlanUnit> {
        self.units
            .iter()
            .map(|u| PlanUnit {
                sentence_index: 0,
                ..u.clone()
            })
            .collect()
    }
}

fn serialize_units(strategy: Strategy, units: &[PlanUnit]) -> String {
    match strategy {
        Strategy::ContentQuestions => units
            .iter()
            .filter_map(|u| u.question.as_deref())
            .collect::<Vec<_>>()
            .join(" "),
        Strategy::Keywords => units
            .iter()
            .map(|u| u.keywords.as_deref().unwrap_or_default().join(KEYWORD_SEP))
            .collect::<Vec<_>>()
            .join(SENTENCE_SEP),
        Strategy::BlueprintQa => units
            .iter()
            .map(|u| {
                format!(
                    "{} {}",
                    u.question.as_deref().unwrap_or_default(),
                    u.answer.as_deref().unwrap_or_default()
                )
            })
            .collect::<Vec<_>>()
            .join(PAIR_SEP),
    }
}
