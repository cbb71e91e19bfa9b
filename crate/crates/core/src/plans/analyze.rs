use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{PlanError, PlanUnit, Strategy};
use crate::metrics::{lexical_overlap, rouge_n};
use crate::text::{rouge_tokens, word_count, word_tokenize};

/// One line of a plan file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub doc_id: String,
    pub query_id: String,
    pub strategy: Strategy,
    pub plan_text: String,
    #[serde(default)]
    pub units: Vec<PlanUnit>,
}

/// One line of a summary file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub doc_id: String,
    pub query_id: String,
    pub summary: String,
}

/// Plan properties of one strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub plans: usize,
    /// Mean of plan words over summary words.
    pub length_ratio: f64,
    /// Mean ROUGE-1 F1 of plan against summary.
    pub summary_overlap: f64,
    /// Mean lexical overlap over pairs of plans of the same document.
    /// Absent when no document has two plans.
    pub cross_query_mean: Option<f64>,
    pub cross_query_max: Option<f64>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Per-strategy plan statistics. Every plan must have a summary with the
/// same `doc_id` and `query_id`.
pub fn analyze_plans(
    plans: &[PlanRecord],
    summaries: &[SummaryRecord],
) -> Result<BTreeMap<Strategy, PlanStats>, PlanError> {
    let lookup: HashMap<(&str, &str), &str> = summaries
        .iter()
        .map(|s| ((s.doc_id.as_str(), s.query_id.as_str()), s.summary.as_str()))
        .collect();
    let orphans: Vec<String> = plans
        .iter()
        .filter(|p| !lookup.contains_key(&(p.doc_id.as_str(), p.query_id.as_str())))
        .map(|p| format!("{}/{}", p.doc_id, p.query_id))
        .collect();
    if !orphans.is_empty() {
        return Err(PlanError::Orphans(orphans));
    }

    let mut by_strategy: BTreeMap<Strategy, Vec<&PlanRecord>> = BTreeMap::new();
    for p in plans {
        by_strategy.entry(p.strategy).or_default().push(p);
    }

    let mut out = BTreeMap::new();
    for (strategy, group) in by_strategy {
        let mut ratios = Vec::with_capacity(group.len());
        let mut overlaps = Vec::with_capacity(group.len());
        let mut by_doc: BTreeMap<&str, Vec<Vec<String>>> = BTreeMap::new();
        for p in &group {
            let summary = lookup[&(p.doc_id.as_str(), p.query_id.as_str())];
            let summary_words = word_count(summary);
            ratios.push(if summary_words == 0 {
                0.0
            } else {
                word_count(&p.plan_text) as f64 / summary_words as f64
            });
            overlaps.push(rouge_n(&rouge_tokens(&p.plan_text), &rouge_tokens(summary), 1).f1);
            by_doc.entry(&p.doc_id).or_default().push(word_tokenize(&p.plan_text));
        }
        let mut cross = Vec::new();
        for doc_plans in by_doc.values() {
            for (i, a) in doc_plans.iter().enumerate() {
                for b in &doc_plans[i + 1..] {
                    cross.push(lexical_overlap(a, b));
                }
            }
        }
        let (cross_query_mean, cross_query_max) = if cross.is_empty() {
            (None, None)
        } else {
            (Some(mean(&cross)), cross.iter().copied().reduce(f64::max))
        };
        out.insert(
            strategy,
            PlanStats {
                plans: group.len(),
                length_ratio: mean(&ratios),
                summary_overlap: mean(&overlaps),
                cross_query_mean,
                cross_query_max,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(doc: &str, query: &str, text: &str) -> PlanRecord {
        PlanRecord {
            doc_id: doc.into(),
            query_id: query.into(),
            strategy: Strategy::Keywords,
            plan_text: text.into(),
            units: vec![],
        }
    }

    fn summary(doc: &str, query: &str, text: &str) -> SummaryRecord {
        SummaryRecord {
            doc_id: doc.into(),
            query_id: query.into(),
            summary: text.into(),
        }
    }

    #[test]
    fn hand_computed() {
        let summaries = [
            summary("d", "q1", "a b c d"),
            summary("d", "q2", "a b e f"),
            summary("e", "q1", "x y"),
        ];
        let plans = [plan("d", "q1", "a | b"), plan("d", "q2", "a | e"), plan("e", "q1", "z")];
        let stats = &analyze_plans(&plans, &summaries).unwrap()[&Strategy::Keywords];
        assert_eq!(stats.plans, 3);
        assert!((stats.length_ratio - (0.5 + 0.5 + 0.5) / 3.0).abs() < 1e-12);
        // F1: 2/3, 2/3, 0
        assert!((stats.summary_overlap - (4.0 / 9.0)).abs() < 1e-12);
        assert_eq!(stats.cross_query_mean, Some(0.5));
        assert_eq!(stats.cross_query_max, Some(0.5));
    }

    #[test]
    fn duplicates_and_singletons() {
        let summaries = [summary("d", "q1", "a b"), summary("d", "q2", "a b")];
        let dup = [plan("d", "q1", "a b"), plan("d", "q2", "a b")];
        assert_eq!(
            analyze_plans(&dup, &summaries).unwrap()[&Strategy::Keywords].cross_query_max,
            Some(1.0)
        );
        let single = [plan("d", "q1", "a b")];
        let stats = analyze_plans(&single, &summaries).unwrap()[&Strategy::Keywords];
        assert_eq!(stats.cross_query_mean, None);
        assert_eq!(stats.cross_query_max, None);
    }

    #[test]
    fn orphans_are_errors() {
        let err = analyze_plans(&[plan("x", "q", "a")], &[summary("d", "q", "a")]).unwrap_err();
        assert!(matches!(err, PlanError::Orphans(ids) if ids == ["x/q"]));
    }
}
