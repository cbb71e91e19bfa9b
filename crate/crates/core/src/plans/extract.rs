use super::filters::{filter_coverage, filter_rheme, score_round_trip};
use super::{Plan, PlanError, PlanUnit, QaPair, Strategy};
use crate::corpus::segment_sentences;
use crate::qg::{extract_noun_phrases, generate_question, NounPhrase, QaBackend, QgRequest};

/// Sentences of a summary, trimmed.
pub fn summary_sentences(summary: &str) -> Result<Vec<&str>, PlanError> {
    let spans = segment_sentences(summary).map_err(|_| PlanError::EmptySummary)?;
    let sentences: Vec<&str> = spans
        .iter()
        .map(|s| summary[s.start..s.end].trim())
        .filter(|s| !s.is_empty())
        .collect();
    if sentences.is_empty() {
        return Err(PlanError::EmptySummary);
    }
    Ok(sentences)
}

pub fn extract_plan(strategy: Strategy, summary: &str, backend: &dyn QaBackend) -> Result<Plan, PlanError> {
    match strategy {
        Strategy::ContentQuestions => extract_content_questions(summary, backend),
        Strategy::Keywords => extract_keywords_plan(summary, backend),
        Strategy::BlueprintQa => extract_blueprint(summary, backend),
    }
}

/// One question per summary sentence, each generated with the whole
/// summary as context.
pub fn extract_content_questions(summary: &str, backend: &dyn QaBackend) -> Result<Plan, PlanError> {
    let units = summary_sentences(summary)?
        .into_iter()
        .enumerate()
        .map(|(i, sentence)| {
            let req = QgRequest {
                context: summary.to_string(),
                answer_sentence: sentence.to_string(),
            };
            Ok(PlanUnit::question(i, generate_question(backend, &req, i)?.text))
        })
        .collect::<Result<_, PlanError>>()?;
    Ok(Plan::new(Strategy::ContentQuestions, units))
}

fn phrases_per_sentence(summary: &str, backend: &dyn QaBackend) -> Result<Vec<Vec<NounPhrase>>, PlanError> {
    summary_sentences(summary)?
        .into_iter()
        .map(|s| extract_noun_phrases(backend, s).map_err(PlanError::from))
        .collect()
}

/// Every noun phrase of every sentence. A sentence without noun phrases
/// keeps an empty segment so segments line up with sentences.
pub fn extract_keywords_plan(summary: &str, backend: &dyn QaBackend) -> Result<Plan, PlanError> {
    let units = phrases_per_sentence(summary, backend)?
        .into_iter()
        .enumerate()
        .map(|(i, nps)| PlanUnit::keywords(i, nps.into_iter().map(|np| np.text).collect()))
        .collect();
    Ok(Plan::new(Strategy::Keywords, units))
}

/// QA pairs answered by each noun phrase, filtered by round trip, rheme and
/// coverage.
pub fn extract_blueprint(summary: &str, backend: &dyn QaBackend) -> Result<Plan, PlanError> {
    let mut pairs = Vec::new();
    for (i, nps) in phrases_per_sentence(summary, backend)?.into_iter().enumerate() {
        for np in nps {
            let req = QgRequest {
                context: summary.to_string(),
                answer_sentence: np.text.clone(),
            };
            let question = generate_question(backend, &req, i)?;
            pairs.push(QaPair::new(question.text, np.text, i));
        }
    }
    score_round_trip(&mut pairs, backend, summary)?;
    let passed: Vec<QaPair> = pairs.iter().filter(|p| p.round_trip_ok()).cloned().collect();
    let kept = filter_coverage(filter_rheme(passed), &pairs);
    if kept.is_empty() {
        return Err(PlanError::EmptyPlan);
    }
    let units = kept
        .into_iter()
        .map(|p| PlanUnit::qa(p.sentence_index, p.question, p.answer))
        .collect();
    Ok(Plan::new(Strategy::BlueprintQa, units))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qg::HeuristicBackend;
    use crate::text::word_count;

    const SUMMARY: &str = "Sarah used the Socratic method. The method helped her classmates. Sarah enjoyed it.";

    #[test]
    fn sentences() {
        assert_eq!(summary_sentences(SUMMARY).unwrap().len(), 3);
        assert!(matches!(summary_sentences("  "), Err(PlanError::EmptySummary)));
    }

    #[test]
    fn heuristic_content_questions() {
        let plan = extract_content_questions("Sarah used the Socratic method.", &HeuristicBackend).unwrap();
        assert_eq!(plan.units.len(), 1);
        assert!(plan.text.ends_with('?'));
    }

    #[test]
    fn keyword_segments_match_sentences() {
        let plan = extract_keywords_plan(SUMMARY, &HeuristicBackend).unwrap();
        assert_eq!(plan.text.split(" || ").count(), 3);
        assert!(
            plan.text.starts_with("Sarah | the Socratic method || "),
            "{}",
            plan.text
        );
    }

    #[test]
    fn heuristic_blueprint_contains_keywords() {
        let blueprint = extract_blueprint(SUMMARY, &HeuristicBackend).unwrap();
        let keywords = extract_keywords_plan(SUMMARY, &HeuristicBackend).unwrap();
        assert!(
            word_count(&keywords.text) < word_count(&blueprint.text),
            "{}",
            blueprint.text
        );
        for u in &blueprint.units {
            assert!(SUMMARY
                .to_lowercase()
                .contains(&u.answer.as_ref().unwrap().to_lowercase()));
        }
    }
}
