use std::path::PathBuf;

use gapq::plans::{extract_blueprint, extract_content_questions, extract_keywords_plan, Plan, Strategy};
use gapq::qg::RecordedBackend;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/socratic")
        .join(name)
}

fn setup() -> (String, RecordedBackend) {
    let summary = std::fs::read_to_string(data("summary.txt")).unwrap().trim().to_string();
    let backend = RecordedBackend::load(&[data("fixtures.jsonl")]).unwrap();
    (summary, backend)
}

#[test]
fn content_questions_match_reference_strings() {
    let (summary, backend) = setup();
    let plan = extract_content_questions(&summary, &backend).unwrap();
    assert_eq!(
        plan.text,
        "How did Sarah use the Socratic method? What were the benefits of the Socratic method? What did Sarah think of the method?"
    );
}

#[test]
fn keywords_match_reference_strings() {
    let (summary, backend) = setup();
    let plan = extract_keywords_plan(&summary, &backend).unwrap();
    assert_eq!(
        plan.text,
        "Group discussion | Sarah | Socratic method | questions | thinking | assumptions || method | classmates | understanding | disagreement || studies"
    );
}

#[test]
fn blueprint_has_reference_prefix() {
    let (summary, backend) = setup();
    let plan = extract_blueprint(&summary, &backend).unwrap();
    assert!(plan.text.starts_with(
        "What type of discussion did Sarah have about a philosophical concept? Group discussion | Who used the Socratic method? Sarah | What method did Sarah use to stimulate critical thinking? Socratic method | What did Sarah ask in the Socratic method? questions | What did Sarah clarify in the Socratic method? assumptions"
    ));
    // sentence 2 keeps classmates after rheme drops "method"; sentence 3 is rescued by coverage
    let tail: Vec<_> = plan.units[5..]
        .iter()
        .map(|u| (u.sentence_index, u.answer.clone().unwrap()))
        .collect();
    assert_eq!(tail, [(1, "classmates".to_string()), (2, "studies".to_string())]);
    let parsed = Plan::parse(Strategy::BlueprintQa, &plan.text).unwrap();
    assert_eq!(parsed.content(), plan.content());
}

#[test]
fn expected_file_agrees() {
    let (summary, backend) = setup();
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data("expected.json")).unwrap()).unwrap();
    for strategy in Strategy::ALL {
        let plan = gapq::plans::extract_plan(strategy, &summary, &backend).unwrap();
        assert_eq!(expected[strategy.name()], plan.text.as_str(), "{strategy}");
    }
}
