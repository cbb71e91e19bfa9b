use serde::{Deserialize, Serialize};

use super::pipeline::SkipReason;
use super::{BuildConfig, BuildError, Mode};
use crate::corpus::{rewrite_pronouns, Document};
use crate::gsg::{apply_mask, GapSelection, PseudoSummary};
use crate::qg::Question;
use crate::text::{token_count, truncate_tokens, QSEP_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub selected: Vec<usize>,
    pub masked: Vec<usize>,
    pub kept: Vec<usize>,
    /// Sentence indices behind the pseudo-summary in the target.
    pub summary: Vec<usize>,
    pub questions: Vec<Question>,
    /// The document itself was cut while chunking.
    pub document_truncated: bool,
    pub source_truncated: bool,
    pub target_truncated: bool,
}

/// One training example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretrainInstance {
    pub id: String,
    pub mode: Mode,
    pub source: String,
    pub target: String,
    pub meta: InstanceMeta,
    // Unrendered parts, kept so budgets can be enforced on whole units.
    #[serde(skip)]
    document: String,
    #[serde(skip)]
    summary: Vec<String>,
}

fn join_questions(questions: &[Question]) -> String {
    questions.iter().map(|q| q.text.as_str()).collect::<Vec<_>>().join(" ")
}

/// Lays out source and target for `mode` from the masked document, the
/// questions and the pseudo-summary sentences.
pub fn render(mode: Mode, document: &str, questions: &[Question], summary: &[String]) -> (String, String) {
    let summary_text = summary.join(" ");
    match mode {
        Mode::Reconstruct => (document.to_string(), summary_text),
        Mode::Ask => (
            format!("{} {document}", mode.token().unwrap_or_default()),
            join_questions(questions),
        ),
        Mode::Answer => (
            format!(
                "{} {} {document}",
                mode.token().unwrap_or_default(),
                join_questions(questions)
            ),
            summary_text,
        ),
        Mode::AskAndAnswer => (
            format!("{} {document}", mode.token().unwrap_or_default()),
            format!("{} {QSEP_TOKEN} {summary_text}", join_questions(questions)),
        ),
    }
}

/// Sentence `index` of a dialogue document without its speaker label, in
/// the third person. Prose sentences come back unchanged.
pub(crate) fn third_person(doc: &Document, index: usize, text: &str) -> String {
    match doc.voices.get(index) {
        Some(voice) => {
            let text = strip_label(doc, index, text);
            match &voice.addressee {
                Some(addressee) => rewrite_pronouns(text, &voice.speaker, addressee),
                None => text.to_string(),
            }
        }
        None => text.to_string(),
    }
}

/// Drops a leading `SPEAKER: ` label from dialogue sentence text.
pub(crate) fn strip_label<'a>(doc: &Document, index: usize, text: &'a str) -> &'a str {
    match doc.voices.get(index) {
        Some(voice) => text
            .strip_prefix(voice.speaker.as_str())
            .and_then(|rest| rest.strip_prefix(':'))
            .map_or(text, str::trim_start),
        None => text,
    }
}

/// Builds the instance for `mode`. Dialogue questions and summary sentences
/// are rewritten in the third person; the source keeps the dialogue as is.
pub fn assemble_instance(
    doc: &Document,
    sel: &GapSelection,
    pseudo: &PseudoSummary,
    questions: &[Question],
    mode: Mode,
) -> Result<PretrainInstance, BuildError> {
    let mut questions = if mode.has_questions() {
        questions.to_vec()
    } else {
        Vec::new()
    };
    questions.sort_by_key(|q| q.source_index);
    if mode.has_questions() {
        let aligned = questions.len() == pseudo.indices.len()
            && questions.iter().zip(&pseudo.indices).all(|(q, &i)| q.source_index == i);
        if !aligned {
            return Err(BuildError::QuestionCountMismatch {
                questions: questions.len(),
                sentences: pseudo.sentences.len(),
            });
        }
    }
    let masked = apply_mask(doc, sel)?;
    let summary: Vec<String> = pseudo
        .indices
        .iter()
        .zip(&pseudo.sentences)
        .map(|(&i, s)| third_person(doc, i, s))
        .collect();
    for q in &mut questions {
        q.text = third_person(doc, q.source_index, &q.text);
    }
    let (source, target) = render(mode, &masked.text, &questions, &summary);
    Ok(PretrainInstance {
        id: doc.id.clone(),
        mode,
        source,
        target,
        meta: InstanceMeta {
            selected: sel.selected.clone(),
            masked: sel.masked.clone(),
            kept: sel.kept.clone(),
            summary: pseudo.indices.clone(),
            questions,
            document_truncated: doc.truncated,
            source_truncated: false,
            target_truncated: pseudo.truncated,
        },
        document: masked.text,
        summary,
    })
}

impl PretrainInstance {
    /// Masked document and summary sentences. Instances read back from a
    /// dataset file lack them, so they are recovered from the rendered text
    /// (the summary then counts as a single unit).
    fn layout(&self) -> (String, Vec<String>) {
        if !self.document.is_empty() || self.source.is_empty() {
            return (self.document.clone(), self.summary.clone());
        }
        let (prefix, _) = render(self.mode, "", &self.meta.questions, &[]);
        let document = self.source.strip_prefix(prefix.as_str()).unwrap_or(&self.source);
        let summary = match self.mode {
            Mode::Reconstruct | Mode::Answer => vec![self.target.clone()],
            Mode::Ask => Vec::new(),
            Mode::AskAndAnswer => {
                let marker = format!("{QSEP_TOKEN} ");
                vec![self.target.split_once(&marker).map_or("", |(_, s)| s).to_string()]
            }
        };
        (document.to_string(), summary)
    }
}

fn target_has_questions(mode: Mode) -> bool {
    matches!(mode, Mode::Ask | Mode::AskAndAnswer)
}

/// Fits an instance into the input and target budgets.
///
/// The target loses whole trailing summary sentences together with their
/// questions; at least one unit stays. A question block that cannot fit is a
/// skip. The source loses document tokens from its tail; the mode token and
/// prepended questions are never cut, and prepended questions longer than
/// half the input budget are a skip.
pub fn enforce_budgets(instance: PretrainInstance, config: &BuildConfig) -> Result<PretrainInstance, SkipReason> {
    let mut inst = instance;
    let (mut document, mut summary) = inst.layout();
    let mode = inst.mode;

    let units = |q: &[Question], s: &[String]| if mode == Mode::Ask { q.len() } else { s.len() };
    let mut target_tokens = token_count(&render(mode, "", &inst.meta.questions, &summary).1);
    while target_tokens > config.target_budget && units(&inst.meta.questions, &summary) > 1 {
        if target_has_questions(mode) || summary.len() == inst.meta.questions.len() {
            inst.meta.questions.pop();
        }
        if mode != Mode::Ask || summary.len() > inst.meta.questions.len() {
            summary.pop();
            inst.meta.summary.pop();
        }
        inst.meta.target_truncated = true;
        target_tokens = token_count(&render(mode, "", &inst.meta.questions, &summary).1);
    }
    if target_tokens > config.target_budget {
        let question_tokens = match mode {
            Mode::Ask => token_count(&join_questions(&inst.meta.questions)),
            Mode::AskAndAnswer => token_count(&join_questions(&inst.meta.questions)) + 1,
            _ => 0,
        };
        if question_tokens > config.target_budget {
            return Err(SkipReason::QuestionBlockOverBudget);
        }
        inst.meta.target_truncated = true;
    }

    let mode_tokens = usize::from(mode.token().is_some());
    let question_tokens = if mode == Mode::Answer {
        token_count(&join_questions(&inst.meta.questions))
    } else {
        0
    };
    if 2 * question_tokens > config.input_budget {
        return Err(SkipReason::QuestionsOverHalfInputBudget);
    }
    let allowance = config.input_budget.saturating_sub(mode_tokens + question_tokens);
    if allowance == 0 {
        return Err(SkipReason::SourceOverBudget);
    }
    let (kept, cut) = truncate_tokens(&document, allowance);
    if cut {
        document = kept.to_string();
        inst.meta.source_truncated = true;
    }

    let (source, target) = render(mode, &document, &inst.meta.questions, &summary);
    inst.source = source;
    inst.target = target;
    inst.document = document;
    inst.summary = summary;
    Ok(inst)
}
