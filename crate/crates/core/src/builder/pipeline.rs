use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assemble::{assemble_instance, enforce_budgets, strip_label, PretrainInstance};
use super::{choose_mode, BuildConfig, BuildError, Mode};
use crate::corpus::{chunk_document, CorpusError, DialoguePacker, Document, RawRecord, RecordKind, ThirdPerson};
use crate::gsg::{build_pseudo_summary, select_gap_sentences, GsgError};
use crate::qg::{generate_question, QaBackend, QgRequest, Question};
use crate::text::token_count;

/// Documents processed per parallel batch. Fixed so that the point at
/// which a build aborts does not depend on the worker count.
const BATCH_SIZE: usize = 256;
/// The skip-rate limit is only checked mid-run after this many documents.
const ABORT_CHECK_MIN: usize = 1000;
const SKIPPED_ID_SAMPLE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    EmptyDocument,
    UnsupportedDialogue,
    BackendFailure,
    QuestionsOverHalfInputBudget,
    QuestionBlockOverBudget,
    SourceOverBudget,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::EmptyDocument => "empty document",
            SkipReason::UnsupportedDialogue => "dialogue does not have exactly two speakers",
            SkipReason::BackendFailure => "question backend failed",
            SkipReason::QuestionsOverHalfInputBudget => "questions exceed half input budget",
            SkipReason::QuestionBlockOverBudget => "question block exceeds target budget",
            SkipReason::SourceOverBudget => "no room left for the document",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Emitted(Box<PretrainInstance>),
    Skipped {
        id: String,
        mode: Option<Mode>,
        reason: SkipReason,
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub records: usize,
    /// Records dropped before segmentation (empty, or unsupported dialogue).
    pub records_rejected: usize,
    pub documents: usize,
    pub emitted: usize,
    /// Skipped documents plus rejected records.
    pub skipped: usize,
    pub skip_reasons: BTreeMap<SkipReason, usize>,
    /// The first few skipped ids, for debugging.
    pub skipped_ids: Vec<String>,
    /// Drawn mode of every document, emitted or skipped.
    pub mode_counts: BTreeMap<Mode, usize>,
    pub truncated_sources: usize,
    pub truncated_targets: usize,
    pub mean_source_tokens: f64,
    pub mean_target_tokens: f64,
    #[serde(skip)]
    source_tokens: u64,
    #[serde(skip)]
    target_tokens: u64,
}

impl Default for BuildReport {
    fn default() -> Self {
        BuildReport {
            records: 0,
            records_rejected: 0,
            documents: 0,
            emitted: 0,
            skipped: 0,
            skip_reasons: BTreeMap::new(),
            skipped_ids: Vec::new(),
            mode_counts: Mode::ALL.into_iter().map(|m| (m, 0)).collect(),
            truncated_sources: 0,
            truncated_targets: 0,
            mean_source_tokens: 0.0,
            mean_target_tokens: 0.0,
            source_tokens: 0,
            target_tokens: 0,
        }
    }
}

impl BuildReport {
    /// Skipped share of everything that could have produced an instance.
    pub fn skip_rate(&self) -> f64 {
        let units = self.emitted + self.skipped;
        if units == 0 {
            0.0
        } else {
            self.skipped as f64 / units as f64
        }
    }

    fn skip(&mut self, id: &str, reason: SkipReason) {
        self.skipped += 1;
        *self.skip_reasons.entry(reason).or_insert(0) += 1;
        if self.skipped_ids.len() < SKIPPED_ID_SAMPLE {
            self.skipped_ids.push(id.to_string());
        }
    }

    fn record(&mut self, outcome: &Outcome) {
        self.documents += 1;
        match outcome {
            Outcome::Emitted(inst) => {
                *self.mode_counts.entry(inst.mode).or_insert(0) += 1;
                self.emitted += 1;
                self.source_tokens += token_count(&inst.source) as u64;
                self.target_tokens += token_count(&inst.target) as u64;
                self.truncated_sources += usize::from(inst.meta.source_truncated);
                self.truncated_targets += usize::from(inst.meta.target_truncated);
            }
            Outcome::Skipped {
                id,
                mode,
                reason,
                detail,
            } => {
                if let Some(m) = mode {
                    *self.mode_counts.entry(*m).or_insert(0) += 1;
                }
                log::debug!("skipping {id}: {reason}: {detail}");
                self.skip(id, *reason);
            }
        }
    }

    fn finish(&mut self) {
        if self.emitted > 0 {
            self.mean_source_tokens = self.source_tokens as f64 / self.emitted as f64;
            self.mean_target_tokens = self.target_tokens as f64 / self.emitted as f64;
        }
    }
}

/// Runs the whole pipeline on one document. Backend failures and budget
/// violations become skips; anything else is a bug in the caller's input.
pub fn process_document(doc: &Document, config: &BuildConfig, backend: &dyn QaBackend) -> Result<Outcome, BuildError> {
    let mode = choose_mode(config, &doc.id);
    let skipped = |reason, detail: String| Outcome::Skipped {
        id: doc.id.clone(),
        mode: Some(mode),
        reason,
        detail,
    };
    let sel = match select_gap_sentences(doc, config.gsr, config.mask_rate, config.seed) {
        Ok(sel) => sel,
        Err(GsgError::EmptyDocument) => return Ok(skipped(SkipReason::EmptyDocument, String::new())),
        Err(e) => return Err(e.into()),
    };
    let pseudo = build_pseudo_summary(doc, &sel, config.target_budget)?;

    let mut questions: Vec<Question> = Vec::new();
    if mode.has_questions() {
        for (&index, sentence) in pseudo.indices.iter().zip(&pseudo.sentences) {
            let req = QgRequest {
                context: doc.text.clone(),
                answer_sentence: strip_label(doc, index, sentence).to_string(),
            };
            match generate_question(backend, &req, index) {
                Ok(q) => questions.push(q),
                Err(e) => return Ok(skipped(SkipReason::BackendFailure, e.to_string())),
            }
        }
    }

    let instance = assemble_instance(doc, &sel, &pseudo, &questions, mode)?;
    Ok(match enforce_budgets(instance, config) {
        Ok(inst) => Outcome::Emitted(Box::new(inst)),
        Err(reason) => skipped(reason, String::new()),
    })
}

fn write_batch<W: Write>(
    batch: &mut Vec<Document>,
    out: &mut W,
    config: &BuildConfig,
    backend: &dyn QaBackend,
    pool: &rayon::ThreadPool,
    report: &mut BuildReport,
) -> Result<(), BuildError> {
    let outcomes: Vec<Result<Outcome, BuildError>> = pool.install(|| {
        batch
            .par_iter()
            .map(|doc| process_document(doc, config, backend))
            .collect()
    });
    batch.clear();
    for outcome in outcomes {
        let outcome = outcome?;
        if let Outcome::Emitted(inst) = &outcome {
            serde_json::to_writer(&mut *out, inst).map_err(|e| BuildError::Output(e.into()))?;
            out.write_all(b"\n").map_err(BuildError::Output)?;
        }
        report.record(&outcome);
    }
    Ok(())
}

fn check_skip_rate(report: &BuildReport, config: &BuildConfig, final_check: bool) -> Result<(), BuildError> {
    let seen = report.emitted + report.skipped;
    if seen == 0 || (!final_check && seen < ABORT_CHECK_MIN) {
        return Ok(());
    }
    let rate = report.skip_rate();
    if rate > config.max_skip_rate {
        let mut report = report.clone();
        report.finish();
        return Err(BuildError::SkipRateExceeded {
            rate,
            limit: config.max_skip_rate,
            seen,
            report: Box::new(report),
        });
    }
    Ok(())
}

/// Streams records into newline-delimited instances on `out`, in input
/// order, using `workers` threads. Output bytes do not depend on `workers`.
pub fn build_dataset<I, W>(
    records: I,
    out: &mut W,
    config: &BuildConfig,
    backend: &dyn QaBackend,
    workers: usize,
) -> Result<BuildReport, BuildError>
where
    I: IntoIterator<Item = Result<RawRecord, CorpusError>>,
    W: Write,
{
    config.validate()?;
    if workers == 0 {
        return Err(BuildError::InvalidConfig("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BuildError::InvalidConfig(e.to_string()))?;

    let mut report = BuildReport::default();
    let mut packer = match config.corpus_kind {
        RecordKind::Dialogue => Some(DialoguePacker::new(config.input_budget)?),
        RecordKind::Prose => None,
    };
    let mut batch: Vec<Document> = Vec::with_capacity(BATCH_SIZE);
    let reject = |report: &mut BuildReport, id: &str, reason: SkipReason| {
        log::debug!("rejecting record {id}: {reason}");
        report.records_rejected += 1;
        report.skip(id, reason);
    };

    for record in records {
        let record = record?;
        report.records += 1;
        if record.kind() != config.corpus_kind {
            return Err(CorpusError::WrongKind {
                found: record.kind(),
                id: record.id,
                expected: config.corpus_kind,
            }
            .into());
        }
        match &mut packer {
            None => match chunk_document(&record, config.input_budget) {
                Ok(docs) => batch.extend(docs),
                Err(CorpusError::EmptyDocument) => reject(&mut report, &record.id, SkipReason::EmptyDocument),
                Err(e) => return Err(e.into()),
            },
            Some(packer) => {
                if let Err(CorpusError::UnsupportedDialogue { .. }) = ThirdPerson::for_record(&record) {
                    reject(&mut report, &record.id, SkipReason::UnsupportedDialogue);
                    continue;
                }
                match packer.push(&record) {
                    Ok(docs) => batch.extend(docs),
                    Err(CorpusError::EmptyDocument) => reject(&mut report, &record.id, SkipReason::EmptyDocument),
                    Err(e) => return Err(e.into()),
                }
            }
        }
        if batch.len() >= BATCH_SIZE {
            write_batch(&mut batch, out, config, backend, &pool, &mut report)?;
            check_skip_rate(&report, config, false)?;
            if report.documents % (BATCH_SIZE * 40) < BATCH_SIZE {
                log::info!("{} records, {} instances", report.records, report.emitted);
            }
        }
    }
    if let Some(packer) = &mut packer {
        batch.extend(packer.flush());
    }
    write_batch(&mut batch, out, config, backend, &pool, &mut report)?;
    out.flush().map_err(BuildError::Output)?;
    check_skip_rate(&report, config, true)?;
    report.finish();
    Ok(report)
}
