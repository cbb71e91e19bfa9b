use super::{segment_sentences, CorpusError, Document, Origin, RawRecord, RecordBody, RecordKind, SentenceSpan};
use crate::text::truncate_tokens;

/// Greedily packs whole sentences of a prose record into documents of at
/// most `input_budget` word tokens.
///
/// A sentence longer than the budget gets a document of its own, cut after
/// `input_budget` tokens and flagged `truncated`.
pub fn chunk_document(record: &RawRecord, input_budget: usize) -> Result<Vec<Document>, CorpusError> {
    let RecordBody::Prose(text) = &record.body else {
        return Err(CorpusError::WrongKind {
            id: record.id.clone(),
            expected: RecordKind::Prose,
            found: record.kind(),
        });
    };
    if input_budget == 0 {
        return Err(CorpusError::ZeroBudget);
    }
    let spans = segment_sentences(text)?;

    let mut docs = Vec::new();
    let mut current: Vec<SentenceSpan> = Vec::new();
    let mut current_tokens = 0;
    for span in spans {
        if span.token_count > input_budget {
            if !current.is_empty() {
                docs.push(make_chunk(record, text, &current, docs.len()));
                current.clear();
                current_tokens = 0;
            }
            let (kept, _) = truncate_tokens(&text[span.start..span.end], input_budget);
            let index = docs.len();
            docs.push(Document {
                id: chunk_id(&record.id, index),
                text: kept.to_string(),
                sentences: vec![SentenceSpan {
                    start: 0,
                    end: kept.len(),
                    token_count: input_budget,
                }],
                origin: Origin {
                    record_id: record.id.clone(),
                    chunk_index: index,
                },
                truncated: true,
                voices: Vec::new(),
            });
            continue;
        }
        if current_tokens + span.token_count > input_budget {
            docs.push(make_chunk(record, text, &current, docs.len()));
            current.clear();
            current_tokens = 0;
        }
        current_tokens += span.token_count;
        current.push(span);
    }
    if !current.is_empty() {
        docs.push(make_chunk(record, text, &current, docs.len()));
    }
    Ok(docs)
}

pub(crate) fn chunk_id(record_id: &str, index: usize) -> String {
    format!("{record_id}#{index}")
}

fn make_chunk(record: &RawRecord, text: &str, spans: &[SentenceSpan], index: usize) -> Document {
    let base = spans[0].start;
    let end = spans[spans.len() - 1].end;
    Document {
        id: chunk_id(&record.id, index),
        text: text[base..end].to_string(),
        sentences: spans
            .iter()
            .map(|s| SentenceSpan {
                start: s.start - base,
                end: s.end - base,
                token_count: s.token_count,
            })
            .collect(),
        origin: Origin {
            record_id: record.id.clone(),
            chunk_index: index,
        },
        truncated: false,
        voices: Vec::new(),
    }
}
