//! Corpus ingestion: raw records, sentence segmentation, packing into
//! budget-sized documents and third-person rewriting of dialogue turns.

mod chunk;
mod dialogue;
mod record;
mod segment;

pub use chunk::chunk_document;
pub use dialogue::{concat_dialogues, rewrite_pronouns, to_third_person, DialoguePacker, ThirdPerson};
pub use record::{RawRecord, RecordBody, RecordKind, RecordReader, Turn};
pub use segment::{segment_sentences, SentenceSpan, ABBREVIATIONS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document is empty or whitespace-only")]
    EmptyDocument,
    #[error("dialogue {id} has {speakers} distinct speakers, exactly 2 are supported")]
    UnsupportedDialogue { id: String, speakers: usize },
    #[error("record {id} is {found:?}, expected {expected:?}")]
    WrongKind {
        id: String,
        expected: RecordKind,
        found: RecordKind,
    },
    #[error("input budget must be positive")]
    ZeroBudget,
    #[error("line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error("line {line}: duplicate record id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a document came from: the record that opened it and the index of
/// the chunk cut from that record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub record_id: String,
    pub chunk_index: usize,
}

/// Speaker of a dialogue sentence and the other participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Voice {
    pub speaker: String,
    pub addressee: Option<String>,
}

/// A segmented unit of text ready for gap-sentence selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub sentences: Vec<SentenceSpan>,
    pub origin: Origin,
    /// Set when a single sentence or dialogue had to be cut to fit the budget.
    pub truncated: bool,
    /// One entry per sentence for dialogue documents, empty for prose.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub voices: Vec<Voice>,
}

impl Document {
    /// Segments `text` into a prose document.
    pub fn from_text(id: impl Into<String>, text: impl Into<String>) -> Result<Self, CorpusError> {
        let id = id.into();
        let text = text.into();
        let sentences = segment_sentences(&text)?;
        Ok(Document {
            origin: Origin {
                record_id: id.clone(),
                chunk_index: 0,
            },
            id,
            text,
            sentences,
            truncated: false,
            voices: Vec::new(),
        })
    }

    pub fn sentence(&self, index: usize) -> &str {
        let span = &self.sentences[index];
        &self.text[span.start..span.end]
    }

    pub fn sentence_texts(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(|s| &self.text[s.start..s.end])
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.token_count).sum()
    }

    pub fn is_dialogue(&self) -> bool {
        !self.voices.is_empty()
    }
}
