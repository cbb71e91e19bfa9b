//! Dataset statistics for query-focused summarization files: example count,
//! distinct documents and mean lengths in words.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text::word_count;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("document {doc_id} appears with different texts (lines {first} and {line})")]
    ConflictingDocument { doc_id: String, first: usize, line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One query-focused example. References come either as `summaries` or as
/// a single `summary`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub doc_id: String,
    #[serde(default)]
    pub query: String,
    pub document: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub summaries: Vec<String>,
}

impl Example {
    pub fn references(&self) -> impl Iterator<Item = &str> {
        self.summary.iter().chain(&self.summaries).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub examples: usize,
    pub documents: usize,
    pub references: usize,
    /// Mean over distinct documents.
    pub mean_document_words: f64,
    /// Mean over all references of all examples.
    pub mean_summary_words: f64,
}

/// Streams JSONL examples and accumulates their statistics. Documents are
/// identified by `doc_id`; a repeated id must carry the same text.
pub fn dataset_stats<R: BufRead>(input: R) -> Result<DatasetStats, StatsError> {
    let mut seen: HashMap<String, ([u8; 32], usize)> = HashMap::new();
    let mut examples = 0;
    let mut references = 0;
    let mut document_words = 0usize;
    let mut summary_words = 0usize;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: Example = serde_json::from_str(&line).map_err(|e| StatsError::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        let refs: Vec<&str> = ex.references().collect();
        if refs.is_empty() {
            return Err(StatsError::Malformed {
                line: line_no,
                reason: "no reference summary".into(),
            });
        }
        let digest: [u8; 32] = Sha256::digest(ex.document.as_bytes()).into();
        match seen.get(&ex.doc_id) {
            Some((d, _)) if *d == digest => {}
            Some((_, first)) => {
                return Err(StatsError::ConflictingDocument {
                    doc_id: ex.doc_id,
                    first: *first,
                    line: line_no,
                })
            }
            None => {
                document_words += word_count(&ex.document);
                seen.insert(ex.doc_id.clone(), (digest, line_no));
            }
        }
        examples += 1;
        references += refs.len();
        summary_words += refs.iter().map(|r| word_count(r)).sum::<usize>();
    }
    let ratio = |total: usize, n: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    Ok(DatasetStats {
        examples,
        documents: seen.len(),
        references,
        mean_document_words: ratio(document_words, seen.len()),
        mean_summary_words: ratio(summary_words, references),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let data = r#"{"doc_id":"m1","query":"q","document":"a b c d","summary":"x y"}
{"doc_id":"m1","query":"r","document":"a b c d","summary":"x"}

{"doc_id":"m2","query":"q","document":"a b","summaries":["x y z","w"]}
"#;
        let s = dataset_stats(data.as_bytes()).unwrap();
        assert_eq!(s.examples, 3);
        assert_eq!(s.documents, 2);
        assert_eq!(s.references, 4);
        assert_eq!(s.mean_document_words, 3.0);
        assert_eq!(s.mean_summary_words, 7.0 / 4.0);
    }

    #[test]
    fn conflicting_documents() {
        let data = "{\"doc_id\":\"m\",\"document\":\"a\",\"summary\":\"x\"}\n{\"doc_id\":\"m\",\"document\":\"b\",\"summary\":\"x\"}\n";
        assert!(matches!(
            dataset_stats(data.as_bytes()),
            Err(StatsError::ConflictingDocument { first: 1, line: 2, .. })
        ));
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let data = "{\"doc_id\":\"m\",\"document\":\"a\",\"summary\":\"x\"}\n{oops\n";
        assert!(matches!(
            dataset_stats(data.as_bytes()),
            Err(StatsError::Malformed { line: 2, .. })
        ));
        let empty = dataset_stats("".as_bytes()).unwrap();
        assert_eq!(empty.examples, 0);
    }
}
