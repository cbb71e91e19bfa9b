use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Prose,
    Dialogue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordBody {
    Prose(String),
    Dialogue(Vec<Turn>),
}

/// One line of an input corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub id: String,
    pub body: RecordBody,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    id: String,
    kind: RecordKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    turns: Option<Vec<Turn>>,
}

impl RawRecord {
    pub fn prose(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawRecord {
            id: id.into(),
            body: RecordBody::Prose(text.into()),
        }
    }

    pub fn dialogue<S: Into<String>, T: Into<String>>(
        id: impl Into<String>,
        turns: impl IntoIterator<Item = (S, T)>,
    ) -> Self {
        RawRecord {
            id: id.into(),
            body: RecordBody::Dialogue(
                turns
                    .into_iter()
                    .map(|(speaker, text)| Turn {
                        speaker: speaker.into(),
                        text: text.into(),
                    })
                    .collect(),
            ),
        }
    }

    pub fn kind(&self) -> RecordKind {
        match self.body {
            RecordBody::Prose(_) => RecordKind::Prose,
            RecordBody::Dialogue(_) => RecordKind::Dialogue,
        }
    }

    /// Parses one JSON line. `line_no` is only used in error messages.
    pub fn from_json_line(line: &str, line_no: usize) -> Result<Self, CorpusError> {
        let invalid = |reason: String| CorpusError::InvalidRecord { line: line_no, reason };
        let parsed: RecordLine = serde_json::from_str(line).map_err(|e| invalid(e.to_string()))?;
        if parsed.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        let body = match (parsed.kind, parsed.text, parsed.turns) {
            (RecordKind::Prose, Some(text), None) => RecordBody::Prose(text),
            (RecordKind::Dialogue, None, Some(turns)) => RecordBody::Dialogue(turns),
            (RecordKind::Prose, _, _) => return Err(invalid("prose record needs \"text\" and no \"turns\"".into())),
            (RecordKind::Dialogue, _, _) => {
                return Err(invalid("dialogue record needs \"turns\" and no \"text\"".into()))
            }
        };
        Ok(RawRecord { id: parsed.id, body })
    }

    pub fn to_json_line(&self) -> String {
        let (text, turns) = match &self.body {
            RecordBody::Prose(t) => (Some(t.clone()), None),
            RecordBody::Dialogue(t) => (None, Some(t.clone())),
        };
        let line = RecordLine {
            id: self.id.clone(),
            kind: self.kind(),
            text,
            turns,
        };
        serde_json::to_string(&line).expect("record serializes")
    }
}

/// Streams records from newline-delimited JSON, rejecting duplicate ids.
/// Blank lines are skipped.
pub struct RecordReader<R> {
    input: R,
    line_no: usize,
    seen: HashSet<String>,
    buf: String,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(input: R) -> Self {
        RecordReader {
            input,
            line_no: 0,
            seen: HashSet::new(),
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<RawRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            let record = match RawRecord::from_json_line(line, self.line_no) {
                Ok(r) => r,
                Err(e) => return Some(Err(e)),
            };
            if !self.seen.insert(record.id.clone()) {
                return Some(Err(CorpusError::DuplicateId {
                    line: self.line_no,
                    id: record.id,
                }));
            }
            return Some(Ok(record));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_kinds() {
        let prose = RawRecord::from_json_line(r#"{"id":"b1","kind":"prose","text":"Hi."}"#, 1).unwrap();
        assert_eq!(prose, RawRecord::prose("b1", "Hi."));
        let dlg = RawRecord::from_json_line(
            r#"{"id":"d1","kind":"dialogue","turns":[{"speaker":"A","text":"Hi."},{"speaker":"B","text":"Yo."}]}"#,
            1,
        )
        .unwrap();
        assert_eq!(dlg, RawRecord::dialogue("d1", [("A", "Hi."), ("B", "Yo.")]));
        assert_eq!(RawRecord::from_json_line(&dlg.to_json_line(), 1).unwrap(), dlg);
    }

    #[test]
    fn rejects_mixed_or_missing_fields() {
        for bad in [
            r#"{"id":"x","kind":"prose"}"#,
            r#"{"id":"x","kind":"prose","text":"a","turns":[]}"#,
            r#"{"id":"x","kind":"dialogue","text":"a"}"#,
            r#"{"id":"","kind":"prose","text":"a"}"#,
            r#"{"id":"x","kind":"poem","text":"a"}"#,
            r#"{"id":"x","kind":"prose","text":"a","extra":1}"#,
            "not json",
        ] {
            let err = RawRecord::from_json_line(bad, 3).unwrap_err();
            assert!(matches!(err, CorpusError::InvalidRecord { line: 3, .. }), "{bad}");
        }
    }

    #[test]
    fn reader_reports_line_numbers_and_duplicates() {
        let input =
            "{\"id\":\"a\",\"kind\":\"prose\",\"text\":\"x\"}\n\n{\"id\":\"a\",\"kind\":\"prose\",\"text\":\"y\"}\n";
        let mut reader = RecordReader::new(input.as_bytes());
        assert!(reader.next().unwrap().is_ok());
        match reader.next().unwrap() {
            Err(CorpusError::DuplicateId { line, id }) => {
                assert_eq!(line, 3);
                assert_eq!(id, "a");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(reader.next().is_none());
    }
}
