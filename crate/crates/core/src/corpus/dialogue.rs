use super::chunk::chunk_id;
use super::{
    segment_sentences, CorpusError, Document, Origin, RawRecord, RecordBody, RecordKind, SentenceSpan, Turn, Voice,
};
use crate::text::{squash_whitespace, token_count, truncate_tokens};

fn distinct_speakers(turns: &[Turn]) -> Vec<&str> {
    let mut speakers: Vec<&str> = Vec::new();
    for turn in turns {
        if !speakers.contains(&turn.speaker.as_str()) {
            speakers.push(&turn.speaker);
        }
    }
    speakers
}

fn dialogue_turns(record: &RawRecord) -> Result<&[Turn], CorpusError> {
    match &record.body {
        RecordBody::Dialogue(turns) => Ok(turns),
        RecordBody::Prose(_) => Err(CorpusError::WrongKind {
            id: record.id.clone(),
            expected: RecordKind::Dialogue,
            found: RecordKind::Prose,
        }),
    }
}

/// Pronoun rewriter for a two-speaker dialogue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThirdPerson {
    speakers: [String; 2],
}

pub fn to_third_person(record: &RawRecord) -> Result<ThirdPerson, CorpusError> {
    ThirdPerson::for_record(record)
}

impl ThirdPerson {
    pub fn for_record(record: &RawRecord) -> Result<Self, CorpusError> {
        let speakers = distinct_speakers(dialogue_turns(record)?);
        match speakers[..] {
            [a, b] => Ok(ThirdPerson {
                speakers: [a.to_string(), b.to_string()],
            }),
            _ => Err(CorpusError::UnsupportedDialogue {
                id: record.id.clone(),
                speakers: speakers.len(),
            }),
        }
    }

    pub fn addressee(&self, speaker: &str) -> Option<&str> {
        if speaker == self.speakers[0] {
            Some(&self.speakers[1])
        } else if speaker == self.speakers[1] {
            Some(&self.speakers[0])
        } else {
            None
        }
    }

    /// Rewrites a turn spoken by `speaker`. Returns `None` for strangers.
    pub fn rewrite_turn(&self, speaker: &str, text: &str) -> Option<String> {
        self.addressee(speaker)
            .map(|addressee| rewrite_pronouns(text, speaker, addressee))
    }
}

/// Replaces first- and second-person pronouns in a turn by `speaker`
/// addressed to `addressee`. Verbs are left as they are.
pub fn rewrite_pronouns(text: &str, speaker: &str, addressee: &str) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    let mut rest = text;
    while let Some(start) = rest.find(|c: char| c.is_alphabetic()) {
        out.push_str(&rest[..start]);
        let word_len = rest[start..]
            .find(|c: char| !c.is_alphabetic())
            .unwrap_or(rest.len() - start);
        let word = &rest[start..start + word_len];
        match replacement(word, speaker, addressee) {
            Some(rep) => out.push_str(&match_case(word, rep)),
            None => out.push_str(word),
        }
        rest = &rest[start + word_len..];
    }
    out.push_str(rest);
    out
}

fn replacement(word: &str, speaker: &str, addressee: &str) -> Option<String> {
    let rep = match word.to_lowercase().as_str() {
        "i" | "me" => speaker.to_string(),
        "my" | "mine" => format!("{speaker}'s"),
        "we" | "us" => format!("{speaker} and {addressee}"),
        "you" => addressee.to_string(),
        "your" => format!("{addressee}'s"),
        _ => return None,
    };
    Some(rep)
}

fn match_case(original: &str, rep: String) -> String {
    let upper_initial = original.chars().next().is_some_and(char::is_uppercase);
    let mut chars = rep.chars();
    match chars.next() {
        Some(first) if upper_initial && first.is_lowercase() => first.to_uppercase().chain(chars).collect(),
        _ => rep,
    }
}

struct RenderedLine {
    text: String,
    speaker: String,
    addressee: Option<String>,
}

struct RenderedDialogue {
    record_id: String,
    lines: Vec<RenderedLine>,
    tokens: usize,
    truncated: bool,
}

fn render(record: &RawRecord, budget: usize) -> Result<RenderedDialogue, CorpusError> {
    let turns = dialogue_turns(record)?;
    if turns.is_empty() {
        return Err(CorpusError::EmptyDocument);
    }
    let speakers = distinct_speakers(turns);
    let addressee_of = |speaker: &str| match speakers[..] {
        [a, b] if speaker == a => Some(b.to_string()),
        [a, b] if speaker == b => Some(a.to_string()),
        _ => None,
    };

    let mut lines = Vec::with_capacity(turns.len());
    let mut tokens = 0;
    let mut truncated = false;
    for turn in turns {
        let text = format!("{}: {}", turn.speaker, squash_whitespace(&turn.text));
        let text = text.trim_end().to_string();
        let n = token_count(&text);
        if tokens + n > budget {
            truncated = true;
            if lines.is_empty() {
                let (kept, _) = truncate_tokens(&text, budget);
                tokens = token_count(kept);
                lines.push(RenderedLine {
                    text: kept.to_string(),
                    speaker: turn.speaker.clone(),
                    addressee: addressee_of(&turn.speaker),
                });
            }
            break;
        }
        tokens += n;
        lines.push(RenderedLine {
            text,
            speaker: turn.speaker.clone(),
            addressee: addressee_of(&turn.speaker),
        });
    }
    Ok(RenderedDialogue {
        record_id: record.id.clone(),
        lines,
        tokens,
        truncated,
    })
}

fn assemble(dialogues: Vec<RenderedDialogue>) -> Document {
    let mut text = String::new();
    let mut sentences = Vec::new();
    let mut voices = Vec::new();
    for (d, dialogue) in dialogues.iter().enumerate() {
        for (l, line) in dialogue.lines.iter().enumerate() {
            if d > 0 || l > 0 {
                text.push_str(if l == 0 { "\n\n" } else { "\n" });
            }
            let base = text.len();
            text.push_str(&line.text);
            // a rendered line always has its speaker label, so it is never blank
            for span in segment_sentences(&line.text).unwrap_or_default() {
                sentences.push(SentenceSpan {
                    start: base + span.start,
                    end: base + span.end,
                    token_count: span.token_count,
                });
                voices.push(Voice {
                    speaker: line.speaker.clone(),
                    addressee: line.addressee.clone(),
                });
            }
        }
    }
    let first = &dialogues[0].record_id;
    Document {
        id: chunk_id(first, 0),
        text,
        sentences,
        origin: Origin {
            record_id: first.clone(),
            chunk_index: 0,
        },
        truncated: dialogues.iter().any(|d| d.truncated),
        voices,
    }
}

/// Streaming form of [`concat_dialogues`]: feed records in order, collect
/// finished documents as they close.
pub struct DialoguePacker {
    budget: usize,
    pending: Vec<RenderedDialogue>,
    pending_tokens: usize,
}

impl DialoguePacker {
    pub fn new(input_budget: usize) -> Result<Self, CorpusError> {
        if input_budget == 0 {
            return Err(CorpusError::ZeroBudget);
        }
        Ok(DialoguePacker {
            budget: input_budget,
            pending: Vec::new(),
            pending_tokens: 0,
        })
    }

    /// Adds one dialogue. Returns the documents closed by this push (at most
    /// two: the previous batch and an oversized dialogue on its own).
    pub fn push(&mut self, record: &RawRecord) -> Result<Vec<Document>, CorpusError> {
        let rendered = render(record, self.budget)?;
        let mut out = Vec::new();
        if rendered.truncated {
            out.extend(self.flush());
            out.push(assemble(vec![rendered]));
            return Ok(out);
        }
        if self.pending_tokens + rendered.tokens > self.budget {
            out.extend(self.flush());
        }
        self.pending_tokens += rendered.tokens;
        self.pending.push(rendered);
        Ok(out)
    }

    pub fn flush(&mut self) -> Option<Document> {
        if self.pending.is_empty() {
            return None;
        }
        self.pending_tokens = 0;
        Some(assemble(std::mem::take(&mut self.pending)))
    }
}

/// Concatenates whole dialogues, in input order, into documents of at most
/// `input_budget` tokens rendered as `SPEAKER: utterance` lines.
pub fn concat_dialogues(records: &[RawRecord], input_budget: usize) -> Result<Vec<Document>, CorpusError> {
    let mut packer = DialoguePacker::new(input_budget)?;
    let mut docs = Vec::new();
    for record in records {
        docs.extend(packer.push(record)?);
    }
    docs.extend(packer.flush());
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// A two-turn dialogue whose rendering has exactly `tokens` tokens.
    fn dialogue(id: &str, tokens: usize) -> RawRecord {
        // "A: w w ... w" is 2 + words tokens per line
        let half = tokens / 2 - 2;
        let words = |n: usize| vec!["w"; n].join(" ");
        RawRecord::dialogue(id, [("A", words(half)), ("B", words(tokens - 4 - half))])
    }

    #[test]
    fn third_person_rule_table() {
        let rec = RawRecord::dialogue("d", [("Alice", "I agree with you"), ("Bob", "ok")]);
        let tp = to_third_person(&rec).unwrap();
        assert_eq!(
            tp.rewrite_turn("Alice", "I agree with you").unwrap(),
            "Alice agree with Bob"
        );
        assert_eq!(tp.rewrite_turn("Alice", "The plan works").unwrap(), "The plan works");
        assert_eq!(
            tp.rewrite_turn("Bob", "Your idea is mine, we love us, me too. You!")
                .unwrap(),
            "Alice's idea is Bob's, Bob and Alice love Bob and Alice, Bob too. Alice!"
        );
        assert!(tp.rewrite_turn("Carol", "hi").is_none());
    }

    #[test]
    fn pronouns_match_whole_words_only() {
        assert_eq!(
            rewrite_pronouns("Is it mine or myth? Yours? i", "A", "B"),
            "Is it A's or myth? Yours? A"
        );
    }

    #[test]
    fn case_follows_original_word() {
        assert_eq!(rewrite_pronouns("You and you", "ann", "bo"), "Bo and bo");
    }

    #[test]
    fn unsupported_speaker_counts() {
        let three = RawRecord::dialogue("d", [("A", "x"), ("B", "y"), ("C", "z")]);
        assert!(matches!(
            to_third_person(&three),
            Err(CorpusError::UnsupportedDialogue { speakers: 3, .. })
        ));
        let one = RawRecord::dialogue("d", [("A", "x"), ("A", "y")]);
        assert!(matches!(
            to_third_person(&one),
            Err(CorpusError::UnsupportedDialogue { speakers: 1, .. })
        ));
    }

    #[test]
    fn two_small_dialogues_share_a_document() {
        let docs = concat_dialogues(&[dialogue("d1", 200), dialogue("d2", 200)], 512).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].token_count(), 400);
        assert!(!docs[0].truncated);
        assert_eq!(docs[0].id, "d1#0");
        assert_eq!(docs[0].voices.len(), docs[0].sentences.len());
    }

    #[test]
    fn third_dialogue_opens_new_document() {
        let records = [dialogue("d1", 200), dialogue("d2", 200), dialogue("d3", 200)];
        let docs = concat_dialogues(&records, 512).unwrap();
        let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["d1#0", "d3#0"]);
    }

    #[test]
    fn oversized_dialogue_truncated_at_turn_boundary() {
        let docs = concat_dialogues(&[dialogue("d1", 600)], 512).unwrap();
        assert_eq!(docs.len(), 1);
        assert!(docs[0].truncated);
        assert_eq!(docs[0].token_count(), 300);
        assert!(docs[0].text.starts_with("A: "));
        assert!(!docs[0].text.contains("B:"));
    }

    #[test]
    fn oversized_single_turn_is_cut() {
        let rec = RawRecord::dialogue("d", [("A", vec!["w"; 50].join(" ")), ("B", "x".to_string())]);
        let docs = concat_dialogues(&[rec], 10).unwrap();
        assert_eq!(docs[0].token_count(), 10);
        assert!(docs[0].truncated);
    }

    #[test]
    fn empty_stream_and_empty_dialogue() {
        assert!(concat_dialogues(&[], 512).unwrap().is_empty());
        let empty = RawRecord::dialogue::<&str, &str>("d", []);
        assert!(matches!(
            concat_dialogues(&[empty], 512),
            Err(CorpusError::EmptyDocument)
        ));
    }

    #[test]
    fn rendering_format_and_voices() {
        let rec = RawRecord::dialogue("d", [("Alice", "Hi there. How are you?"), ("Bob", "Fine,\n thanks")]);
        let doc = &concat_dialogues(&[rec], 100).unwrap()[0];
        assert_eq!(doc.text, "Alice: Hi there. How are you?\nBob: Fine, thanks");
        let sentences: Vec<&str> = doc.sentence_texts().collect();
        assert_eq!(sentences, ["Alice: Hi there.", "How are you?", "Bob: Fine, thanks"]);
        let speakers: Vec<&str> = doc.voices.iter().map(|v| v.speaker.as_str()).collect();
        assert_eq!(speakers, ["Alice", "Alice", "Bob"]);
        assert_eq!(doc.voices[2].addressee.as_deref(), Some("Alice"));
    }

    proptest! {
        #[test]
        fn rewrite_growth_is_bounded(words in proptest::collection::vec(
            prop_oneof![Just("I"), Just("you"), Just("we"), Just("my"), Just("cat"), Just("runs")], 0..30)
        ) {
            let text = words.join(" ");
            let out = rewrite_pronouns(&text, "Ann", "Bo");
            let matches = words.iter().filter(|w| !matches!(**w, "cat" | "runs")).count();
            let before = token_count(&text) as i64;
            let after = token_count(&out) as i64;
            prop_assert!((after - before).abs() <= 3 * matches as i64);
        }
    }
}
