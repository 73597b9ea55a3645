//! Sentence-proximity relation baseline.
//!
//! Entity spans come from an external tagger. Every host is linked to every
//! dopant that occurs in the same sentence, so the baseline's quality rests
//! entirely on the sentence splitter and the tagger.

use std::collections::HashSet;
use std::fs;
use std::ops::Range;
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{DopingRecord, FieldLabel};

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// One sentence; `start..end` are char offsets into the source text and
/// `text` is exactly that slice, trailing whitespace included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Sentence {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// Rule-based splitter: a sentence ends at `.`, `!` or `?` (plus any closing
/// brackets or quotes) followed by whitespace and an uppercase letter or
/// digit (after any opening bracket or quote), unless the token carrying the
/// period is a known abbreviation.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

fn parse_list(s: &str) -> impl Iterator<Item = String> + '_ {
    s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_owned)
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        SentenceSplitter { abbreviations: parse_list(DEFAULT_ABBREVIATIONS).collect() }
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I: IntoIterator<Item = String>>(abbreviations: I) -> Self {
        SentenceSplitter { abbreviations: abbreviations.into_iter().collect() }
    }

    /// Adds the abbreviations listed in `path` (one per line, `#` comments).
    pub fn extend_from_file(mut self, path: &Path) -> Result<Self> {
        self.abbreviations.extend(parse_list(&fs::read_to_string(path)?));
        Ok(self)
    }

    pub fn is_abbreviation(&self, token: &str) -> bool {
        self.abbreviations.contains(token.trim_start_matches(['(', '[', '{', '"', '\'']))
    }

    pub fn split(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut out = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < n {
            if !matches!(chars[i], '.' | '!' | '?') {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < n && matches!(chars[j], ')' | ']' | '"' | '\'' | '\u{201d}' | '\u{2019}') {
                j += 1;
            }
            let mut k = j;
            while k < n && chars[k].is_whitespace() {
                k += 1;
            }
            let mut first = k;
            while first < n && matches!(chars[first], '(' | '[' | '"' | '\'' | '\u{201c}' | '\u{2018}') {
                first += 1;
            }
            let boundary = k > j && first < n && (chars[first].is_uppercase() || chars[first].is_ascii_digit()) && {
                let token_start = chars[..=i].iter().rposition(|c| c.is_whitespace()).map_or(0, |p| p + 1);
                let token: String = chars[token_start..=i].iter().collect();
                chars[i] != '.' || !self.is_abbreviation(&token)
            };
            if boundary {
                out.push(Sentence { text: chars[start..k].iter().collect(), start, end: k });
                start = k;
            }
            i = k.max(i + 1);
        }
        if start < n {
            out.push(Sentence { text: chars[start..].iter().collect(), start, end: n });
        }
        out
    }
}

static DEFAULT_SPLITTER: LazyLock<SentenceSplitter> = LazyLock::new(SentenceSplitter::default);

/// Splits with the shipped abbreviation list.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    DEFAULT_SPLITTER.split(text)
}

/// A host or dopant mention found by an external tagger. Offsets are char
/// offsets into the passage, end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NerSpan {
    pub text: String,
    pub field: FieldLabel,
    pub char_start: usize,
    pub char_end: usize,
}

/// Reads one span per line, skipping blank lines.
pub fn parse_spans_jsonl(s: &str) -> Result<Vec<NerSpan>> {
    s.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Dataset(format!("span line {}: {e}", i + 1))))
        .collect()
}

/// Checks spans against their passage: host or dopant fields only, offsets in
/// range, text equal to the slice, and no overlaps within a field.
pub fn validate_spans(text: &str, spans: &[NerSpan]) -> Result<()> {
    let chars: Vec<char> = text.chars().collect();
    for s in spans {
        if !matches!(s.field, FieldLabel::Host | FieldLabel::Dopant) {
            return Err(Error::InvalidArgument(format!("span {:?} has field {}", s.text, s.field)));
        }
        if s.char_start >= s.char_end || s.char_end > chars.len() {
            return Err(Error::InvalidArgument(format!(
                "span {:?} has offsets {}..{} outside a passage of {} chars",
                s.text,
                s.char_start,
                s.char_end,
                chars.len()
            )));
        }
        let slice: String = chars[s.char_start..s.char_end].iter().collect();
        if slice != s.text {
            return Err(Error::InvalidArgument(format!(
                "span {:?} does not match passage text {:?} at {}..{}",
                s.text, slice, s.char_start, s.char_end
            )));
        }
    }
    for field in [FieldLabel::Host, FieldLabel::Dopant] {
        let mut ranges: Vec<(usize, usize)> =
            spans.iter().filter(|s| s.field == field).map(|s| (s.char_start, s.char_end)).collect();
        ranges.sort_unstable();
        if let Some(w) = ranges.windows(2).find(|w| w[1].0 < w[0].1) {
            return Err(Error::InvalidArgument(format!("{field} spans {:?} and {:?} overlap", w[0], w[1])));
        }
    }
    Ok(())
}

/// Links every host to every dopant sharing its sentence.
///
/// Hosts and dopants appear in the record in passage order; the result does
/// not depend on the order of `spans`.
pub fn proximity_link(spans: &[NerSpan], sentences: &[Sentence]) -> Result<DopingRecord> {
    let mut sorted: Vec<&NerSpan> = spans.iter().collect();
    sorted.sort_by(|a, b| {
        (a.char_start, a.char_end, a.field, &a.text).cmp(&(b.char_start, b.char_end, b.field, &b.text))
    });

    let mut record = DopingRecord::default();
    let mut members: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); sentences.len()];
    for span in sorted {
        let at = sentences.partition_point(|s| s.end <= span.char_start);
        let inside = sentences.get(at).is_some_and(|s| s.start <= span.char_start && span.char_end <= s.end);
        if !inside {
            return Err(Error::InvalidArgument(format!(
                "span {:?} at {}..{} is not inside any sentence",
                span.text, span.char_start, span.char_end
            )));
        }
        match span.field {
            FieldLabel::Host => {
                members[at].0.push(record.hosts.len());
                record.hosts.push(span.text.clone());
            }
            FieldLabel::Dopant => {
                members[at].1.push(record.dopants.len());
                record.dopants.push(span.text.clone());
            }
            other => return Err(Error::InvalidArgument(format!("span {:?} has field {other}", span.text))),
        }
    }
    for (hosts, dopants) in &members {
        for &h in hosts {
            for &d in dopants {
                record.links.insert((h, d));
            }
        }
    }
    Ok(record)
}

/// Validates the spans, splits the passage and links.
pub fn link_passage(splitter: &SentenceSplitter, text: &str, spans: &[NerSpan]) -> Result<DopingRecord> {
    validate_spans(text, spans)?;
    proximity_link(spans, &splitter.split(text))
}
