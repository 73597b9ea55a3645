//! The English-sentence doping schemas.
//!
//! One line per statement, from a closed set of paradigms:
//!
//! ```text
//! The host '<H>' was doped with '<D1>', '<D2>' and '<D3>'.
//! '<D>' is a dopant.
//! The host '<H>' was doped.
//! '<R>' is a possible doped result formula.          (extra schema only)
//! Modifiers of the doping are '<M1>', '<M2>'.        (extra schema only)
//! There is no doping information.
//! ```
//!
//! Apostrophes delimit entities, so entity text may not contain one.

use std::sync::LazyLock;

use regex::Regex;

use super::{Diagnostic, ParseOutcome};
use crate::error::{Error, Result};
use crate::records::{check_entity_text, DopingRecord};

const NO_INFORMATION: &str = "There is no doping information.";

// One quoted entity; lists are split with ENTITY afterwards.
const Q: &str = "'[^'\n]+'";

static LINKED: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"^The host ('[^'\n]+') was doped with ({Q}(?:(?:, {Q})*,? and {Q})?)\.$")).unwrap()
});
static LONE_DOPANT: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"^({Q}) is a dopant\.$")).unwrap());
static LONE_HOST: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"^The host ({Q}) was doped\.$")).unwrap());
static RESULT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^({Q}) is a possible doped result formula\.$")).unwrap());
static MODIFIERS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^Modifiers of the doping are ({Q}(?:, {Q})*)\.$")).unwrap());
static ENTITY: LazyLock<Regex> = LazyLock::new(|| Regex::new("'([^'\n]+)'").unwrap());

/// Encodes a record as English statements; `extra` adds results and
/// modifiers.
pub fn encode_doping_eng(record: &DopingRecord, extra: bool) -> Result<String> {
    record.validate()?;
    for text in record.hosts.iter().chain(&record.dopants).chain(&record.results).chain(&record.modifiers) {
        if text.contains('\'') {
            return Err(Error::InvalidRecord(format!("entity {text:?} contains an apostrophe")));
        }
    }

    let mut lines = Vec::new();
    for (h, host) in record.hosts.iter().enumerate() {
        let dopants: Vec<&str> =
            record.links.iter().filter(|l| l.0 == h).map(|l| record.dopants[l.1].as_str()).collect();
        if !dopants.is_empty() {
            lines.push(format!("The host '{host}' was doped with {}.", quoted_list(&dopants)));
        }
    }
    for (d, dopant) in record.dopants.iter().enumerate() {
        if !record.links.iter().any(|l| l.1 == d) {
            lines.push(format!("'{dopant}' is a dopant."));
        }
    }
    for (h, host) in record.hosts.iter().enumerate() {
        if !record.links.iter().any(|l| l.0 == h) {
            lines.push(format!("The host '{host}' was doped."));
        }
    }
    if extra {
        for result in &record.results {
            lines.push(format!("'{result}' is a possible doped result formula."));
        }
        if !record.modifiers.is_empty() {
            let quoted: Vec<String> = record.modifiers.iter().map(|m| format!("'{m}'")).collect();
            lines.push(format!("Modifiers of the doping are {}.", quoted.join(", ")));
        }
    }

    if lines.is_empty() {
        return Ok(NO_INFORMATION.to_owned());
    }
    Ok(lines.join("\n"))
}

// 'A' / 'A' and 'B' / 'A', 'B' and 'C'
fn quoted_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => format!("'{one}'"),
        [init @ .., last] => {
            let head: Vec<String> = init.iter().map(|s| format!("'{s}'")).collect();
            format!("{} and '{last}'", head.join(", "))
        }
    }
}

/// Decodes English statements; `extra` admits result and modifier lines.
///
/// Lines may come in any order. Repeated host or dopant texts refer to the
/// same entity.
pub fn decode_doping_eng(s: &str, extra: bool) -> ParseOutcome<DopingRecord> {
    decode(s, extra).into()
}

fn decode(s: &str, extra: bool) -> std::result::Result<DopingRecord, Diagnostic> {
    let mut builder = Builder::default();
    let mut no_information = None;
    let mut statements = 0;

    for (i, line) in s.split('\n').enumerate() {
        let n = i + 1;
        if line.is_empty() {
            return Err(Diagnostic::at_line(n, "blank line"));
        }
        statements += 1;
        if line == NO_INFORMATION {
            no_information = Some(n);
        } else if let Some(c) = LINKED.captures(line) {
            let host = builder.host(&c[1], n)?;
            for m in ENTITY.captures_iter(&c[2]) {
                let dopant = builder.dopant(&m[1], n)?;
                builder.record.links.insert((host, dopant));
            }
        } else if let Some(c) = LONE_DOPANT.captures(line) {
            builder.dopant(&c[1], n)?;
        } else if let Some(c) = LONE_HOST.captures(line) {
            builder.host(&c[1], n)?;
        } else if let Some(c) = RESULT.captures(line) {
            if !extra {
                return Err(Diagnostic::at_line(n, "result statements are not part of this schema"));
            }
            let text = entity(&c[1], n)?;
            builder.record.results.push(text);
        } else if let Some(c) = MODIFIERS.captures(line) {
            if !extra {
                return Err(Diagnostic::at_line(n, "modifier statements are not part of this schema"));
            }
            for m in ENTITY.captures_iter(&c[1]) {
                let text = entity(&m[0], n)?;
                builder.record.modifiers.push(text);
            }
        } else {
            return Err(Diagnostic::at_line(n, "no paradigm match"));
        }
    }

    match (statements, no_information) {
        (0, _) => Err(Diagnostic::new("empty completion")),
        (1, Some(_)) => Ok(DopingRecord::default()),
        (_, Some(n)) => Err(Diagnostic::at_line(n, "no-information statement mixed with other statements")),
        (_, None) => Ok(builder.record),
    }
}

#[derive(Default)]
struct Builder {
    record: DopingRecord,
}

impl Builder {
    fn host(&mut self, quoted: &str, line: usize) -> std::result::Result<usize, Diagnostic> {
        let text = entity(quoted, line)?;
        Ok(intern(&mut self.record.hosts, text))
    }

    fn dopant(&mut self, quoted: &str, line: usize) -> std::result::Result<usize, Diagnostic> {
        let text = entity(quoted, line)?;
        Ok(intern(&mut self.record.dopants, text))
    }
}

fn intern(list: &mut Vec<String>, text: String) -> usize {
    match list.iter().position(|t| *t == text) {
        Some(i) => i,
        None => {
            list.push(text);
            list.len() - 1
        }
    }
}

// Strips the delimiting apostrophes and checks the entity invariants.
fn entity(quoted: &str, line: usize) -> std::result::Result<String, Diagnostic> {
    let text = quoted.trim_matches('\'');
    check_entity_text(text, "quoted").map_err(|e| Diagnostic::at_line(line, e.to_string()))?;
    Ok(text.to_owned())
}
