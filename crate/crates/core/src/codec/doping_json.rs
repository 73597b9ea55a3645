//! The JSON doping schema.
//!
//! ```text
//! {"hosts":{"h0":"ZnO"},"dopants":{"d0":"Al"},"hosts2dopants":{"h0":["d0"]}}
//! ```
//!
//! Hosts and dopants are keyed by their position (`h0..`, `d0..`);
//! `hosts2dopants` lists, for every host that has links, its dopant keys in
//! ascending index order. Results and modifiers are not part of this schema.

use std::collections::BTreeSet;

use super::strict_json::{self, Value};
use super::{Diagnostic, ParseOutcome};
use crate::error::Result;
use crate::records::{check_entity_text, DopingRecord};

const KEYS: [&str; 3] = ["hosts", "dopants", "hosts2dopants"];

pub fn encode_doping_json(record: &DopingRecord) -> Result<String> {
    record.validate()?;
    let mut out = String::from("{\"hosts\":{");
    push_entities(&mut out, 'h', &record.hosts);
    out.push_str("},\"dopants\":{");
    push_entities(&mut out, 'd', &record.dopants);
    out.push_str("},\"hosts2dopants\":{");
    let mut first = true;
    for h in 0..record.hosts.len() {
        let dopants: Vec<usize> = record.links.iter().filter(|l| l.0 == h).map(|l| l.1).collect();
        if dopants.is_empty() {
            continue;
        }
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format!("\"h{h}\":["));
        let keys: Vec<String> = dopants.iter().map(|d| format!("\"d{d}\"")).collect();
        out.push_str(&keys.join(","));
        out.push(']');
    }
    out.push_str("}}");
    Ok(out)
}

fn push_entities(out: &mut String, prefix: char, texts: &[String]) {
    for (i, text) in texts.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("\"{prefix}{i}\":"));
        out.push_str(&serde_json::to_string(text).expect("strings always serialize"));
    }
}

pub fn decode_doping_json(s: &str) -> ParseOutcome<DopingRecord> {
    decode(s).into()
}

fn decode(s: &str) -> std::result::Result<DopingRecord, Diagnostic> {
    let Value::Object(members) = strict_json::parse(s)? else {
        return Err(Diagnostic::new("root must be an object"));
    };
    for (i, (key, _)) in members.iter().enumerate() {
        if !KEYS.contains(&key.as_str()) {
            return Err(Diagnostic::new(format!("unknown key {key:?}")));
        }
        if KEYS[i] != key {
            return Err(Diagnostic::new(format!("key {key:?} out of order")));
        }
    }
    if members.len() < KEYS.len() {
        return Err(Diagnostic::new(format!("missing key {:?}", KEYS[members.len()])));
    }

    let mut it = members.into_iter().map(|(_, v)| v);
    let hosts = entities(it.next().unwrap_or(Value::Null), 'h', "hosts")?;
    let dopants = entities(it.next().unwrap_or(Value::Null), 'd', "dopants")?;
    let Value::Object(relations) = it.next().unwrap_or(Value::Null) else {
        return Err(Diagnostic::at_path("hosts2dopants", "must be an object"));
    };

    let mut links = BTreeSet::new();
    let mut last_host = None;
    for (key, value) in relations {
        let path = format!("hosts2dopants.{key}");
        let h = index_of(&key, 'h')
            .filter(|h| *h < hosts.len())
            .ok_or_else(|| Diagnostic::at_path(&path, format!("dangling host key {key}")))?;
        if last_host.is_some_and(|prev| prev >= h) {
            return Err(Diagnostic::at_path(&path, "host keys out of order"));
        }
        last_host = Some(h);
        let Value::Array(items) = value else {
            return Err(Diagnostic::at_path(&path, "must be a list"));
        };
        if items.is_empty() {
            return Err(Diagnostic::at_path(&path, "empty dopant list"));
        }
        let mut last_dopant = None;
        for item in items {
            let Value::String(dkey) = item else {
                return Err(Diagnostic::at_path(&path, format!("dopant key must be a string, not {}", item.kind())));
            };
            let d = index_of(&dkey, 'd')
                .filter(|d| *d < dopants.len())
                .ok_or_else(|| Diagnostic::at_path(&path, format!("dangling dopant key {dkey}")))?;
            if last_dopant.is_some_and(|prev| prev >= d) {
                return Err(Diagnostic::at_path(&path, "dopant keys out of order"));
            }
            last_dopant = Some(d);
            links.insert((h, d));
        }
    }

    Ok(DopingRecord { hosts, dopants, links, ..Default::default() })
}

fn entities(value: Value, prefix: char, field: &str) -> std::result::Result<Vec<String>, Diagnostic> {
    let Value::Object(members) = value else {
        return Err(Diagnostic::at_path(field, format!("must be an object, not {}", value.kind())));
    };
    let mut texts = Vec::with_capacity(members.len());
    for (i, (key, value)) in members.into_iter().enumerate() {
        if index_of(&key, prefix) != Some(i) {
            return Err(Diagnostic::at_path(field, format!("expected key {prefix}{i}, found {key:?}")));
        }
        let path = format!("{field}.{key}");
        let Value::String(text) = value else {
            return Err(Diagnostic::at_path(path, format!("must be a string, not {}", value.kind())));
        };
        check_entity_text(&text, field).map_err(|e| Diagnostic::at_path(&path, e.to_string()))?;
        texts.push(text);
    }
    Ok(texts)
}

// `h12` -> 12; rejects leading zeros and other spellings.
fn index_of(key: &str, prefix: char) -> Option<usize> {
    let digits = key.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || (digits.len() > 1 && digits.starts_with('0'))
    {
        return None;
    }
    digits.parse().ok()
}
