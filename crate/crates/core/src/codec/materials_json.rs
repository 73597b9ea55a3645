//! The list-of-documents JSON schemas for general materials and MOFs.
//!
//! Every entry carries every key, in a fixed order. Absent scalars are `""`
//! and absent lists are `[]`. The decoder tolerates missing keys but not
//! wrong value kinds, unknown keys, or keys out of order.

use super::strict_json::{self, Value};
use super::{Diagnostic, ParseOutcome};
use crate::error::{Error, Result};
use crate::records::{check_entity_text, MaterialRecord, MofRecord, Records, SchemaId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Scalar,
    List,
}

const GENERAL_KEYS: [(&str, Kind); 6] = [
    ("name", Kind::Scalar),
    ("formula", Kind::Scalar),
    ("acronym", Kind::Scalar),
    ("description", Kind::List),
    ("structure_or_phase", Kind::List),
    ("applications", Kind::List),
];

const MOF_KEYS: [(&str, Kind); 5] = [
    ("name", Kind::Scalar),
    ("mof_formula", Kind::Scalar),
    ("guest_species", Kind::List),
    ("applications", Kind::List),
    ("description", Kind::List),
];

// Field values of one entry, positionally aligned with its key table.
enum Slot {
    Scalar(String),
    List(Vec<String>),
}

impl Slot {
    fn scalar(&mut self) -> String {
        match self {
            Slot::Scalar(s) => std::mem::take(s),
            Slot::List(_) => String::new(),
        }
    }

    fn list(&mut self) -> Vec<String> {
        match self {
            Slot::List(v) => std::mem::take(v),
            Slot::Scalar(_) => Vec::new(),
        }
    }
}

fn encode_entry(out: &mut String, keys: &[(&str, Kind)], slots: &[Slot]) {
    out.push('{');
    for (i, ((key, _), slot)) in keys.iter().zip(slots).enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("\"{key}\":"));
        let value = match slot {
            Slot::Scalar(s) => serde_json::to_string(s),
            Slot::List(v) => serde_json::to_string(v),
        };
        out.push_str(&value.expect("strings always serialize"));
    }
    out.push('}');
}

fn encode_entries(keys: &[(&str, Kind)], entries: impl IntoIterator<Item = Vec<Slot>>) -> String {
    let mut out = String::from("[");
    for (i, slots) in entries.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        encode_entry(&mut out, keys, &slots);
    }
    out.push(']');
    out
}

pub fn encode_materials(records: &[MaterialRecord]) -> Result<String> {
    records.iter().try_for_each(MaterialRecord::validate)?;
    Ok(encode_entries(
        &GENERAL_KEYS,
        records.iter().map(|r| {
            vec![
                Slot::Scalar(r.name.clone()),
                Slot::Scalar(r.formula.clone()),
                Slot::Scalar(r.acronym.clone()),
                Slot::List(r.description.clone()),
                Slot::List(r.structure_or_phase.clone()),
                Slot::List(r.applications.clone()),
            ]
        }),
    ))
}

pub fn encode_mofs(records: &[MofRecord]) -> Result<String> {
    records.iter().try_for_each(MofRecord::validate)?;
    Ok(encode_entries(
        &MOF_KEYS,
        records.iter().map(|r| {
            vec![
                Slot::Scalar(r.name.clone()),
                Slot::Scalar(r.mof_formula.clone()),
                Slot::List(r.guest_species.clone()),
                Slot::List(r.applications.clone()),
                Slot::List(r.description.clone()),
            ]
        }),
    ))
}

/// Encodes a general-materials or MOF record list.
pub fn encode_json_records(schema: SchemaId, records: &Records) -> Result<String> {
    match (schema, records) {
        (SchemaId::GeneralJson, Records::Materials(rs)) => encode_materials(rs),
        (SchemaId::MofJson, Records::Mofs(rs)) => encode_mofs(rs),
        _ => Err(Error::InvalidArgument(format!("{schema} is not a list-of-documents schema for these records"))),
    }
}

/// Decodes a general-materials or MOF completion.
pub fn decode_json_records(schema: SchemaId, s: &str) -> ParseOutcome<Records> {
    match schema {
        SchemaId::GeneralJson => decode_materials(s).map(Records::Materials),
        SchemaId::MofJson => decode_mofs(s).map(Records::Mofs),
        _ => ParseOutcome::Unparsable(Diagnostic::new(format!("{schema} is not a list-of-documents schema"))),
    }
}

pub fn decode_materials(s: &str) -> ParseOutcome<Vec<MaterialRecord>> {
    decode_entries(s, &GENERAL_KEYS, "formula", |mut slots| MaterialRecord {
        name: slots[0].scalar(),
        formula: slots[1].scalar(),
        acronym: slots[2].scalar(),
        description: slots[3].list(),
        structure_or_phase: slots[4].list(),
        applications: slots[5].list(),
    })
    .into()
}

pub fn decode_mofs(s: &str) -> ParseOutcome<Vec<MofRecord>> {
    decode_entries(s, &MOF_KEYS, "mof_formula", |mut slots| MofRecord {
        name: slots[0].scalar(),
        mof_formula: slots[1].scalar(),
        guest_species: slots[2].list(),
        applications: slots[3].list(),
        description: slots[4].list(),
    })
    .into()
}

fn decode_entries<T>(
    s: &str,
    keys: &[(&str, Kind)],
    formula_key: &str,
    build: impl Fn(Vec<Slot>) -> T,
) -> std::result::Result<Vec<T>, Diagnostic> {
    let Value::Array(entries) = strict_json::parse(s)? else {
        return Err(Diagnostic::new("root must be a list"));
    };
    let mut out = Vec::with_capacity(entries.len());
    for (e, entry) in entries.into_iter().enumerate() {
        let path = format!("entry {e}");
        let Value::Object(members) = entry else {
            return Err(Diagnostic::at_path(path, format!("must be an object, not {}", entry.kind())));
        };
        let mut slots: Vec<Slot> = keys
            .iter()
            .map(|(_, kind)| match kind {
                Kind::Scalar => Slot::Scalar(String::new()),
                Kind::List => Slot::List(Vec::new()),
            })
            .collect();
        let mut next_key = 0;
        for (key, value) in members {
            let Some(pos) = keys.iter().position(|(k, _)| *k == key) else {
                return Err(Diagnostic::at_path(path, format!("unknown key {key:?}")));
            };
            if pos < next_key {
                return Err(Diagnostic::at_path(path, format!("key {key:?} out of order")));
            }
            next_key = pos + 1;
            slots[pos] = slot(value, keys[pos].1, &key).map_err(|reason| Diagnostic::at_path(&path, reason))?;
        }
        let is_empty = |i: usize| matches!(&slots[i], Slot::Scalar(s) if s.is_empty());
        let formula_pos = keys.iter().position(|(k, _)| *k == formula_key).unwrap_or(1);
        if is_empty(0) && is_empty(formula_pos) {
            return Err(Diagnostic::at_path(path, "no root entity"));
        }
        out.push(build(slots));
    }
    Ok(out)
}

fn slot(value: Value, kind: Kind, key: &str) -> std::result::Result<Slot, String> {
    match (kind, value) {
        (Kind::Scalar, Value::String(s)) => {
            if !s.is_empty() {
                check_entity_text(&s, key).map_err(|e| e.to_string())?;
            }
            Ok(Slot::Scalar(s))
        }
        (Kind::Scalar, other) => Err(format!("{key} must be a string, not {}", other.kind())),
        (Kind::List, Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let Value::String(s) = item else {
                    return Err(format!("{key} items must be strings, not {}", item.kind()));
                };
                check_entity_text(&s, key).map_err(|e| e.to_string())?;
                out.push(s);
            }
            Ok(Slot::List(out))
        }
        (Kind::List, _) => Err(format!("{key} must be a list")),
    }
}
