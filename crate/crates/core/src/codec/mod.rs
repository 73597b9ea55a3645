//! Conversion between records and completion strings.
//!
//! Every schema has an encoder that emits one canonical string per record
//! and a strict decoder. Decoders never fail with an error: a completion that
//! does not decode is a measurement, reported as
//! [`ParseOutcome::Unparsable`].

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::records::{Records, SchemaId};

mod doping_eng;
mod doping_json;
mod materials_json;
pub(crate) mod strict_json;
mod wire;

pub use doping_eng::{decode_doping_eng, encode_doping_eng};
pub use doping_json::{decode_doping_json, encode_doping_json};
pub use materials_json::{
    decode_json_records, decode_materials, decode_mofs, encode_json_records, encode_materials, encode_mofs,
};
pub use wire::{unwrap_completion, wrap, wrap_prompt, Unwrapped, WrappedSample, COMPLETION_STOP, PROMPT_SEPARATOR};

/// Where in a completion decoding stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    /// 1-based line and column inside a JSON document.
    Char { line: usize, column: usize },
    /// 1-based line of an English-sentence completion.
    Line(usize),
    /// A path into the decoded JSON structure, e.g. `entry 0`.
    Path(String),
}

/// Why a completion did not decode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: Option<Location>,
    pub reason: String,
}

impl Diagnostic {
    pub fn new(reason: impl Into<String>) -> Self {
        Diagnostic { location: None, reason: reason.into() }
    }

    pub fn at_line(line: usize, reason: impl Into<String>) -> Self {
        Diagnostic { location: Some(Location::Line(line)), reason: reason.into() }
    }

    pub fn at_path(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Diagnostic { location: Some(Location::Path(path.into())), reason: reason.into() }
    }

    pub(crate) fn at_char(line: usize, column: usize, reason: impl Into<String>) -> Self {
        Diagnostic { location: Some(Location::Char { line, column }), reason: reason.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            None => write!(f, "{}", self.reason),
            Some(Location::Char { line, column }) => write!(f, "{line}:{column}: {}", self.reason),
            Some(Location::Line(line)) => write!(f, "line {line}: {}", self.reason),
            Some(Location::Path(path)) => write!(f, "{path}: {}", self.reason),
        }
    }
}

/// Result of decoding one completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOutcome<T> {
    Parsed(T),
    Unparsable(Diagnostic),
}

impl<T> ParseOutcome<T> {
    pub fn is_parsable(&self) -> bool {
        matches!(self, ParseOutcome::Parsed(_))
    }

    pub fn record(&self) -> Option<&T> {
        match self {
            ParseOutcome::Parsed(r) => Some(r),
            ParseOutcome::Unparsable(_) => None,
        }
    }

    pub fn into_record(self) -> Option<T> {
        match self {
            ParseOutcome::Parsed(r) => Some(r),
            ParseOutcome::Unparsable(_) => None,
        }
    }

    pub fn error(&self) -> Option<&Diagnostic> {
        match self {
            ParseOutcome::Parsed(_) => None,
            ParseOutcome::Unparsable(d) => Some(d),
        }
    }

    pub fn into_result(self) -> std::result::Result<T, Diagnostic> {
        match self {
            ParseOutcome::Parsed(r) => Ok(r),
            ParseOutcome::Unparsable(d) => Err(d),
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> ParseOutcome<U> {
        match self {
            ParseOutcome::Parsed(r) => ParseOutcome::Parsed(f(r)),
            ParseOutcome::Unparsable(d) => ParseOutcome::Unparsable(d),
        }
    }
}

impl<T> From<std::result::Result<T, Diagnostic>> for ParseOutcome<T> {
    fn from(r: std::result::Result<T, Diagnostic>) -> Self {
        match r {
            Ok(v) => ParseOutcome::Parsed(v),
            Err(d) => ParseOutcome::Unparsable(d),
        }
    }
}

impl<T: Serialize> Serialize for ParseOutcome<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ParseOutcome", 3)?;
        s.serialize_field("parsable", &self.is_parsable())?;
        s.serialize_field("record", &self.record())?;
        s.serialize_field("error", &self.error().map(ToString::to_string))?;
        s.end()
    }
}

/// Encodes records under `schema`.
///
/// Doping records are projected onto the schema first: only the extra
/// English schema carries results and modifiers.
pub fn encode(schema: SchemaId, records: &Records) -> Result<String> {
    use crate::error::Error;
    match (schema, records) {
        (SchemaId::DopingJson, Records::Doping(r)) => encode_doping_json(r),
        (SchemaId::DopingEng, Records::Doping(r)) => encode_doping_eng(r, false),
        (SchemaId::DopingExtraEng, Records::Doping(r)) => encode_doping_eng(r, true),
        (SchemaId::GeneralJson, Records::Materials(rs)) => encode_materials(rs),
        (SchemaId::MofJson, Records::Mofs(rs)) => encode_mofs(rs),
        _ => Err(Error::InvalidArgument(format!("records do not belong to schema {schema}"))),
    }
}

/// Decodes a completion under `schema`.
pub fn decode(schema: SchemaId, completion: &str) -> ParseOutcome<Records> {
    match schema {
        SchemaId::DopingJson => decode_doping_json(completion).map(Records::Doping),
        SchemaId::DopingEng => decode_doping_eng(completion, false).map(Records::Doping),
        SchemaId::DopingExtraEng => decode_doping_eng(completion, true).map(Records::Doping),
        SchemaId::GeneralJson => decode_materials(completion).map(Records::Materials),
        SchemaId::MofJson => decode_mofs(completion).map(Records::Mofs),
    }
}

/// Decodes a raw model output: cuts at the stop sequence, then decodes.
///
/// A completion without its stop sequence was cut off by the token limit
/// and counts as unparsable even when the prefix happens to decode.
pub fn decode_wire(schema: SchemaId, raw: &str) -> (Unwrapped, ParseOutcome<Records>) {
    let unwrapped = unwrap_completion(raw);
    let outcome = if unwrapped.truncated {
        ParseOutcome::Unparsable(Diagnostic::new("truncated: completion ended before the stop sequence"))
    } else {
        decode(schema, &unwrapped.text)
    };
    (unwrapped, outcome)
}
