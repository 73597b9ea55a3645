//! Aggregation of human judgements of extracted entities.
//!
//! An annotator marks every extracted entity as correct or incorrect and
//! lists the entities the model missed. Verdicts become TP/FP and missed
//! entities FN, counted per field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::prf::{Counts, Prf};
use crate::error::{Error, Result};
use crate::records::FieldLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "TP")]
    Correct,
    #[serde(rename = "FP")]
    Incorrect,
}

/// One extracted entity and its verdict. `root` names the material the
/// entity was attached to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgedEntity {
    pub entity: String,
    pub field: FieldLabel,
    #[serde(default)]
    pub root: String,
    #[serde(default)]
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissedEntity {
    pub entity: String,
    pub field: FieldLabel,
    #[serde(default)]
    pub root: String,
}

/// The judgement of one sample's extraction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjudication {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
    #[serde(default)]
    pub extracted: Vec<JudgedEntity>,
    #[serde(default)]
    pub missed: Vec<MissedEntity>,
}

impl Adjudication {
    pub fn is_complete(&self) -> bool {
        self.extracted.iter().all(|e| e.verdict.is_some())
    }
}

/// Per-field scores over all adjudications. Fields that never occur are
/// omitted.
pub fn manual_prf(adjudications: &[Adjudication]) -> Result<BTreeMap<FieldLabel, Prf>> {
    let mut counts: BTreeMap<FieldLabel, Counts> = BTreeMap::new();
    for (i, adj) in adjudications.iter().enumerate() {
        for e in &adj.extracted {
            let c = counts.entry(e.field).or_default();
            match e.verdict {
                Some(Verdict::Correct) => c.tp += 1,
                Some(Verdict::Incorrect) => c.fp += 1,
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "adjudication {i}: {} entity {:?} has no verdict",
                        e.field, e.entity
                    )))
                }
            }
        }
        for m in &adj.missed {
            counts.entry(m.field).or_default().fn_ += 1;
        }
    }
    Ok(counts.into_iter().map(|(f, c)| (f, c.prf())).collect())
}
