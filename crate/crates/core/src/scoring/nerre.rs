//! Relation scoring on word triplets.
//!
//! Every related entity pair `(a, b)` expands into the cross product of
//! their word sets, `(word of a, word of b, relation)`. True and predicted
//! triplet sets are compared per sample and the counts pooled over the
//! corpus.
//!
//! Formula-type entities must match on composition: each triplet is keyed
//! together with the composition words of the formula-type entities it came
//! from, so a pair whose formula differs shares no triplets with the truth.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ner::composition_words;
use super::prf::{Counts, Prf};
use crate::error::{Error, Result};
use crate::records::{entity_words, is_formula_field, FieldLabel, MaterialRecord, MofRecord, Records, SchemaId};

/// One word-level relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub word_a: String,
    pub word_b: String,
    pub relation: String,
}

/// Which field roots the MOF relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MofRoot {
    #[default]
    Name,
    MofFormula,
}

/// The relations evaluated for a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationSpec {
    /// Host to dopant links.
    HostDopant,
    /// Material formula to each of the other general-materials fields.
    GeneralFormula,
    /// MOF root to each of the other MOF fields.
    Mof(MofRoot),
}

impl RelationSpec {
    pub fn default_for(schema: SchemaId) -> RelationSpec {
        match schema {
            SchemaId::GeneralJson => RelationSpec::GeneralFormula,
            SchemaId::MofJson => RelationSpec::Mof(MofRoot::Name),
            _ => RelationSpec::HostDopant,
        }
    }

    /// `(root field, other field)` pairs, in reporting order.
    pub fn field_pairs(self) -> Vec<(FieldLabel, FieldLabel)> {
        use FieldLabel::*;
        match self {
            RelationSpec::HostDopant => vec![(Host, Dopant)],
            RelationSpec::GeneralFormula => {
                [Name, Acronym, Applications, StructureOrPhase, Description].into_iter().map(|f| (Formula, f)).collect()
            }
            RelationSpec::Mof(MofRoot::Name) => {
                [MofFormula, Applications, GuestSpecies, Description].into_iter().map(|f| (Name, f)).collect()
            }
            RelationSpec::Mof(MofRoot::MofFormula) => {
                [Name, Applications, GuestSpecies, Description].into_iter().map(|f| (MofFormula, f)).collect()
            }
        }
    }

    pub fn labels(self) -> Vec<String> {
        self.field_pairs().into_iter().map(|(a, b)| relation_label(a, b)).collect()
    }
}

fn short(field: FieldLabel) -> &'static str {
    match field {
        FieldLabel::Applications => "application",
        FieldLabel::StructureOrPhase => "structure",
        FieldLabel::MofFormula => "formula",
        other => other.as_str(),
    }
}

pub fn relation_label(a: FieldLabel, b: FieldLabel) -> String {
    format!("{}-{}", short(a), short(b))
}

/// A related pair of entity texts with their fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatedPair<'a> {
    pub a: &'a str,
    pub a_field: FieldLabel,
    pub b: &'a str,
    pub b_field: FieldLabel,
    pub relation: String,
}

/// Every related entity pair in `records` under `spec`.
pub fn related_pairs(records: &Records, spec: RelationSpec) -> Vec<RelatedPair<'_>> {
    let mut out = Vec::new();
    match (records, spec) {
        (Records::Doping(r), RelationSpec::HostDopant) => {
            let relation = relation_label(FieldLabel::Host, FieldLabel::Dopant);
            for &(h, d) in &r.links {
                out.push(RelatedPair {
                    a: &r.hosts[h],
                    a_field: FieldLabel::Host,
                    b: &r.dopants[d],
                    b_field: FieldLabel::Dopant,
                    relation: relation.clone(),
                });
            }
        }
        (Records::Materials(rs), RelationSpec::GeneralFormula) => {
            for r in rs {
                push_document_pairs(&mut out, spec, |f| MaterialRecord::values(r, f));
            }
        }
        (Records::Mofs(rs), RelationSpec::Mof(_)) => {
            for r in rs {
                push_document_pairs(&mut out, spec, |f| MofRecord::values(r, f));
            }
        }
        _ => {}
    }
    out
}

fn push_document_pairs<'a>(
    out: &mut Vec<RelatedPair<'a>>,
    spec: RelationSpec,
    values: impl Fn(FieldLabel) -> Vec<&'a str>,
) {
    for (root_field, other_field) in spec.field_pairs() {
        let relation = relation_label(root_field, other_field);
        for root in values(root_field) {
            for other in values(other_field) {
                out.push(RelatedPair {
                    a: root,
                    a_field: root_field,
                    b: other,
                    b_field: other_field,
                    relation: relation.clone(),
                });
            }
        }
    }
}

/// The word triplets of one sample.
pub fn triplets(records: &Records, spec: RelationSpec) -> BTreeSet<Triplet> {
    related_pairs(records, spec)
        .into_iter()
        .flat_map(|pair| {
            let bs = entity_words(pair.b);
            entity_words(pair.a)
                .into_iter()
                .flat_map(move |wa| {
                    let relation = pair.relation.clone();
                    bs.clone().into_iter().map(move |wb| Triplet {
                        word_a: wa.to_owned(),
                        word_b: wb.to_owned(),
                        relation: relation.clone(),
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

// Triplet plus the composition words of the formula-type entities it spans.
type KeyedTriplet = (Triplet, Vec<String>, Vec<String>);

fn keyed_triplets(records: &Records, spec: RelationSpec) -> BTreeSet<KeyedTriplet> {
    let context = |text: &str, field: FieldLabel| -> Vec<String> {
        if is_formula_field(field) {
            composition_words(text).into_iter().map(str::to_owned).collect()
        } else {
            Vec::new()
        }
    };
    let mut out = BTreeSet::new();
    for pair in related_pairs(records, spec) {
        let ca = context(pair.a, pair.a_field);
        let cb = context(pair.b, pair.b_field);
        for wa in entity_words(pair.a) {
            for wb in entity_words(pair.b) {
                let t = Triplet { word_a: wa.to_owned(), word_b: wb.to_owned(), relation: pair.relation.clone() };
                out.insert((t, ca.clone(), cb.clone()));
            }
        }
    }
    out
}

/// Triplet counts for one sample, per relation label.
pub fn sample_counts(true_records: &Records, pred_records: &Records, spec: RelationSpec) -> BTreeMap<String, Counts> {
    let t = keyed_triplets(true_records, spec);
    let p = keyed_triplets(pred_records, spec);
    let mut counts: BTreeMap<String, Counts> = spec.labels().into_iter().map(|l| (l, Counts::default())).collect();
    for k in t.intersection(&p) {
        counts.entry(k.0.relation.clone()).or_default().tp += 1;
    }
    for k in p.difference(&t) {
        counts.entry(k.0.relation.clone()).or_default().fp += 1;
    }
    for k in t.difference(&p) {
        counts.entry(k.0.relation.clone()).or_default().fn_ += 1;
    }
    counts
}

/// Micro-averaged triplet scores per relation over aligned samples.
pub fn nerre_prf(
    true_records: &[Records],
    pred_records: &[Records],
    spec: RelationSpec,
) -> Result<BTreeMap<String, Prf>> {
    if true_records.len() != pred_records.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true samples but {} predicted samples",
            true_records.len(),
            pred_records.len()
        )));
    }
    let mut totals: BTreeMap<String, Counts> = spec.labels().into_iter().map(|l| (l, Counts::default())).collect();
    for (t, p) in true_records.iter().zip(pred_records) {
        for (label, c) in sample_counts(t, p, spec) {
            *totals.entry(label).or_default() += c;
        }
    }
    Ok(totals.into_iter().map(|(l, c)| (l, c.prf())).collect())
}
