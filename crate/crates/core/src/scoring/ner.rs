//! Entity recognition scored on a word basis.
//!
//! Each entity is a set of whitespace-separated words. For a paired true and
//! predicted entity, shared words are true positives, predicted-only words
//! false positives and true-only words false negatives. Formula-type fields
//! add one rule: unless the predicted entity carries exactly the true
//! entity's composition words, it earns no true positives and every true word
//! is a false negative.

use std::collections::BTreeSet;

use super::prf::{Counts, Prf};
use crate::error::{Error, Result};
use crate::records::{contains_stoichiometry, entity_words, is_formula_field, Entity, FieldLabel, Records};

/// The words of `text` that parse as chemical compositions.
pub fn composition_words(text: &str) -> BTreeSet<&str> {
    entity_words(text).into_iter().filter(|w| contains_stoichiometry(w)).collect()
}

/// Word counts for one aligned pair of entities of `field`.
pub fn pair_counts(true_text: &str, pred_text: &str, field: FieldLabel) -> Counts {
    let t = entity_words(true_text);
    let p = entity_words(pred_text);
    let fp = p.difference(&t).count();
    if is_formula_field(field) && composition_words(true_text) != composition_words(pred_text) {
        return Counts::new(0, fp, t.len());
    }
    Counts::new(t.intersection(&p).count(), fp, t.difference(&p).count())
}

/// Scores predicted against true entities of one field.
///
/// Entities are paired greedily by shared-word count, preferring pairs that
/// also satisfy the formula rule, then lower indices. Unpaired true entities
/// contribute all their words as false negatives, unpaired predictions all
/// theirs as false positives.
pub fn entity_prf(true_entities: &[Entity], pred_entities: &[Entity], field: FieldLabel) -> Prf {
    entity_counts(true_entities, pred_entities, field).prf()
}

pub(crate) fn entity_counts(true_entities: &[Entity], pred_entities: &[Entity], field: FieldLabel) -> Counts {
    let mut candidates = Vec::new();
    for (i, t) in true_entities.iter().enumerate() {
        let tw = t.words();
        for (j, p) in pred_entities.iter().enumerate() {
            let shared = tw.intersection(&p.words()).count();
            if shared > 0 {
                let credited = pair_counts(&t.text, &p.text, field).tp;
                candidates.push((shared, credited, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(y.1.cmp(&x.1)).then(x.2.cmp(&y.2)).then(x.3.cmp(&y.3)));

    let mut true_used = vec![false; true_entities.len()];
    let mut pred_used = vec![false; pred_entities.len()];
    let mut counts = Counts::default();
    for (_, _, i, j) in candidates {
        if true_used[i] || pred_used[j] {
            continue;
        }
        true_used[i] = true;
        pred_used[j] = true;
        counts += pair_counts(&true_entities[i].text, &pred_entities[j].text, field);
    }
    for (t, used) in true_entities.iter().zip(&true_used) {
        if !used {
            counts.fn_ += t.words().len();
        }
    }
    for (p, used) in pred_entities.iter().zip(&pred_used) {
        if !used {
            counts.fp += p.words().len();
        }
    }
    counts
}

/// Micro-averaged word-basis NER scores for one field over aligned samples.
pub fn ner_prf(true_records: &[Records], pred_records: &[Records], field: FieldLabel) -> Result<Prf> {
    if true_records.len() != pred_records.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true samples but {} predicted samples",
            true_records.len(),
            pred_records.len()
        )));
    }
    let counts: Counts = true_records
        .iter()
        .zip(pred_records)
        .map(|(t, p)| entity_counts(&t.entities(field), &p.entities(field), field))
        .sum();
    Ok(counts.prf())
}
