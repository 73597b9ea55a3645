use std::collections::BTreeMap;

use serde::Serialize;

use super::{ner_prf, nerre_prf, sequence_report, Prf, RelationSpec, SequenceReport};
use crate::codec::decode;
use crate::error::{Error, Result};
use crate::records::{FieldLabel, Records, SchemaId};

/// Everything measured on one set of `(true, predicted)` completions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub schema: SchemaId,
    pub sequence: SequenceReport,
    pub ner: BTreeMap<FieldLabel, Prf>,
    pub nerre: BTreeMap<String, Prf>,
}

/// Sequence, entity and relation scores in one pass.
///
/// True completions must decode. A predicted completion that does not decode
/// counts as an empty extraction, so all its true entities are missed.
pub fn score_completions<S: AsRef<str>>(
    schema: SchemaId,
    pairs: &[(S, S)],
    bin_edges: &[usize],
    spec: RelationSpec,
) -> Result<ScoreReport> {
    let sequence = sequence_report(schema, pairs, bin_edges)?;
    let mut truth = Vec::with_capacity(pairs.len());
    let mut pred = Vec::with_capacity(pairs.len());
    for (index, (t, p)) in pairs.iter().enumerate() {
        let t = decode(schema, t.as_ref()).into_result().map_err(|d| Error::UnparsableSample {
            index,
            schema,
            reason: d.to_string(),
        })?;
        truth.push(t);
        pred.push(decode(schema, p.as_ref()).into_record().unwrap_or_else(|| Records::empty(schema)));
    }
    let mut ner = BTreeMap::new();
    for &field in schema.fields() {
        ner.insert(field, ner_prf(&truth, &pred, field)?);
    }
    let nerre = nerre_prf(&truth, &pred, spec)?;
    Ok(ScoreReport { schema, sequence, ner, nerre })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unparsable_prediction_misses_everything() {
        let pairs = [("The host 'ZnO' was doped with 'Al'.", "The host 'ZnO' was")];
        let r = score_completions(SchemaId::DopingEng, &pairs, &[1], RelationSpec::HostDopant).unwrap();
        assert_eq!(r.sequence.parsability_rate, 0.0);
        assert_eq!((r.ner[&FieldLabel::Host].tp, r.ner[&FieldLabel::Host].fn_), (0, 1));
        assert_eq!(r.nerre["host-dopant"].fn_, 1);
    }

    #[test]
    fn unparsable_truth_is_an_error() {
        let pairs = [("nonsense", "There is no doping information.")];
        assert!(matches!(
            score_completions(SchemaId::DopingEng, &pairs, &[1], RelationSpec::HostDopant),
            Err(Error::UnparsableSample { index: 0, .. })
        ));
    }
}
