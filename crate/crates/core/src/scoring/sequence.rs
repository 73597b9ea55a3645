//! Sequence-level metrics over raw completion strings.

use serde::{Deserialize, Serialize};

use super::similarity::jaro_winkler;
use crate::codec::decode;
use crate::error::{Error, Result};
use crate::records::SchemaId;

/// A `(true completion, predicted completion)` pair.
pub type CompletionPair = (String, String);

fn require_nonempty(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(format!("{what}: empty input")));
    }
    Ok(())
}

/// Fraction of pairs whose predicted completion equals the true one byte for byte.
pub fn exact_match_accuracy<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<f64> {
    require_nonempty(pairs.len(), "exact match accuracy")?;
    let hits = pairs.iter().filter(|(t, p)| t.as_ref() == p.as_ref()).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Mean Jaro-Winkler similarity between true and predicted completions.
pub fn mean_similarity<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<f64> {
    require_nonempty(pairs.len(), "mean similarity")?;
    let total: f64 = pairs.iter().map(|(t, p)| jaro_winkler(t.as_ref(), p.as_ref())).sum();
    Ok(total / pairs.len() as f64)
}

/// Fraction of completions that decode under `schema`.
pub fn parsability_rate<S: AsRef<str>>(schema: SchemaId, completions: &[S]) -> Result<f64> {
    require_nonempty(completions.len(), "parsability rate")?;
    let ok = completions.iter().filter(|c| decode(schema, c.as_ref()).is_parsable()).count();
    Ok(ok as f64 / completions.len() as f64)
}

/// Metrics for samples whose true entity count falls in `[lo, hi)`.
///
/// `hi` is `None` for the open-ended last bin. The means are `None` for an
/// empty bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub lo: usize,
    pub hi: Option<usize>,
    pub n: usize,
    pub exact_match_accuracy: Option<f64>,
    pub mean_similarity: Option<f64>,
    pub parsability_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub n: usize,
    pub exact_match_accuracy: f64,
    pub mean_similarity: f64,
    pub parsability_rate: f64,
    pub per_bin: Vec<BinReport>,
}

#[derive(Default)]
struct Sums {
    n: usize,
    exact: usize,
    similarity: f64,
    parsable: usize,
}

impl Sums {
    fn mean(&self, x: f64) -> Option<f64> {
        (self.n > 0).then(|| x / self.n as f64)
    }
}

/// Bin boundaries from strictly increasing lower edges.
///
/// Each edge opens a bin running to the next edge; the last bin is
/// open-ended. A leading `[0, e0)` bin is added when `e0 > 0`, so every
/// count lands in exactly one bin.
pub fn bin_ranges(bin_edges: &[usize]) -> Result<Vec<(usize, Option<usize>)>> {
    if bin_edges.is_empty() {
        return Err(Error::InvalidArgument("at least one bin edge is required".into()));
    }
    if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("bin edges must be strictly increasing: {bin_edges:?}")));
    }
    let mut edges = Vec::with_capacity(bin_edges.len() + 1);
    if bin_edges[0] > 0 {
        edges.push(0);
    }
    edges.extend_from_slice(bin_edges);
    Ok(edges.iter().enumerate().map(|(i, &lo)| (lo, edges.get(i + 1).copied())).collect())
}

/// Overall and per-bin sequence metrics, binned by the entity count of the
/// decoded true completion.
pub fn sequence_report<S: AsRef<str>>(
    schema: SchemaId,
    pairs: &[(S, S)],
    bin_edges: &[usize],
) -> Result<SequenceReport> {
    require_nonempty(pairs.len(), "sequence report")?;
    let ranges = bin_ranges(bin_edges)?;
    let mut bins: Vec<Sums> = ranges.iter().map(|_| Sums::default()).collect();
    let mut all = Sums::default();

    for (index, (t, p)) in pairs.iter().enumerate() {
        let (t, p) = (t.as_ref(), p.as_ref());
        let entities = match decode(schema, t).into_result() {
            Ok(records) => records.entity_count(),
            Err(d) => return Err(Error::UnparsableSample { index, schema, reason: d.to_string() }),
        };
        let bin = ranges.iter().rposition(|(lo, _)| entities >= *lo).expect("first bin starts at 0");
        let exact = t == p;
        let similarity = jaro_winkler(t, p);
        let parsable = decode(schema, p).is_parsable();
        for s in [&mut all, &mut bins[bin]] {
            s.n += 1;
            s.exact += exact as usize;
            s.similarity += similarity;
            s.parsable += parsable as usize;
        }
    }

    let per_bin = ranges
        .into_iter()
        .zip(&bins)
        .map(|((lo, hi), s)| BinReport {
            lo,
            hi,
            n: s.n,
            exact_match_accuracy: s.mean(s.exact as f64),
            mean_similarity: s.mean(s.similarity),
            parsability_rate: s.mean(s.parsable as f64),
        })
        .collect();
    Ok(SequenceReport {
        n: all.n,
        exact_match_accuracy: all.exact as f64 / all.n as f64,
        mean_similarity: all.similarity / all.n as f64,
        parsability_rate: all.parsable as f64 / all.n as f64,
        per_bin,
    })
}
