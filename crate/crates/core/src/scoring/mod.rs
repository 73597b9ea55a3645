//! Evaluation metrics: sequence similarity, word-basis entity and relation
//! scores, binned reports and manual adjudication.

mod manual;
mod ner;
mod nerre;
mod prf;
mod report;
mod sequence;
mod similarity;

pub use manual::{manual_prf, Adjudication, JudgedEntity, MissedEntity, Verdict};
pub use ner::{composition_words, entity_prf, ner_prf, pair_counts};
pub use nerre::{
    nerre_prf, related_pairs, relation_label, sample_counts, triplets, MofRoot, RelatedPair, RelationSpec, Triplet,
};
pub use prf::{Counts, Prf};
pub use report::{score_completions, ScoreReport};
pub use sequence::{
    bin_ranges, exact_match_accuracy, mean_similarity, parsability_rate, sequence_report, BinReport, CompletionPair,
    SequenceReport,
};
pub use similarity::{jaro, jaro_winkler, jaro_winkler_with};
