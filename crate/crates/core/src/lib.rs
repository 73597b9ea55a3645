//! Structured named-entity and relation extraction for materials-science
//! text, built around a fine-tuned completion model.
//!
//! A passage goes in as a prompt; the model answers with a completion in one
//! of five output schemas. This crate covers everything around that call:
//!
//! * [`records`]: the in-memory form of doping relations, general materials
//!   entries and metal-organic framework entries.
//! * [`codec`]: canonical encoders and strict decoders for each schema, and
//!   the prompt/stop separators used on the wire.
//! * [`scoring`]: sequence similarity, word-basis entity and relation
//!   scores, binned reports and manual adjudication.
//! * [`kgraph`]: per-passage graphs with node-link JSON export.
//! * [`baseline`]: sentence splitting and same-sentence linking over tagged
//!   spans.
//! * [`corpus`]: keyword filtering, fine-tune files and seeded splits.
//! * [`llm`]: completion backends (live HTTP and replay), the extraction
//!   pipeline and fine-tuning plans.
//! * [`reference`](mod@reference): published figures that need the hosted model.
//!
//! ```
//! use matextract::codec::{decode, encode};
//! use matextract::records::{DopingRecord, Records, SchemaId};
//!
//! let record = Records::Doping(DopingRecord {
//!     hosts: vec!["ZnO".into()],
//!     dopants: vec!["Al".into()],
//!     links: [(0, 0)].into(),
//!     ..Default::default()
//! });
//! let text = encode(SchemaId::DopingEng, &record).unwrap();
//! assert_eq!(text, "The host 'ZnO' was doped with 'Al'.");
//! assert_eq!(decode(SchemaId::DopingEng, &text).into_record(), Some(record));
//! ```

pub mod baseline;
pub mod codec;
pub mod corpus;
pub mod error;
pub mod kgraph;
pub mod llm;
pub mod records;
pub mod reference;
pub mod scoring;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/schemas.md")]
    mod schemas {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/annotation.md")]
    mod annotation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
