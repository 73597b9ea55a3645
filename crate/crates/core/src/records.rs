//! In-memory data model shared by the codecs, the scorers and the graph
//! decoder.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod stoich;

pub use stoich::contains_stoichiometry;

/// The label of one entity slot across all three extraction tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldLabel {
    Host,
    Dopant,
    Result,
    Modifier,
    Name,
    Formula,
    Acronym,
    Description,
    StructureOrPhase,
    Applications,
    MofFormula,
    GuestSpecies,
}

impl FieldLabel {
    pub const ALL: [FieldLabel; 12] = [
        FieldLabel::Host,
        FieldLabel::Dopant,
        FieldLabel::Result,
        FieldLabel::Modifier,
        FieldLabel::Name,
        FieldLabel::Formula,
        FieldLabel::Acronym,
        FieldLabel::Description,
        FieldLabel::StructureOrPhase,
        FieldLabel::Applications,
        FieldLabel::MofFormula,
        FieldLabel::GuestSpecies,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldLabel::Host => "host",
            FieldLabel::Dopant => "dopant",
            FieldLabel::Result => "result",
            FieldLabel::Modifier => "modifier",
            FieldLabel::Name => "name",
            FieldLabel::Formula => "formula",
            FieldLabel::Acronym => "acronym",
            FieldLabel::Description => "description",
            FieldLabel::StructureOrPhase => "structure_or_phase",
            FieldLabel::Applications => "applications",
            FieldLabel::MofFormula => "mof_formula",
            FieldLabel::GuestSpecies => "guest_species",
        }
    }
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FieldLabel::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown field label {s:?}")))
    }
}

/// True for the fields whose chemical composition must match exactly before
/// any of their words earn credit.
pub fn is_formula_field(field: FieldLabel) -> bool {
    matches!(field, FieldLabel::Host | FieldLabel::Dopant | FieldLabel::Formula | FieldLabel::MofFormula)
}

/// One extracted entity: a surface string tagged with its field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entity {
    pub text: String,
    pub field: FieldLabel,
}

impl Entity {
    pub fn new(text: impl Into<String>, field: FieldLabel) -> Result<Self> {
        let text = text.into();
        check_entity_text(&text, field.as_str())?;
        Ok(Entity { text, field })
    }

    /// The deduplicated whitespace tokens of the entity text.
    pub fn words(&self) -> BTreeSet<&str> {
        entity_words(&self.text)
    }
}

/// Splits an entity into its set of whitespace-separated words.
///
/// Matching is case-sensitive and does no normalization besides the split.
/// Hyphenated tokens such as `n-type` stay whole.
pub fn entity_words(text: &str) -> BTreeSet<&str> {
    text.split_whitespace().collect()
}

pub(crate) fn check_entity_text(text: &str, what: &str) -> Result<()> {
    if text.trim().is_empty() {
        return Err(Error::InvalidRecord(format!("{what} entity is empty")));
    }
    if text.contains(['\n', '\r']) {
        return Err(Error::InvalidRecord(format!("{what} entity {text:?} contains a newline")));
    }
    Ok(())
}

/// Which completion format a model was fine-tuned to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemaId {
    #[serde(rename = "doping-json")]
    DopingJson,
    #[serde(rename = "doping-eng")]
    DopingEng,
    #[serde(rename = "doping-extra-eng")]
    DopingExtraEng,
    #[serde(rename = "general-json")]
    GeneralJson,
    #[serde(rename = "mof-json")]
    MofJson,
}

impl SchemaId {
    pub const ALL: [SchemaId; 5] =
        [SchemaId::DopingJson, SchemaId::DopingEng, SchemaId::DopingExtraEng, SchemaId::GeneralJson, SchemaId::MofJson];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaId::DopingJson => "doping-json",
            SchemaId::DopingEng => "doping-eng",
            SchemaId::DopingExtraEng => "doping-extra-eng",
            SchemaId::GeneralJson => "general-json",
            SchemaId::MofJson => "mof-json",
        }
    }

    pub fn is_doping(self) -> bool {
        matches!(self, SchemaId::DopingJson | SchemaId::DopingEng | SchemaId::DopingExtraEng)
    }

    /// Whether the schema carries result and modifier entities.
    pub fn carries_extras(self) -> bool {
        self == SchemaId::DopingExtraEng
    }

    /// Entity fields a completion of this schema can carry.
    pub fn fields(self) -> &'static [FieldLabel] {
        use FieldLabel::*;
        match self {
            SchemaId::DopingJson | SchemaId::DopingEng => &[Host, Dopant],
            SchemaId::DopingExtraEng => &[Host, Dopant, Result, Modifier],
            SchemaId::GeneralJson => &MaterialRecord::FIELDS,
            SchemaId::MofJson => &MofRecord::FIELDS,
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemaId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown schema {s:?}")))
    }
}

/// Host/dopant relations extracted from one sentence.
///
/// Links are index pairs into `hosts` and `dopants`, so two entities with the
/// same surface text stay distinguishable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DopingRecord {
    #[serde(default)]
    pub hosts: Vec<String>,
    #[serde(default)]
    pub dopants: Vec<String>,
    #[serde(default)]
    pub links: BTreeSet<(usize, usize)>,
    #[serde(default)]
    pub results: Vec<String>,
    #[serde(default)]
    pub modifiers: Vec<String>,
}

impl DopingRecord {
    pub fn is_empty(&self) -> bool {
        self.hosts.is_empty() && self.dopants.is_empty() && self.results.is_empty() && self.modifiers.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (texts, what) in
            [(&self.hosts, "host"), (&self.dopants, "dopant"), (&self.results, "result"), (&self.modifiers, "modifier")]
        {
            for text in texts {
                check_entity_text(text, what)?;
            }
        }
        for &(h, d) in &self.links {
            if h >= self.hosts.len() || d >= self.dopants.len() {
                return Err(Error::InvalidRecord(format!("link ({h}, {d}) is out of range")));
            }
        }
        Ok(())
    }

    /// The entities of one field, in source order.
    pub fn entities(&self, field: FieldLabel) -> Vec<Entity> {
        let texts: &[String] = match field {
            FieldLabel::Host => &self.hosts,
            FieldLabel::Dopant => &self.dopants,
            FieldLabel::Result => &self.results,
            FieldLabel::Modifier => &self.modifiers,
            _ => &[],
        };
        texts.iter().map(|t| Entity { text: t.clone(), field }).collect()
    }

    pub fn entity_count(&self) -> usize {
        self.hosts.len() + self.dopants.len() + self.results.len() + self.modifiers.len()
    }

    /// Drops results and modifiers for schemas that do not carry them.
    pub fn projected(&self, schema: SchemaId) -> DopingRecord {
        if schema.carries_extras() {
            self.clone()
        } else {
            DopingRecord { results: Vec::new(), modifiers: Vec::new(), ..self.clone() }
        }
    }

    /// The normal form the English-sentence schemas can represent.
    ///
    /// Hosts and dopants are merged by surface text and ordered by first
    /// mention in the encoded statements: linked hosts in index order, with
    /// their dopants in link order, then unlinked dopants, then unlinked
    /// hosts. Encoding a record and decoding it again under an English schema
    /// yields exactly this form.
    pub fn canonical_eng(&self) -> DopingRecord {
        fn intern<'a>(order: &mut Vec<&'a str>, text: &'a str) -> usize {
            order.iter().position(|t| *t == text).unwrap_or_else(|| {
                order.push(text);
                order.len() - 1
            })
        }
        let mut hosts: Vec<&str> = Vec::new();
        let mut dopants: Vec<&str> = Vec::new();
        let mut links = BTreeSet::new();
        for (h, host) in self.hosts.iter().enumerate() {
            for &(_, d) in self.links.iter().filter(|l| l.0 == h) {
                let hi = intern(&mut hosts, host);
                let di = intern(&mut dopants, &self.dopants[d]);
                links.insert((hi, di));
            }
        }
        for (d, dopant) in self.dopants.iter().enumerate() {
            if !self.links.iter().any(|l| l.1 == d) {
                intern(&mut dopants, dopant);
            }
        }
        for (h, host) in self.hosts.iter().enumerate() {
            if !self.links.iter().any(|l| l.0 == h) {
                intern(&mut hosts, host);
            }
        }
        DopingRecord {
            hosts: hosts.into_iter().map(str::to_owned).collect(),
            dopants: dopants.into_iter().map(str::to_owned).collect(),
            links,
            results: self.results.clone(),
            modifiers: self.modifiers.clone(),
        }
    }
}

/// One material entry of the general materials schema.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialRecord {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub formula: String,
    #[serde(default)]
    pub acronym: String,
    #[serde(default)]
    pub description: Vec<String>,
    #[serde(default)]
    pub structure_or_phase: Vec<String>,
    #[serde(default)]
    pub applications: Vec<String>,
}

impl MaterialRecord {
    pub const FIELDS: [FieldLabel; 6] = [
        FieldLabel::Name,
        FieldLabel::Formula,
        FieldLabel::Acronym,
        FieldLabel::Description,
        FieldLabel::StructureOrPhase,
        FieldLabel::Applications,
    ];

    /// The field whose value identifies the entry: formula when present,
    /// otherwise name.
    pub fn root_field(&self) -> FieldLabel {
        if self.formula.is_empty() {
            FieldLabel::Name
        } else {
            FieldLabel::Formula
        }
    }

    /// The formula when present, otherwise the name.
    pub fn root(&self) -> &str {
        if self.formula.is_empty() {
            &self.name
        } else {
            &self.formula
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() && self.formula.is_empty() {
            return Err(Error::InvalidRecord("material has neither name nor formula".into()));
        }
        check_scalars(&[(&self.name, "name"), (&self.formula, "formula"), (&self.acronym, "acronym")])?;
        check_lists(&[
            (&self.description, "description"),
            (&self.structure_or_phase, "structure_or_phase"),
            (&self.applications, "applications"),
        ])
    }

    pub fn values(&self, field: FieldLabel) -> Vec<&str> {
        match field {
            FieldLabel::Name => scalar(&self.name),
            FieldLabel::Formula => scalar(&self.formula),
            FieldLabel::Acronym => scalar(&self.acronym),
            FieldLabel::Description => self.description.iter().map(String::as_str).collect(),
            FieldLabel::StructureOrPhase => self.structure_or_phase.iter().map(String::as_str).collect(),
            FieldLabel::Applications => self.applications.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    pub fn entity_count(&self) -> usize {
        Self::FIELDS.into_iter().map(|f| self.values(f).len()).sum()
    }
}

/// One metal-organic framework entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MofRecord {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub mof_formula: String,
    #[serde(default)]
    pub guest_species: Vec<String>,
    #[serde(default)]
    pub applications: Vec<String>,
    #[serde(default)]
    pub description: Vec<String>,
}

impl MofRecord {
    pub const FIELDS: [FieldLabel; 5] = [
        FieldLabel::Name,
        FieldLabel::MofFormula,
        FieldLabel::GuestSpecies,
        FieldLabel::Applications,
        FieldLabel::Description,
    ];

    /// `mof_formula` when present, otherwise `name`.
    pub fn root_field(&self) -> FieldLabel {
        if self.mof_formula.is_empty() {
            FieldLabel::Name
        } else {
            FieldLabel::MofFormula
        }
    }

    pub fn root(&self) -> &str {
        if self.mof_formula.is_empty() {
            &self.name
        } else {
            &self.mof_formula
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() && self.mof_formula.is_empty() {
            return Err(Error::InvalidRecord("MOF has neither name nor mof_formula".into()));
        }
        check_scalars(&[(&self.name, "name"), (&self.mof_formula, "mof_formula")])?;
        check_lists(&[
            (&self.guest_species, "guest_species"),
            (&self.applications, "applications"),
            (&self.description, "description"),
        ])
    }

    pub fn values(&self, field: FieldLabel) -> Vec<&str> {
        match field {
            FieldLabel::Name => scalar(&self.name),
            FieldLabel::MofFormula => scalar(&self.mof_formula),
            FieldLabel::GuestSpecies => self.guest_species.iter().map(String::as_str).collect(),
            FieldLabel::Applications => self.applications.iter().map(String::as_str).collect(),
            FieldLabel::Description => self.description.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    pub fn entity_count(&self) -> usize {
        Self::FIELDS.into_iter().map(|f| self.values(f).len()).sum()
    }
}

fn scalar(s: &str) -> Vec<&str> {
    if s.is_empty() {
        Vec::new()
    } else {
        vec![s]
    }
}

fn check_scalars(fields: &[(&String, &str)]) -> Result<()> {
    for (value, what) in fields {
        if !value.is_empty() {
            check_entity_text(value, what)?;
        }
    }
    Ok(())
}

fn check_lists(fields: &[(&Vec<String>, &str)]) -> Result<()> {
    for (values, what) in fields {
        for v in values.iter() {
            check_entity_text(v, what)?;
        }
    }
    Ok(())
}

/// The decoded payload of one completion, whatever its schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Records {
    Doping(DopingRecord),
    Materials(Vec<MaterialRecord>),
    Mofs(Vec<MofRecord>),
}

impl Records {
    pub fn empty(schema: SchemaId) -> Records {
        match schema {
            SchemaId::GeneralJson => Records::Materials(Vec::new()),
            SchemaId::MofJson => Records::Mofs(Vec::new()),
            _ => Records::Doping(DopingRecord::default()),
        }
    }

    /// Deserializes the schema's record shape from a JSON value.
    pub fn from_json(schema: SchemaId, value: serde_json::Value) -> Result<Records> {
        let records = match schema {
            SchemaId::GeneralJson => Records::Materials(serde_json::from_value(value)?),
            SchemaId::MofJson => Records::Mofs(serde_json::from_value(value)?),
            _ => Records::Doping(serde_json::from_value(value)?),
        };
        records.validate()?;
        Ok(records)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Records::Doping(r) => r.validate(),
            Records::Materials(rs) => rs.iter().try_for_each(MaterialRecord::validate),
            Records::Mofs(rs) => rs.iter().try_for_each(MofRecord::validate),
        }
    }

    /// Total number of entities; the binning key for sequence reports.
    pub fn entity_count(&self) -> usize {
        match self {
            Records::Doping(r) => r.entity_count(),
            Records::Materials(rs) => rs.iter().map(MaterialRecord::entity_count).sum(),
            Records::Mofs(rs) => rs.iter().map(MofRecord::entity_count).sum(),
        }
    }

    /// Number of top-level entries: material documents, or doping entities.
    pub fn entry_count(&self) -> usize {
        match self {
            Records::Doping(r) => r.entity_count(),
            Records::Materials(rs) => rs.len(),
            Records::Mofs(rs) => rs.len(),
        }
    }

    /// All entities of one field, in record order.
    pub fn entities(&self, field: FieldLabel) -> Vec<Entity> {
        let owned =
            |vals: Vec<&str>| vals.into_iter().map(|t| Entity { text: t.to_owned(), field }).collect::<Vec<_>>();
        match self {
            Records::Doping(r) => r.entities(field),
            Records::Materials(rs) => rs.iter().flat_map(|r| owned(r.values(field))).collect(),
            Records::Mofs(rs) => rs.iter().flat_map(|r| owned(r.values(field))).collect(),
        }
    }

    pub fn schema_matches(&self, schema: SchemaId) -> bool {
        matches!(
            (self, schema),
            (Records::Materials(_), SchemaId::GeneralJson)
                | (Records::Mofs(_), SchemaId::MofJson)
                | (Records::Doping(_), SchemaId::DopingJson | SchemaId::DopingEng | SchemaId::DopingExtraEng)
        )
    }
}

/// Whether a sample belongs to the training or the held-out portion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

/// One training or evaluation sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptCompletionPair {
    pub prompt: String,
    pub completion: String,
    pub schema: SchemaId,
    #[serde(default)]
    pub split: Split,
}

impl PromptCompletionPair {
    pub fn new(prompt: impl Into<String>, completion: impl Into<String>, schema: SchemaId) -> Result<Self> {
        let prompt = prompt.into();
        if prompt.trim().is_empty() {
            return Err(Error::InvalidArgument("prompt is empty".into()));
        }
        Ok(PromptCompletionPair { prompt, completion: completion.into(), schema, split: Split::Train })
    }
}
