//! Dataset construction: abstract filtering, sentence relevance, fine-tune
//! files and seeded train/test splits.

use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::codec::{decode, wrap};
use crate::error::{Error, Result};
use crate::records::{PromptCompletionPair, Split};

/// One entry of an abstract corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abstract {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract")]
    pub text: String,
}

/// Substring include/exclude lists for selecting abstracts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordConfig {
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default)]
    pub case_sensitive: bool,
}

const DOPING_KEYWORDS: &str = include_str!("../data/keywords/doping.json");
const GENERAL_KEYWORDS: &str = include_str!("../data/keywords/general.json");
const MOF_KEYWORDS: &str = include_str!("../data/keywords/mof.json");

impl KeywordConfig {
    /// The shipped list for `task` (`doping`, `general` or `mof`).
    pub fn builtin(task: &str) -> Result<KeywordConfig> {
        let src = match task {
            "doping" => DOPING_KEYWORDS,
            "general" => GENERAL_KEYWORDS,
            "mof" => MOF_KEYWORDS,
            other => return Err(Error::InvalidArgument(format!("no keyword list for task {other:?}"))),
        };
        KeywordConfig::from_json(src)
    }

    pub fn from_json(s: &str) -> Result<KeywordConfig> {
        let cfg: KeywordConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<KeywordConfig> {
        KeywordConfig::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.include.is_empty() {
            return Err(Error::InvalidArgument("keyword config has no include patterns".into()));
        }
        if self.include.iter().chain(&self.exclude).any(|p| p.is_empty()) {
            return Err(Error::InvalidArgument("keyword config has an empty pattern".into()));
        }
        Ok(())
    }

    /// At least one include pattern and no exclude pattern occurs in `text`.
    pub fn matches(&self, text: &str) -> bool {
        let fold = |s: &str| if self.case_sensitive { s.to_owned() } else { s.to_lowercase() };
        let text = fold(text);
        let hit = |p: &String| text.contains(&fold(p));
        self.include.iter().any(hit) && !self.exclude.iter().any(hit)
    }
}

/// Abstracts whose title or body satisfies `cfg`, in input order.
pub fn filter_abstracts(abstracts: &[Abstract], cfg: &KeywordConfig) -> Result<Vec<Abstract>> {
    cfg.validate()?;
    Ok(abstracts.iter().filter(|a| cfg.matches(&format!("{}\n{}", a.title, a.text))).cloned().collect())
}

pub fn parse_abstracts_jsonl(s: &str) -> Result<Vec<Abstract>> {
    parse_jsonl(s, "abstract")
}

pub fn parse_pairs_jsonl(s: &str) -> Result<Vec<PromptCompletionPair>> {
    let pairs: Vec<PromptCompletionPair> = parse_jsonl(s, "sample")?;
    for (i, p) in pairs.iter().enumerate() {
        if p.prompt.trim().is_empty() {
            return Err(Error::Dataset(format!("sample {i}: prompt is empty")));
        }
    }
    Ok(pairs)
}

pub fn pairs_to_jsonl(pairs: &[PromptCompletionPair]) -> String {
    pairs.iter().map(|p| serde_json::to_string(p).expect("pair serialization cannot fail") + "\n").collect()
}

fn parse_jsonl<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<Vec<T>> {
    s.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Dataset(format!("{what} line {}: {e}", i + 1))))
        .collect()
}

static DOPING_SENTENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b[np]-type\b|\b[\w-]*dop(?:ed|ing|ants?)\b|-(?:co)?dop").unwrap());
static DOPING_SENTENCE_EXCLUDE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)dopamine").unwrap());

/// Whether a sentence may carry doping information: it mentions doping or
/// carrier type and is not about dopamine.
pub fn doping_relevant(sentence: &str) -> bool {
    DOPING_SENTENCE.is_match(sentence) && !DOPING_SENTENCE_EXCLUDE.is_match(sentence)
}

#[derive(Serialize)]
struct FinetuneLine<'a> {
    prompt: &'a str,
    completion: &'a str,
}

/// Fine-tune JSONL text: one `{"prompt", "completion"}` object per pair with
/// the wire separators applied and a leading space on the completion.
///
/// Every completion must decode under its schema.
pub fn finetune_jsonl(pairs: &[PromptCompletionPair]) -> Result<String> {
    let mut out = String::new();
    for (index, pair) in pairs.iter().enumerate() {
        if let Some(d) = decode(pair.schema, &pair.completion).error() {
            return Err(Error::UnparsableSample { index, schema: pair.schema, reason: d.to_string() });
        }
        let w = wrap(pair);
        let completion = format!(" {}", w.completion_wire);
        out.push_str(&serde_json::to_string(&FinetuneLine { prompt: &w.prompt_wire, completion: &completion })?);
        out.push('\n');
    }
    Ok(out)
}

pub fn build_finetune_file(pairs: &[PromptCompletionPair], path: &Path) -> Result<()> {
    fs::write(path, finetune_jsonl(pairs)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub seed: u64,
    pub test_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { seed: 0, test_fraction: 0.1 }
    }
}

/// Seeded random partition into train and test sets.
///
/// The test set holds `round(n * test_fraction)` samples; both sides keep
/// input order and carry their split tag. Splits that would leave either
/// side empty are rejected.
pub fn split_dataset(
    pairs: &[PromptCompletionPair],
    cfg: &SplitConfig,
) -> Result<(Vec<PromptCompletionPair>, Vec<PromptCompletionPair>)> {
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction {} is not in (0, 1)", cfg.test_fraction)));
    }
    let n = pairs.len();
    let n_test = (n as f64 * cfg.test_fraction).round() as usize;
    if n < 2 || n_test == 0 || n_test == n {
        return Err(Error::InvalidArgument(format!(
            "{n} samples at test fraction {} give a degenerate split",
            cfg.test_fraction
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut is_test = vec![false; n];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let tagged = |i: usize, split: Split| PromptCompletionPair { split, ..pairs[i].clone() };
    let train = (0..n).filter(|&i| !is_test[i]).map(|i| tagged(i, Split::Train)).collect();
    let test = (0..n).filter(|&i| is_test[i]).map(|i| tagged(i, Split::Test)).collect();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_wire, PROMPT_SEPARATOR};
    use crate::records::SchemaId;

    fn abs(id: &str, text: &str) -> Abstract {
        Abstract { id: id.into(), title: String::new(), text: text.into() }
    }

    fn pair(i: usize) -> PromptCompletionPair {
        PromptCompletionPair::new(format!("prompt {i}"), "[]", SchemaId::GeneralJson).unwrap()
    }

    #[test]
    fn keyword_filter() {
        let cfg = KeywordConfig::builtin("doping").unwrap();
        let kept = filter_abstracts(
            &[abs("a", "ZnO was Doped with Al"), abs("b", "dopamine sensors"), abs("c", "XRD study")],
            &cfg,
        )
        .unwrap();
        assert_eq!(kept.iter().map(|a| a.id.as_str()).collect::<Vec<_>>(), ["a"]);
        assert_eq!(filter_abstracts(&kept, &cfg).unwrap(), kept);
    }

    #[test]
    fn shipped_configs_load() {
        for task in ["doping", "general", "mof"] {
            KeywordConfig::builtin(task).unwrap();
        }
        assert!(KeywordConfig::builtin("other").is_err());
        assert!(KeywordConfig::from_json(r#"{"include":[]}"#).is_err());
    }

    #[test]
    fn case_sensitivity() {
        let cfg = KeywordConfig { include: vec!["MOF".into()], exclude: vec![], case_sensitive: true };
        assert!(cfg.matches("a MOF"));
        assert!(!cfg.matches("a mof"));
    }

    #[test]
    fn sentence_relevance() {
        assert!(doping_relevant("SnSe was doped with Na."));
        assert!(doping_relevant("We report p-type conduction."));
        assert!(doping_relevant("Mn-codoping improves stability."));
        assert!(!doping_relevant("The XRD pattern was measured."));
        assert!(!doping_relevant("Polydopamine coatings were doped onto Au."));
    }

    #[test]
    fn finetune_line_round_trips() {
        let p = PromptCompletionPair::new(
            "ZnO was doped with Al.",
            "The host 'ZnO' was doped with 'Al'.",
            SchemaId::DopingEng,
        )
        .unwrap();
        let text = finetune_jsonl(std::slice::from_ref(&p)).unwrap();
        assert_eq!(text.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(v["prompt"], format!("{}{PROMPT_SEPARATOR}", p.prompt));
        let (u, outcome) = decode_wire(SchemaId::DopingEng, v["completion"].as_str().unwrap());
        assert_eq!(u.text, p.completion);
        assert!(outcome.is_parsable());
    }

    #[test]
    fn finetune_rejects_unparsable() {
        let bad = PromptCompletionPair::new("x", "[{", SchemaId::GeneralJson).unwrap();
        let err = finetune_jsonl(&[pair(0), bad]).unwrap_err();
        assert!(matches!(err, Error::UnparsableSample { index: 1, .. }));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let pairs: Vec<_> = (0..10).map(pair).collect();
        let cfg = SplitConfig { seed: 7, test_fraction: 0.1 };
        let (train, test) = split_dataset(&pairs, &cfg).unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        assert_eq!(test[0].split, Split::Test);
        assert_eq!(split_dataset(&pairs, &cfg).unwrap(), (train, test));
    }

    #[test]
    fn degenerate_splits() {
        let pairs: Vec<_> = (0..3).map(pair).collect();
        assert!(split_dataset(&pairs[..1], &SplitConfig::default()).is_err());
        assert!(split_dataset(&pairs, &SplitConfig { seed: 0, test_fraction: 0.1 }).is_err());
        assert!(split_dataset(&pairs, &SplitConfig { seed: 0, test_fraction: 1.0 }).is_err());
    }
}
