use std::fmt::Write as _;
use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use matextract::codec::{decode as decode_completion, encode as encode_records};
use matextract::corpus::{
    filter_abstracts, finetune_jsonl, pairs_to_jsonl, parse_abstracts_jsonl, parse_pairs_jsonl, split_dataset,
    KeywordConfig, SplitConfig,
};
use matextract::kgraph::{export_graph, graph_from_records};
use matextract::llm::{
    extract_records, learning_curve_plan, CompletionBackend, FinetuneJob, InferenceParams, LiveBackend, LiveConfig,
    ReplayStore,
};
use matextract::records::{Records, SchemaId};
use matextract::scoring::{score_completions, MofRoot, RelationSpec};
use matextract_annotate::{http, AnnotationService, Suggester, SystemClock};
use serde::Serialize;

use crate::io::{self, completion_line, Output};
use crate::{
    BackendArgs, BackendKind, CurvePlanArgs, DatasetBuildArgs, DatasetFilterArgs, DecodeArgs, EncodeArgs, ExtractArgs,
    GraphExportArgs, MofRootArg, ScoreArgs, ServeArgs, SplitArgs,
};

pub fn encode(a: EncodeArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let mut lines = Vec::new();
    for (i, line) in io::read(&a.input)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let value: serde_json::Value = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        let records = parse_records(a.schema, line, value).with_context(|| format!("line {}", i + 1))?;
        let text = encode_records(a.schema, &records).with_context(|| format!("line {}", i + 1))?;
        lines.push(text);
    }
    if a.common.json {
        return out.json(&lines);
    }
    out.write(&lines.iter().map(|l| completion_line(l) + "\n").collect::<String>())
}

/// Doping input may be either the records structure or the doping JSON
/// object with `hosts2dopants`.
fn parse_records(schema: SchemaId, line: &str, value: serde_json::Value) -> Result<Records> {
    if schema.is_doping() && value.get("hosts2dopants").is_some() {
        // the raw line, since key order matters to the doping JSON decoder
        let outcome = decode_completion(SchemaId::DopingJson, line);
        if let Some(e) = outcome.error() {
            bail!("{e}");
        }
        return Ok(outcome.into_record().expect("parsable outcome has a record"));
    }
    Ok(Records::from_json(schema, value)?)
}

#[derive(Serialize)]
struct DecodedLine {
    line: usize,
    parsable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    record: Option<Records>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct DecodeReport {
    schema: SchemaId,
    n: usize,
    parsable: usize,
    parsability_rate: f64,
    lines: Vec<DecodedLine>,
}

pub fn decode(a: DecodeArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let completions = io::read_completions(&a.input)?;
    let lines: Vec<DecodedLine> = completions
        .iter()
        .map(|(line, c)| {
            let outcome = decode_completion(a.schema, c);
            DecodedLine {
                line: *line,
                parsable: outcome.is_parsable(),
                error: outcome.error().map(ToString::to_string),
                record: outcome.into_record(),
            }
        })
        .collect();
    let parsable = lines.iter().filter(|l| l.parsable).count();
    let n = lines.len();
    let report = DecodeReport {
        schema: a.schema,
        n,
        parsable,
        parsability_rate: if n == 0 { 0.0 } else { parsable as f64 / n as f64 },
        lines,
    };
    if a.common.json {
        return out.json(&report);
    }
    let mut text = format!("{parsable}/{n} completions decode ({:.3})\n", report.parsability_rate);
    for l in report.lines.iter().filter(|l| !l.parsable) {
        writeln!(text, "line {}: {}", l.line, l.error.as_deref().unwrap_or_default())?;
    }
    out.write(&text)
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let gold = io::read_completions(&a.gold)?;
    let pred = io::read_completions(&a.pred)?;
    if gold.len() != pred.len() {
        bail!("{} gold completions but {} predictions", gold.len(), pred.len());
    }
    let pairs: Vec<(String, String)> = gold.into_iter().zip(pred).map(|(g, p)| (g.1, p.1)).collect();
    let spec = match (RelationSpec::default_for(a.schema), a.mof_root) {
        (RelationSpec::Mof(_), MofRootArg::Name) => RelationSpec::Mof(MofRoot::Name),
        (RelationSpec::Mof(_), MofRootArg::MofFormula) => RelationSpec::Mof(MofRoot::MofFormula),
        (spec, _) => spec,
    };
    let report = score_completions(a.schema, &pairs, &a.bins, spec)?;
    if a.common.json {
        return out.json(&report);
    }
    let s = &report.sequence;
    let mut text = format!(
        "{} samples: exact match {:.3}, similarity {:.3}, parsability {:.3}\n",
        s.n, s.exact_match_accuracy, s.mean_similarity, s.parsability_rate
    );
    for (field, p) in &report.ner {
        writeln!(text, "ner {field:<20} P {:.3} R {:.3} F1 {:.3}", p.precision, p.recall, p.f1)?;
    }
    for (label, p) in &report.nerre {
        writeln!(text, "rel {label:<20} P {:.3} R {:.3} F1 {:.3}", p.precision, p.recall, p.f1)?;
    }
    out.write(&text)
}

fn backend(a: &BackendArgs) -> Result<Option<Arc<dyn CompletionBackend>>> {
    Ok(match a.backend {
        BackendKind::None => None,
        BackendKind::Replay => {
            let path = a.replay.as_ref().context("--backend replay needs --replay <store>")?;
            Some(Arc::new(ReplayStore::load(path)?))
        }
        BackendKind::Live => {
            let endpoint = a.endpoint.clone().context("--backend live needs --endpoint")?;
            let model = a.model.clone().context("--backend live needs --model")?;
            let mut cfg = LiveConfig::new(endpoint, model);
            cfg.api_key_env = a.api_key_env.clone();
            Some(Arc::new(LiveBackend::from_env(cfg)?))
        }
    })
}

pub fn extract(a: ExtractArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let backend = backend(&a.backend)?.context("extract needs a backend")?;
    let params = InferenceParams::for_schema(a.schema);
    let mut text = String::new();
    for (line, prompt) in io::read_completions(&a.input)? {
        let x =
            extract_records(&prompt, a.schema, backend.as_ref(), &params).with_context(|| format!("line {line}"))?;
        text.push_str(&serde_json::to_string(&x)?);
        text.push('\n');
    }
    out.write(&text)
}

pub fn dataset_build(a: DatasetBuildArgs) -> Result<()> {
    let out = Output::new(a.common.out.clone());
    let pairs = parse_pairs_jsonl(&io::read(&a.input)?)?;
    out.write(&finetune_jsonl(&pairs)?)?;
    if let Some(job_path) = &a.job {
        let schema = pairs.first().map(|p| p.schema).context("no samples")?;
        if pairs.iter().any(|p| p.schema != schema) {
            bail!("a job covers one schema; the samples mix several");
        }
        let training_file = a.common.out.as_ref().map_or("-".to_owned(), |p| p.display().to_string());
        let job = FinetuneJob::new(schema, training_file, a.base_model);
        std::fs::write(job_path, job.to_json()).with_context(|| format!("writing {}", job_path.display()))?;
    }
    Ok(())
}

pub fn dataset_filter(a: DatasetFilterArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let cfg = match (&a.task, &a.keywords) {
        (Some(task), None) => KeywordConfig::builtin(task)?,
        (None, Some(path)) => KeywordConfig::from_file(path)?,
        _ => bail!("give exactly one of --task and --keywords"),
    };
    let abstracts = parse_abstracts_jsonl(&io::read(&a.input)?)?;
    let kept = filter_abstracts(&abstracts, &cfg)?;
    if a.common.json {
        return out.json(&kept);
    }
    let mut text = String::new();
    for k in &kept {
        text.push_str(&serde_json::to_string(k)?);
        text.push('\n');
    }
    out.write(&text)
}

pub fn split(a: SplitArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let pairs = parse_pairs_jsonl(&io::read(&a.input)?)?;
    let (train, test) = split_dataset(&pairs, &SplitConfig { seed: a.seed, test_fraction: a.test_fraction })?;
    std::fs::write(&a.train_out, pairs_to_jsonl(&train))
        .with_context(|| format!("writing {}", a.train_out.display()))?;
    std::fs::write(&a.test_out, pairs_to_jsonl(&test)).with_context(|| format!("writing {}", a.test_out.display()))?;
    let summary = serde_json::json!({ "train": train.len(), "test": test.len(), "seed": a.seed });
    if a.common.json {
        return out.json(&summary);
    }
    out.write(&format!("{} train, {} test\n", train.len(), test.len()))
}

pub fn graph_export(a: GraphExportArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let mut text = String::new();
    let mut skipped = 0;
    for (line, c) in io::read_completions(&a.input)? {
        let Some(records) = decode_completion(a.schema, &c).into_record() else {
            log::warn!("line {line}: completion does not decode; no graph");
            skipped += 1;
            continue;
        };
        let doc_id = format!("{}-{line}", a.prefix);
        let g = graph_from_records(&records, &doc_id);
        match &a.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                export_graph(&g, &dir.join(format!("{doc_id}.json")))?;
            }
            None => {
                text.push_str(&serde_json::to_string(&g)?);
                text.push('\n');
            }
        }
    }
    if skipped > 0 {
        eprintln!("{skipped} completions did not decode");
    }
    if a.out_dir.is_none() {
        out.write(&text)?;
    }
    Ok(())
}

pub fn curve_plan(a: CurvePlanArgs) -> Result<()> {
    let out = Output::new(a.common.out);
    let plan = learning_curve_plan(&a.sizes, a.seed)?;
    if a.common.json {
        return out.json(&plan);
    }
    let mut text = String::from("n\tepochs\tseed\n");
    for j in &plan {
        writeln!(text, "{}\t{}\t{}", j.n, j.epochs, j.seed)?;
    }
    out.write(&text)
}

pub fn annotate_serve(a: ServeArgs) -> Result<()> {
    let service = AnnotationService::open(&a.journal, a.snapshot_every, Arc::new(SystemClock::default()))?;
    if let Some(backend) = backend(&a.backend)? {
        service.set_suggester(Some(Suggester { backend, tag: a.model_tag.clone() }));
    }
    let token = match &a.token_env {
        Some(var) => Some(std::env::var(var).with_context(|| format!("reading ${var}"))?),
        None => None,
    };
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(http::serve_until_interrupted(addr, Arc::new(service), token))?;
    Ok(())
}
