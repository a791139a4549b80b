//! Dataset ingestion, pipeline orchestration, metrics, and reports.
//!
//! Two run styles share one report shape:
//!
//! * the path pipeline ([`run_pot`]) — extract a graph (one LLM call, or
//!   skipped for records that carry a gold graph), enumerate reasoning
//!   paths, solve each path symbolically or with an LLM reasoner, and
//!   union the per-path answers;
//! * whole-story baselines ([`run_baseline`]) — ask for the answer
//!   directly, optionally with demonstrations, step-by-step reasoning, or
//!   several self-consistency rounds and a majority vote.
//!
//! A prediction is correct when it shares at least one relation with gold.
//! Reports embed the prompt-template manifest and kinship-table hash so
//! every number is attributable to exact asset versions, and contain no
//! timestamps: identical inputs yield byte-identical reports.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::extract::{
    build_baseline_prompt, build_extraction_prompt, build_graph, build_reasoner_prompt,
    parse_extraction, ExtractError, TemplateKind, TemplateSet,
};
use crate::graph::{RelationGraph, RelationQuery};
use crate::llm::{complete_many, ChatExchange, LlmError, TextCompletion};
use crate::noise::{
    generate_gold_corpus, inject_n, read_corpus, substream, GoldSample, NoiseError, NoiseType,
};
use crate::paths::{find_paths, format_path, ReasoningPath};
use crate::reason::aggregate_answers;
use crate::reason::kinship::{kinship_fold, KinshipRuleTable};
use crate::reason::spatial::spatial_solve;
use crate::reason::text::{parse_bracketed_answer, path_to_text};
use crate::reason::whole::{whole_graph_solve, WholeGraphOutcome};
use crate::vocab::{Domain, Vocabulary};

/// Errors that abort an evaluation run before or instead of producing a
/// report. Per-record failures never abort: they score as incorrect with
/// diagnostics attached.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Schema {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("no records to evaluate")]
    EmptyResults,
    #[error("mode {mode} needs an LLM client (live, recorded, or mock)")]
    MissingClient { mode: String },
    #[error("symbolic path solving is not available for the {0} domain")]
    SymbolicUnsupported(Domain),
    #[error(transparent)]
    Template(#[from] ExtractError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("failed to serialize report: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// A gold graph attached to a dataset record; the pipeline skips the
/// extraction call for such records and reasons over the graph directly.
#[derive(Debug, Clone)]
pub struct AttachedGraph {
    pub graph: RelationGraph,
    pub query: RelationQuery,
}

/// One evaluation sample: a story (context with the question merged in),
/// the gold answer set, and optionally the reasoning-hop count and a gold
/// graph.
#[derive(Debug, Clone)]
pub struct DatasetRecord {
    pub id: String,
    pub story: String,
    pub gold: BTreeSet<String>,
    pub hops: Option<u32>,
    pub attached: Option<AttachedGraph>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnswerField {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<String>,
    story: String,
    #[serde(alias = "answers", alias = "gold")]
    answer: AnswerField,
    hops: Option<u32>,
}

fn normalize_gold(
    domain: Domain,
    raw: &[String],
    path: &str,
    line: usize,
) -> Result<BTreeSet<String>, EvalError> {
    let vocab = Vocabulary::for_domain(domain);
    let mut gold = BTreeSet::new();
    for token in raw {
        for part in token.split(['|', ',']) {
            if part.trim().is_empty() {
                continue;
            }
            match vocab.normalize_answer_label(part) {
                Some(label) => {
                    gold.insert(label);
                }
                None => {
                    return Err(EvalError::Schema {
                        path: path.to_string(),
                        line,
                        reason: format!("answer `{part}` is not a {domain} relation"),
                    })
                }
            }
        }
    }
    if gold.is_empty() {
        return Err(EvalError::Schema {
            path: path.to_string(),
            line,
            reason: "empty gold answer set".to_string(),
        });
    }
    Ok(gold)
}

/// Load records from a file. The format follows the extension: `.jsonl` /
/// `.json` (one object per line with `story`, `answer`/`answers`, optional
/// `id` and `hops`), `.csv` (header `id,story,answer,hops`), anything else
/// is read as a gold-graph corpus whose records carry attached graphs.
/// Gold labels are normalized into the domain vocabulary (concept codes
/// like `NTPP` included); anything unmappable is a schema error with its
/// line number.
pub fn load_dataset(domain: Domain, path: &Path) -> Result<Vec<DatasetRecord>, EvalError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: display.clone(),
        source,
    })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => load_jsonl(domain, &text, &display),
        Some("csv") => load_csv(domain, &text, &display),
        _ => load_graph_corpus(domain, &text, &display),
    }
}

fn load_jsonl(domain: Domain, text: &str, path: &str) -> Result<Vec<DatasetRecord>, EvalError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonRecord = serde_json::from_str(line).map_err(|e| EvalError::Schema {
            path: path.to_string(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        let answers = match raw.answer {
            AnswerField::One(s) => vec![s],
            AnswerField::Many(v) => v,
        };
        records.push(DatasetRecord {
            id: raw.id.unwrap_or_else(|| format!("record-{:04}", i + 1)),
            story: raw.story,
            gold: normalize_gold(domain, &answers, path, i + 1)?,
            hops: raw.hops,
            attached: None,
        });
    }
    Ok(records)
}

fn load_csv(domain: Domain, text: &str, path: &str) -> Result<Vec<DatasetRecord>, EvalError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| EvalError::Schema {
            path: path.to_string(),
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (id_col, story_col, answer_col, hops_col) =
        (col("id"), col("story"), col("answer"), col("hops"));
    let story_col = story_col.ok_or_else(|| EvalError::Schema {
        path: path.to_string(),
        line: 1,
        reason: "missing `story` column".to_string(),
    })?;
    let answer_col = answer_col.ok_or_else(|| EvalError::Schema {
        path: path.to_string(),
        line: 1,
        reason: "missing `answer` column".to_string(),
    })?;
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(|e| EvalError::Schema {
            path: path.to_string(),
            line,
            reason: e.to_string(),
        })?;
        let field = |idx: Option<usize>| idx.and_then(|c| row.get(c)).unwrap_or("").to_string();
        let story = field(Some(story_col));
        if story.trim().is_empty() {
            return Err(EvalError::Schema {
                path: path.to_string(),
                line,
                reason: "empty story".to_string(),
            });
        }
        let hops = match field(hops_col).trim() {
            "" => None,
            s => Some(s.parse::<u32>().map_err(|_| EvalError::Schema {
                path: path.to_string(),
                line,
                reason: format!("bad hops value `{s}`"),
            })?),
        };
        records.push(DatasetRecord {
            id: match field(id_col).trim() {
                "" => format!("record-{:04}", i + 1),
                s => s.to_string(),
            },
            gold: normalize_gold(domain, &[field(Some(answer_col))], path, line)?,
            story,
            hops,
            attached: None,
        });
    }
    Ok(records)
}

fn load_graph_corpus(
    domain: Domain,
    text: &str,
    path: &str,
) -> Result<Vec<DatasetRecord>, EvalError> {
    let samples = read_corpus(domain, text).map_err(|e| match e {
        NoiseError::InvalidCorpus { line, reason } => EvalError::Schema {
            path: path.to_string(),
            line,
            reason,
        },
        other => EvalError::Noise(other),
    })?;
    Ok(samples.into_iter().map(record_from_sample).collect())
}

/// View a gold sample as a dataset record with its graph attached.
pub fn record_from_sample(sample: GoldSample) -> DatasetRecord {
    DatasetRecord {
        id: sample.id.clone(),
        story: sample.graph.to_text(Some(&sample.query)),
        gold: sample.answers.clone(),
        hops: Some(sample.hops),
        attached: Some(AttachedGraph {
            graph: sample.graph,
            query: sample.query,
        }),
    }
}

/// Path-pipeline variant: resolve each path with the relation algebra or
/// with one LLM call per path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotMode {
    Symbolic,
    Llm,
}

impl PotMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PotMode::Symbolic => "pot-symbolic",
            PotMode::Llm => "pot-llm",
        }
    }
}

/// Whole-story baseline prompt styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMode {
    Io,
    FewShot,
    Cot,
    CotSc,
}

impl BaselineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineMode::Io => "io",
            BaselineMode::FewShot => "few-shot",
            BaselineMode::Cot => "cot",
            BaselineMode::CotSc => "cot-sc",
        }
    }

    fn template_kind(&self) -> TemplateKind {
        match self {
            BaselineMode::Io => TemplateKind::BaselineIo,
            BaselineMode::FewShot => TemplateKind::BaselineFewShot,
            // Self-consistency reuses the step-by-step prompt and varies
            // only in sampling more rounds.
            BaselineMode::Cot | BaselineMode::CotSc => TemplateKind::BaselineCot,
        }
    }
}

/// Knobs for a run. Defaults: path length cap 12 (the deepest benchmark
/// chain plus slack), 64 paths, 5 self-consistency rounds, 4 workers.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: Domain,
    pub max_len: usize,
    pub max_paths: usize,
    pub sc_rounds: usize,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(domain: Domain) -> Self {
        RunConfig {
            domain,
            max_len: 12,
            max_paths: 64,
            sc_rounds: 5,
            workers: 4,
        }
    }
}

/// The run configuration as echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub model: String,
    pub temperature: f64,
    pub max_len: usize,
    pub max_paths: usize,
    pub sc_rounds: usize,
    pub workers: usize,
}

/// One reasoning path and what it produced.
#[derive(Debug, Clone, Serialize)]
pub struct PathOutcome {
    pub path: String,
    pub answers: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-record outcome with enough diagnostics to re-derive the
/// correctness flag offline.
#[derive(Debug, Clone, Serialize)]
pub struct EvalResult {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hops: Option<u32>,
    pub gold: Vec<String>,
    pub predicted: Vec<String>,
    pub correct: bool,
    pub paths_found: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_path: Vec<PathOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Accuracy inside one hop bucket.
#[derive(Debug, Clone, Default, Serialize)]
pub struct HopBucket {
    pub records: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Full run report. Serialization is deterministic: ordered maps, no
/// timestamps, results in input order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub mode: String,
    pub domain: String,
    pub config: ConfigEcho,
    pub records: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub accuracy_by_hops: BTreeMap<u32, HopBucket>,
    pub template_manifest: BTreeMap<String, String>,
    pub kinship_table_version: String,
    pub results: Vec<EvalResult>,
}

impl Report {
    pub fn to_json(&self) -> Result<String, EvalError> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    /// Human-oriented aligned-column summary.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "mode {}  domain {}  model {}  temperature {}\n\
             records {}  correct {}  accuracy {:.4}\n",
            self.mode,
            self.domain,
            self.config.model,
            self.config.temperature,
            self.records,
            self.correct,
            self.accuracy
        );
        if !self.accuracy_by_hops.is_empty() {
            out.push_str("\n  hops  records  correct  accuracy\n");
            for (k, b) in &self.accuracy_by_hops {
                out.push_str(&format!(
                    "  {:>4}  {:>7}  {:>7}  {:>8.4}\n",
                    k, b.records, b.correct, b.accuracy
                ));
            }
        }
        let failures: Vec<&EvalResult> = self.results.iter().filter(|r| !r.correct).collect();
        if !failures.is_empty() {
            out.push_str("\n  failing records:\n");
            for r in failures {
                out.push_str(&format!(
                    "  {}  gold [{}]  predicted [{}]\n",
                    r.id,
                    r.gold.join(", "),
                    r.predicted.join(", ")
                ));
            }
        }
        out
    }
}

/// Fraction of results whose prediction shares at least one relation with
/// gold.
pub fn accuracy(results: &[EvalResult]) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let correct = results.iter().filter(|r| r.correct).count();
    Ok(correct as f64 / results.len() as f64)
}

fn build_report(
    mode: &str,
    results: Vec<EvalResult>,
    client: Option<&dyn TextCompletion>,
    config: &RunConfig,
) -> Report {
    let correct = results.iter().filter(|r| r.correct).count();
    let mut by_hops: BTreeMap<u32, HopBucket> = BTreeMap::new();
    for r in &results {
        if let Some(k) = r.hops {
            let bucket = by_hops.entry(k).or_default();
            bucket.records += 1;
            if r.correct {
                bucket.correct += 1;
            }
        }
    }
    for bucket in by_hops.values_mut() {
        bucket.accuracy = bucket.correct as f64 / bucket.records as f64;
    }
    Report {
        mode: mode.to_string(),
        domain: config.domain.as_str().to_string(),
        config: ConfigEcho {
            model: client
                .map(|c| c.model().to_string())
                .unwrap_or_else(|| "none".to_string()),
            temperature: client.map(|c| c.temperature()).unwrap_or(0.0),
            max_len: config.max_len,
            max_paths: config.max_paths,
            sc_rounds: config.sc_rounds,
            workers: config.workers,
        },
        records: results.len(),
        correct,
        accuracy: correct as f64 / results.len().max(1) as f64,
        accuracy_by_hops: by_hops,
        template_manifest: TemplateSet::builtin().manifest(),
        kinship_table_version: KinshipRuleTable::builtin().version_hash().to_string(),
        results,
    }
}

fn correct_against(predicted: &BTreeSet<String>, gold: &BTreeSet<String>) -> bool {
    predicted.intersection(gold).next().is_some()
}

/// Solve one path with the relation algebra for the graph's domain.
fn symbolic_path_answers(
    graph: &RelationGraph,
    path: &ReasoningPath,
    table: &KinshipRuleTable,
) -> Result<BTreeSet<String>, String> {
    match graph.domain() {
        Domain::Stepgame => spatial_solve(graph, path)
            .map(|label| BTreeSet::from([label]))
            .map_err(|e| e.to_string()),
        Domain::Clutrr => kinship_fold(graph, path, table).map_err(|e| e.to_string()),
        other => Err(format!("no relation algebra for {other}")),
    }
}

/// Run the path pipeline over a dataset.
///
/// Per record: obtain a graph (one extraction call, skipped when the
/// record has one attached), enumerate reasoning paths, solve every path,
/// and union the answers. Extraction failures, zero paths, and failed
/// paths degrade to an incorrect prediction with diagnostics; nothing
/// aborts the run once it starts. LLM calls are batched across records
/// with bounded concurrency; result order is input order.
pub fn run_pot(
    records: &[DatasetRecord],
    mode: PotMode,
    client: Option<&dyn TextCompletion>,
    config: &RunConfig,
) -> Result<Report, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    if mode == PotMode::Symbolic && !config.domain.supports_symbolic() {
        return Err(EvalError::SymbolicUnsupported(config.domain));
    }
    let needs_client = mode == PotMode::Llm || records.iter().any(|r| r.attached.is_none());
    if needs_client && client.is_none() {
        return Err(EvalError::MissingClient {
            mode: mode.as_str().to_string(),
        });
    }
    let table = KinshipRuleTable::builtin();

    // Phase 1: extraction calls for records without attached graphs.
    let mut extraction_prompts = Vec::new();
    let mut extraction_slot: Vec<Option<usize>> = vec![None; records.len()];
    for (i, record) in records.iter().enumerate() {
        if record.attached.is_none() {
            extraction_slot[i] = Some(extraction_prompts.len());
            extraction_prompts.push(build_extraction_prompt(config.domain, &record.story)?);
        }
    }
    let extraction_outputs: Vec<Result<ChatExchange, LlmError>> = if extraction_prompts.is_empty() {
        Vec::new()
    } else {
        complete_many(
            client.expect("validated above"),
            &extraction_prompts,
            config.workers,
        )
    };

    // Phase 2: build graphs and paths; collect per-path reasoner prompts.
    struct Working {
        graph: Option<(RelationGraph, RelationQuery)>,
        paths: Vec<ReasoningPath>,
        warnings: Vec<String>,
        reasoner_start: usize,
    }
    let mut workings: Vec<Working> = Vec::with_capacity(records.len());
    let mut reasoner_prompts: Vec<String> = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let mut warnings = Vec::new();
        let graph = match (&record.attached, extraction_slot[i]) {
            (Some(att), _) => Some((att.graph.clone(), att.query.clone())),
            (None, Some(slot)) => match &extraction_outputs[slot] {
                Ok(exchange) => match parse_extraction(config.domain, &exchange.completion) {
                    Ok(extraction) => {
                        let (g, q, mut w) = build_graph(config.domain, &extraction);
                        warnings.append(&mut w);
                        Some((g, q))
                    }
                    Err(e) => {
                        warnings.push(format!("extraction failed: {e}"));
                        None
                    }
                },
                Err(e) => {
                    warnings.push(format!("extraction call failed: {e}"));
                    None
                }
            },
            (None, None) => unreachable!("every record has an attachment or a prompt"),
        };
        let paths = match &graph {
            Some((g, q)) => match find_paths(g, q, config.max_len, config.max_paths) {
                Ok(paths) => {
                    if paths.is_empty() {
                        warnings.push("disconnected-query: no reasoning paths".to_string());
                    }
                    paths
                }
                Err(e) => {
                    warnings.push(format!("disconnected-query: {e}"));
                    Vec::new()
                }
            },
            None => Vec::new(),
        };
        let reasoner_start = reasoner_prompts.len();
        if mode == PotMode::Llm {
            if let Some((g, _)) = &graph {
                for path in &paths {
                    let chain = path_to_text(g, path, config.domain);
                    reasoner_prompts.push(build_reasoner_prompt(
                        config.domain,
                        &chain,
                        &record.story,
                    )?);
                }
            }
        }
        workings.push(Working {
            graph,
            paths,
            warnings,
            reasoner_start,
        });
    }
    let reasoner_outputs: Vec<Result<ChatExchange, LlmError>> = if reasoner_prompts.is_empty() {
        Vec::new()
    } else {
        complete_many(
            client.expect("llm mode was validated"),
            &reasoner_prompts,
            config.workers,
        )
    };

    // Phase 3: solve paths, aggregate, score.
    let mut results = Vec::with_capacity(records.len());
    for (record, w) in records.iter().zip(workings) {
        let mut warnings = w.warnings;
        let mut per_path = Vec::with_capacity(w.paths.len());
        let mut path_answer_sets: Vec<Result<BTreeSet<String>, String>> = Vec::new();
        if let Some((g, _)) = &w.graph {
            for (pi, path) in w.paths.iter().enumerate() {
                let solved: Result<BTreeSet<String>, String> = match mode {
                    PotMode::Symbolic => symbolic_path_answers(g, path, table),
                    PotMode::Llm => match &reasoner_outputs[w.reasoner_start + pi] {
                        Ok(exchange) => {
                            match parse_bracketed_answer(&exchange.completion, config.domain) {
                                Ok((set, mut parse_warnings)) => {
                                    warnings.append(&mut parse_warnings);
                                    Ok(set)
                                }
                                Err(e) => Err(e.to_string()),
                            }
                        }
                        Err(e) => Err(format!("reasoner call failed: {e}")),
                    },
                };
                per_path.push(PathOutcome {
                    path: format_path(g, path),
                    answers: solved
                        .as_ref()
                        .map(|s| s.iter().cloned().collect())
                        .unwrap_or_default(),
                    error: solved.as_ref().err().cloned(),
                });
                path_answer_sets.push(solved);
            }
        }
        let predicted = match aggregate_answers(&path_answer_sets) {
            Ok(aggregated) => aggregated.answers,
            Err(e) => {
                if !path_answer_sets.is_empty() {
                    warnings.push(e.to_string());
                }
                BTreeSet::new()
            }
        };
        let correct = correct_against(&predicted, &record.gold);
        results.push(EvalResult {
            id: record.id.clone(),
            hops: record.hops,
            gold: record.gold.iter().cloned().collect(),
            predicted: predicted.into_iter().collect(),
            correct,
            paths_found: w.paths.len(),
            per_path,
            warnings,
        });
    }
    Ok(build_report(mode.as_str(), results, client, config))
}

/// Majority vote over answer sets: the most frequent whole set wins; ties
/// break toward the earliest round and are recorded.
fn majority_vote(sets: &[BTreeSet<String>], warnings: &mut Vec<String>) -> BTreeSet<String> {
    let mut tally: Vec<(String, usize, usize, &BTreeSet<String>)> = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let key = set.iter().cloned().collect::<Vec<_>>().join("|");
        match tally.iter_mut().find(|entry| entry.0 == key) {
            Some(entry) => entry.1 += 1,
            None => tally.push((key, 1, i, set)),
        }
    }
    let best = tally
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.2.cmp(&a.2)))
        .expect("at least one vote");
    let tied: Vec<&str> = tally
        .iter()
        .filter(|entry| entry.1 == best.1)
        .map(|entry| entry.0.as_str())
        .collect();
    if tied.len() > 1 {
        warnings.push(format!(
            "self-consistency tie among [{}]; keeping the earliest round",
            tied.join("; ")
        ));
    }
    best.3.clone()
}

/// Run a whole-story baseline over a dataset: one call per record
/// (`cot-sc`: `sc_rounds` calls with a majority vote over parsed answer
/// sets). Unparsable completions and failed calls score as incorrect;
/// nothing aborts the run.
pub fn run_baseline(
    records: &[DatasetRecord],
    mode: BaselineMode,
    client: &dyn TextCompletion,
    config: &RunConfig,
) -> Result<Report, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let rounds = match mode {
        BaselineMode::CotSc => config.sc_rounds.max(1),
        _ => 1,
    };
    let mut prompts = Vec::with_capacity(records.len() * rounds);
    for record in records {
        let prompt = build_baseline_prompt(config.domain, mode.template_kind(), &record.story)?;
        for _ in 0..rounds {
            prompts.push(prompt.clone());
        }
    }
    let outputs = complete_many(client, &prompts, config.workers);
    let mut results = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let mut warnings = Vec::new();
        let mut votes: Vec<BTreeSet<String>> = Vec::new();
        for (round, output) in outputs[i * rounds..(i + 1) * rounds].iter().enumerate() {
            match output {
                Ok(exchange) => match parse_bracketed_answer(&exchange.completion, config.domain) {
                    Ok((set, mut parse_warnings)) => {
                        warnings.append(&mut parse_warnings);
                        if rounds > 1 {
                            warnings.push(format!(
                                "round {round} answered [{}]",
                                set.iter().cloned().collect::<Vec<_>>().join(", ")
                            ));
                        }
                        votes.push(set);
                    }
                    Err(e) => warnings.push(format!("round {round} unparsable: {e}")),
                },
                Err(e) => warnings.push(format!("round {round} call failed: {e}")),
            }
        }
        let predicted = match votes.len() {
            0 => BTreeSet::new(),
            1 => votes.into_iter().next().expect("one vote"),
            _ => majority_vote(&votes, &mut warnings),
        };
        let correct = correct_against(&predicted, &record.gold);
        results.push(EvalResult {
            id: record.id.clone(),
            hops: record.hops,
            gold: record.gold.iter().cloned().collect(),
            predicted: predicted.into_iter().collect(),
            correct,
            paths_found: 0,
            per_path: Vec::new(),
            warnings,
        });
    }
    Ok(build_report(mode.as_str(), results, Some(client), config))
}

/// Hop range used for robustness-study gold corpora: long enough that
/// several irrelevant branches exist, short enough to stay fast.
const STUDY_HOPS: RangeInclusive<u32> = 3..=6;
/// Offset separating injection substreams from corpus-generation
/// substreams under the same seed.
const STUDY_STREAM_BASE: u64 = 1 << 32;

/// Accuracy curves of one noise type across injection levels.
#[derive(Debug, Clone, Serialize)]
pub struct TypeCurve {
    pub noise_type: String,
    pub description: String,
    /// Indexed by level: accuracy of the path pipeline.
    pub path_accuracy: Vec<f64>,
    /// Indexed by level: accuracy of the whole-graph solver (a conflict
    /// counts as incorrect).
    pub whole_accuracy: Vec<f64>,
    /// Indexed by level: samples on which the whole-graph solver reported
    /// a contradiction.
    pub conflicts: Vec<usize>,
    /// Indexed by level: samples where injection saturated (no further
    /// applicable site) and the deepest achieved level was reused.
    pub saturated: Vec<usize>,
}

/// Noise-robustness comparison: path pipeline vs whole-graph solving, per
/// noise type, at injection levels `0..=max`.
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessStudy {
    pub domain: String,
    pub seed: u64,
    pub samples: usize,
    pub levels: Vec<u32>,
    pub per_type: BTreeMap<String, TypeCurve>,
    pub kinship_table_version: String,
}

impl RobustnessStudy {
    pub fn to_json(&self) -> Result<String, EvalError> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    /// Per-type/per-level table as CSV, suitable for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "domain,noise_type,level,samples,path_accuracy,whole_accuracy,conflicts,saturated\n",
        );
        for (letter, curve) in &self.per_type {
            for (li, level) in self.levels.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{:.4},{:.4},{},{}\n",
                    self.domain,
                    letter,
                    level,
                    self.samples,
                    curve.path_accuracy[li],
                    curve.whole_accuracy[li],
                    curve.conflicts[li],
                    curve.saturated[li],
                ));
            }
        }
        out
    }

    /// Aligned-column rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "robustness study  domain {}  samples/type {}  seed {}\n",
            self.domain, self.samples, self.seed
        );
        for (letter, curve) in &self.per_type {
            out.push_str(&format!("\ntype {letter}: {}\n", curve.description));
            out.push_str("  level  path-acc  whole-acc  conflicts  saturated\n");
            for (li, level) in self.levels.iter().enumerate() {
                out.push_str(&format!(
                    "  {:>5}  {:>8.4}  {:>9.4}  {:>9}  {:>9}\n",
                    level,
                    curve.path_accuracy[li],
                    curve.whole_accuracy[li],
                    curve.conflicts[li],
                    curve.saturated[li],
                ));
            }
        }
        out
    }
}

/// Solve a gold sample with the path pipeline (symbolic reasoners, union
/// aggregation) and score against its recorded answers.
fn path_pipeline_correct(
    sample: &GoldSample,
    config: &RunConfig,
    table: &KinshipRuleTable,
) -> bool {
    let paths = match find_paths(
        &sample.graph,
        &sample.query,
        config.max_len,
        config.max_paths,
    ) {
        Ok(paths) => paths,
        Err(_) => return false,
    };
    let outcomes: Vec<Result<BTreeSet<String>, String>> = paths
        .iter()
        .map(|p| symbolic_path_answers(&sample.graph, p, table))
        .collect();
    match aggregate_answers(&outcomes) {
        Ok(aggregated) => correct_against(&aggregated.answers, &sample.answers),
        Err(_) => false,
    }
}

/// Solve a gold sample with the whole-graph solver; contradictions count
/// as incorrect.
fn whole_graph_correct(sample: &GoldSample, table: &KinshipRuleTable) -> (bool, bool) {
    match whole_graph_solve(&sample.graph, &sample.query, table) {
        Ok(WholeGraphOutcome::Answers(answers)) => {
            (correct_against(&answers, &sample.answers), false)
        }
        Ok(WholeGraphOutcome::Conflict) => (false, true),
        Err(_) => (false, false),
    }
}

/// Generate a gold corpus and measure, for every noise type, how the path
/// pipeline and the whole-graph solver degrade as `0..=max_level`
/// injections accumulate.
///
/// Level `n` extends level `n-1`'s injections (nested prefixes from a
/// deterministic per-sample substream), so each curve varies only in the
/// amount of noise. When a sample cannot absorb another injection of the
/// type, the deepest achieved level is carried forward and counted under
/// `saturated`.
pub fn run_robustness_study(
    domain: Domain,
    per_type_count: usize,
    max_level: u32,
    seed: u64,
) -> Result<RobustnessStudy, EvalError> {
    if !domain.supports_symbolic() {
        return Err(EvalError::SymbolicUnsupported(domain));
    }
    if per_type_count == 0 {
        return Err(EvalError::EmptyResults);
    }
    let config = RunConfig::new(domain);
    let table = KinshipRuleTable::builtin();
    let corpus = generate_gold_corpus(domain, per_type_count, STUDY_HOPS, seed)?;
    let levels: Vec<u32> = (0..=max_level).collect();
    let mut per_type = BTreeMap::new();
    for (ti, &noise_type) in NoiseType::all().iter().enumerate() {
        let mut path_hits = vec![0usize; levels.len()];
        let mut whole_hits = vec![0usize; levels.len()];
        let mut conflicts = vec![0usize; levels.len()];
        let mut saturated = vec![0usize; levels.len()];
        for (si, sample) in corpus.iter().enumerate() {
            let stream = STUDY_STREAM_BASE + (ti * corpus.len() + si) as u64;
            let mut deepest = sample.clone();
            for (li, &level) in levels.iter().enumerate() {
                let noisy = if level == 0 {
                    sample.clone()
                } else {
                    // Replaying the same substream for every level keeps
                    // level n's first n-1 injections identical to level
                    // n-1's.
                    let mut rng = substream(seed, stream);
                    match inject_n(sample, &[noise_type], level as usize, &mut rng) {
                        Ok((noisy, _)) => {
                            deepest = noisy.clone();
                            noisy
                        }
                        Err(NoiseError::NotApplicable { .. }) => {
                            saturated[li] += 1;
                            deepest.clone()
                        }
                        Err(e) => return Err(e.into()),
                    }
                };
                if path_pipeline_correct(&noisy, &config, table) {
                    path_hits[li] += 1;
                }
                let (whole_ok, conflicted) = whole_graph_correct(&noisy, table);
                if whole_ok {
                    whole_hits[li] += 1;
                }
                if conflicted {
                    conflicts[li] += 1;
                }
            }
        }
        let frac = |hits: &[usize]| -> Vec<f64> {
            hits.iter()
                .map(|&h| h as f64 / corpus.len() as f64)
                .collect()
        };
        per_type.insert(
            noise_type.letter().to_string(),
            TypeCurve {
                noise_type: noise_type.letter().to_string(),
                description: noise_type.describe().to_string(),
                path_accuracy: frac(&path_hits),
                whole_accuracy: frac(&whole_hits),
                conflicts,
                saturated,
            },
        );
    }
    Ok(RobustnessStudy {
        domain: domain.as_str().to_string(),
        seed,
        samples: per_type_count,
        levels,
        per_type,
        kinship_table_version: table.version_hash().to_string(),
    })
}
