//! Command-line front end for the path-based relational-reasoning pipeline.
//!
//! Subcommands wrap the library stages: `extract` (story → graph),
//! `paths` (graph → reasoning paths), `solve` (graph → answer set),
//! `perturb` (gold-corpus generation and noise injection), and `eval`
//! (dataset runs, baselines, and the robustness study). Every subcommand
//! runs fully offline with `--mock`, replaying recorded completions from a
//! fixture directory.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use relgraph::eval::{
    load_dataset, run_baseline, run_pot, run_robustness_study, BaselineMode, DatasetRecord,
    EvalError, PotMode, RunConfig,
};
use relgraph::extract::{
    build_extraction_prompt, build_graph, build_reasoner_prompt, parse_extraction, ExtractError,
};
use relgraph::graph::{read_graph_text, GraphError, RelationGraph, RelationQuery};
use relgraph::llm::{
    ClientConfig, FixtureStore, HttpClient, LlmError, MockClient, RecordingClient, TextCompletion,
};
use relgraph::noise::{
    generate_gold_corpus, inject_n, read_corpus, substream, write_corpus, GoldSample, NoiseError,
    NoiseType,
};
use relgraph::paths::{find_paths, format_path, PathError};
use relgraph::reason::aggregate_answers;
use relgraph::reason::kinship::{kinship_fold, KinshipRuleTable};
use relgraph::reason::spatial::spatial_solve;
use relgraph::reason::text::{parse_bracketed_answer, path_to_text};
use relgraph::vocab::Domain;

const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  2  usage or configuration error
  3  file I/O error
  4  input schema error (dataset, corpus, or graph file)
  5  LLM transport error (HTTP, network, malformed response)
  6  fixture miss (offline replay lacks a recorded completion)
  7  extraction parse failure (no triplets or no query recoverable)
  8  disconnected query (no reasoning path between the endpoints)";

#[derive(Parser)]
#[command(
    name = "relgraph",
    version,
    about = "Path-based relational reasoning over graphs extracted from text",
    after_help = EXIT_CODES_HELP
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract an entity-relation graph from one or more stories.
    Extract(ExtractArgs),
    /// Enumerate the reasoning paths between a graph's query endpoints.
    Paths(PathsArgs),
    /// Solve a graph's query: enumerate paths, resolve each, union the answers.
    Solve(SolveArgs),
    /// Generate gold corpora and inject relational noise.
    Perturb(PerturbArgs),
    /// Evaluate a dataset (pipeline or baselines) or run the robustness study.
    Eval(EvalArgs),
}

/// LLM connection flags shared by the subcommands that may call a model.
#[derive(Args, Clone, Default)]
struct ClientOpts {
    /// Replay completions from recorded fixtures; never touches the network.
    #[arg(long)]
    mock: bool,
    /// Fixture directory for --mock and --record.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Record live completions into --fixtures for later replay.
    #[arg(long, conflicts_with = "mock")]
    record: bool,
    /// Model identifier.
    #[arg(long)]
    model: Option<String>,
    /// Sampling temperature.
    #[arg(long)]
    temperature: Option<f64>,
    /// Chat-completions endpoint base URL.
    #[arg(long)]
    base_url: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
}

/// Search limits shared by path-consuming subcommands.
#[derive(Args, Clone, Default)]
struct LimitOpts {
    /// Longest reasoning path considered.
    #[arg(long)]
    max_len: Option<usize>,
    /// Cap on enumerated paths per query.
    #[arg(long)]
    max_paths: Option<usize>,
    /// Concurrent LLM requests.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Task domain: stepgame | clutrr | spartun | chinese_kinship.
    #[arg(long)]
    domain: Option<String>,
    /// Inline story text.
    #[arg(long, conflicts_with = "input")]
    story: Option<String>,
    /// Story file: `.jsonl` with a `story` field per line, otherwise one
    /// story per non-empty line.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write graph records here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    client: ClientOpts,
}

#[derive(Args)]
struct PathsArgs {
    #[arg(long)]
    domain: Option<String>,
    /// Graph file in the text format `extract` produces.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    limits: LimitOpts,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    domain: Option<String>,
    /// Graph file in the text format `extract` produces.
    #[arg(long)]
    graph: PathBuf,
    /// Per-path reasoner: `symbolic` (relation algebra) or `llm`.
    #[arg(long, default_value = "symbolic")]
    mode: String,
    #[command(flatten)]
    limits: LimitOpts,
    #[command(flatten)]
    client: ClientOpts,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    domain: Option<String>,
    /// Inject into an existing gold corpus instead of generating one.
    #[arg(long, conflicts_with = "count")]
    input: Option<PathBuf>,
    /// Generate this many gold samples.
    #[arg(long)]
    count: Option<usize>,
    /// Hop range for generated chains, inclusive, e.g. 3..6.
    #[arg(long, default_value = "3..6")]
    hops: String,
    /// Comma-separated noise types A-G (default: all).
    #[arg(long)]
    types: Option<String>,
    /// Injections per sample; 0 leaves the corpus clean.
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Root seed for generation and injection.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the corpus here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    domain: Option<String>,
    /// symbolic | llm | io | few-shot | cot | cot-sc | robustness.
    #[arg(long)]
    mode: String,
    /// Dataset file (.jsonl, .csv, or a gold-graph corpus); not used by
    /// the robustness mode.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Root seed (robustness mode).
    #[arg(long)]
    seed: Option<u64>,
    /// Highest injection level (robustness mode).
    #[arg(long, default_value_t = 5)]
    n: u32,
    /// Gold samples per noise type (robustness mode).
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Self-consistency rounds for cot-sc.
    #[arg(long)]
    sc_rounds: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the per-type/per-level CSV here (robustness mode).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitOpts,
    #[command(flatten)]
    client: ClientOpts,
}

/// Optional TOML config; every key mirrors a flag and flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    domain: Option<String>,
    model: Option<String>,
    temperature: Option<f64>,
    base_url: Option<String>,
    max_tokens: Option<u32>,
    timeout_secs: Option<u64>,
    max_retries: Option<u32>,
    api_key_env: Option<String>,
    max_len: Option<usize>,
    max_paths: Option<usize>,
    sc_rounds: Option<usize>,
    workers: Option<usize>,
    fixtures: Option<PathBuf>,
    mock: Option<bool>,
    seed: Option<u64>,
}

/// CLI-level error classes that have no library counterpart.
#[derive(Debug)]
enum CliError {
    Usage(String),
    MissingQuery(String),
    Disconnected,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::MissingQuery(path) => {
                write!(f, "graph file {path} has no Q (query) record")
            }
            CliError::Disconnected => {
                write!(f, "query endpoints are not connected; no reasoning paths")
            }
        }
    }
}

impl std::error::Error for CliError {}

fn main() {
    let cli = Cli::parse();
    let file = match load_file_config(cli.config.as_deref()) {
        Ok(file) => file,
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    };
    let outcome = match cli.command {
        Command::Extract(args) => cmd_extract(args, &file),
        Command::Paths(args) => cmd_paths(args, &file),
        Command::Solve(args) => cmd_solve(args, &file),
        Command::Perturb(args) => cmd_perturb(args, &file),
        Command::Eval(args) => cmd_eval(args, &file),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Usage(_) => 2,
                CliError::MissingQuery(_) => 4,
                CliError::Disconnected => 8,
            };
        }
        if let Some(e) = cause.downcast_ref::<LlmError>() {
            return match e {
                LlmError::FixtureMiss { .. } => 6,
                LlmError::FixtureIo { .. } => 3,
                LlmError::MissingApiKey(_) => 2,
                _ => 5,
            };
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return match e {
                EvalError::Io { .. } | EvalError::Serialize(_) => 3,
                EvalError::Schema { .. } | EvalError::Noise(_) => 4,
                EvalError::EmptyResults
                | EvalError::MissingClient { .. }
                | EvalError::SymbolicUnsupported(_) => 2,
                EvalError::Template(e) => extract_exit_code(e),
            };
        }
        if let Some(e) = cause.downcast_ref::<ExtractError>() {
            return extract_exit_code(e);
        }
        if cause.downcast_ref::<NoiseError>().is_some()
            || cause.downcast_ref::<GraphError>().is_some()
        {
            return 4;
        }
        if cause.downcast_ref::<PathError>().is_some() {
            return 8;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}

fn extract_exit_code(err: &ExtractError) -> i32 {
    match err {
        ExtractError::EmptyExtraction | ExtractError::NoQueryFound => 7,
        _ => 2,
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
        }
    }
}

fn resolve_domain(flag: &Option<String>, file: &FileConfig) -> Result<Domain> {
    let name = flag.as_deref().or(file.domain.as_deref()).ok_or_else(|| {
        CliError::Usage("--domain is required (or set it in the config file)".to_string())
    })?;
    Domain::parse(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown domain `{name}` (expected stepgame, clutrr, spartun, or chinese_kinship)"
        ))
        .into()
    })
}

fn client_config(opts: &ClientOpts, file: &FileConfig) -> ClientConfig {
    let defaults = ClientConfig::default();
    ClientConfig {
        base_url: opts
            .base_url
            .clone()
            .or_else(|| file.base_url.clone())
            .unwrap_or(defaults.base_url),
        model: opts
            .model
            .clone()
            .or_else(|| file.model.clone())
            .unwrap_or(defaults.model),
        temperature: opts
            .temperature
            .or(file.temperature)
            .unwrap_or(defaults.temperature),
        max_tokens: file.max_tokens.unwrap_or(defaults.max_tokens),
        timeout_secs: file.timeout_secs.unwrap_or(defaults.timeout_secs),
        max_retries: file.max_retries.unwrap_or(defaults.max_retries),
        max_concurrency: defaults.max_concurrency,
        api_key_env: opts
            .api_key_env
            .clone()
            .or_else(|| file.api_key_env.clone())
            .unwrap_or(defaults.api_key_env),
    }
}

fn build_client(opts: &ClientOpts, file: &FileConfig) -> Result<Box<dyn TextCompletion>> {
    let config = client_config(opts, file);
    let fixtures = opts.fixtures.clone().or_else(|| file.fixtures.clone());
    if opts.mock || (file.mock == Some(true) && !opts.record) {
        let dir = fixtures.ok_or_else(|| {
            CliError::Usage(
                "--mock needs --fixtures <dir> (or `fixtures` in the config)".to_string(),
            )
        })?;
        let store = FixtureStore::open(dir)?;
        return Ok(Box::new(MockClient::new(
            store,
            config.model.clone(),
            config.temperature,
        )));
    }
    let http = HttpClient::new(config)?;
    if opts.record {
        let dir = fixtures.ok_or_else(|| {
            CliError::Usage(
                "--record needs --fixtures <dir> (or `fixtures` in the config)".to_string(),
            )
        })?;
        let store = FixtureStore::open(dir)?;
        return Ok(Box::new(RecordingClient::new(http, store)));
    }
    Ok(Box::new(http))
}

fn run_config(domain: Domain, limits: &LimitOpts, file: &FileConfig) -> RunConfig {
    let defaults = RunConfig::new(domain);
    RunConfig {
        domain,
        max_len: limits.max_len.or(file.max_len).unwrap_or(defaults.max_len),
        max_paths: limits
            .max_paths
            .or(file.max_paths)
            .unwrap_or(defaults.max_paths),
        sc_rounds: file.sc_rounds.unwrap_or(defaults.sc_rounds),
        workers: limits.workers.or(file.workers).unwrap_or(defaults.workers),
    }
}

fn write_or_print(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_extract(args: ExtractArgs, file: &FileConfig) -> Result<()> {
    let domain = resolve_domain(&args.domain, file)?;
    let stories: Vec<String> = match (&args.story, &args.input) {
        (Some(story), None) => vec![story.clone()],
        (None, Some(path)) => read_stories(path)?,
        (None, None) | (Some(_), Some(_)) => {
            return Err(
                CliError::Usage("provide exactly one of --story or --input".to_string()).into(),
            )
        }
    };
    if stories.is_empty() {
        return Err(CliError::Usage("no stories in the input file".to_string()).into());
    }
    let client = build_client(&args.client, file)?;
    let mut out = String::new();
    for (i, story) in stories.iter().enumerate() {
        let record = i + 1;
        let prompt = build_extraction_prompt(domain, story)?;
        let exchange = client.complete(&prompt)?;
        let extraction = parse_extraction(domain, &exchange.completion)
            .with_context(|| format!("record {record}"))?;
        let (graph, query, warnings) = build_graph(domain, &extraction);
        for warning in warnings {
            eprintln!("warning[record {record}]: {warning}");
        }
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# record {record}\n"));
        out.push_str(&graph.to_text(Some(&query)));
    }
    write_or_print(args.output.as_deref(), &out)
}

fn read_stories(path: &Path) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
        #[derive(Deserialize)]
        struct Line {
            story: String,
        }
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str::<Line>(l)
                    .map(|line| line.story)
                    .with_context(|| format!("{} line {}", path.display(), i + 1))
            })
            .collect()
    } else {
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect())
    }
}

fn load_graph_file(domain: Domain, path: &Path) -> Result<(RelationGraph, RelationQuery)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (graph, query) = read_graph_text(domain, &text)?;
    let query = query.ok_or_else(|| CliError::MissingQuery(path.display().to_string()))?;
    Ok((graph, query))
}

fn cmd_paths(args: PathsArgs, file: &FileConfig) -> Result<()> {
    let domain = resolve_domain(&args.domain, file)?;
    let config = run_config(domain, &args.limits, file);
    let (graph, query) = load_graph_file(domain, &args.graph)?;
    let paths = find_paths(&graph, &query, config.max_len, config.max_paths)?;
    for path in &paths {
        println!("{}", format_path(&graph, path));
    }
    println!("total: {}", paths.len());
    Ok(())
}

fn cmd_solve(args: SolveArgs, file: &FileConfig) -> Result<()> {
    let domain = resolve_domain(&args.domain, file)?;
    let config = run_config(domain, &args.limits, file);
    let (graph, query) = load_graph_file(domain, &args.graph)?;
    let paths = find_paths(&graph, &query, config.max_len, config.max_paths)?;
    if paths.is_empty() {
        println!("[]");
        return Err(CliError::Disconnected.into());
    }
    let table = KinshipRuleTable::builtin();
    let per_path: Vec<Result<BTreeSet<String>, String>> = match args.mode.as_str() {
        "symbolic" => {
            if !domain.supports_symbolic() {
                return Err(EvalError::SymbolicUnsupported(domain).into());
            }
            paths
                .iter()
                .map(|p| match domain {
                    Domain::Stepgame => spatial_solve(&graph, p)
                        .map(|l| BTreeSet::from([l]))
                        .map_err(|e| e.to_string()),
                    Domain::Clutrr => kinship_fold(&graph, p, table).map_err(|e| e.to_string()),
                    _ => unreachable!("checked above"),
                })
                .collect()
        }
        "llm" => {
            let client = build_client(&args.client, file)?;
            // A bare graph file carries no story; the graph's own text
            // rendering stands in as context for story-aware templates.
            let story = graph.to_text(Some(&query));
            let mut outcomes = Vec::with_capacity(paths.len());
            for path in &paths {
                let chain = path_to_text(&graph, path, domain);
                let prompt = build_reasoner_prompt(domain, &chain, &story)?;
                let outcome = client
                    .complete(&prompt)
                    .map_err(|e| e.to_string())
                    .and_then(|exchange| {
                        parse_bracketed_answer(&exchange.completion, domain)
                            .map(|(set, _)| set)
                            .map_err(|e| e.to_string())
                    });
                outcomes.push(outcome);
            }
            outcomes
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown solve mode `{other}` (expected symbolic or llm)"
            ))
            .into())
        }
    };
    for (path, outcome) in paths.iter().zip(&per_path) {
        match outcome {
            Ok(set) => println!(
                "{}  =>  [{}]",
                format_path(&graph, path),
                set.iter().cloned().collect::<Vec<_>>().join(", ")
            ),
            Err(e) => println!("{}  =>  failed: {e}", format_path(&graph, path)),
        }
    }
    match aggregate_answers(&per_path) {
        Ok(aggregated) => {
            println!(
                "answer: [{}]",
                aggregated
                    .answers
                    .iter()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
        Err(_) => {
            println!("answer: []");
            Ok(())
        }
    }
}

fn parse_hops(spec: &str) -> Result<RangeInclusive<u32>> {
    let parts: Vec<&str> = spec.split("..").collect();
    let bad = || CliError::Usage(format!("bad hop range `{spec}` (expected e.g. 3..6)"));
    match parts.as_slice() {
        [single] => {
            let k: u32 = single.trim().parse().map_err(|_| bad())?;
            Ok(k..=k)
        }
        [lo, hi] => {
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
            if lo == 0 || hi < lo {
                return Err(bad().into());
            }
            Ok(lo..=hi)
        }
        _ => Err(bad().into()),
    }
}

fn parse_types(spec: Option<&str>) -> Result<Vec<NoiseType>> {
    match spec {
        None => Ok(NoiseType::all().to_vec()),
        Some(spec) => spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                NoiseType::parse(s).ok_or_else(|| {
                    CliError::Usage(format!("unknown noise type `{s}` (expected A-G)")).into()
                })
            })
            .collect(),
    }
}

/// Injection substreams live far above the corpus-generation substreams so
/// one root seed never reuses draws across the two stages.
const INJECT_STREAM_BASE: u64 = 1 << 32;

fn cmd_perturb(args: PerturbArgs, file: &FileConfig) -> Result<()> {
    let domain = resolve_domain(&args.domain, file)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let samples: Vec<GoldSample> = match (&args.input, args.count) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            read_corpus(domain, &text)?
        }
        (None, Some(count)) => {
            if count == 0 {
                return Err(CliError::Usage("--count must be positive".to_string()).into());
            }
            generate_gold_corpus(domain, count, parse_hops(&args.hops)?, seed)?
        }
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --input <corpus> or --count <n>".to_string(),
            )
            .into())
        }
    };
    let out = if args.n == 0 {
        write_corpus(&samples)
    } else {
        let types = parse_types(args.types.as_deref())?;
        let mut noisy = Vec::with_capacity(samples.len());
        for (i, sample) in samples.iter().enumerate() {
            let stream = INJECT_STREAM_BASE + i as u64;
            // Walk down from the requested level until injection fits;
            // identical seeds replay identical draws, so reruns match.
            let mut chosen = None;
            for level in (1..=args.n).rev() {
                let mut rng = substream(seed, stream);
                match inject_n(sample, &types, level, &mut rng) {
                    Ok((injected, _)) => {
                        if level < args.n {
                            eprintln!(
                                "warning[{}]: saturated at {level} of {} injections",
                                sample.id, args.n
                            );
                        }
                        chosen = Some(injected);
                        break;
                    }
                    Err(NoiseError::NotApplicable { .. }) => continue,
                    Err(e) => return Err(e.into()),
                }
            }
            noisy.push(chosen.unwrap_or_else(|| {
                eprintln!(
                    "warning[{}]: no injection site; sample left clean",
                    sample.id
                );
                sample.clone()
            }));
        }
        write_corpus(&noisy)
    };
    write_or_print(args.output.as_deref(), &out)
}

fn cmd_eval(args: EvalArgs, file: &FileConfig) -> Result<()> {
    let domain = resolve_domain(&args.domain, file)?;
    let mut config = run_config(domain, &args.limits, file);
    if let Some(rounds) = args.sc_rounds.or(file.sc_rounds) {
        config.sc_rounds = rounds;
    }
    let seed = args.seed.or(file.seed).unwrap_or(0);

    if args.mode == "robustness" {
        let study = run_robustness_study(domain, args.samples, args.n, seed)?;
        if let Some(path) = &args.report {
            std::fs::write(path, study.to_json()?)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        if let Some(path) = &args.csv {
            std::fs::write(path, study.to_csv())
                .with_context(|| format!("writing {}", path.display()))?;
        }
        print!("{}", study.to_text());
        return Ok(());
    }

    let dataset = args
        .dataset
        .clone()
        .ok_or_else(|| CliError::Usage(format!("--dataset is required for mode {}", args.mode)))?;
    let records: Vec<DatasetRecord> = load_dataset(domain, &dataset)?;
    let report = match args.mode.as_str() {
        "symbolic" | "llm" => {
            let mode = if args.mode == "symbolic" {
                PotMode::Symbolic
            } else {
                PotMode::Llm
            };
            let needs_client =
                mode == PotMode::Llm || records.iter().any(|r| r.attached.is_none());
            let client = if needs_client {
                Some(build_client(&args.client, file)?)
            } else {
                None
            };
            run_pot(&records, mode, client.as_deref(), &config)?
        }
        "io" | "few-shot" | "cot" | "cot-sc" => {
            let mode = match args.mode.as_str() {
                "io" => BaselineMode::Io,
                "few-shot" => BaselineMode::FewShot,
                "cot" => BaselineMode::Cot,
                _ => BaselineMode::CotSc,
            };
            let client = build_client(&args.client, file)?;
            run_baseline(&records, mode, client.as_ref(), &config)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown eval mode `{other}` (expected symbolic, llm, io, few-shot, cot, cot-sc, or robustness)"
            ))
            .into())
        }
    };
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", report.to_text());
    Ok(())
}
