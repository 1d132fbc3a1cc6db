//! `webtk`: one binary over the toolkit pipelines.
//!
//! Exit codes: 0 success, 1 user error (bad flags, unreadable inputs,
//! unknown names), 2 internal or backend failure. All randomness flows
//! from `--seed`, so identical flags on identical inputs give identical
//! output bytes regardless of `--jobs`.

mod config;

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use webtk_core::codec::{
    encode_action, encode_classification_input, encode_navigation_input, CategoryVocabulary,
    ClassificationExample, NavigationStep,
};
use webtk_core::distill::{distill, DescriptionExample, DistillError};
use webtk_core::html::{parse_html, serialize, strip_closing_tags};
use webtk_core::metrics::{evaluate, ClosestDescription, EvalOptions, EvalTask, MetricsError};
use webtk_core::model::{EchoGold, ModelEndpoint, RandomActionModel, TextModel};
use webtk_core::nav::{find_task, run_episode, task_registry, EpisodeRecord, NavError, Outcome};
use webtk_core::snippet::extract_snippet;

use config::Settings;

#[derive(Parser)]
#[command(name = "webtk", version, about = "HTML understanding toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct GlobalArgs {
    /// TOML settings file; flags and WEBTK_* variables override it.
    #[arg(long, global = true, env = "WEBTK_CONFIG")]
    config: Option<PathBuf>,
    /// Base seed for everything random (default 0).
    #[arg(long, global = true, env = "WEBTK_SEED")]
    seed: Option<u64>,
    /// Worker threads for distill and run-episodes; 0 = logical cores.
    #[arg(long, global = true, env = "WEBTK_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Mine description examples out of WARC archives.
    Distill(DistillArgs),
    /// Cut the marked snippet around one element of a page.
    Snippet(SnippetArgs),
    /// Turn task records into model input/target text pairs.
    Encode(EncodeArgs),
    /// Strip closing tags from a page.
    Corrupt(CorruptArgs),
    /// Roll a policy over seeded episodes of a navigation task.
    RunEpisodes(RunEpisodesArgs),
    /// Score a predictor on a dataset and emit an evaluation report.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DistillArgs {
    /// WARC files or glob patterns, expanded in the order given.
    #[arg(long, required = true, num_args = 1..)]
    warc: Vec<String>,
    /// Output JSONL of examples.
    #[arg(long)]
    out: PathBuf,
    /// Run report path; default is <out> with a .report.json extension.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Cap on examples per normalized description.
    #[arg(long)]
    max_per_desc: Option<usize>,
    /// Snippet growth limit in percent.
    #[arg(long)]
    pct: Option<f64>,
    /// Snippet climb limit in hops.
    #[arg(long)]
    height: Option<u32>,
    /// Keep a seeded random subset per description, not the earliest seen.
    #[arg(long)]
    random_retention: bool,
}

#[derive(Args)]
struct SnippetArgs {
    /// Page to cut from.
    #[arg(long)]
    html: PathBuf,
    /// `id` attribute of the salient element; must match exactly one.
    #[arg(long)]
    salient_id: String,
    /// Growth limit in percent.
    #[arg(long)]
    pct: Option<f64>,
    /// Climb limit in hops.
    #[arg(long)]
    height: Option<u32>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long, value_enum)]
    task: TaskKind,
    /// JSONL of task records matching --task.
    #[arg(long)]
    input: PathBuf,
    /// Category vocabulary for classify validation; bundled set if absent.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorruptArgs {
    /// Page to corrupt.
    #[arg(long)]
    html: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunEpisodesArgs {
    /// Task name; see the error message for the shipped list.
    #[arg(long)]
    task: String,
    #[arg(long, default_value_t = 100)]
    episodes: u64,
    /// oracle, random, or remote[:URL].
    #[arg(long)]
    policy: String,
    /// Largest ref the random policy will emit.
    #[arg(long, default_value_t = 25)]
    max_ref: u32,
    /// Write episode JSONL here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    task: TaskKind,
    /// gold, closest, or remote[:URL].
    #[arg(long)]
    predictor: String,
    /// JSONL dataset: classification examples, description examples, or
    /// episode records, matching --task.
    #[arg(long)]
    input: PathBuf,
    /// Category vocabulary for classify validation; bundled set if absent.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskKind {
    Classify,
    Describe,
    Navigate,
}

#[derive(Debug)]
pub enum CliError {
    /// The invocation or its inputs are wrong; exit 1.
    User(String),
    /// The toolkit or a backend failed; exit 2.
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Internal(m) => m,
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; those are not errors
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            return code;
        }
    };
    let outcome = config::resolve(&cli.global).and_then(|settings| match &cli.command {
        Command::Distill(args) => cmd_distill(args, &settings),
        Command::Snippet(args) => cmd_snippet(args, &settings),
        Command::Encode(args) => cmd_encode(args, &settings),
        Command::Corrupt(args) => cmd_corrupt(args, &settings),
        Command::RunEpisodes(args) => cmd_run_episodes(args, &settings),
        Command::Eval(args) => cmd_eval(args, &settings),
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("webtk: {}", e.message());
            e.code()
        }
    }
}

// ---- shared plumbing ----

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    read_input(path)?
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| CliError::User(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String, CliError> {
    let mut out = String::new();
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Write to `--out` (relative paths land under the configured out_dir) or
/// to stdout when no path was given.
fn write_product(settings: &Settings, out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let resolved = if path.is_absolute() {
                path.to_path_buf()
            } else {
                settings.out_dir.join(path)
            };
            std::fs::write(&resolved, content)
                .map_err(|e| CliError::User(format!("cannot write {}: {e}", resolved.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Internal(format!("stdout: {e}")))
        }
    }
}

fn load_vocab(flag: Option<&Path>, settings: &Settings) -> Result<CategoryVocabulary, CliError> {
    match flag.or(settings.vocabulary.as_deref()) {
        Some(path) => CategoryVocabulary::load(path)
            .map_err(|e| CliError::User(format!("vocabulary {}: {e}", path.display()))),
        None => Ok(CategoryVocabulary::builtin()),
    }
}

fn check_categories(
    examples: &[ClassificationExample],
    vocab: &CategoryVocabulary,
    path: &Path,
) -> Result<(), CliError> {
    for (i, ex) in examples.iter().enumerate() {
        if !vocab.contains(&ex.category) {
            return Err(CliError::User(format!(
                "{}:{}: category {:?} is not in the vocabulary",
                path.display(),
                i + 1,
                ex.category
            )));
        }
    }
    Ok(())
}

/// oracle | random | remote[:URL] and gold | closest | remote[:URL].
fn split_remote(spec: &str) -> Option<Option<String>> {
    if spec == "remote" {
        Some(None)
    } else {
        spec.strip_prefix("remote:")
            .filter(|url| !url.is_empty())
            .map(|url| Some(url.to_string()))
    }
}

fn make_endpoint(url: Option<String>, settings: &Settings) -> Result<ModelEndpoint, CliError> {
    let url = url.or_else(|| settings.endpoint_url.clone()).ok_or_else(|| {
        CliError::User(
            "no endpoint configured; use remote:<url>, WEBTK_ENDPOINT, or [model] endpoint".into(),
        )
    })?;
    Ok(ModelEndpoint::new(
        &url,
        Duration::from_secs(settings.timeout_secs),
        settings.max_retries,
        settings.max_input_chars,
    ))
}

// ---- subcommands ----

fn expand_warc(patterns: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for pattern in patterns {
        let matches = glob::glob(pattern)
            .map_err(|e| CliError::User(format!("bad pattern {pattern:?}: {e}")))?;
        let before = paths.len();
        for entry in matches {
            let path =
                entry.map_err(|e| CliError::User(format!("while matching {pattern:?}: {e}")))?;
            if !paths.contains(&path) {
                paths.push(path);
            }
        }
        if paths.len() == before {
            return Err(CliError::User(format!("{pattern:?} matches no files")));
        }
    }
    Ok(paths)
}

fn cmd_distill(args: &DistillArgs, settings: &Settings) -> Result<(), CliError> {
    let paths = expand_warc(&args.warc)?;
    let mut distill_cfg = settings.distill.clone();
    if let Some(cap) = args.max_per_desc {
        distill_cfg.max_per_description = cap;
    }
    if args.random_retention {
        distill_cfg.random_retention = true;
    }
    let mut snippet_cfg = settings.snippet;
    if let Some(pct) = args.pct {
        snippet_cfg.max_new_descendants_pct = pct;
    }
    if let Some(height) = args.height {
        snippet_cfg.max_height = height;
    }
    let pool = thread_pool(settings.jobs)?;
    let (examples, report) = pool
        .install(|| distill(&paths, &distill_cfg, snippet_cfg))
        .map_err(|e| match e {
            DistillError::Io(inner) => CliError::User(format!("reading archives: {inner}")),
            other => CliError::Internal(other.to_string()),
        })?;
    write_product(settings, Some(&args.out), &to_jsonl(&examples)?)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.with_extension("report.json"));
    let report_json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    write_product(settings, Some(&report_path), &(report_json + "\n"))?;
    eprintln!(
        "distilled {} examples from {} records across {} files",
        report.emitted_examples,
        report.records_read,
        paths.len()
    );
    Ok(())
}

fn cmd_snippet(args: &SnippetArgs, settings: &Settings) -> Result<(), CliError> {
    let doc = parse_html(&read_input(&args.html)?);
    let matches = doc.find_by_attr("id", &args.salient_id);
    let salient = match matches.as_slice() {
        [] => {
            return Err(CliError::User(format!(
                "no element with id {:?} in {}",
                args.salient_id,
                args.html.display()
            )))
        }
        [one] => *one,
        many => {
            return Err(CliError::User(format!(
                "id {:?} is ambiguous: {} elements carry it",
                args.salient_id,
                many.len()
            )))
        }
    };
    let mut cfg = settings.snippet;
    if let Some(pct) = args.pct {
        cfg.max_new_descendants_pct = pct;
    }
    if let Some(height) = args.height {
        cfg.max_height = height;
    }
    let snip = extract_snippet(&doc, salient, cfg)
        .map_err(|e| CliError::Internal(format!("extraction failed: {e}")))?;
    write_product(settings, args.out.as_deref(), &(serialize(&snip.doc) + "\n"))
}

#[derive(Serialize)]
struct EncodedPair {
    input: String,
    target: String,
}

fn cmd_encode(args: &EncodeArgs, settings: &Settings) -> Result<(), CliError> {
    let pairs: Vec<EncodedPair> = match args.task {
        TaskKind::Classify => {
            let examples: Vec<ClassificationExample> = read_jsonl(&args.input)?;
            let vocab = load_vocab(args.vocab.as_deref(), settings)?;
            check_categories(&examples, &vocab, &args.input)?;
            examples
                .into_iter()
                .map(|ex| EncodedPair {
                    input: encode_classification_input(&ex.snippet_html),
                    target: ex.category,
                })
                .collect()
        }
        TaskKind::Describe => {
            let examples: Vec<DescriptionExample> = read_jsonl(&args.input)?;
            examples
                .into_iter()
                .map(|ex| EncodedPair {
                    input: ex.snippet_html,
                    target: ex.description,
                })
                .collect()
        }
        TaskKind::Navigate => {
            let steps: Vec<NavigationStep> = read_jsonl(&args.input)?;
            steps
                .iter()
                .map(|step| EncodedPair {
                    input: encode_navigation_input(step),
                    target: encode_action(&step.action),
                })
                .collect()
        }
    };
    write_product(settings, args.out.as_deref(), &to_jsonl(&pairs)?)
}

fn cmd_corrupt(args: &CorruptArgs, settings: &Settings) -> Result<(), CliError> {
    let doc = parse_html(&read_input(&args.html)?);
    write_product(settings, args.out.as_deref(), &(strip_closing_tags(&doc) + "\n"))
}

enum PolicyKind {
    Oracle(webtk_core::nav::OraclePolicy),
    Random { max_ref: u32 },
    Remote(ModelEndpoint),
}

fn cmd_run_episodes(args: &RunEpisodesArgs, settings: &Settings) -> Result<(), CliError> {
    let task = find_task(&args.task).map_err(|e| {
        let names: Vec<String> = task_registry().iter().map(|t| t.name.clone()).collect();
        CliError::User(format!("{e}; shipped tasks: {}", names.join(", ")))
    })?;
    let policy = match args.policy.as_str() {
        "oracle" => PolicyKind::Oracle(webtk_core::nav::OraclePolicy::new(&args.task)),
        "random" => PolicyKind::Random { max_ref: args.max_ref },
        other => match split_remote(other) {
            Some(url) => PolicyKind::Remote(make_endpoint(url, settings)?),
            None => {
                return Err(CliError::User(format!(
                    "unknown policy {other:?}; expected oracle, random, or remote[:URL]"
                )))
            }
        },
    };
    let pool = thread_pool(settings.jobs)?;
    let results: Vec<Result<EpisodeRecord, NavError>> = pool.install(|| {
        (0..args.episodes)
            .into_par_iter()
            .map(|i| {
                let seed = settings.seed.wrapping_add(i);
                match &policy {
                    PolicyKind::Oracle(p) => run_episode(&task, seed, p),
                    PolicyKind::Remote(p) => run_episode(&task, seed, p),
                    PolicyKind::Random { max_ref } => {
                        let p = RandomActionModel::new(seed, *max_ref);
                        run_episode(&task, seed, &p)
                    }
                }
            })
            .collect()
    });
    let episodes: Vec<EpisodeRecord> = results
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Internal(format!("episode failed: {e}")))?;
    let successes = episodes
        .iter()
        .filter(|e| e.outcome == Outcome::Success)
        .count();
    write_product(settings, args.out.as_deref(), &to_jsonl(&episodes)?)?;
    eprintln!("{successes}/{} episodes succeeded on {}", episodes.len(), args.task);
    Ok(())
}

fn cmd_eval(args: &EvalArgs, settings: &Settings) -> Result<(), CliError> {
    let (model, gold_marker): (Box<dyn TextModel>, bool) = match args.predictor.as_str() {
        "gold" => (Box::new(EchoGold), true),
        "closest" => (Box::new(ClosestDescription), false),
        other => match split_remote(other) {
            Some(url) => (Box::new(make_endpoint(url, settings)?), false),
            None => {
                return Err(CliError::User(format!(
                    "unknown predictor {other:?}; expected gold, closest, or remote[:URL]"
                )))
            }
        },
    };
    let options = EvalOptions {
        include_gold_marker: gold_marker,
    };
    let pool = thread_pool(settings.jobs)?;
    let report = match args.task {
        TaskKind::Classify => {
            let examples: Vec<ClassificationExample> = read_jsonl(&args.input)?;
            let vocab = load_vocab(args.vocab.as_deref(), settings)?;
            check_categories(&examples, &vocab, &args.input)?;
            pool.install(|| evaluate(&EvalTask::Classify(&examples), model.as_ref(), &options))
        }
        TaskKind::Describe => {
            let examples: Vec<DescriptionExample> = read_jsonl(&args.input)?;
            pool.install(|| evaluate(&EvalTask::Describe(&examples), model.as_ref(), &options))
        }
        TaskKind::Navigate => {
            let episodes: Vec<EpisodeRecord> = read_jsonl(&args.input)?;
            pool.install(|| evaluate(&EvalTask::Navigate(&episodes), model.as_ref(), &options))
        }
    }
    .map_err(|e| match e {
        MetricsError::EmptyInput => {
            CliError::User(format!("{} holds no records", args.input.display()))
        }
        other => CliError::Internal(other.to_string()),
    })?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    write_product(settings, args.out.as_deref(), &(json + "\n"))
}
