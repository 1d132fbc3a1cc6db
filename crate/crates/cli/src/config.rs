//! Settings resolution. Precedence is flags > environment > config file >
//! built-in defaults; clap handles the first two, this module the rest.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use webtk_core::distill::DistillConfig;
use webtk_core::snippet::SnippetConfig;

use crate::{CliError, GlobalArgs};

/// Optional TOML settings file. Unknown keys are rejected so typos fail
/// loudly instead of silently keeping a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    snippet: SnippetSection,
    distill: DistillSection,
    model: ModelSection,
    paths: PathsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SnippetSection {
    max_new_descendants_pct: Option<f64>,
    max_height: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DistillSection {
    max_per_description: Option<usize>,
    label_tag_pool: Option<Vec<String>>,
    drop_single_text: Option<bool>,
    random_retention: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelSection {
    endpoint: Option<String>,
    timeout_secs: Option<u64>,
    max_retries: Option<u32>,
    max_input_chars: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PathsSection {
    vocabulary: Option<PathBuf>,
    out_dir: Option<PathBuf>,
}

/// Everything a subcommand needs, fully defaulted. Per-command flags may
/// still override individual values after resolution.
#[derive(Debug)]
pub struct Settings {
    pub seed: u64,
    /// Worker threads; 0 means one per logical core.
    pub jobs: usize,
    pub snippet: SnippetConfig,
    pub distill: DistillConfig,
    /// Category vocabulary file; the bundled vocabulary when absent.
    pub vocabulary: Option<PathBuf>,
    pub endpoint_url: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub max_input_chars: usize,
    /// Base directory for relative output paths.
    pub out_dir: PathBuf,
}

pub fn resolve(global: &GlobalArgs) -> Result<Settings, CliError> {
    let file = match &global.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let seed = global.seed.unwrap_or(0);
    let snippet_defaults = SnippetConfig::default();
    let distill_defaults = DistillConfig::default();
    Ok(Settings {
        seed,
        jobs: global.jobs.unwrap_or(0),
        snippet: SnippetConfig {
            max_new_descendants_pct: file
                .snippet
                .max_new_descendants_pct
                .unwrap_or(snippet_defaults.max_new_descendants_pct),
            max_height: file.snippet.max_height.unwrap_or(snippet_defaults.max_height),
        },
        distill: DistillConfig {
            max_per_description: file
                .distill
                .max_per_description
                .unwrap_or(distill_defaults.max_per_description),
            label_tag_pool: file
                .distill
                .label_tag_pool
                .unwrap_or(distill_defaults.label_tag_pool),
            drop_single_text: file
                .distill
                .drop_single_text
                .unwrap_or(distill_defaults.drop_single_text),
            rng_seed: seed,
            random_retention: file
                .distill
                .random_retention
                .unwrap_or(distill_defaults.random_retention),
        },
        vocabulary: std::env::var_os("WEBTK_VOCAB")
            .map(PathBuf::from)
            .or(file.paths.vocabulary),
        endpoint_url: std::env::var("WEBTK_ENDPOINT").ok().or(file.model.endpoint),
        timeout_secs: file.model.timeout_secs.unwrap_or(30),
        max_retries: file.model.max_retries.unwrap_or(2),
        max_input_chars: file.model.max_input_chars.unwrap_or(32_000),
        out_dir: file.paths.out_dir.unwrap_or_else(|| PathBuf::from(".")),
    })
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::User(format!("config {}: {e}", path.display())))
}
