//! Crawl distillation: mine (snippet, element, description) triples from
//! web archives using `label for=` markup as free supervision.
//!
//! Pipeline per page: extract label/target pairs, clean the description
//! text, cut a snippet around the target, disguise the label tag so the
//! pairing is not trivially recoverable, drop snippets with fewer than two
//! texts, then cap how many examples any one description may contribute.

mod warc;

pub use warc::{WarcReader, WarcStats};

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::html::{parse_html, serialize, HtmlDocument, HtmlError, NodeId};
use crate::snippet::{extract_snippet_mapped, SnippetConfig};

#[derive(Debug, Error)]
pub enum DistillError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Record header corruption; framing cannot continue past it.
    #[error("malformed warc header at record {0}")]
    MalformedWarc(u64),
    #[error("node is not a label element")]
    NotALabel,
    #[error(transparent)]
    Html(#[from] HtmlError),
}

/// One mined training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionExample {
    pub snippet_html: String,
    pub element_id: String,
    pub description: String,
    pub source_url: String,
    pub tld: String,
}

#[derive(Debug, Clone)]
pub struct DistillConfig {
    /// Cap on examples per normalized description.
    pub max_per_description: usize,
    /// Tags the description element may be rewritten to.
    pub label_tag_pool: Vec<String>,
    /// Drop snippets holding fewer than two non-empty text nodes.
    pub drop_single_text: bool,
    pub rng_seed: u64,
    /// Keep a seeded random subset instead of the earliest-seen examples
    /// when a description exceeds the cap.
    pub random_retention: bool,
}

impl Default for DistillConfig {
    fn default() -> Self {
        DistillConfig {
            max_per_description: 10,
            label_tag_pool: ["div", "span", "a", "label"]
                .map(String::from)
                .to_vec(),
            drop_single_text: true,
            rng_seed: 0,
            random_retention: false,
        }
    }
}

/// Stage counters over the whole run, in funnel order.
#[derive(Debug, Default, Clone, Serialize)]
pub struct DistillReport {
    pub records_read: u64,
    pub records_skipped_malformed: u64,
    pub records_skipped_non_html: u64,
    pub records_skipped_other_type: u64,
    /// Files ended early by header corruption.
    pub files_aborted: u64,
    pub pages_parsed: u64,
    pub raw_pairs: u64,
    pub duplicate_id_warnings: u64,
    pub clean_pairs: u64,
    pub dropped_duplicate_target_id: u64,
    pub dropped_single_text: u64,
    pub pre_balance_examples: u64,
    pub dropped_by_balancing: u64,
    pub emitted_examples: u64,
    /// Share of pre-balance examples claimed by the 20 most frequent
    /// normalized descriptions; the skew that motivates balancing.
    pub top20_description_share: f64,
}

/// A label element, the element its `for` attribute points at, and the
/// label's inner text.
#[derive(Debug, Clone)]
pub struct LabelPair {
    pub label: NodeId,
    pub target: NodeId,
    pub description: String,
}

/// All `label[for]` elements resolved against `id` attributes, in document
/// order, plus a count of `for` values that matched more than one id (the
/// first match wins, as a browser lookup would).
pub fn extract_label_pairs(doc: &HtmlDocument) -> (Vec<LabelPair>, u64) {
    let mut pairs = Vec::new();
    let mut duplicate_warnings = 0;
    for id in doc.elements() {
        if doc.tag(id) != Some("label") {
            continue;
        }
        let Some(for_value) = doc.attr(id, "for") else {
            continue;
        };
        let matches = doc.find_by_attr("id", for_value);
        let Some(&target) = matches.first() else {
            continue;
        };
        if matches.len() > 1 {
            duplicate_warnings += 1;
        }
        pairs.push(LabelPair {
            label: id,
            target,
            description: doc.text_content(id),
        });
    }
    (pairs, duplicate_warnings)
}

/// Trim and keep a description only if it has at least one alphanumeric
/// character and decoded without replacement characters.
pub fn clean_filter(description: &str) -> Option<String> {
    let trimmed = description.trim();
    if trimmed.contains('\u{FFFD}') || !trimmed.chars().any(char::is_alphanumeric) {
        return None;
    }
    Some(trimmed.to_string())
}

/// Rewrite a label's tag to a uniform draw from `pool` and strip its `for`
/// attribute, so the description element is not trivially findable.
pub fn randomize_label_tag<R: Rng>(
    doc: &mut HtmlDocument,
    label_node: NodeId,
    pool: &[String],
    rng: &mut R,
) -> Result<(), DistillError> {
    let is_label = doc
        .nodes
        .get(label_node.0)
        .is_some_and(|n| !n.detached && n.element().is_some_and(|el| el.tag == "label"));
    if !is_label || pool.is_empty() {
        return Err(DistillError::NotALabel);
    }
    let tag = &pool[rng.gen_range(0..pool.len())];
    doc.set_tag(label_node, tag)?;
    doc.remove_attr(label_node, "for")?;
    Ok(())
}

/// Normalization used for balancing: case-folded, internal whitespace
/// collapsed to single spaces.
pub fn normalize_description(description: &str) -> String {
    description
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Last dot-separated host label of a URL, lowercased; empty when the URL
/// does not parse or has no host.
pub fn tld_of(url_str: &str) -> String {
    url::Url::parse(url_str)
        .ok()
        .and_then(|u| {
            u.host_str()
                .map(|h| h.rsplit('.').next().unwrap_or(h).to_ascii_lowercase())
        })
        .unwrap_or_default()
}

/// Independent per-pair generator so results do not depend on scheduling
/// or on how many draws earlier pairs consumed.
fn pair_rng(seed: u64, record_idx: u64, pair_idx: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&record_idx.to_le_bytes());
    key[16..24].copy_from_slice(&pair_idx.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn count_nonempty_texts(doc: &HtmlDocument) -> usize {
    doc.pre_order()
        .into_iter()
        .filter(|&id| doc.node(id).text().is_some_and(|t| !t.trim().is_empty()))
        .count()
}

#[derive(Default)]
struct RecordYield {
    raw_pairs: u64,
    duplicate_id_warnings: u64,
    clean_pairs: u64,
    dropped_duplicate_target_id: u64,
    dropped_single_text: u64,
    /// (example, normalized description) in pair order.
    candidates: Vec<(DescriptionExample, String)>,
}

fn process_record(
    record_idx: u64,
    url: &str,
    html: &str,
    config: &DistillConfig,
    snippet_cfg: SnippetConfig,
) -> RecordYield {
    let mut out = RecordYield::default();
    let doc = parse_html(html);
    let (pairs, warnings) = extract_label_pairs(&doc);
    out.raw_pairs = pairs.len() as u64;
    out.duplicate_id_warnings = warnings;
    for (pair_idx, pair) in pairs.into_iter().enumerate() {
        let Some(description) = clean_filter(&pair.description) else {
            continue;
        };
        out.clean_pairs += 1;
        let element_id = doc.attr(pair.target, "id").unwrap_or_default().to_string();
        let Ok((snippet, map)) = extract_snippet_mapped(&doc, pair.target, snippet_cfg) else {
            continue;
        };
        let mut snippet_doc = snippet.doc;
        if let Some(&label_in_copy) = map.get(&pair.label) {
            let mut rng = pair_rng(config.rng_seed, record_idx, pair_idx as u64);
            let _ = randomize_label_tag(
                &mut snippet_doc,
                label_in_copy,
                &config.label_tag_pool,
                &mut rng,
            );
        }
        if snippet_doc.find_by_attr("id", &element_id).len() != 1 {
            out.dropped_duplicate_target_id += 1;
            continue;
        }
        if config.drop_single_text && count_nonempty_texts(&snippet_doc) < 2 {
            out.dropped_single_text += 1;
            continue;
        }
        let example = DescriptionExample {
            snippet_html: serialize(&snippet_doc),
            element_id,
            description: description.clone(),
            source_url: url.to_string(),
            tld: tld_of(url),
        };
        out.candidates.push((example, normalize_description(&description)));
    }
    out
}

/// Run the full pipeline over the given archives. Deterministic for a
/// fixed seed and input order regardless of worker count; per-record
/// failures are counted, never fatal, and a file with a corrupt record
/// header contributes only the records before the corruption.
pub fn distill(
    warc_paths: &[PathBuf],
    config: &DistillConfig,
    snippet_cfg: SnippetConfig,
) -> Result<(Vec<DescriptionExample>, DistillReport), DistillError> {
    let mut report = DistillReport::default();
    let mut records: Vec<(u64, String, String)> = Vec::new();
    for path in warc_paths {
        let mut reader = WarcReader::open(path)?;
        loop {
            match reader.next_record() {
                Ok(Some((url, html))) => {
                    records.push((records.len() as u64, url, html));
                }
                Ok(None) => break,
                Err(DistillError::MalformedWarc(_)) => {
                    report.files_aborted += 1;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let stats = reader.stats();
        report.records_read += stats.responses_yielded;
        report.records_skipped_malformed += stats.skipped_malformed;
        report.records_skipped_non_html += stats.skipped_non_html;
        report.records_skipped_other_type += stats.skipped_other_type;
    }

    let yields: Vec<RecordYield> = records
        .par_iter()
        .map(|(idx, url, html)| process_record(*idx, url, html, config, snippet_cfg))
        .collect();

    let mut candidates: Vec<(DescriptionExample, String)> = Vec::new();
    for y in yields {
        report.pages_parsed += 1;
        report.raw_pairs += y.raw_pairs;
        report.duplicate_id_warnings += y.duplicate_id_warnings;
        report.clean_pairs += y.clean_pairs;
        report.dropped_duplicate_target_id += y.dropped_duplicate_target_id;
        report.dropped_single_text += y.dropped_single_text;
        candidates.extend(y.candidates);
    }
    report.pre_balance_examples = candidates.len() as u64;
    report.top20_description_share = top_share(&candidates, 20);

    let kept = balance(candidates, config);
    report.emitted_examples = kept.len() as u64;
    report.dropped_by_balancing = report.pre_balance_examples - report.emitted_examples;
    Ok((kept, report))
}

fn top_share(candidates: &[(DescriptionExample, String)], top_n: usize) -> f64 {
    if candidates.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for (_, key) in candidates {
        *counts.entry(key).or_default() += 1;
    }
    let mut freqs: Vec<u64> = counts.into_values().collect();
    freqs.sort_unstable_by(|a, b| b.cmp(a));
    let top: u64 = freqs.into_iter().take(top_n).sum();
    top as f64 / candidates.len() as f64
}

fn balance(
    candidates: Vec<(DescriptionExample, String)>,
    config: &DistillConfig,
) -> Vec<DescriptionExample> {
    let cap = config.max_per_description;
    if !config.random_retention {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut kept = Vec::new();
        for (example, key) in candidates {
            let count = seen.entry(key).or_insert(0);
            if *count < cap {
                *count += 1;
                kept.push(example);
            }
        }
        return kept;
    }
    // Seeded retention: pick which indices survive per description, then
    // emit in the original stream order.
    let mut by_key: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, (_, key)) in candidates.iter().enumerate() {
        by_key.entry(key).or_default().push(i);
    }
    let mut keep: HashSet<usize> = HashSet::new();
    for (key, indices) in by_key {
        if indices.len() <= cap {
            keep.extend(indices);
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ fnv1a(key));
            let mut shuffled = indices;
            shuffled.shuffle(&mut rng);
            keep.extend(shuffled.into_iter().take(cap));
        }
    }
    candidates
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, (example, _))| example)
        .collect()
}

/// Stable string hash for per-description seeding (std hashes are not
/// guaranteed stable across releases).
fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in s.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Split examples into (rest, holdout) by whole top-level domain: every
/// example of a TLD lands on one side. TLDs are drawn in seeded-shuffled
/// order into the holdout until it reaches at least `holdout_fraction` of
/// the examples; order within each side is preserved.
pub fn split_by_tld(
    examples: Vec<DescriptionExample>,
    holdout_fraction: f64,
    seed: u64,
) -> (Vec<DescriptionExample>, Vec<DescriptionExample>) {
    let total = examples.len();
    let target = (holdout_fraction * total as f64).ceil() as usize;
    let mut tlds: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for ex in &examples {
        if !counts.contains_key(ex.tld.as_str()) {
            tlds.push(&ex.tld);
        }
        *counts.entry(&ex.tld).or_default() += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tlds.shuffle(&mut rng);
    let mut holdout_tlds: HashSet<String> = HashSet::new();
    let mut holdout_size = 0;
    for tld in tlds {
        if holdout_size >= target {
            break;
        }
        holdout_size += counts[tld];
        holdout_tlds.insert(tld.to_string());
    }
    examples
        .into_iter()
        .partition(|ex| !holdout_tlds.contains(&ex.tld))
}
