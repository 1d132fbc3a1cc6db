//! Scoring for the three task kinds, plus the closest-description
//! heuristic that guesses an element's description from raw proximity.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{
    encode_action, encode_classification_input, encode_navigation_input, parse_action,
    ClassificationExample,
};
use crate::distill::DescriptionExample;
use crate::html::{parse_html, serialize_with_spans, HtmlDocument, SerializeOptions};
use crate::model::{gold_marker, ModelError, ModelReply, ModelRequest, TextModel};
use crate::nav::{EpisodeRecord, Outcome};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("prediction and reference counts differ")]
    LengthMismatch,
    #[error("snippet has no target element")]
    NoTarget,
    #[error("snippet has no non-empty text node")]
    NoTextNodes,
}

/// Equality after trimming outer whitespace; case matters.
pub fn exact_match(prediction: &str, gold: &str) -> bool {
    prediction.trim() == gold.trim()
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU over whitespace tokens, case-sensitive, scaled to [0,100]:
/// clipped modified precisions for 1..4-grams, geometric mean, brevity
/// penalty. No smoothing: an n-gram order with zero matches (or a corpus
/// too short to have any) zeroes the whole score.
pub fn bleu(predictions: &[String], references: &[String]) -> Result<f64, MetricsError> {
    if predictions.len() != references.len() {
        return Err(MetricsError::LengthMismatch);
    }
    if predictions.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let pred_tokens: Vec<Vec<&str>> = predictions
        .iter()
        .map(|s| s.split_whitespace().collect())
        .collect();
    let ref_tokens: Vec<Vec<&str>> = references
        .iter()
        .map(|s| s.split_whitespace().collect())
        .collect();
    let cand_len: usize = pred_tokens.iter().map(Vec::len).sum();
    let ref_len: usize = ref_tokens.iter().map(Vec::len).sum();
    if cand_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let mut matched: u64 = 0;
        let mut total: u64 = 0;
        for (pt, gt) in pred_tokens.iter().zip(&ref_tokens) {
            let cand = ngram_counts(pt, n);
            let refs = ngram_counts(gt, n);
            matched += cand
                .iter()
                .map(|(gram, &count)| count.min(*refs.get(gram).unwrap_or(&0)))
                .sum::<u64>();
            total += ((pt.len() + 1).saturating_sub(n)) as u64;
        }
        if matched == 0 || total == 0 {
            return Ok(0.0);
        }
        log_sum += (matched as f64 / total as f64).ln();
    }
    let brevity = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(brevity * (log_sum / 4.0).exp() * 100.0)
}

/// ROUGE-1 (precision, recall, F1) over lowercased whitespace unigrams
/// with clipped counts.
pub fn rouge1(prediction: &str, reference: &str) -> Result<(f64, f64, f64), MetricsError> {
    let pred = prediction.to_lowercase();
    let gold = reference.to_lowercase();
    let pt: Vec<&str> = pred.split_whitespace().collect();
    let gt: Vec<&str> = gold.split_whitespace().collect();
    if pt.is_empty() || gt.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut ref_counts: HashMap<&str, u64> = HashMap::new();
    for token in &gt {
        *ref_counts.entry(token).or_insert(0) += 1;
    }
    let mut pred_counts: HashMap<&str, u64> = HashMap::new();
    for token in &pt {
        *pred_counts.entry(token).or_insert(0) += 1;
    }
    let overlap: u64 = pred_counts
        .iter()
        .map(|(token, &count)| count.min(*ref_counts.get(token).unwrap_or(&0)))
        .sum();
    let precision = overlap as f64 / pt.len() as f64;
    let recall = overlap as f64 / gt.len() as f64;
    let f1 = if overlap == 0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((precision, recall, f1))
}

/// Guess the description of the target element: the non-blank text node
/// whose start offset in the serialized page lies nearest the target's
/// open tag. Ties go to the earlier text.
pub fn closest_description(doc: &HtmlDocument) -> Result<String, MetricsError> {
    let target = doc.find_target().ok_or(MetricsError::NoTarget)?;
    let (_, spans) = serialize_with_spans(doc, &SerializeOptions::default());
    let target_start = spans[&target];
    let mut best: Option<(usize, usize, &str)> = None;
    for id in doc.pre_order() {
        let Some(text) = doc.node(id).text() else {
            continue;
        };
        if text.trim().is_empty() {
            continue;
        }
        let offset = spans[&id];
        let key = (offset.abs_diff(target_start), offset);
        if best.is_none_or(|(d, o, _)| key < (d, o)) {
            best = Some((key.0, key.1, text));
        }
    }
    best.map(|(_, _, text)| text.trim().to_string())
        .ok_or(MetricsError::NoTextNodes)
}

/// The no-model baseline: reads the snippet it is given and answers with
/// the closest text. Unusable inputs get an empty reply, never an error.
pub struct ClosestDescription;

impl TextModel for ClosestDescription {
    fn generate(&self, request: &ModelRequest) -> Result<ModelReply, ModelError> {
        let doc = parse_html(&request.input);
        Ok(ModelReply {
            text: closest_description(&doc).unwrap_or_default(),
            truncated: false,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub n: usize,
    pub exact_match_pct: f64,
    pub bleu: f64,
    pub rouge1_f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_rate_pct: Option<f64>,
    pub failure_mode_counts: HashMap<String, u64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    /// Append a gold marker to every input so the echo mock can answer
    /// perfectly; used by harness self-tests.
    pub include_gold_marker: bool,
}

pub enum EvalTask<'a> {
    Classify(&'a [ClassificationExample]),
    Describe(&'a [DescriptionExample]),
    Navigate(&'a [EpisodeRecord]),
}

fn model_error_kind(err: &ModelError) -> &'static str {
    match err {
        ModelError::Timeout => "timeout",
        ModelError::Transport(_) => "transport",
        ModelError::Remote { .. } => "remote",
    }
}

struct Scored {
    matches: u64,
    preds: Vec<String>,
    golds: Vec<String>,
    rouge_sum: f64,
    scored: usize,
    failures: HashMap<String, u64>,
}

/// Run the model over (input, gold) pairs in parallel, then fold in input
/// order. Failed generations score zero and are excluded from the BLEU
/// corpus; `count_parse_kinds` additionally tallies action-parse errors.
fn score_pairs(
    pairs: &[(String, String)],
    model: &dyn TextModel,
    count_parse_kinds: bool,
) -> Scored {
    let results: Vec<Result<String, ModelError>> = pairs
        .par_iter()
        .map(|(input, _)| {
            model
                .generate(&ModelRequest::greedy(input.clone()))
                .map(|reply| reply.text)
        })
        .collect();
    let mut out = Scored {
        matches: 0,
        preds: Vec::new(),
        golds: Vec::new(),
        rouge_sum: 0.0,
        scored: 0,
        failures: HashMap::new(),
    };
    for ((_, gold), result) in pairs.iter().zip(results) {
        out.scored += 1;
        match result {
            Ok(pred) => {
                if exact_match(&pred, gold) {
                    out.matches += 1;
                }
                if count_parse_kinds {
                    if let Err(e) = parse_action(&pred) {
                        *out.failures.entry(e.kind().to_string()).or_default() += 1;
                    }
                }
                if let Ok((_, _, f1)) = rouge1(&pred, gold) {
                    out.rouge_sum += f1;
                }
                out.preds.push(pred);
                out.golds.push(gold.clone());
            }
            Err(e) => {
                *out.failures.entry(model_error_kind(&e).to_string()).or_default() += 1;
            }
        }
    }
    out
}

fn pct(num: u64, den: usize) -> f64 {
    100.0 * num as f64 / den as f64
}

pub fn evaluate(
    task: &EvalTask,
    model: &dyn TextModel,
    options: &EvalOptions,
) -> Result<EvalReport, MetricsError> {
    let with_marker = |input: String, gold: &str| {
        if options.include_gold_marker {
            format!("{input}{}", gold_marker(gold))
        } else {
            input
        }
    };
    let (name, pairs, outcomes): (&str, Vec<(String, String)>, Option<Vec<Outcome>>) = match task {
        EvalTask::Classify(examples) => (
            "classify",
            examples
                .iter()
                .map(|ex| {
                    (
                        with_marker(encode_classification_input(&ex.snippet_html), &ex.category),
                        ex.category.clone(),
                    )
                })
                .collect(),
            None,
        ),
        EvalTask::Describe(examples) => (
            "describe",
            examples
                .iter()
                .map(|ex| {
                    (
                        with_marker(ex.snippet_html.clone(), &ex.description),
                        ex.description.clone(),
                    )
                })
                .collect(),
            None,
        ),
        EvalTask::Navigate(episodes) => (
            "navigate",
            episodes
                .iter()
                .flat_map(|episode| episode.steps.iter())
                .map(|step| {
                    let gold = encode_action(&step.action);
                    (with_marker(encode_navigation_input(step), &gold), gold)
                })
                .collect(),
            Some(episodes.iter().map(|e| e.outcome).collect()),
        ),
    };
    let n = match task {
        EvalTask::Classify(examples) => examples.len(),
        EvalTask::Describe(examples) => examples.len(),
        EvalTask::Navigate(episodes) => episodes.len(),
    };
    if n == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let scored = score_pairs(&pairs, model, outcomes.is_some());
    let denom = pairs.len().max(1);
    Ok(EvalReport {
        task: name.to_string(),
        n,
        exact_match_pct: pct(scored.matches, denom),
        bleu: bleu(&scored.preds, &scored.golds).unwrap_or(0.0),
        rouge1_f: scored.rouge_sum / denom as f64,
        success_rate_pct: outcomes.as_ref().map(|outs| {
            pct(
                outs.iter().filter(|o| **o == Outcome::Success).count() as u64,
                outs.len(),
            )
        }),
        failure_mode_counts: scored.failures,
    })
}
