//! Text codecs between structured task records and the flat sequences
//! models consume and produce.
//!
//! The action wire format is the key-value record `{action: click, ref: N}`
//! / `{action: type, ref: N, text: T}`. Parsing is strict apart from outer
//! whitespace, and each way it can fail is a distinct error so evaluation
//! can count failure modes separately.

mod category;
mod prompt;

pub use category::{
    canonicalize_category, decode_category, CategoryVocabulary, DecodedCategory,
};
pub use prompt::{build_fewshot_prompt, clean_prompt_example};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("duplicate category in prompt examples: {0}")]
    DuplicateCategory(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One page interaction. `ref` addresses the element carrying that number
/// in the ref-annotated HTML.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum Action {
    Click {
        #[serde(rename = "ref")]
        ref_num: u32,
    },
    Type {
        #[serde(rename = "ref")]
        ref_num: u32,
        text: String,
    },
}

impl Action {
    pub fn ref_num(&self) -> u32 {
        match self {
            Action::Click { ref_num } | Action::Type { ref_num, .. } => *ref_num,
        }
    }
}

/// The ways a model's action text can fail to parse, counted separately
/// during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum ActionParseError {
    #[error("not a key-value action record")]
    MalformedRecord,
    #[error("ref is not a positive integer")]
    NonIntegerRef,
    #[error("unknown action function")]
    UnknownFunction,
    #[error("type action without text")]
    MissingText,
}

impl ActionParseError {
    /// Stable snake_case label for failure-mode tallies.
    pub fn kind(&self) -> &'static str {
        match self {
            ActionParseError::MalformedRecord => "malformed_record",
            ActionParseError::NonIntegerRef => "non_integer_ref",
            ActionParseError::UnknownFunction => "unknown_function",
            ActionParseError::MissingText => "missing_text",
        }
    }
}

pub fn encode_action(action: &Action) -> String {
    match action {
        Action::Click { ref_num } => format!("{{action: click, ref: {ref_num}}}"),
        Action::Type { ref_num, text } => {
            format!("{{action: type, ref: {ref_num}, text: {text}}}")
        }
    }
}

/// Strict parse of the key-value record; only whitespace around the whole
/// record is tolerated. The text payload runs to the record's final brace,
/// so it may contain commas and braces without escaping.
pub fn parse_action(model_output: &str) -> Result<Action, ActionParseError> {
    use ActionParseError::*;
    let trimmed = model_output.trim();
    let inner = trimmed
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or(MalformedRecord)?;
    let rest = inner.strip_prefix("action: ").ok_or(MalformedRecord)?;
    let comma = rest.find(',').ok_or(MalformedRecord)?;
    let function = &rest[..comma];
    let after_ref = rest[comma..].strip_prefix(", ref: ").ok_or(MalformedRecord)?;
    let (ref_str, text) = match after_ref.find(", text: ") {
        Some(i) => (&after_ref[..i], Some(&after_ref[i + ", text: ".len()..])),
        None => (after_ref, None),
    };
    if function != "click" && function != "type" {
        return Err(UnknownFunction);
    }
    if ref_str.is_empty() || !ref_str.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NonIntegerRef);
    }
    let ref_num: u32 = ref_str.parse().map_err(|_| NonIntegerRef)?;
    if ref_num == 0 {
        return Err(NonIntegerRef);
    }
    match (function, text) {
        ("click", None) => Ok(Action::Click { ref_num }),
        ("click", Some(_)) => Err(MalformedRecord),
        ("type", Some(text)) => Ok(Action::Type {
            ref_num,
            text: text.to_string(),
        }),
        ("type", None) => Err(MissingText),
        _ => unreachable!(),
    }
}

/// One labelled navigation step: what the page looked like, what had
/// already been done, and the action taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationStep {
    pub action_history: Vec<Action>,
    pub instruction: String,
    pub html: String,
    pub action: Action,
}

/// Model input for one step: space-joined encoded history, instruction,
/// and page HTML, newline-delimited. An empty history contributes no line.
pub fn encode_navigation_input(step: &NavigationStep) -> String {
    encode_navigation_parts(&step.action_history, &step.instruction, &step.html)
}

pub fn encode_navigation_parts(history: &[Action], instruction: &str, html: &str) -> String {
    let mut out = String::new();
    if !history.is_empty() {
        let encoded: Vec<String> = history.iter().map(encode_action).collect();
        out.push_str(&encoded.join(" "));
        out.push('\n');
    }
    out.push_str(instruction);
    out.push('\n');
    out.push_str(html);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationExample {
    pub snippet_html: String,
    pub category: String,
}

/// The classification input is the snippet text itself.
pub fn encode_classification_input(snippet_html: &str) -> String {
    snippet_html.to_string()
}
