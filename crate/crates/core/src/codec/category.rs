//! Category vocabulary and output canonicalization for classification.
//!
//! Free-text model outputs are snapped onto the vocabulary in three steps:
//! exact match, paraphrase dictionary, then underscore-token rewriting
//! (rotations, then reversal). Anything still unmatched is kept verbatim
//! and flagged out-of-vocabulary so it scores as wrong, never as an error.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::CodecError;

/// Ordered category names plus a paraphrase dictionary.
#[derive(Debug, Clone)]
pub struct CategoryVocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
    paraphrases: HashMap<String, String>,
}

#[derive(Deserialize)]
struct VocabFile {
    categories: Vec<String>,
    #[serde(default)]
    paraphrases: HashMap<String, String>,
}

impl CategoryVocabulary {
    pub fn new(
        names: Vec<String>,
        paraphrases: HashMap<String, String>,
    ) -> Result<Self, CodecError> {
        if names.is_empty() {
            return Err(CodecError::InvalidVocabulary("no categories".into()));
        }
        let mut index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(CodecError::InvalidVocabulary(format!(
                    "duplicate category: {name}"
                )));
            }
        }
        for target in paraphrases.values() {
            if !index.contains_key(target) {
                return Err(CodecError::InvalidVocabulary(format!(
                    "paraphrase target not a category: {target}"
                )));
            }
        }
        Ok(CategoryVocabulary {
            names,
            index,
            paraphrases,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CodecError> {
        let file: VocabFile = toml::from_str(text)
            .map_err(|e| CodecError::InvalidVocabulary(e.to_string()))?;
        Self::new(file.categories, file.paraphrases)
    }

    pub fn load(path: &Path) -> Result<Self, CodecError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// The vocabulary shipped with the toolkit: the documented category
    /// set plus a small paraphrase dictionary.
    pub fn builtin() -> Self {
        Self::from_toml_str(include_str!("../../assets/categories.toml"))
            .expect("bundled vocabulary is valid")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Position in vocabulary order, used for prompt ordering.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn paraphrase(&self, raw: &str) -> Option<&str> {
        self.paraphrases.get(raw).map(String::as_str)
    }
}

/// Snap `raw` onto the vocabulary: identity for in-vocabulary input, then
/// the paraphrase dictionary, then underscore-token rotations (shifting by
/// 1..k-1) and finally full reversal. First vocabulary hit wins.
pub fn canonicalize_category(raw: &str, vocab: &CategoryVocabulary) -> Option<String> {
    if vocab.contains(raw) {
        return Some(raw.to_string());
    }
    if let Some(canonical) = vocab.paraphrase(raw) {
        return Some(canonical.to_string());
    }
    let tokens: Vec<&str> = raw.split('_').collect();
    if tokens.len() < 2 {
        return None;
    }
    for shift in 1..tokens.len() {
        let rotated: String = tokens[shift..]
            .iter()
            .chain(&tokens[..shift])
            .copied()
            .collect::<Vec<_>>()
            .join("_");
        if vocab.contains(&rotated) {
            return Some(rotated);
        }
    }
    let reversed: String = tokens.iter().rev().copied().collect::<Vec<_>>().join("_");
    if vocab.contains(&reversed) {
        return Some(reversed);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedCategory {
    pub category: String,
    /// False when the output could not be snapped onto the vocabulary; it
    /// then scores as incorrect.
    pub in_vocab: bool,
}

/// Trim and canonicalize a model's classification output.
pub fn decode_category(model_output: &str, vocab: &CategoryVocabulary) -> DecodedCategory {
    let trimmed = model_output.trim();
    match canonicalize_category(trimmed, vocab) {
        Some(category) => DecodedCategory {
            category,
            in_vocab: true,
        },
        None => DecodedCategory {
            category: trimmed.to_string(),
            in_vocab: false,
        },
    }
}
