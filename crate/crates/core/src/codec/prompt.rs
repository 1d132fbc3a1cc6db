//! Few-shot prompt construction for classification.
//!
//! Prompt HTML is slimmed down first: decorative subtrees (svg, path, img,
//! iframe) and all class attributes are dropped, which keeps prompts short
//! without touching the structure a classifier needs.

use super::{CategoryVocabulary, ClassificationExample, CodecError};
use crate::html::{parse_html, serialize};

const DROPPED_TAGS: &[&str] = &["svg", "path", "img", "iframe"];

/// Remove decorative subtrees and every `class` attribute. Idempotent.
pub fn clean_prompt_example(html: &str) -> String {
    let mut doc = parse_html(html);
    for id in doc.elements() {
        if DROPPED_TAGS.contains(&doc.tag(id).unwrap_or_default()) {
            // may already be gone with a removed ancestor
            let _ = doc.remove_subtree(id);
        }
    }
    for id in doc.elements() {
        let _ = doc.remove_attr(id, "class");
    }
    serialize(&doc)
}

/// Assemble `<html>\nRole: <category>` blocks, one per example in
/// vocabulary order, ending with the query block's open `Role:`.
pub fn build_fewshot_prompt(
    examples: &[ClassificationExample],
    query_html: &str,
    vocab: &CategoryVocabulary,
) -> Result<String, CodecError> {
    let mut seen = std::collections::HashSet::new();
    for ex in examples {
        if !seen.insert(ex.category.as_str()) {
            return Err(CodecError::DuplicateCategory(ex.category.clone()));
        }
    }
    let mut ordered: Vec<&ClassificationExample> = examples.iter().collect();
    // unknown categories sort after the vocabulary, by name
    ordered.sort_by_key(|ex| {
        (
            vocab.position(&ex.category).unwrap_or(usize::MAX),
            ex.category.clone(),
        )
    });
    let mut blocks: Vec<String> = ordered
        .iter()
        .map(|ex| {
            format!(
                "{}\nRole: {}",
                clean_prompt_example(&ex.snippet_html),
                ex.category
            )
        })
        .collect();
    blocks.push(format!("{}\nRole:", clean_prompt_example(query_html)));
    Ok(blocks.join("\n\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_listed_tags_and_class_attrs() {
        assert_eq!(
            clean_prompt_example(r#"<div class="a"><img src="x"><span>hi</span></div>"#),
            "<div><span>hi</span></div>"
        );
    }

    #[test]
    fn untouched_input_survives_reserialization() {
        let html = r#"<div id="k"><span data-x="1">hi</span></div>"#;
        assert_eq!(clean_prompt_example(html), html);
    }

    #[test]
    fn nested_svg_subtree_fully_removed() {
        let html = r#"<div><svg><path d="M0"></path><circle></circle></svg><p>text</p></div>"#;
        let cleaned = clean_prompt_example(html);
        assert_eq!(cleaned, "<div><p>text</p></div>");
        let doc = parse_html(&cleaned);
        assert_eq!(doc.element_count(), 2);
    }

    #[test]
    fn cleaning_is_idempotent() {
        let html = r#"<div class="x"><iframe src="a"><b>inner</b></iframe><label class="y" for="z">L</label></div>"#;
        let once = clean_prompt_example(html);
        assert_eq!(clean_prompt_example(&once), once);
    }

    fn example(html: &str, category: &str) -> ClassificationExample {
        ClassificationExample {
            snippet_html: html.to_string(),
            category: category.to_string(),
        }
    }

    #[test]
    fn prompt_blocks_follow_vocab_order() {
        let vocab = CategoryVocabulary::builtin();
        // given out of vocabulary order on purpose
        let examples = vec![
            example("<input type=\"password\" target>", "password"),
            example("<input type=\"text\" target>", "username"),
        ];
        let prompt =
            build_fewshot_prompt(&examples, "<input type=\"email\" target>", &vocab).unwrap();
        let blocks: Vec<&str> = prompt.split("\n\n").collect();
        assert_eq!(blocks.len(), 3);
        assert!(blocks[0].ends_with("Role: username"));
        assert!(blocks[1].ends_with("Role: password"));
        assert_eq!(blocks[2], "<input type=\"email\" target>\nRole:");
    }

    #[test]
    fn empty_examples_leave_query_only() {
        let vocab = CategoryVocabulary::builtin();
        let prompt = build_fewshot_prompt(&[], "<div>q</div>", &vocab).unwrap();
        assert_eq!(prompt, "<div>q</div>\nRole:");
    }

    #[test]
    fn duplicate_category_rejected() {
        let vocab = CategoryVocabulary::builtin();
        let examples = vec![example("<div>a</div>", "email"), example("<div>b</div>", "email")];
        let err = build_fewshot_prompt(&examples, "<div>q</div>", &vocab).unwrap_err();
        assert!(matches!(err, CodecError::DuplicateCategory(c) if c == "email"));
    }

    #[test]
    fn prompt_examples_are_cleaned() {
        let vocab = CategoryVocabulary::builtin();
        let examples = vec![example(r#"<div class="big"><img src="i"><input target></div>"#, "email")];
        let prompt = build_fewshot_prompt(&examples, r#"<span class="q">x</span>"#, &vocab).unwrap();
        assert_eq!(
            prompt,
            "<div><input target></div>\nRole: email\n\n<span>x</span>\nRole:"
        );
    }
}
