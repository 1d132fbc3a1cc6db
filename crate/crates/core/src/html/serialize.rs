//! Tree-to-text rendering.
//!
//! Output reparses to a structurally identical tree: attribute order and
//! values are emitted verbatim, with the quote style chosen so the value
//! survives a reparse. Ref numbers can be included as a leading `ref`
//! attribute for model-facing views.

use std::collections::HashMap;

use super::{is_void, HtmlDocument, NodeData, NodeId};

#[derive(Debug, Clone, Copy)]
pub struct SerializeOptions {
    /// Emit `ref="N"` as the first attribute of numbered elements.
    pub include_refs: bool,
    /// Emit closing tags. Disabled for the action-history page views.
    pub include_closing: bool,
}

impl Default for SerializeOptions {
    fn default() -> Self {
        SerializeOptions {
            include_refs: false,
            include_closing: true,
        }
    }
}

pub fn serialize(doc: &HtmlDocument) -> String {
    serialize_with(doc, &SerializeOptions::default())
}

pub fn serialize_with(doc: &HtmlDocument, opts: &SerializeOptions) -> String {
    let mut out = String::new();
    write_node(doc, doc.root(), opts, &mut out, None);
    out
}

/// Like [`serialize_with`] but also reports each node's byte offset in the
/// output: the `<` of an element's open tag, or the start of a text run.
pub fn serialize_with_spans(
    doc: &HtmlDocument,
    opts: &SerializeOptions,
) -> (String, HashMap<NodeId, usize>) {
    let mut out = String::new();
    let mut spans = HashMap::new();
    write_node(doc, doc.root(), opts, &mut out, Some(&mut spans));
    (out, spans)
}

/// Render only open tags and text, dropping every closing tag.
pub fn strip_closing_tags(doc: &HtmlDocument) -> String {
    serialize_with(
        doc,
        &SerializeOptions {
            include_refs: false,
            include_closing: false,
        },
    )
}

fn write_node(
    doc: &HtmlDocument,
    id: NodeId,
    opts: &SerializeOptions,
    out: &mut String,
    mut spans: Option<&mut HashMap<NodeId, usize>>,
) {
    match doc.node(id).data() {
        NodeData::Document => {
            for &child in doc.node(id).children() {
                write_node(doc, child, opts, out, spans.as_deref_mut());
            }
        }
        NodeData::Text(t) => {
            if let Some(spans) = spans.as_deref_mut() {
                spans.insert(id, out.len());
            }
            out.push_str(t);
        }
        NodeData::Element(el) => {
            if let Some(spans) = spans.as_deref_mut() {
                spans.insert(id, out.len());
            }
            out.push('<');
            out.push_str(&el.tag);
            if opts.include_refs {
                if let Some(n) = el.ref_num {
                    out.push_str(&format!(" ref=\"{n}\""));
                }
            }
            for (key, value) in &el.attrs {
                out.push(' ');
                out.push_str(key);
                if let Some(value) = value {
                    write_attr_value(out, value);
                }
            }
            out.push('>');
            for &child in doc.node(id).children() {
                write_node(doc, child, opts, out, spans.as_deref_mut());
            }
            if opts.include_closing && !is_void(&el.tag) {
                out.push_str("</");
                out.push_str(&el.tag);
                out.push('>');
            }
        }
    }
}

fn write_attr_value(out: &mut String, value: &str) {
    if !value.contains('"') {
        out.push_str(&format!("=\"{value}\""));
    } else if !value.contains('\'') {
        out.push_str(&format!("='{value}'"));
    } else if !value.contains(char::is_whitespace) && !value.contains('>') {
        // Both quote kinds present: only reachable from an unquoted source
        // value, which cannot contain whitespace or `>`, so emitting it
        // unquoted reparses exactly.
        out.push_str(&format!("={value}"));
    } else {
        // Unreachable from parsed input; keep the output well-formed.
        out.push_str(&format!("=\"{}\"", value.replace('"', "&quot;")));
    }
}
