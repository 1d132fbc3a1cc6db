//! Snippet extraction: climb from a salient element toward the root until
//! a limit breaks.
//!
//! A proposed ancestor is accepted while (a) the hop count from the salient
//! element stays within `max_height` and (b) the percentage of element
//! descendants it adds over the salient element's own subtree stays within
//! `max_new_descendants_pct`. The first rejected proposal ends the climb;
//! growth is measured cumulatively against the salient subtree, so larger
//! limits can only produce larger snippets.

use std::collections::HashMap;

use crate::html::{HtmlDocument, HtmlError, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnippetConfig {
    /// Inclusive cap on 100 * (desc(root) - desc(salient)) / desc(salient).
    pub max_new_descendants_pct: f64,
    /// Inclusive cap on ancestor hops from the salient element; at least 1.
    pub max_height: u32,
}

impl Default for SnippetConfig {
    fn default() -> Self {
        SnippetConfig {
            max_new_descendants_pct: 25.0,
            max_height: 3,
        }
    }
}

/// A sub-tree copy around a salient element, which carries the `target`
/// marker inside the copy.
#[derive(Debug, Clone)]
pub struct Snippet {
    pub doc: HtmlDocument,
    pub salient: NodeId,
    pub config_used: SnippetConfig,
}

/// Walk the ancestor chain and return the last accepted root with its hop
/// count. `desc` counts element nodes in a subtree, including the root of
/// the subtree itself; the document node is proposable and counts the whole
/// page.
fn choose_root(
    doc: &HtmlDocument,
    salient: NodeId,
    config: &SnippetConfig,
) -> Result<(NodeId, u32), HtmlError> {
    match doc.nodes.get(salient.0) {
        Some(n) if !n.detached => {
            if !n.is_element() {
                return Err(HtmlError::NotAnElement);
            }
        }
        _ => return Err(HtmlError::UnknownNode),
    }
    let salient_desc = doc.element_subtree_size(salient).max(1);
    let mut accepted = salient;
    let mut accepted_hops = 0u32;
    let mut hops = 0u32;
    let mut cur = salient;
    while let Some(parent) = doc.node(cur).parent() {
        hops += 1;
        if hops > config.max_height {
            break;
        }
        let added = doc.element_subtree_size(parent) - salient_desc;
        let pct = 100.0 * added as f64 / salient_desc as f64;
        if pct > config.max_new_descendants_pct {
            break;
        }
        accepted = parent;
        accepted_hops = hops;
        cur = parent;
    }
    Ok((accepted, accepted_hops))
}

pub fn extract_snippet(
    doc: &HtmlDocument,
    salient: NodeId,
    config: SnippetConfig,
) -> Result<Snippet, HtmlError> {
    extract_snippet_mapped(doc, salient, config).map(|(snippet, _)| snippet)
}

/// [`extract_snippet`] plus the original-id to copy-id map, for callers
/// that need to find other original nodes (such as a label) in the copy.
pub(crate) fn extract_snippet_mapped(
    doc: &HtmlDocument,
    salient: NodeId,
    config: SnippetConfig,
) -> Result<(Snippet, HashMap<NodeId, NodeId>), HtmlError> {
    let (root, _) = choose_root(doc, salient, &config)?;
    let (mut copy, map) = doc.subtree_copy(root)?;
    let salient_in_copy = map[&salient];
    copy.mark_target(salient_in_copy)?;
    Ok((
        Snippet {
            doc: copy,
            salient: salient_in_copy,
            config_used: config,
        },
        map,
    ))
}

/// Metrics of the root [`extract_snippet`] would pick: ancestor hops,
/// new-descendants percentage, and the element count of the snippet.
pub fn snippet_stats(
    doc: &HtmlDocument,
    salient: NodeId,
    config: SnippetConfig,
) -> Result<(u32, f64, usize), HtmlError> {
    let (root, hops) = choose_root(doc, salient, &config)?;
    let salient_desc = doc.element_subtree_size(salient).max(1);
    let node_count = doc.element_subtree_size(root);
    let pct = 100.0 * (node_count - salient_desc) as f64 / salient_desc as f64;
    Ok((hops, pct, node_count))
}
