//! Forgiving HTML tree model.
//!
//! Documents are arenas of nodes with a synthetic document root, so pages
//! with multiple top-level elements (common in snippets and crawled
//! fragments) still form a single rooted tree. Processing is deliberately
//! minimal: no entity decoding, no whitespace collapsing, attribute order
//! preserved verbatim.

mod parse;
mod serialize;

pub use parse::{parse_html, parse_html_bytes};
pub use serialize::{
    serialize, serialize_with, serialize_with_spans, strip_closing_tags, SerializeOptions,
};

use std::collections::HashMap;

use thiserror::Error;

/// Errors from tree-level operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum HtmlError {
    /// Input bytes were not valid UTF-8.
    #[error("input is not decodable as UTF-8 at byte {0}")]
    ParseError(usize),
    /// Operation requires an element node.
    #[error("node is not an element")]
    NotAnElement,
    /// NodeId does not belong to this document or was detached.
    #[error("unknown or stale node id")]
    UnknownNode,
}

/// Opaque handle to a node within one [`HtmlDocument`].
///
/// Ids index an arena and are never reused, so a stale id after a
/// subtree removal stays invalid rather than aliasing a new node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

/// Element payload: tag, ordered attributes, and an optional ref number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementData {
    pub tag: String,
    /// Ordered `(key, value)` pairs; `None` value means a bare attribute
    /// such as `target` or `checked`.
    pub attrs: Vec<(String, Option<String>)>,
    /// Document-order reference number, set by [`HtmlDocument::assign_refs`].
    pub ref_num: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeData {
    /// Synthetic root holding the top-level nodes of the page.
    Document,
    Element(ElementData),
    Text(String),
}

#[derive(Debug, Clone)]
pub struct HtmlNode {
    pub(crate) parent: Option<NodeId>,
    pub(crate) children: Vec<NodeId>,
    pub(crate) data: NodeData,
    /// Set when the node is removed from the tree; the arena slot is kept
    /// so old ids fail instead of aliasing.
    pub(crate) detached: bool,
}

impl HtmlNode {
    pub fn data(&self) -> &NodeData {
        &self.data
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn is_element(&self) -> bool {
        matches!(self.data, NodeData::Element(_))
    }

    pub fn is_text(&self) -> bool {
        matches!(self.data, NodeData::Text(_))
    }

    pub fn element(&self) -> Option<&ElementData> {
        match &self.data {
            NodeData::Element(el) => Some(el),
            _ => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.data {
            NodeData::Text(t) => Some(t),
            _ => None,
        }
    }
}

/// A parsed HTML page: a single rooted tree of elements and text nodes.
#[derive(Debug, Clone)]
pub struct HtmlDocument {
    pub(crate) nodes: Vec<HtmlNode>,
    pub(crate) root: NodeId,
    pub source_url: Option<String>,
}

/// Tags serialized without closing tags and parsed without children.
pub(crate) const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID_ELEMENTS.contains(&tag)
}

impl HtmlDocument {
    /// Empty document: just the synthetic root.
    pub fn new() -> Self {
        HtmlDocument {
            nodes: vec![HtmlNode {
                parent: None,
                children: Vec::new(),
                data: NodeData::Document,
                detached: false,
            }],
            root: NodeId(0),
            source_url: None,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &HtmlNode {
        &self.nodes[id.0]
    }

    fn check(&self, id: NodeId) -> Result<&HtmlNode, HtmlError> {
        match self.nodes.get(id.0) {
            Some(n) if !n.detached => Ok(n),
            _ => Err(HtmlError::UnknownNode),
        }
    }

    pub(crate) fn push_node(&mut self, parent: NodeId, data: NodeData) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(HtmlNode {
            parent: Some(parent),
            children: Vec::new(),
            data,
            detached: false,
        });
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Pre-order traversal of the whole tree, root first.
    pub fn pre_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            for &child in self.nodes[id.0].children.iter().rev() {
                stack.push(child);
            }
        }
        out
    }

    /// Element nodes in document (pre-order) position.
    pub fn elements(&self) -> Vec<NodeId> {
        self.pre_order()
            .into_iter()
            .filter(|&id| self.nodes[id.0].is_element())
            .collect()
    }

    pub fn element_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| !n.detached && n.is_element())
            .count()
    }

    /// Number of element nodes in the subtree rooted at `id`, including
    /// `id` itself when it is an element.
    pub fn element_subtree_size(&self, id: NodeId) -> usize {
        let mut count = 0;
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if self.nodes[cur.0].is_element() {
                count += 1;
            }
            stack.extend(self.nodes[cur.0].children.iter().copied());
        }
        count
    }

    /// Concatenated text content of all text nodes under `id`, in order.
    pub fn text_content(&self, id: NodeId) -> String {
        let mut out = String::new();
        let mut stack = vec![id];
        let mut ordered = Vec::new();
        while let Some(cur) = stack.pop() {
            ordered.push(cur);
            for &child in self.nodes[cur.0].children.iter().rev() {
                stack.push(child);
            }
        }
        for cur in ordered {
            if let NodeData::Text(t) = &self.nodes[cur.0].data {
                out.push_str(t);
            }
        }
        out
    }

    /// Assign every element its 1-based pre-order position as `ref`.
    ///
    /// Text nodes and the document root are not numbered. Idempotent.
    pub fn assign_refs(&mut self) {
        let elements = self.elements();
        for (i, id) in elements.into_iter().enumerate() {
            if let NodeData::Element(el) = &mut self.nodes[id.0].data {
                el.ref_num = Some(i as u32 + 1);
            }
        }
    }

    pub fn element_ref(&self, id: NodeId) -> Option<u32> {
        self.node(id).element().and_then(|el| el.ref_num)
    }

    /// Find the element carrying a given ref number, if refs are assigned.
    pub fn element_by_ref(&self, ref_num: u32) -> Option<NodeId> {
        self.elements()
            .into_iter()
            .find(|&id| self.element_ref(id) == Some(ref_num))
    }

    /// Mark `salient` with the bare `target` attribute, clearing any
    /// previous marker so exactly one element carries it.
    pub fn mark_target(&mut self, salient: NodeId) -> Result<(), HtmlError> {
        if !self.check(salient)?.is_element() {
            return Err(HtmlError::NotAnElement);
        }
        for node in self.nodes.iter_mut() {
            if let NodeData::Element(el) = &mut node.data {
                el.attrs.retain(|(k, _)| k != "target");
            }
        }
        if let NodeData::Element(el) = &mut self.nodes[salient.0].data {
            el.attrs.push(("target".to_string(), None));
        }
        Ok(())
    }

    /// The element currently marked `target`, if any.
    pub fn find_target(&self) -> Option<NodeId> {
        self.elements().into_iter().find(|&id| {
            self.node(id)
                .element()
                .map(|el| el.attrs.iter().any(|(k, _)| k == "target"))
                .unwrap_or(false)
        })
    }

    /// All elements whose attribute `key` equals `value` exactly, in
    /// document order. Bare attributes compare as the empty string.
    pub fn find_by_attr(&self, key: &str, value: &str) -> Vec<NodeId> {
        self.elements()
            .into_iter()
            .filter(|&id| {
                self.node(id).element().is_some_and(|el| {
                    el.attrs
                        .iter()
                        .any(|(k, v)| k == key && v.as_deref().unwrap_or("") == value)
                })
            })
            .collect()
    }

    pub fn attr(&self, id: NodeId, key: &str) -> Option<&str> {
        self.node(id).element().and_then(|el| {
            el.attrs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_deref().unwrap_or(""))
        })
    }

    pub fn has_attr(&self, id: NodeId, key: &str) -> bool {
        self.node(id)
            .element()
            .is_some_and(|el| el.attrs.iter().any(|(k, _)| k == key))
    }

    /// Set (replace in place) or append an attribute.
    pub fn set_attr(&mut self, id: NodeId, key: &str, value: Option<&str>) -> Result<(), HtmlError> {
        self.check(id)?;
        match &mut self.nodes[id.0].data {
            NodeData::Element(el) => {
                let value = value.map(|v| v.to_string());
                if let Some(slot) = el.attrs.iter_mut().find(|(k, _)| k == key) {
                    slot.1 = value;
                } else {
                    el.attrs.push((key.to_string(), value));
                }
                Ok(())
            }
            _ => Err(HtmlError::NotAnElement),
        }
    }

    pub fn remove_attr(&mut self, id: NodeId, key: &str) -> Result<(), HtmlError> {
        self.check(id)?;
        match &mut self.nodes[id.0].data {
            NodeData::Element(el) => {
                el.attrs.retain(|(k, _)| k != key);
                Ok(())
            }
            _ => Err(HtmlError::NotAnElement),
        }
    }

    pub fn set_tag(&mut self, id: NodeId, tag: &str) -> Result<(), HtmlError> {
        self.check(id)?;
        match &mut self.nodes[id.0].data {
            NodeData::Element(el) => {
                el.tag = tag.to_string();
                Ok(())
            }
            _ => Err(HtmlError::NotAnElement),
        }
    }

    pub fn tag(&self, id: NodeId) -> Option<&str> {
        self.node(id).element().map(|el| el.tag.as_str())
    }

    /// Detach the subtree rooted at `id` from its parent. Slots are kept,
    /// so the removed ids become stale rather than reused.
    pub fn remove_subtree(&mut self, id: NodeId) -> Result<(), HtmlError> {
        self.check(id)?;
        if id == self.root {
            return Err(HtmlError::NotAnElement);
        }
        if let Some(parent) = self.nodes[id.0].parent {
            self.nodes[parent.0].children.retain(|&c| c != id);
        }
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            self.nodes[cur.0].detached = true;
            stack.extend(self.nodes[cur.0].children.iter().copied());
        }
        Ok(())
    }

    /// Copy the subtree rooted at `at` into a fresh document (under a new
    /// synthetic root). Returns the copy and the old-id to new-id map.
    ///
    /// When `at` is the document root the whole page is copied.
    pub fn subtree_copy(&self, at: NodeId) -> Result<(HtmlDocument, HashMap<NodeId, NodeId>), HtmlError> {
        self.check(at)?;
        let mut doc = HtmlDocument::new();
        doc.source_url = self.source_url.clone();
        let mut map = HashMap::new();
        if at == self.root {
            map.insert(at, doc.root);
            let children: Vec<NodeId> = self.nodes[at.0].children.clone();
            for child in children {
                self.copy_into(child, doc.root, &mut doc, &mut map);
            }
        } else {
            self.copy_into(at, doc.root, &mut doc, &mut map);
        }
        Ok((doc, map))
    }

    fn copy_into(
        &self,
        src: NodeId,
        dst_parent: NodeId,
        dst: &mut HtmlDocument,
        map: &mut HashMap<NodeId, NodeId>,
    ) {
        let new_id = dst.push_node(dst_parent, self.nodes[src.0].data.clone());
        map.insert(src, new_id);
        let children: Vec<NodeId> = self.nodes[src.0].children.clone();
        for child in children {
            self.copy_into(child, new_id, dst, map);
        }
    }

    /// Structural equality: kind, tag, attribute list (keys, values, and
    /// order), text content, and child order. Ref numbers are a derived
    /// annotation and are ignored.
    pub fn structurally_equal(&self, other: &HtmlDocument) -> bool {
        fn node_eq(a_doc: &HtmlDocument, a: NodeId, b_doc: &HtmlDocument, b: NodeId) -> bool {
            let an = a_doc.node(a);
            let bn = b_doc.node(b);
            let data_eq = match (&an.data, &bn.data) {
                (NodeData::Document, NodeData::Document) => true,
                (NodeData::Element(x), NodeData::Element(y)) => {
                    x.tag == y.tag && x.attrs == y.attrs
                }
                (NodeData::Text(x), NodeData::Text(y)) => x == y,
                _ => false,
            };
            data_eq
                && an.children.len() == bn.children.len()
                && an
                    .children
                    .iter()
                    .zip(bn.children.iter())
                    .all(|(&ac, &bc)| node_eq(a_doc, ac, b_doc, bc))
        }
        node_eq(self, self.root, other, other.root)
    }
}

impl Default for HtmlDocument {
    fn default() -> Self {
        Self::new()
    }
}
