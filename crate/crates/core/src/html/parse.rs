//! Forgiving, order-preserving HTML parsing.
//!
//! The goal is never to reject markup: unclosed tags are auto-closed at the
//! nearest enclosing boundary, stray closing tags are ignored, and anything
//! that does not look like a tag stays literal text. Text is kept verbatim
//! (no entity decoding, no whitespace collapsing); tag and attribute names
//! are lowercased; attribute values are untouched.

use super::{is_void, ElementData, HtmlDocument, HtmlError, NodeData, NodeId};

/// Parse HTML text into a tree. Never fails: malformed markup degrades to
/// the forgiving recovery behavior instead of erroring.
pub fn parse_html(source: &str) -> HtmlDocument {
    Parser::new(source).run()
}

/// Parse raw bytes, erroring only when the input is not valid UTF-8.
pub fn parse_html_bytes(source: &[u8]) -> Result<HtmlDocument, HtmlError> {
    let text = std::str::from_utf8(source).map_err(|e| HtmlError::ParseError(e.valid_up_to()))?;
    Ok(parse_html(text))
}

/// Tags whose content is raw text up to the matching closing tag.
const RAWTEXT_ELEMENTS: &[&str] = &["script", "style"];

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    text_start: usize,
    doc: HtmlDocument,
    stack: Vec<NodeId>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            text_start: 0,
            doc: HtmlDocument::new(),
            stack: Vec::new(),
        }
    }

    fn run(mut self) -> HtmlDocument {
        while self.pos < self.bytes.len() {
            if self.bytes[self.pos] != b'<' {
                self.pos += 1;
                continue;
            }
            match self.bytes.get(self.pos + 1) {
                Some(b'/') => self.closing_tag(),
                Some(b'!') => self.markup_declaration(),
                Some(b'?') => self.processing_instruction(),
                Some(c) if c.is_ascii_alphabetic() => self.open_tag(),
                // `<` not followed by a tag start stays literal text.
                _ => self.pos += 1,
            }
        }
        self.flush_text(self.bytes.len());
        self.doc
    }

    fn parent(&self) -> NodeId {
        self.stack.last().copied().unwrap_or(self.doc.root)
    }

    fn flush_text(&mut self, upto: usize) {
        if upto > self.text_start {
            let content = &self.src[self.text_start..upto];
            let parent = self.parent();
            // Merge with a preceding text sibling (happens when a comment
            // splits a run of text).
            if let Some(&last) = self.doc.nodes[parent.0].children.last() {
                if let NodeData::Text(t) = &mut self.doc.nodes[last.0].data {
                    t.push_str(content);
                    self.text_start = upto;
                    return;
                }
            }
            self.doc.push_node(parent, NodeData::Text(content.to_string()));
        }
        self.text_start = upto;
    }

    fn find_byte(&self, from: usize, byte: u8) -> Option<usize> {
        self.bytes[from..].iter().position(|&b| b == byte).map(|i| from + i)
    }

    /// `</name ...>`: close the nearest matching open element, auto-closing
    /// everything deeper. Unmatched closing tags are dropped.
    fn closing_tag(&mut self) {
        let tag_open = self.pos;
        let mut i = self.pos + 2;
        if !self.bytes.get(i).is_some_and(|b| b.is_ascii_alphabetic()) {
            // `</>` or `</3...`: bogus, skip to `>`.
            self.flush_text(tag_open);
            match self.find_byte(i, b'>') {
                Some(gt) => {
                    self.pos = gt + 1;
                    self.text_start = self.pos;
                }
                None => {
                    self.pos = self.bytes.len();
                    self.text_start = self.pos;
                }
            }
            return;
        }
        let name_start = i;
        while i < self.bytes.len() && !self.bytes[i].is_ascii_whitespace() && self.bytes[i] != b'>' {
            i += 1;
        }
        let name = self.src[name_start..i].to_ascii_lowercase();
        let Some(gt) = self.find_byte(i, b'>') else {
            // EOF inside the closing tag: drop it.
            self.flush_text(tag_open);
            self.pos = self.bytes.len();
            self.text_start = self.pos;
            return;
        };
        self.flush_text(tag_open);
        if let Some(depth) = self.stack.iter().rposition(|&id| self.doc.tag(id) == Some(&name)) {
            self.stack.truncate(depth);
        }
        self.pos = gt + 1;
        self.text_start = self.pos;
    }

    /// Comments, doctype, CDATA: skipped, never part of the tree.
    fn markup_declaration(&mut self) {
        self.flush_text(self.pos);
        let end = if self.src[self.pos..].starts_with("<!--") {
            match self.src[self.pos + 4..].find("-->") {
                Some(i) => self.pos + 4 + i + 3,
                None => self.bytes.len(),
            }
        } else {
            match self.find_byte(self.pos, b'>') {
                Some(gt) => gt + 1,
                None => self.bytes.len(),
            }
        };
        self.pos = end;
        self.text_start = end;
    }

    fn processing_instruction(&mut self) {
        self.flush_text(self.pos);
        let end = match self.find_byte(self.pos, b'>') {
            Some(gt) => gt + 1,
            None => self.bytes.len(),
        };
        self.pos = end;
        self.text_start = end;
    }

    fn open_tag(&mut self) {
        let tag_open = self.pos;
        let mut i = self.pos + 1;
        let name_start = i;
        while i < self.bytes.len()
            && !self.bytes[i].is_ascii_whitespace()
            && self.bytes[i] != b'>'
            && self.bytes[i] != b'/'
        {
            i += 1;
        }
        let tag = self.src[name_start..i].to_ascii_lowercase();

        let mut attrs: Vec<(String, Option<String>)> = Vec::new();
        let close_pos = loop {
            while i < self.bytes.len() && self.bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            match self.bytes.get(i) {
                None => {
                    // EOF inside the tag: discard the partial tag.
                    self.flush_text(tag_open);
                    self.pos = self.bytes.len();
                    self.text_start = self.pos;
                    return;
                }
                Some(b'>') => break i,
                Some(b'/') => {
                    // Trailing slash is ignored for HTML elements.
                    i += 1;
                }
                _ => {
                    let key_start = i;
                    while i < self.bytes.len()
                        && !self.bytes[i].is_ascii_whitespace()
                        && self.bytes[i] != b'='
                        && self.bytes[i] != b'>'
                        && self.bytes[i] != b'/'
                    {
                        i += 1;
                    }
                    let key = self.src[key_start..i].to_ascii_lowercase();
                    while i < self.bytes.len() && self.bytes[i].is_ascii_whitespace() {
                        i += 1;
                    }
                    let value = if self.bytes.get(i) == Some(&b'=') {
                        i += 1;
                        while i < self.bytes.len() && self.bytes[i].is_ascii_whitespace() {
                            i += 1;
                        }
                        match self.bytes.get(i) {
                            Some(&q) if q == b'"' || q == b'\'' => {
                                let value_start = i + 1;
                                let end = self.find_byte(value_start, q).unwrap_or(self.bytes.len());
                                let v = self.src[value_start..end].to_string();
                                i = (end + 1).min(self.bytes.len());
                                Some(v)
                            }
                            _ => {
                                let value_start = i;
                                while i < self.bytes.len()
                                    && !self.bytes[i].is_ascii_whitespace()
                                    && self.bytes[i] != b'>'
                                {
                                    i += 1;
                                }
                                Some(self.src[value_start..i].to_string())
                            }
                        }
                    } else {
                        None
                    };
                    // First occurrence of a key wins.
                    if !key.is_empty() && !attrs.iter().any(|(k, _)| k == &key) {
                        attrs.push((key, value));
                    }
                }
            }
        };

        self.flush_text(tag_open);
        let parent = self.parent();
        let element = self.doc.push_node(
            parent,
            NodeData::Element(ElementData {
                tag: tag.clone(),
                attrs,
                ref_num: None,
            }),
        );
        self.pos = close_pos + 1;
        self.text_start = self.pos;

        if RAWTEXT_ELEMENTS.contains(&tag.as_str()) {
            self.rawtext_content(element, &tag);
        } else if !is_void(&tag) {
            self.stack.push(element);
        }
    }

    /// Script/style content is raw text up to the matching closing tag.
    fn rawtext_content(&mut self, element: NodeId, tag: &str) {
        let hay = &self.src[self.pos..];
        let needle = format!("</{tag}");
        let mut search_from = 0;
        let content_end = loop {
            let Some(rel) = hay[search_from..].to_ascii_lowercase().find(&needle) else {
                break hay.len();
            };
            let at = search_from + rel;
            let after = hay.as_bytes().get(at + needle.len());
            match after {
                Some(b) if b.is_ascii_whitespace() || *b == b'>' || *b == b'/' => break at,
                _ => search_from = at + needle.len(),
            }
        };
        if content_end > 0 {
            let content = &hay[..content_end];
            self.doc.push_node(element, NodeData::Text(content.to_string()));
        }
        let abs = self.pos + content_end;
        let end = match self.find_byte(abs, b'>') {
            Some(gt) => gt + 1,
            None => self.bytes.len(),
        };
        self.pos = end;
        self.text_start = end;
    }
}
