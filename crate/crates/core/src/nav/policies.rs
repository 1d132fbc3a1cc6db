//! Scripted policies for the built-in tasks. The oracle reads the same
//! text input a model would and replays the shortest solution; it exists
//! to pin the environment's ceiling at 100%.

use crate::codec::{encode_action, Action};
use crate::html::{parse_html, HtmlDocument};
use crate::model::{ModelError, ModelReply, ModelRequest, TextModel};

/// Split a navigation input into (history line, instruction, page HTML).
/// The history line is absent on the first step.
pub fn split_navigation_input(input: &str) -> (Option<&str>, &str, &str) {
    let (first, rest) = input.split_once('\n').unwrap_or((input, ""));
    if first.starts_with("{action: ") {
        let (instruction, html) = rest.split_once('\n').unwrap_or((rest, ""));
        (Some(first), instruction, html)
    } else {
        (None, first, rest)
    }
}

fn quoted_strings(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(start) = rest.find('"') {
        let after = &rest[start + 1..];
        match after.find('"') {
            Some(end) => {
                out.push(after[..end].to_string());
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

fn ref_by_id(doc: &HtmlDocument, id: &str) -> Option<u32> {
    doc.find_by_attr("id", id)
        .first()
        .and_then(|&n| doc.attr(n, "ref"))
        .and_then(|r| r.parse().ok())
}

fn button_ref_by_text(doc: &HtmlDocument, label: &str) -> Option<u32> {
    doc.elements()
        .into_iter()
        .find(|&n| doc.tag(n) == Some("button") && doc.text_content(n).trim() == label)
        .and_then(|n| doc.attr(n, "ref"))
        .and_then(|r| r.parse().ok())
}

pub struct OraclePolicy {
    task: String,
}

impl OraclePolicy {
    pub fn new(task: &str) -> Self {
        OraclePolicy {
            task: task.to_string(),
        }
    }

    fn plan(&self, instruction: &str, doc: &HtmlDocument) -> Vec<Action> {
        let quoted = quoted_strings(instruction);
        match self.task.as_str() {
            "click-button" => quoted
                .first()
                .and_then(|label| button_ref_by_text(doc, label))
                .map(|ref_num| vec![Action::Click { ref_num }])
                .unwrap_or_default(),
            "click-checkboxes" => {
                let mut plan: Vec<Action> = quoted
                    .iter()
                    .filter_map(|word| ref_by_id(doc, &format!("cb-{word}")))
                    .map(|ref_num| Action::Click { ref_num })
                    .collect();
                if let Some(ref_num) = ref_by_id(doc, "submit") {
                    plan.push(Action::Click { ref_num });
                }
                plan
            }
            "enter-text" => {
                let mut plan = Vec::new();
                if let (Some(word), Some(entry)) = (quoted.first(), ref_by_id(doc, "entry")) {
                    plan.push(Action::Type {
                        ref_num: entry,
                        text: word.clone(),
                    });
                }
                if let Some(ref_num) = ref_by_id(doc, "submit") {
                    plan.push(Action::Click { ref_num });
                }
                plan
            }
            "login-user" | "multi-layouts" => {
                let mut plan = Vec::new();
                if let (Some(user), Some(field)) = (quoted.first(), ref_by_id(doc, "username")) {
                    plan.push(Action::Type {
                        ref_num: field,
                        text: user.clone(),
                    });
                }
                if let (Some(pass), Some(field)) = (quoted.get(1), ref_by_id(doc, "password")) {
                    plan.push(Action::Type {
                        ref_num: field,
                        text: pass.clone(),
                    });
                }
                if let Some(ref_num) = ref_by_id(doc, "login") {
                    plan.push(Action::Click { ref_num });
                }
                plan
            }
            _ => Vec::new(),
        }
    }
}

impl TextModel for OraclePolicy {
    fn generate(&self, request: &ModelRequest) -> Result<ModelReply, ModelError> {
        let (history, instruction, html) = split_navigation_input(&request.input);
        let done = history.map_or(0, |line| line.matches("{action: ").count());
        let doc = parse_html(html);
        let plan = self.plan(instruction, &doc);
        // past the plan's end means the state diverged; repeat the last move
        let action = plan
            .get(done)
            .or_else(|| plan.last())
            .cloned()
            .unwrap_or(Action::Click { ref_num: 1 });
        Ok(ModelReply {
            text: encode_action(&action),
            truncated: false,
        })
    }
}
