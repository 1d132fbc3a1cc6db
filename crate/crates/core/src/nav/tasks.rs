//! Built-in navigation tasks. Each is a seeded page generator plus a
//! success predicate; pages are small forms in the style of synthetic
//! web benchmarks.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::Action;
use crate::html::{parse_html, HtmlDocument};

use super::{ElementPredicate, EnvState, GeneratedPage, NavError, TaskSpec};

const BUTTON_LABELS: &[&str] = &[
    "OK", "Cancel", "Apply", "Next", "Previous", "Close", "Help", "Retry", "Save", "Delete",
];

const CHECKBOX_WORDS: &[&str] = &[
    "apple", "banana", "cherry", "grape", "lemon", "mango", "olive", "peach",
];

const FIELD_WORDS: &[&str] = &[
    "sunrise", "harbor", "meadow", "lantern", "pebble", "willow", "ember", "quartz", "violet",
    "canyon", "drift", "maple", "onyx", "ripple", "summit", "tundra",
];

const USERNAMES: &[&str] = &[
    "alice", "bruno", "carol", "dmitri", "elena", "farid", "greta", "hiro",
];

const PASSWORDS: &[&str] = &[
    "s3cret", "hunter9", "letmein", "flamingo", "bluemoon", "dragonfruit", "vortex77", "peanut",
];

fn id_is(id: &'static str) -> ElementPredicate {
    Arc::new(move |doc: &HtmlDocument, node| doc.attr(node, "id") == Some(id))
}

fn any_button() -> ElementPredicate {
    Arc::new(|doc: &HtmlDocument, node| doc.tag(node) == Some("button"))
}

fn last_clicked_button_text(state: &EnvState) -> Option<String> {
    match state.action_history.last() {
        Some(Action::Click { ref_num }) => state
            .doc
            .element_by_ref(*ref_num)
            .filter(|&n| state.doc.tag(n) == Some("button"))
            .map(|n| state.doc.text_content(n).trim().to_string()),
        _ => None,
    }
}

fn input_value(state: &EnvState, id: &str) -> Option<String> {
    state
        .doc
        .find_by_attr("id", id)
        .first()
        .and_then(|&n| state.doc.attr(n, "value"))
        .map(str::to_string)
}

fn quote_list(words: &[String]) -> String {
    words
        .iter()
        .map(|w| format!("\"{w}\""))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Several labelled buttons; click the named one.
fn click_button() -> Arc<TaskSpec> {
    Arc::new(TaskSpec {
        name: "click-button".into(),
        max_steps: 5,
        generate: Arc::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let count = rng.gen_range(3..=5);
            let mut labels: Vec<&str> = BUTTON_LABELS.to_vec();
            labels.shuffle(&mut rng);
            labels.truncate(count);
            let target = labels[rng.gen_range(0..count)].to_string();
            let mut html = String::from("<div class=\"buttons\">");
            for (i, label) in labels.iter().enumerate() {
                html.push_str(&format!("<button id=\"btn-{i}\">{label}</button>"));
            }
            html.push_str("</div>");
            let wanted = target.clone();
            GeneratedPage {
                doc: parse_html(&html),
                instruction: format!("Click the \"{target}\" button."),
                success: Arc::new(move |state| {
                    last_clicked_button_text(state).as_deref() == Some(wanted.as_str())
                }),
            }
        }),
        transitions: Vec::new(),
        terminal_trigger: Some(any_button()),
    })
}

/// Checkbox rows plus a submit button; check exactly the named subset.
fn click_checkboxes() -> Arc<TaskSpec> {
    Arc::new(TaskSpec {
        name: "click-checkboxes".into(),
        max_steps: 10,
        generate: Arc::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let count = rng.gen_range(4..=6);
            let mut words: Vec<&str> = CHECKBOX_WORDS.to_vec();
            words.shuffle(&mut rng);
            words.truncate(count);
            let mut picks: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            picks.shuffle(&mut rng);
            picks.truncate(rng.gen_range(0..=3));
            let mut html = String::from("<div id=\"boxes\">");
            for word in &words {
                html.push_str(&format!(
                    "<div class=\"row\"><input type=\"checkbox\" id=\"cb-{word}\"><span>{word}</span></div>"
                ));
            }
            html.push_str("<button id=\"submit\">Submit</button></div>");
            let instruction = if picks.is_empty() {
                "Leave every box unchecked and press submit.".to_string()
            } else {
                format!("Check the boxes for {} and press submit.", quote_list(&picks))
            };
            let required: BTreeSet<String> = picks.into_iter().collect();
            GeneratedPage {
                doc: parse_html(&html),
                instruction,
                success: Arc::new(move |state| {
                    if !state.last_click_was("submit") {
                        return false;
                    }
                    let checked: BTreeSet<String> = state
                        .doc
                        .find_by_attr("type", "checkbox")
                        .into_iter()
                        .filter(|&n| state.doc.has_attr(n, "checked"))
                        .filter_map(|n| {
                            state
                                .doc
                                .attr(n, "id")
                                .and_then(|id| id.strip_prefix("cb-"))
                                .map(str::to_string)
                        })
                        .collect();
                    checked == required
                }),
            }
        }),
        transitions: Vec::new(),
        terminal_trigger: Some(id_is("submit")),
    })
}

/// One text field; type the named word and submit.
fn enter_text() -> Arc<TaskSpec> {
    Arc::new(TaskSpec {
        name: "enter-text".into(),
        max_steps: 5,
        generate: Arc::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let word = FIELD_WORDS[rng.gen_range(0..FIELD_WORDS.len())].to_string();
            let html = "<div id=\"form\"><input type=\"text\" id=\"entry\">\
                        <button id=\"submit\">Submit</button></div>";
            let wanted = word.clone();
            GeneratedPage {
                doc: parse_html(html),
                instruction: format!("Enter \"{word}\" into the text field and press submit."),
                success: Arc::new(move |state| {
                    state.last_click_was("submit")
                        && input_value(state, "entry").as_deref() == Some(wanted.as_str())
                }),
            }
        }),
        transitions: Vec::new(),
        terminal_trigger: Some(id_is("submit")),
    })
}

fn login_rows(username_first: bool) -> String {
    let user = "<div class=\"row\"><label for=\"username\">Username</label>\
                <input type=\"text\" id=\"username\"></div>";
    let pass = "<div class=\"row\"><label for=\"password\">Password</label>\
                <input type=\"password\" id=\"password\"></div>";
    if username_first {
        format!("{user}{pass}")
    } else {
        format!("{pass}{user}")
    }
}

fn login_success(username: String, password: String) -> super::StatePredicate {
    Arc::new(move |state| {
        state.last_click_was("login")
            && input_value(state, "username").as_deref() == Some(username.as_str())
            && input_value(state, "password").as_deref() == Some(password.as_str())
    })
}

fn login_instruction(username: &str, password: &str) -> String {
    format!("Enter the username \"{username}\" and the password \"{password}\" and press login.")
}

/// Fixed-layout login form.
fn login_user() -> Arc<TaskSpec> {
    Arc::new(TaskSpec {
        name: "login-user".into(),
        max_steps: 6,
        generate: Arc::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let username = USERNAMES[rng.gen_range(0..USERNAMES.len())].to_string();
            let password = PASSWORDS[rng.gen_range(0..PASSWORDS.len())].to_string();
            let html = format!(
                "<div id=\"login-form\">{}<button id=\"login\">Login</button></div>",
                login_rows(true)
            );
            GeneratedPage {
                doc: parse_html(&html),
                instruction: login_instruction(&username, &password),
                success: login_success(username, password),
            }
        }),
        transitions: Vec::new(),
        terminal_trigger: Some(id_is("login")),
    })
}

/// Login form whose row order varies by seed and which carries a decoy
/// field, so the layout cannot be memorized.
fn multi_layouts() -> Arc<TaskSpec> {
    Arc::new(TaskSpec {
        name: "multi-layouts".into(),
        max_steps: 8,
        generate: Arc::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let username = USERNAMES[rng.gen_range(0..USERNAMES.len())].to_string();
            let password = PASSWORDS[rng.gen_range(0..PASSWORDS.len())].to_string();
            let mut rows = vec![
                "<div class=\"row\"><label for=\"username\">Username</label>\
                 <input type=\"text\" id=\"username\"></div>"
                    .to_string(),
                "<div class=\"row\"><label for=\"password\">Password</label>\
                 <input type=\"password\" id=\"password\"></div>"
                    .to_string(),
                "<div class=\"row\"><label for=\"nickname\">Nickname</label>\
                 <input type=\"text\" id=\"nickname\"></div>"
                    .to_string(),
            ];
            rows.shuffle(&mut rng);
            let html = format!(
                "<div id=\"login-form\">{}<button id=\"login\">Login</button></div>",
                rows.concat()
            );
            GeneratedPage {
                doc: parse_html(&html),
                instruction: login_instruction(&username, &password),
                success: login_success(username, password),
            }
        }),
        transitions: Vec::new(),
        terminal_trigger: Some(id_is("login")),
    })
}

pub fn task_registry() -> Vec<Arc<TaskSpec>> {
    vec![
        click_button(),
        click_checkboxes(),
        enter_text(),
        login_user(),
        multi_layouts(),
    ]
}

pub fn find_task(name: &str) -> Result<Arc<TaskSpec>, NavError> {
    task_registry()
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| NavError::UnknownTask(name.to_string()))
}
