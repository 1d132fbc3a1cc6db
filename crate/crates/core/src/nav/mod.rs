//! Headless simulated websites for navigation episodes.
//!
//! A task generates a seeded page, an instruction, and a success predicate.
//! Click and type actions mutate the page; clicking a declared terminal
//! trigger ends the episode. Everything is deterministic given (task, seed,
//! action sequence), so episodes can be replayed and diffed.

mod policies;
mod tasks;

pub use policies::{split_navigation_input, OraclePolicy};
pub use tasks::{find_task, task_registry};

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{
    encode_navigation_parts, parse_action, Action, NavigationStep,
};
use crate::html::{serialize_with, HtmlDocument, NodeId, SerializeOptions};
use crate::model::{ModelError, ModelRequest, TextModel};

#[derive(Debug, Error)]
pub enum NavError {
    #[error("unknown task: {0}")]
    UnknownTask(String),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type StatePredicate = Arc<dyn Fn(&EnvState) -> bool + Send + Sync>;
pub type ElementPredicate = Arc<dyn Fn(&HtmlDocument, NodeId) -> bool + Send + Sync>;
pub type PageBuilder = Arc<dyn Fn(u64) -> HtmlDocument + Send + Sync>;

/// Page swap fired by clicking a matching element.
pub struct Transition {
    pub trigger: ElementPredicate,
    pub next_page: PageBuilder,
}

pub struct GeneratedPage {
    pub doc: HtmlDocument,
    pub instruction: String,
    pub success: StatePredicate,
}

pub struct TaskSpec {
    pub name: String,
    pub max_steps: u32,
    pub generate: Arc<dyn Fn(u64) -> GeneratedPage + Send + Sync>,
    pub transitions: Vec<Transition>,
    /// Clicking a matching element ends the episode: Success if the
    /// success predicate holds afterwards, otherwise Failure.
    pub terminal_trigger: Option<ElementPredicate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Running,
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Clone)]
pub struct EnvState {
    pub doc: HtmlDocument,
    pub instruction: String,
    pub action_history: Vec<Action>,
    pub step_count: u32,
    pub terminal: Terminal,
    seed: u64,
    success: StatePredicate,
    task: Arc<TaskSpec>,
}

impl EnvState {
    pub fn task_name(&self) -> &str {
        &self.task.name
    }

    pub fn max_steps(&self) -> u32 {
        self.task.max_steps
    }

    /// The page as the model sees it: refs serialized into the tags.
    pub fn html_with_refs(&self) -> String {
        serialize_with(
            &self.doc,
            &SerializeOptions {
                include_refs: true,
                include_closing: true,
            },
        )
    }

    /// True when the most recent action clicked the element whose `id`
    /// attribute is `id`.
    pub fn last_click_was(&self, id: &str) -> bool {
        match self.action_history.last() {
            Some(Action::Click { ref_num }) => self
                .doc
                .element_by_ref(*ref_num)
                .is_some_and(|node| self.doc.attr(node, "id") == Some(id)),
            _ => false,
        }
    }

    /// An unparseable policy output consumes a step without touching the
    /// page or the history.
    pub fn note_invalid_action(&mut self) {
        if self.terminal != Terminal::Running {
            return;
        }
        self.step_count += 1;
        if self.step_count >= self.task.max_steps {
            self.terminal = Terminal::Failure;
        }
    }
}

/// Fresh page for (task, seed): refs assigned, empty history, Running.
pub fn reset(task: &Arc<TaskSpec>, seed: u64) -> EnvState {
    let page = (task.generate)(seed);
    let mut doc = page.doc;
    doc.assign_refs();
    EnvState {
        doc,
        instruction: page.instruction,
        action_history: Vec::new(),
        step_count: 0,
        terminal: Terminal::Running,
        seed,
        success: page.success,
        task: task.clone(),
    }
}

fn is_checkbox(doc: &HtmlDocument, id: NodeId) -> bool {
    doc.tag(id) == Some("input") && doc.attr(id, "type") == Some("checkbox")
}

fn accepts_text(doc: &HtmlDocument, id: NodeId) -> bool {
    match doc.tag(id) {
        Some("textarea") => true,
        Some("input") => !is_checkbox(doc, id),
        _ => false,
    }
}

/// Apply one action. Clicks flip checkboxes, fire transitions, or hit a
/// terminal trigger; types set an input's `value`. Anything else (unknown
/// ref, non-interactable element) consumes the step unchanged. The action
/// always lands in the history; outcome checks run after it.
pub fn step(state: &mut EnvState, action: &Action) -> Result<(), NavError> {
    if state.terminal != Terminal::Running {
        return Err(NavError::EpisodeFinished);
    }
    state.step_count += 1;
    let task = state.task.clone();
    let mut terminal_click = false;
    match action {
        Action::Click { ref_num } => {
            if let Some(node) = state.doc.element_by_ref(*ref_num) {
                if is_checkbox(&state.doc, node) {
                    if state.doc.has_attr(node, "checked") {
                        let _ = state.doc.remove_attr(node, "checked");
                    } else {
                        let _ = state.doc.set_attr(node, "checked", None);
                    }
                } else if let Some(transition) = task
                    .transitions
                    .iter()
                    .find(|t| (t.trigger)(&state.doc, node))
                {
                    state.doc = (transition.next_page)(state.seed);
                    state.doc.assign_refs();
                } else if let Some(trigger) = &task.terminal_trigger {
                    if trigger(&state.doc, node) {
                        terminal_click = true;
                    }
                }
            }
        }
        Action::Type { ref_num, text } => {
            if let Some(node) = state.doc.element_by_ref(*ref_num) {
                if accepts_text(&state.doc, node) {
                    let _ = state.doc.set_attr(node, "value", Some(text));
                }
            }
        }
    }
    state.action_history.push(action.clone());

    let success = state.success.clone();
    if success(state) {
        state.terminal = Terminal::Success;
    } else if terminal_click || state.step_count >= task.max_steps {
        state.terminal = Terminal::Failure;
    }
    Ok(())
}

/// One finished episode, as logged to JSONL.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub task: String,
    pub seed: u64,
    pub steps: Vec<NavigationStep>,
    pub outcome: Outcome,
    /// Unparseable policy outputs by error kind; those consumed steps
    /// never appear in `steps`.
    pub failure_counts: HashMap<String, u64>,
}

/// Drive one episode with a text policy. Valid actions become recorded
/// steps; unparseable outputs burn a step and are tallied by error kind.
/// Transport errors from the policy propagate.
pub fn run_episode(
    task: &Arc<TaskSpec>,
    seed: u64,
    policy: &dyn TextModel,
) -> Result<EpisodeRecord, NavError> {
    let mut state = reset(task, seed);
    let mut steps = Vec::new();
    let mut failure_counts: HashMap<String, u64> = HashMap::new();
    while state.terminal == Terminal::Running {
        let html = state.html_with_refs();
        let input = encode_navigation_parts(&state.action_history, &state.instruction, &html);
        let reply = policy.generate(&ModelRequest::greedy(input))?;
        match parse_action(&reply.text) {
            Ok(action) => {
                steps.push(NavigationStep {
                    action_history: state.action_history.clone(),
                    instruction: state.instruction.clone(),
                    html,
                    action: action.clone(),
                });
                step(&mut state, &action)?;
            }
            Err(e) => {
                *failure_counts.entry(e.kind().to_string()).or_default() += 1;
                state.note_invalid_action();
            }
        }
    }
    Ok(EpisodeRecord {
        task: state.task_name().to_string(),
        seed,
        steps,
        outcome: match state.terminal {
            Terminal::Success => Outcome::Success,
            _ => Outcome::Failure,
        },
        failure_counts,
    })
}

/// Flatten episodes into labelled steps. With `include_history` off, the
/// history field is emptied (the history ablation).
pub fn demos_to_training_tuples(
    episodes: &[EpisodeRecord],
    include_history: bool,
) -> Vec<NavigationStep> {
    episodes
        .iter()
        .flat_map(|e| e.steps.iter().cloned())
        .map(|mut s| {
            if !include_history {
                s.action_history.clear();
            }
            s
        })
        .collect()
}

pub fn write_episodes(path: &Path, episodes: &[EpisodeRecord]) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for episode in episodes {
        serde_json::to_writer(&mut out, episode)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_episodes(path: &Path) -> std::io::Result<Vec<EpisodeRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
        .collect()
}
