//! Declarative app description consumed by the simulator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::SimDevice;
use crate::action::ActionKind;
use crate::ui::parse_hierarchy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    /// Where the violated invariant lives, e.g. `transitions[3].to`.
    pub location: String,
    pub message: String,
}

impl SpecError {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self { location: location.into(), message: message.into() }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransientSpec {
    pub text: String,
    pub lifetime_ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoAdvance {
    pub after_ticks: u64,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpec {
    pub activity: String,
    #[serde(default)]
    pub start: bool,
    /// Inline hierarchy dump.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<String>,
    /// Hierarchy dump path, relative to the spec file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient_on_entry: Option<TransientSpec>,
    /// Leaves the state on its own after a number of ticks (loading dialogs and the like).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_advance: Option<AutoAdvance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Case-insensitive equality with any identifier of the resolved widget.
    #[default]
    Exact,
    /// Case-insensitive substring of any identifier.
    Substring,
    /// Whole-identifier regular expression.
    Regex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub id: String,
    pub from: String,
    pub action: ActionKind,
    /// Widget pattern for targeted actions, direction or orientation for the
    /// others. Absent means any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default)]
    pub r#match: MatchMode,
    /// Regular expression the `set_text` input must match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Fields that must hold accepted input in the current state.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requires: Vec<String>,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emit_transient: Option<TransientSpec>,
    /// Only available this long after entering `from`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quick_window_ms: Option<u64>,
}

/// Validation applied to `set_text` on a field of a given state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRule {
    /// Field identifier (text, content description or resource id).
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    /// Input must equal the accepted value of this other field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals_field: Option<String>,
    pub error_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BugKind {
    Crash,
    NonCrash,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BugTrigger {
    Transition(String),
    State(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugSpec {
    pub kind: BugKind,
    pub trigger: BugTrigger,
    pub symptom_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimAppSpec {
    pub app_name: String,
    #[serde(default = "default_package")]
    pub package: String,
    pub states: BTreeMap<String, StateSpec>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub text_fields: BTreeMap<String, Vec<FieldRule>>,
    pub bug: BugSpec,
}

fn default_package() -> String {
    "com.example.app".into()
}

impl SimAppSpec {
    pub fn from_json(json: &str) -> Result<Self, SpecError> {
        serde_json::from_str(json).map_err(|e| SpecError::new(format!("line {}", e.line()), e.to_string()))
    }

    /// Replaces every `hierarchy_file` reference with the file's contents.
    pub fn inline_hierarchies(&mut self, base: &Path) -> Result<(), SpecError> {
        for (id, state) in &mut self.states {
            if let Some(rel) = state.hierarchy_file.take() {
                if state.hierarchy.is_some() {
                    return Err(SpecError::new(
                        format!("states.{id}"),
                        "give either hierarchy or hierarchy_file, not both",
                    ));
                }
                let path = base.join(&rel);
                let xml = std::fs::read_to_string(&path).map_err(|e| {
                    SpecError::new(format!("states.{id}.hierarchy_file"), format!("{}: {e}", path.display()))
                })?;
                state.hierarchy = Some(xml);
            }
        }
        Ok(())
    }

    pub fn start_state(&self) -> Option<&str> {
        self.states.iter().find(|(_, s)| s.start).map(|(id, _)| id.as_str())
    }

    /// Checks every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), SpecError> {
        let starts: Vec<_> = self.states.iter().filter(|(_, s)| s.start).map(|(id, _)| id).collect();
        if starts.len() != 1 {
            return Err(SpecError::new("states", format!("exactly one start state required, found {}", starts.len())));
        }
        let state_exists = |id: &str, loc: String| -> Result<(), SpecError> {
            if self.states.contains_key(id) {
                Ok(())
            } else {
                Err(SpecError::new(loc, format!("unknown state '{id}'")))
            }
        };

        for (id, state) in &self.states {
            let xml = state.hierarchy.as_deref().ok_or_else(|| {
                SpecError::new(format!("states.{id}"), "missing hierarchy (or unresolved hierarchy_file)")
            })?;
            parse_hierarchy(xml).map_err(|e| SpecError::new(format!("states.{id}.hierarchy"), e.to_string()))?;
            if let Some(auto) = &state.auto_advance {
                state_exists(&auto.to, format!("states.{id}.auto_advance.to"))?;
            }
        }

        let mut ids = BTreeSet::new();
        for (i, t) in self.transitions.iter().enumerate() {
            let loc = |field: &str| format!("transitions[{i}].{field}");
            if !ids.insert(t.id.as_str()) {
                return Err(SpecError::new(loc("id"), format!("duplicate transition id '{}'", t.id)));
            }
            state_exists(&t.from, loc("from"))?;
            state_exists(&t.to, loc("to"))?;
            if t.action.is_termination() {
                return Err(SpecError::new(loc("action"), "termination actions cannot trigger transitions"));
            }
            if t.r#match == MatchMode::Regex {
                if let Some(p) = &t.target {
                    compile_anchored(p).map_err(|e| SpecError::new(loc("target"), e))?;
                }
            }
            if let Some(p) = &t.input {
                if t.action != ActionKind::SetText {
                    return Err(SpecError::new(loc("input"), "input constraints only apply to set_text"));
                }
                compile_anchored(p).map_err(|e| SpecError::new(loc("input"), e))?;
            }
        }

        for (state, rules) in &self.text_fields {
            state_exists(state, format!("text_fields.{state}"))?;
            for (i, rule) in rules.iter().enumerate() {
                if let Some(p) = &rule.pattern {
                    Regex::new(p)
                        .map_err(|e| SpecError::new(format!("text_fields.{state}[{i}].pattern"), e.to_string()))?;
                }
            }
        }

        match &self.bug.trigger {
            BugTrigger::Transition(id) if !ids.contains(id.as_str()) => {
                Err(SpecError::new("bug.trigger.transition", format!("unknown transition '{id}'")))
            }
            BugTrigger::State(id) => state_exists(id, "bug.trigger.state".into()),
            BugTrigger::Transition(_) => Ok(()),
        }
    }
}

pub(crate) fn compile_anchored(pattern: &str) -> Result<Regex, String> {
    Regex::new(&format!("^(?:{pattern})$")).map_err(|e| e.to_string())
}

/// Reads, resolves and validates a spec file and positions a simulator at its
/// start state.
pub fn load_sim(path: &Path) -> Result<SimDevice, SpecError> {
    let json = std::fs::read_to_string(path).map_err(|e| SpecError::new(path.display().to_string(), e.to_string()))?;
    let mut spec = SimAppSpec::from_json(&json)
        .map_err(|e| SpecError::new(format!("{} {}", path.display(), e.location), e.message))?;
    spec.inline_hierarchies(path.parent().unwrap_or(Path::new(".")))?;
    SimDevice::new(spec)
}
