use serde::{Deserialize, Serialize};

use crate::action::{render_sequence, Action};
use crate::device::Transient;

use super::repetition::RepetitionReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum ActionStatus {
    Executed,
    Failed(String),
    /// Not attempted because an earlier action in the batch failed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    pub action: Action,
    #[serde(flatten)]
    pub status: ActionStatus,
}

/// Everything the agent reports back after running one model reply.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Feedback {
    pub parse_error: Option<String>,
    pub actions: Vec<ActionReport>,
    pub repetition: Option<RepetitionReport>,
    pub transients: Vec<Transient>,
    pub crash_log: Option<String>,
    pub page_changed: bool,
    pub note: Option<String>,
}

pub fn make_feedback(fb: &Feedback) -> String {
    let mut lines = Vec::new();
    if let Some(err) = &fb.parse_error {
        lines.push(format!(
            "Your last reply could not be read as an action list ({err}). Nothing was executed. \
             Reply with exactly one list, for example [['click', 'OK']]."
        ));
    }
    if !fb.actions.is_empty() {
        lines.push("Results:".to_owned());
        for (i, r) in fb.actions.iter().enumerate() {
            let status = match &r.status {
                ActionStatus::Executed => "done".to_owned(),
                ActionStatus::Failed(reason) => format!("failed, {reason}"),
                ActionStatus::Skipped => "skipped because an earlier action failed".to_owned(),
            };
            lines.push(format!("{}. {}: {status}", i + 1, r.action));
        }
    }
    if let Some(rep) = &fb.repetition {
        lines.push(format!(
            "Warning: the sequence {} has now run twice in a row. Repeating it again is unlikely to help.",
            render_sequence(&rep.repeated)
        ));
    }
    if !fb.transients.is_empty() {
        lines.push("Shown briefly while the actions ran:".to_owned());
        for t in &fb.transients {
            lines.push(format!("- \"{}\"", t.text));
        }
    }
    if let Some(log) = &fb.crash_log {
        lines.push(format!("The app crashed. Crash log:\n{log}"));
    }
    if fb.parse_error.is_none() && !fb.actions.is_empty() {
        lines.push(if fb.page_changed { "The page changed." } else { "The page did not change." }.to_owned());
    }
    if let Some(note) = &fb.note {
        lines.push(note.clone());
    }
    lines.join("\n")
}
