use crate::report::BugReport;
use crate::ui::{render_ui_prompt, GroupedUiState};

/// First agent message: app name, the report verbatim, then the starting screen.
pub fn build_initial_prompt(report: &BugReport, ui: &GroupedUiState) -> String {
    let mut out = format!(
        "App name: {}\n\nBug report title: {}\n\nBug report body:\n{}\n",
        report.app_name, report.title, report.body
    );
    if !report.comments.is_empty() {
        out.push_str("\nComments:\n");
        for (i, c) in report.comments.iter().enumerate() {
            out.push_str(&format!("Comment {}:\n{c}\n", i + 1));
        }
    }
    out.push_str("\nInitial UI:\n");
    out.push_str(&render_ui_prompt(ui));
    out
}

/// Agent message sent after an iteration: feedback, then the current screen.
pub fn build_iteration_prompt(feedback: &str, ui: &GroupedUiState) -> String {
    format!("{feedback}\n\nCurrent UI:\n{}", render_ui_prompt(ui))
}
