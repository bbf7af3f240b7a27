//! Bug reports: the local hand-authored file format and issue-tracker fetching.
//!
//! Report text is never rewritten or mined for steps; the body and comments
//! reach the prompt exactly as written.

mod github;
mod local;

pub use github::{fetch_issue, FetchError, IssueFetcher, DEFAULT_API_BASE};
pub use local::{load_report, parse_report, LoadError, COMMENT_DELIMITER, HEADER_END};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugReport {
    pub app_name: String,
    pub title: String,
    /// Full body text, verbatim.
    pub body: String,
    /// Comments in chronological order.
    pub comments: Vec<String>,
    pub source_url: Option<String>,
}

impl BugReport {
    /// Renders the report in the local file format; `parse_report` reads it back.
    pub fn to_file_format(&self) -> String {
        let mut out = format!("title: {}\n", self.title);
        if !self.app_name.is_empty() {
            out.push_str(&format!("app-name: {}\n", self.app_name));
        }
        if let Some(url) = &self.source_url {
            out.push_str(&format!("source-url: {url}\n"));
        }
        out.push_str(HEADER_END);
        out.push('\n');
        out.push_str(&self.body);
        for c in &self.comments {
            out.push('\n');
            out.push_str(COMMENT_DELIMITER);
            out.push('\n');
            out.push_str(c);
        }
        out.push('\n');
        out
    }
}
