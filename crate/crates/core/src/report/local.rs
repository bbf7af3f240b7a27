//! Local report file:
//!
//! ```text
//! title: Crash when deleting several items
//! app-name: Multiselect Demo
//! source-url: https://example.org/issues/1
//! ---
//! body text, verbatim
//! ---comment---
//! first comment
//! ---comment---
//! second comment
//! ```

use std::path::Path;

use thiserror::Error;

use super::BugReport;

pub const HEADER_END: &str = "---";
pub const COMMENT_DELIMITER: &str = "---comment---";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("report file not found: {0}")]
    FileMissing(String),
    #[error("report format error: {0}")]
    FormatError(String),
}

pub fn load_report(path: &Path) -> Result<BugReport, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => LoadError::FileMissing(path.display().to_string()),
        _ => LoadError::FormatError(format!("{}: {e}", path.display())),
    })?;
    parse_report(&text)
}

pub fn parse_report(text: &str) -> Result<BugReport, LoadError> {
    if text.trim().is_empty() {
        return Err(LoadError::FormatError("empty report".into()));
    }
    let (header, content) = split_header(text)
        .ok_or_else(|| LoadError::FormatError(format!("missing '{HEADER_END}' line after the header")))?;

    let mut title = None;
    let mut app_name = String::new();
    let mut source_url = None;
    for (n, line) in header.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| LoadError::FormatError(format!("header line {}: expected 'key: value'", n + 1)))?;
        let value = value.trim().to_owned();
        match key.trim().to_ascii_lowercase().as_str() {
            "title" => title = Some(value),
            "app-name" | "app_name" | "app" => app_name = value,
            "source-url" | "source_url" | "url" => source_url = Some(value).filter(|v| !v.is_empty()),
            other => return Err(LoadError::FormatError(format!("unknown header key '{other}'"))),
        }
    }
    let title = title.filter(|t| !t.is_empty()).ok_or_else(|| LoadError::FormatError("missing title".into()))?;

    let content = content.strip_suffix('\n').unwrap_or(content);
    let mut sections = vec![Vec::new()];
    for line in content.split('\n') {
        if line.trim_end_matches('\r') == COMMENT_DELIMITER {
            sections.push(Vec::new());
        } else {
            sections.last_mut().expect("non-empty").push(line);
        }
    }
    let mut sections = sections.into_iter().map(|lines| lines.join("\n"));
    let body = sections.next().unwrap_or_default();
    let comments = sections.collect();

    Ok(BugReport { app_name, title, body, comments, source_url })
}

/// Splits at the first line that is exactly the header terminator.
fn split_header(text: &str) -> Option<(&str, &str)> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim_end_matches(['\n', '\r']) == HEADER_END {
            return Some((&text[..offset], &text[offset + line.len()..]));
        }
        offset += line.len();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal() {
        let r = parse_report("title: T\n---\nBody line\n").unwrap();
        assert_eq!(r.title, "T");
        assert_eq!(r.body, "Body line");
        assert!(r.comments.is_empty());
        assert_eq!(r.app_name, "");
        assert_eq!(r.source_url, None);
    }

    #[test]
    fn comments_in_order_and_body_verbatim() {
        let text = "title: T\napp-name: A\n---\n  indented\n\n---\nstill body\n---comment---\nc1\n---comment---\nc2\nmore\n---comment---\n\n";
        let r = parse_report(text).unwrap();
        assert_eq!(r.body, "  indented\n\n---\nstill body");
        assert_eq!(r.comments, vec!["c1".to_string(), "c2\nmore".into(), "".into()]);
        assert_eq!(r.app_name, "A");
    }

    #[test]
    fn format_errors() {
        for bad in [
            "",
            "  \n",
            "title: T\nbody without separator",
            "---\nno title",
            "title T\n---\n",
            "color: red\ntitle: x\n---\n",
        ] {
            assert!(matches!(parse_report(bad), Err(LoadError::FormatError(_))), "{bad:?}");
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_report(Path::new("/definitely/not/here.txt")), Err(LoadError::FileMissing(_))));
    }

    #[test]
    fn file_format_round_trip() {
        let r = BugReport {
            app_name: "Transistor".into(),
            title: "Crash on fast clicks".into(),
            body: "Steps:\n1. Add URL with the stream\n2. Do multiple fast clicks\n".into(),
            comments: vec!["Stream: http://example.org/live.mp3".into(), "same here".into()],
            source_url: Some("https://github.com/o/r/issues/57".into()),
        };
        assert_eq!(parse_report(&r.to_file_format()).unwrap(), r);
    }
}
