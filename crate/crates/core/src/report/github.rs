use std::time::Duration;

use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde::Deserialize;
use thiserror::Error;

use super::BugReport;

pub const DEFAULT_API_BASE: &str = "https://api.github.com";
const PER_PAGE: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("issue not found")]
    NotFound,
    #[error("rate limited; resets at {}", reset.map_or("an unknown time".to_string(), |r| format!("unix time {r}")))]
    RateLimited { reset: Option<u64> },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unexpected status {status}: {body}")]
    Http { status: u16, body: String },
    #[error("could not decode response: {0}")]
    Decode(String),
}

#[derive(Deserialize)]
struct IssueJson {
    title: String,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    html_url: Option<String>,
}

#[derive(Deserialize)]
struct CommentJson {
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    created_at: Option<String>,
}

/// Issue fetcher with a configurable API base so tests can point it at a stub.
#[derive(Debug, Clone)]
pub struct IssueFetcher {
    base_url: String,
    token: Option<String>,
    client: Client,
}

impl IssueFetcher {
    pub fn new(base_url: impl Into<String>, token: Option<String>) -> Result<Self, FetchError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("repro/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| FetchError::Transport(e.to_string()))?;
        Ok(Self { base_url: base_url.into().trim_end_matches('/').to_owned(), token, client })
    }

    fn get(&self, path: &str) -> Result<Response, FetchError> {
        let mut req =
            self.client.get(format!("{}{path}", self.base_url)).header("Accept", "application/vnd.github+json");
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| FetchError::Transport(e.to_string()))?;
        check_status(resp)
    }

    /// Fetches an issue and every comment, oldest first.
    pub fn fetch(&self, owner: &str, repo: &str, number: u64) -> Result<BugReport, FetchError> {
        let issue: IssueJson = self
            .get(&format!("/repos/{owner}/{repo}/issues/{number}"))?
            .json()
            .map_err(|e| FetchError::Decode(e.to_string()))?;

        let mut comments: Vec<CommentJson> = Vec::new();
        for page in 1.. {
            let batch: Vec<CommentJson> = self
                .get(&format!("/repos/{owner}/{repo}/issues/{number}/comments?per_page={PER_PAGE}&page={page}"))?
                .json()
                .map_err(|e| FetchError::Decode(e.to_string()))?;
            let done = batch.len() < PER_PAGE;
            comments.extend(batch);
            if done {
                break;
            }
        }
        // ISO-8601 timestamps order lexically; the sort is stable for equal or missing ones.
        comments.sort_by(|a, b| a.created_at.cmp(&b.created_at));

        Ok(BugReport {
            app_name: repo.to_owned(),
            title: issue.title,
            body: issue.body.unwrap_or_default(),
            comments: comments.into_iter().map(|c| c.body.unwrap_or_default()).collect(),
            source_url: Some(
                issue.html_url.unwrap_or_else(|| format!("https://github.com/{owner}/{repo}/issues/{number}")),
            ),
        })
    }
}

fn check_status(resp: Response) -> Result<Response, FetchError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    if status == StatusCode::NOT_FOUND {
        return Err(FetchError::NotFound);
    }
    let header = |name: &str| resp.headers().get(name).and_then(|v| v.to_str().ok()).map(str::to_owned);
    let exhausted = header("x-ratelimit-remaining").as_deref() == Some("0");
    if status == StatusCode::TOO_MANY_REQUESTS || (status == StatusCode::FORBIDDEN && exhausted) {
        let reset = header("x-ratelimit-reset").and_then(|v| v.trim().parse().ok());
        return Err(FetchError::RateLimited { reset });
    }
    let body = resp.text().unwrap_or_default();
    Err(FetchError::Http { status: status.as_u16(), body })
}

/// Fetches from the public API.
pub fn fetch_issue(owner: &str, repo: &str, number: u64, auth: Option<String>) -> Result<BugReport, FetchError> {
    IssueFetcher::new(DEFAULT_API_BASE, auth)?.fetch(owner, repo, number)
}
