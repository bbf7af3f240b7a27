use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::{validate_messages, ChatClient, ChatMessage, ChatResponse, LlmError, TokenUsage};

/// Environment variable holding the bearer token for live runs.
pub const API_KEY_ENV: &str = "REPRO_LLM_API_KEY";
/// Consulted when [`API_KEY_ENV`] is unset.
pub const FALLBACK_API_KEY_ENV: &str = "OPENAI_API_KEY";

/// Exponential backoff: `base * factor^attempt` before each retry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub base: Duration,
    pub factor: u32,
    pub max_retries: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { base: Duration::from_secs(1), factor: 2, max_retries: 3 }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        self.base * self.factor.saturating_pow(attempt)
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub api_key: Option<String>,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: "gpt-4".into(),
            temperature: 0.0,
            api_key: None,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(120),
        }
    }

    /// Reads the API key from the environment.
    pub fn with_env_key(mut self) -> Self {
        self.api_key =
            std::env::var(API_KEY_ENV).or_else(|_| std::env::var(FALLBACK_API_KEY_ENV)).ok().filter(|k| !k.is_empty());
        self
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// Chat-completions client. Safe to share behind a mutex; holds no
/// per-session state.
pub struct HttpChatClient {
    config: HttpConfig,
    client: Client,
}

enum Attempt {
    Done(Result<ChatResponse, LlmError>),
    Retry(LlmError),
}

impl HttpChatClient {
    pub fn new(config: HttpConfig) -> Result<Self, LlmError> {
        let client =
            Client::builder().timeout(config.timeout).build().map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn attempt(&self, messages: &[ChatMessage]) -> Attempt {
        let body = WireRequest { model: &self.config.model, messages, temperature: self.config.temperature };
        let mut request = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.config.api_key {
            request = request.bearer_auth(key);
        }
        let response = match request.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        let status = response.status();
        let text = match response.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        if !status.is_success() {
            let err = LlmError::Provider { status: status.as_u16(), body: text };
            return if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
                Attempt::Retry(err)
            } else {
                Attempt::Done(Err(err))
            };
        }
        Attempt::Done(decode(&text))
    }
}

fn decode(body: &str) -> Result<ChatResponse, LlmError> {
    let wire: WireResponse = serde_json::from_str(body)
        .map_err(|e| LlmError::Provider { status: 200, body: format!("undecodable body ({e}): {body}") })?;
    let text = wire
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| LlmError::Provider { status: 200, body: format!("no message content: {body}") })?;
    let usage = wire.usage.map(|u| TokenUsage { prompt: u.prompt_tokens, completion: u.completion_tokens });
    Ok(ChatResponse { text, usage })
}

impl ChatClient for HttpChatClient {
    fn chat(&mut self, messages: &[ChatMessage]) -> Result<ChatResponse, LlmError> {
        validate_messages(messages)?;
        let mut attempt = 0;
        loop {
            match self.attempt(messages) {
                Attempt::Done(result) => return result,
                Attempt::Retry(err) if attempt >= self.config.retry.max_retries => return Err(err),
                Attempt::Retry(_) => {
                    thread::sleep(self.config.retry.delay(attempt));
                    attempt += 1;
                }
            }
        }
    }
}
