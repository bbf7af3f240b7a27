//! Chat interface consumed by the agent, with a scripted client for
//! deterministic runs and an HTTP chat-completions client for live ones.

mod http;
mod scripted;

pub use http::{HttpChatClient, HttpConfig, RetryPolicy, API_KEY_ENV, FALLBACK_API_KEY_ENV};
pub use scripted::{ScriptFile, ScriptReply, ScriptedClient};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u64,
    pub completion: u64,
}

impl TokenUsage {
    pub fn total(&self) -> u64 {
        self.prompt + self.completion
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("scripted model has no reply left (served {served})")]
    ScriptExhausted { served: usize },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider returned status {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("invalid script: {0}")]
    Script(String),
}

pub trait ChatClient {
    fn chat(&mut self, messages: &[ChatMessage]) -> Result<ChatResponse, LlmError>;
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn chat(&mut self, messages: &[ChatMessage]) -> Result<ChatResponse, LlmError> {
        (**self).chat(messages)
    }
}

/// Checks the request shape every client requires: non-empty, opening with the
/// system instructions, no blank system or user content.
pub fn validate_messages(messages: &[ChatMessage]) -> Result<(), LlmError> {
    let first = messages.first().ok_or_else(|| LlmError::InvalidRequest("no messages".into()))?;
    if first.role != Role::System {
        return Err(LlmError::InvalidRequest("first message must be the system instructions".into()));
    }
    if let Some(i) = messages.iter().position(|m| m.role != Role::Assistant && m.content.trim().is_empty()) {
        return Err(LlmError::InvalidRequest(format!("message {i} is empty")));
    }
    Ok(())
}
