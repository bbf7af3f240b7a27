use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{validate_messages, ChatClient, ChatMessage, ChatResponse, LlmError, TokenUsage};

/// One scripted reply: either bare text or text with simulated usage and latency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptReply {
    Text(String),
    Detailed {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        usage: Option<TokenUsage>,
        #[serde(default, skip_serializing_if = "is_zero")]
        delay_ms: u64,
    },
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl ScriptReply {
    fn text(&self) -> &str {
        match self {
            ScriptReply::Text(t) | ScriptReply::Detailed { text: t, .. } => t,
        }
    }
}

/// Script file: a bare array of replies, or an object with `replies` and an
/// optional `cycle` flag that restarts the script instead of running dry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptFile {
    Replies(Vec<ScriptReply>),
    Full {
        replies: Vec<ScriptReply>,
        #[serde(default)]
        cycle: bool,
    },
}

/// Replays replies in order, one per `chat` call, including calls made for
/// history summarization.
#[derive(Debug, Clone)]
pub struct ScriptedClient {
    replies: Vec<ScriptReply>,
    cycle: bool,
    served: usize,
}

impl ScriptedClient {
    pub fn new(replies: Vec<ScriptReply>) -> Self {
        Self { replies, cycle: false, served: 0 }
    }

    pub fn from_texts<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(texts.into_iter().map(|t| ScriptReply::Text(t.into())).collect())
    }

    pub fn cycling(mut self, cycle: bool) -> Self {
        self.cycle = cycle;
        self
    }

    pub fn from_json(json: &str) -> Result<Self, LlmError> {
        let file: ScriptFile = serde_json::from_str(json).map_err(|e| LlmError::Script(e.to_string()))?;
        let (replies, cycle) = match file {
            ScriptFile::Replies(r) => (r, false),
            ScriptFile::Full { replies, cycle } => (replies, cycle),
        };
        if cycle && replies.is_empty() {
            return Err(LlmError::Script("a cycling script needs at least one reply".into()));
        }
        Ok(Self::new(replies).cycling(cycle))
    }

    pub fn from_path(path: &Path) -> Result<Self, LlmError> {
        let json = std::fs::read_to_string(path).map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn served(&self) -> usize {
        self.served
    }

    pub fn remaining(&self) -> usize {
        if self.cycle {
            usize::MAX
        } else {
            self.replies.len().saturating_sub(self.served)
        }
    }
}

impl ChatClient for ScriptedClient {
    fn chat(&mut self, messages: &[ChatMessage]) -> Result<ChatResponse, LlmError> {
        validate_messages(messages)?;
        let index = if self.cycle && !self.replies.is_empty() { self.served % self.replies.len() } else { self.served };
        let reply = self.replies.get(index).ok_or(LlmError::ScriptExhausted { served: self.served })?;
        self.served += 1;
        let usage = match reply {
            ScriptReply::Detailed { usage, delay_ms, .. } => {
                if *delay_ms > 0 {
                    thread::sleep(Duration::from_millis(*delay_ms));
                }
                *usage
            }
            ScriptReply::Text(_) => None,
        };
        Ok(ChatResponse { text: reply.text().to_owned(), usage })
    }
}
