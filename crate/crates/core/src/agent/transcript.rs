use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{render_action, Action};
use crate::llm::{ChatClient, ChatMessage, LlmError, TokenUsage};

use super::budget::TokenCounter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryRole {
    /// Instructions, always the first entry.
    System,
    /// Messages written by the agent: the initial prompt and feedback.
    Agent,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub role: EntryRole,
    pub text: String,
    pub tokens: u64,
}

/// Prompt history of one session.
///
/// Entry 0 holds the instructions and entry 1 the initial prompt with the bug
/// report; both survive every summarization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionTranscript {
    pub entries: Vec<TranscriptEntry>,
    pub executed_actions: Vec<Action>,
    pub summarization_count: u32,
    /// Provider-reported usage covering `entries[..n]`.
    reported: Option<(usize, u64)>,
}

impl SessionTranscript {
    pub fn new(instructions: String, initial_prompt: String, counter: &dyn TokenCounter) -> Self {
        let mut t = Self::default();
        t.push(EntryRole::System, instructions, counter);
        t.push(EntryRole::Agent, initial_prompt, counter);
        t
    }

    pub fn push(&mut self, role: EntryRole, text: String, counter: &dyn TokenCounter) {
        let tokens = counter.count(&text);
        self.entries.push(TranscriptEntry { role, text, tokens });
    }

    /// Appends a model reply; reported usage, when present, supersedes the
    /// approximate count of everything up to and including this reply.
    pub fn push_model(&mut self, text: String, usage: Option<TokenUsage>, counter: &dyn TokenCounter) {
        self.push(EntryRole::Model, text, counter);
        if let Some(u) = usage {
            self.reported = Some((self.entries.len(), u.total()));
        }
    }

    /// The token count `C` the budget is checked against.
    pub fn token_count(&self) -> u64 {
        let (from, base) = self.reported.unwrap_or((0, 0));
        base + self.entries[from.min(self.entries.len())..].iter().map(|e| e.tokens).sum::<u64>()
    }

    pub fn to_messages(&self) -> Vec<ChatMessage> {
        self.entries
            .iter()
            .map(|e| match e.role {
                EntryRole::System => ChatMessage::system(e.text.clone()),
                EntryRole::Agent => ChatMessage::user(e.text.clone()),
                EntryRole::Model => ChatMessage::assistant(e.text.clone()),
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error("model unavailable for summarization: {0}")]
    LlmUnavailable(#[from] LlmError),
    #[error("summarization did not shrink the history ({before} -> {after} tokens)")]
    NoReduction { before: u64, after: u64 },
}

const SUMMARY_REQUEST: &str = "Condense the exchange below into a short progress note for yourself. Keep the screens \
reached, the actions that worked or failed and why, any messages, toasts or crashes that were observed, and what \
still seems worth trying. Reply with the note only, without an action list.";

/// Replaces the middle of the history with a model-written summary.
///
/// The result keeps the instructions, the initial prompt, a summary entry that
/// also lists every executed action, and the latest agent message.
pub fn summarize_history(
    transcript: &SessionTranscript,
    llm: &mut dyn ChatClient,
    counter: &dyn TokenCounter,
) -> Result<SessionTranscript, SummarizeError> {
    let before = transcript.token_count();
    if transcript.entries.len() <= 3 {
        return Err(SummarizeError::NoReduction { before, after: before });
    }
    let mut history = String::new();
    for e in &transcript.entries[2..] {
        let who = match e.role {
            EntryRole::Model => "You",
            _ => "Me",
        };
        history.push_str(&format!("--- {who}:\n{}\n", e.text));
    }
    let request =
        vec![transcript.to_messages().swap_remove(0), ChatMessage::user(format!("{SUMMARY_REQUEST}\n\n{history}"))];
    let summary = llm.chat(&request)?.text;

    let actions = if transcript.executed_actions.is_empty() {
        "none".to_owned()
    } else {
        transcript
            .executed_actions
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{}. {}", i + 1, render_action(a)))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut out = SessionTranscript {
        entries: transcript.entries[..2].to_vec(),
        executed_actions: transcript.executed_actions.clone(),
        summarization_count: transcript.summarization_count + 1,
        reported: None,
    };
    out.push(
        EntryRole::Model,
        format!("Progress so far:\n{}\n\nActions executed so far:\n{actions}", summary.trim()),
        counter,
    );
    if let Some(last) = transcript.entries.last().filter(|e| e.role == EntryRole::Agent) {
        out.entries.push(last.clone());
    }
    let after = out.token_count();
    if after >= before {
        return Err(SummarizeError::NoReduction { before, after });
    }
    Ok(out)
}
