//! The reproduction loop: prompt construction, feedback, repetition
//! detection, token accounting with history summarization, and the session
//! driver that ties a chat model to a device.

mod budget;
mod config;
mod feedback;
mod instructions;
mod prompt;
mod repetition;
mod session;
mod transcript;

pub use budget::{check_budget, ApproxCounter, BudgetDecision, TokenBudget, TokenCounter};
pub use config::{
    seconds, ConfigError, ConfigFile, SessionConfig, DEFAULT_MAX_SUMMARIZATIONS, DEFAULT_SETTLE_MS, DEFAULT_THRESHOLD,
    DEFAULT_TIME_LIMIT, DEFAULT_TOKEN_LIMIT,
};
pub use feedback::{make_feedback, ActionReport, ActionStatus, Feedback};
pub use instructions::build_instructions;
pub use prompt::{build_initial_prompt, build_iteration_prompt};
pub use repetition::{detect_repetition, RepetitionReport};
pub use session::{run_session, ReproductionResult, TraceOutcome, TraceRecord, Verdict};
pub use transcript::{summarize_history, EntryRole, SessionTranscript, SummarizeError, TranscriptEntry};
