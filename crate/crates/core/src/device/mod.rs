//! Device contract the agent drives, a deterministic app simulator that
//! implements it, and a length-prefixed JSON socket protocol for remote
//! backends.

mod remote;
mod sim;
mod spec;

pub use remote::{read_frame, serve_connection, write_frame, RemoteDevice, Request, Response};
pub use sim::{SimDevice, CRASH_ACTIVITY, TICK_MS};
pub use spec::{
    load_sim, BugKind, BugSpec, BugTrigger, FieldRule, MatchMode, SimAppSpec, SpecError, StateSpec, TransientSpec,
    TransitionSpec,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Action;

/// Current screen as the device reports it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub activity: String,
    pub hierarchy: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeStatus {
    Executed,
    TargetNotFound,
    ActionUnsupported,
    ValidationRejected,
}

impl OutcomeStatus {
    pub fn describe(self) -> &'static str {
        match self {
            OutcomeStatus::Executed => "executed",
            OutcomeStatus::TargetNotFound => "target not found",
            OutcomeStatus::ActionUnsupported => "action unsupported",
            OutcomeStatus::ValidationRejected => "input rejected",
        }
    }
}

/// A short-lived widget (toast, loading dialog) seen while an action settled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transient {
    pub text: String,
    pub lifetime_ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub status: OutcomeStatus,
    /// Why the action did not execute, when it did not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default)]
    pub transients: Vec<Transient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crash_log: Option<String>,
    pub page_changed: bool,
}

impl ExecutionOutcome {
    pub fn executed(&self) -> bool {
        self.status == OutcomeStatus::Executed
    }
}

/// Harness-only record of whether the authored bug actually fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bug_triggered: bool,
    /// Zero-based index of the `execute` call that fired the bug.
    pub trigger_step_index: Option<usize>,
}

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("device i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("device protocol: {0}")]
    Protocol(String),
    #[error("device reported: {0}")]
    Remote(String),
}

pub trait Device {
    fn snapshot(&mut self) -> Result<Snapshot, DeviceError>;

    /// Executes one action and returns once the settle window has closed.
    fn execute(&mut self, action: &Action, settle_ms: u64) -> Result<ExecutionOutcome, DeviceError>;
}

impl<D: Device + ?Sized> Device for &mut D {
    fn snapshot(&mut self) -> Result<Snapshot, DeviceError> {
        (**self).snapshot()
    }

    fn execute(&mut self, action: &Action, settle_ms: u64) -> Result<ExecutionOutcome, DeviceError> {
        (**self).execute(action, settle_ms)
    }
}
