use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::action::{parse_response, Action, ActionKind};
use crate::device::{Device, ExecutionOutcome, Snapshot, Transient};
use crate::llm::ChatClient;
use crate::report::BugReport;
use crate::ui::{group_widgets_with, parse_hierarchy, GroupedUiState};

use super::budget::{check_budget, BudgetDecision};
use super::config::SessionConfig;
use super::feedback::{make_feedback, ActionReport, ActionStatus, Feedback};
use super::instructions::build_instructions;
use super::prompt::{build_initial_prompt, build_iteration_prompt};
use super::repetition::detect_repetition;
use super::transcript::{summarize_history, EntryRole, SessionTranscript, SummarizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Success,
    FailDeclared,
    FailTimeout,
    FailBudget,
    /// The model or the device became unusable.
    FailError,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::FailDeclared => "fail-declared",
            Verdict::FailTimeout => "fail-timeout",
            Verdict::FailBudget => "fail-budget",
            Verdict::FailError => "fail-error",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionResult {
    pub verdict: Verdict,
    /// Model replies processed; summarization calls are not counted.
    pub iterations: usize,
    pub wall_time_seconds: f64,
    pub summarizations: u32,
    pub trace_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOutcome {
    pub action: Action,
    #[serde(flatten)]
    pub status: ActionStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transients: Vec<Transient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crash_log: Option<String>,
    pub page_changed: bool,
}

/// One line of the JSONL trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Agent-written text sent since the previous model reply.
    pub prompt_delta: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<Action>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub outcomes: Vec<TraceOutcome>,
    pub feedback: String,
    pub tokens: u64,
    pub budget: BudgetDecision,
    pub summarizations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

struct TraceWriter(Option<BufWriter<File>>);

impl TraceWriter {
    fn write(&mut self, record: &TraceRecord) -> std::io::Result<()> {
        if let Some(w) = &mut self.0 {
            serde_json::to_writer(&mut *w, record)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }
}

fn grouped(snapshot: &Snapshot) -> GroupedUiState {
    match parse_hierarchy(&snapshot.hierarchy) {
        Ok(tree) => group_widgets_with(&tree, &snapshot.activity),
        Err(_) => GroupedUiState::empty(snapshot.activity.clone()),
    }
}

struct Session<'a> {
    device: &'a mut dyn Device,
    llm: &'a mut dyn ChatClient,
    config: &'a SessionConfig,
    started: Instant,
    iterations: usize,
    summarizations: u32,
    trace: TraceWriter,
}

enum Step {
    Continue,
    End(Verdict, Option<String>),
}

impl Session<'_> {
    fn timed_out(&self) -> bool {
        self.started.elapsed() >= self.config.time_limit
    }

    fn finish(&self, verdict: Verdict, error: Option<String>) -> ReproductionResult {
        ReproductionResult {
            verdict,
            iterations: self.iterations,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            summarizations: self.summarizations,
            trace_path: self.config.trace_path.clone(),
            error,
        }
    }

    fn run(&mut self, report: &BugReport) -> ReproductionResult {
        let counter = self.config.counter.clone();
        let budget = match self.config.budget() {
            Ok(b) => b,
            Err(e) => return self.finish(Verdict::FailError, Some(e.to_string())),
        };
        let ui = match self.device.snapshot() {
            Ok(s) => grouped(&s),
            Err(e) => return self.finish(Verdict::FailError, Some(e.to_string())),
        };
        let instructions = build_instructions(self.config.extended_actions);
        let initial = build_initial_prompt(report, &ui);
        let mut delta = format!("{}\n\n{initial}", instructions.trim_end());
        let mut transcript = SessionTranscript::new(instructions, initial, counter.as_ref());

        loop {
            if self.timed_out() {
                return self.finish(Verdict::FailTimeout, None);
            }
            let response = match self.llm.chat(&transcript.to_messages()) {
                Ok(r) => r,
                Err(e) => return self.finish(Verdict::FailError, Some(e.to_string())),
            };
            if self.timed_out() {
                return self.finish(Verdict::FailTimeout, None);
            }
            self.iterations += 1;
            transcript.push_model(response.text.clone(), response.usage, counter.as_ref());

            let mut record = TraceRecord {
                iteration: self.iterations - 1,
                prompt_delta: std::mem::take(&mut delta),
                response: response.text.clone(),
                actions: None,
                parse_error: None,
                outcomes: Vec::new(),
                feedback: String::new(),
                tokens: transcript.token_count(),
                budget: BudgetDecision::Ok,
                summarizations: self.summarizations,
                verdict: None,
            };

            let mut feedback = Feedback::default();
            match parse_response(&response.text) {
                Err(e) => {
                    record.parse_error = Some(e.to_string());
                    feedback.parse_error = Some(e.to_string());
                }
                Ok(seq) => {
                    record.actions = Some(seq.actions().to_vec());
                    let steps = seq.steps();
                    if !steps.is_empty() {
                        feedback.repetition = detect_repetition(&transcript.executed_actions, steps);
                    }
                    let all_ok = match self.execute_batch(steps, &mut transcript, &mut feedback, &mut record) {
                        Ok(ok) => ok,
                        Err(e) => return self.finish(Verdict::FailError, Some(e)),
                    };
                    let verdict = match seq.termination() {
                        Some(Action::Success) if all_ok => Some(Verdict::Success),
                        Some(Action::Success) => {
                            feedback.note = Some(
                                "Your ['success'] was not accepted because not every action before it ran.".into(),
                            );
                            None
                        }
                        Some(Action::Fail) => Some(Verdict::FailDeclared),
                        _ => None,
                    };
                    if let Some(v) = verdict {
                        record.feedback = make_feedback(&feedback);
                        record.verdict = Some(v);
                        let error = self.trace.write(&record).err().map(|e| format!("trace write failed: {e}"));
                        return self.finish(v, error);
                    }
                }
            }

            let ui = match self.device.snapshot() {
                Ok(s) => grouped(&s),
                Err(e) => return self.finish(Verdict::FailError, Some(e.to_string())),
            };
            let text = make_feedback(&feedback);
            let prompt = build_iteration_prompt(&text, &ui);
            record.feedback = text;
            delta = prompt.clone();
            transcript.push(EntryRole::Agent, prompt, counter.as_ref());

            let tokens = transcript.token_count();
            let decision = check_budget(&budget.with_current(tokens, self.summarizations));
            record.tokens = tokens;
            record.budget = decision;

            let step = match decision {
                BudgetDecision::Ok => Step::Continue,
                BudgetDecision::Abort => Step::End(Verdict::FailBudget, None),
                BudgetDecision::Summarize => self.summarize(&mut transcript),
            };
            record.summarizations = self.summarizations;
            if let Step::End(v, _) = &step {
                record.verdict = Some(*v);
            }
            if let Err(e) = self.trace.write(&record) {
                return self.finish(Verdict::FailError, Some(format!("trace write failed: {e}")));
            }
            if let Step::End(v, err) = step {
                return self.finish(v, err);
            }
        }
    }

    fn summarize(&mut self, transcript: &mut SessionTranscript) -> Step {
        let counter = self.config.counter.clone();
        for _ in 0..2 {
            match summarize_history(transcript, self.llm, counter.as_ref()) {
                Ok(t) => {
                    *transcript = t;
                    self.summarizations = transcript.summarization_count;
                    return Step::Continue;
                }
                Err(SummarizeError::NoReduction { .. }) => continue,
                Err(e @ SummarizeError::LlmUnavailable(_)) => {
                    return Step::End(Verdict::FailError, Some(e.to_string()))
                }
            }
        }
        self.summarizations = self.config.max_summarizations;
        Step::End(Verdict::FailBudget, Some("history could not be condensed".into()))
    }

    /// Runs the steps in order and stops at the first failure. Returns whether
    /// every step executed.
    fn execute_batch(
        &mut self,
        steps: &[Action],
        transcript: &mut SessionTranscript,
        feedback: &mut Feedback,
        record: &mut TraceRecord,
    ) -> Result<bool, String> {
        if steps.is_empty() {
            return Ok(true);
        }
        let before = self.device.snapshot().map_err(|e| e.to_string())?;
        let mut all_ok = true;
        for (i, action) in steps.iter().enumerate() {
            if !all_ok {
                feedback.actions.push(ActionReport { action: action.clone(), status: ActionStatus::Skipped });
                record.outcomes.push(TraceOutcome {
                    action: action.clone(),
                    status: ActionStatus::Skipped,
                    transients: Vec::new(),
                    crash_log: None,
                    page_changed: false,
                });
                continue;
            }
            let outcome =
                if !self.config.extended_actions && matches!(action.kind(), ActionKind::Swipe | ActionKind::Rotate) {
                    Err(format!("'{}' is not available in this session", action.kind()))
                } else {
                    let settle = if i + 1 == steps.len() { self.config.settle_ms } else { 0 };
                    Ok(self.device.execute(action, settle).map_err(|e| e.to_string())?)
                };
            let status = match &outcome {
                Ok(o) if o.executed() => {
                    transcript.executed_actions.push(action.clone());
                    ActionStatus::Executed
                }
                Ok(o) => ActionStatus::Failed(self.failure_reason(action, o)),
                Err(reason) => ActionStatus::Failed(reason.clone()),
            };
            all_ok = status == ActionStatus::Executed;
            let (transients, crash_log, page_changed) = match outcome {
                Ok(o) => (o.transients, o.crash_log, o.page_changed),
                Err(_) => (Vec::new(), None, false),
            };
            for t in &transients {
                if !feedback.transients.contains(t) {
                    feedback.transients.push(t.clone());
                }
            }
            if let Some(log) = &crash_log {
                feedback.crash_log = Some(log.clone());
            }
            feedback.actions.push(ActionReport { action: action.clone(), status: status.clone() });
            record.outcomes.push(TraceOutcome { action: action.clone(), status, transients, crash_log, page_changed });
        }
        let after = self.device.snapshot().map_err(|e| e.to_string())?;
        feedback.page_changed = before != after;
        Ok(all_ok)
    }

    fn failure_reason(&mut self, action: &Action, outcome: &ExecutionOutcome) -> String {
        let mut reason = outcome.status.describe().to_owned();
        if let Some(detail) = &outcome.detail {
            reason.push_str(": ");
            reason.push_str(detail);
        }
        if let Some(target) = action.target() {
            if !reason.contains(target) {
                reason.push_str(&format!(" (target '{target}')"));
            }
            if let Ok(s) = self.device.snapshot() {
                let n = grouped(&s).groups.len();
                reason.push_str(&format!("; the current page has {n} group{}", if n == 1 { "" } else { "s" }));
            }
        }
        reason
    }
}

/// Drives one reproduction attempt to a verdict.
///
/// Writes one JSONL trace record per model reply when `config.trace_path` is set.
pub fn run_session(
    report: &BugReport,
    device: &mut dyn Device,
    llm: &mut dyn ChatClient,
    config: &SessionConfig,
) -> ReproductionResult {
    let trace = match &config.trace_path {
        None => TraceWriter(None),
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                let _ = std::fs::create_dir_all(dir);
            }
            match File::create(path) {
                Ok(f) => TraceWriter(Some(BufWriter::new(f))),
                Err(e) => {
                    return ReproductionResult {
                        verdict: Verdict::FailError,
                        iterations: 0,
                        wall_time_seconds: 0.0,
                        summarizations: 0,
                        trace_path: Some(path.clone()),
                        error: Some(format!("cannot create trace {}: {e}", path.display())),
                    }
                }
            }
        }
    };
    let mut session = Session { device, llm, config, started: Instant::now(), iterations: 0, summarizations: 0, trace };
    session.run(report)
}
