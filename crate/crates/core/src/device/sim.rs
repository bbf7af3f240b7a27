//! Deterministic app simulator.
//!
//! Time is a discrete tick clock (one tick stands for 100 ms). Every `execute`
//! costs one tick plus the settle window, and `sleep` adds its duration, so
//! quick windows and short-lived widgets behave identically on every run.

use std::collections::BTreeMap;

use regex::Regex;

use super::spec::{compile_anchored, BugKind, BugTrigger, MatchMode, SimAppSpec, SpecError, TransientSpec};
use super::{Device, DeviceError, ExecutionOutcome, GroundTruth, OutcomeStatus, Snapshot, Transient};
use crate::action::{Action, ActionKind};
use crate::ui::{
    group_widgets_with, parse_hierarchy, resolve_target, serialize_hierarchy, widget_label, Bounds, GroupedUiState,
    LayoutClassifier, Resolution, TreeNode, Widget, WidgetTree,
};

/// Nominal duration of one simulator tick.
pub const TICK_MS: u64 = 100;
/// Activity shown after a crash.
pub const CRASH_ACTIVITY: &str = "com.android.server.am.AppErrorDialog";
/// How long a validation error toast stays up.
const ERROR_TOAST_TICKS: u64 = 20;

fn ticks_for_ms(ms: u64) -> u64 {
    ms.div_ceil(TICK_MS)
}

struct State {
    id: String,
    activity: String,
    hierarchy: String,
    ui: GroupedUiState,
    transient_on_entry: Option<TransientSpec>,
    auto_advance: Option<(u64, usize)>,
}

enum TargetMatcher {
    Any,
    Exact(String),
    Substring(String),
    Regex(Regex),
}

impl TargetMatcher {
    fn matches_text(&self, s: &str) -> bool {
        match self {
            TargetMatcher::Any => true,
            TargetMatcher::Exact(p) => s.trim().eq_ignore_ascii_case(p),
            TargetMatcher::Substring(p) => s.to_lowercase().contains(p),
            TargetMatcher::Regex(r) => r.is_match(s),
        }
    }

    fn matches_widget(&self, w: &Widget) -> bool {
        matches!(self, TargetMatcher::Any) || identifiers_with_full_id(w).any(|id| self.matches_text(id))
    }
}

fn identifiers_with_full_id(w: &Widget) -> impl Iterator<Item = &str> {
    w.identifiers().chain(w.resource_id.as_deref())
}

struct Transition {
    id: String,
    from: usize,
    to: usize,
    action: ActionKind,
    target: TargetMatcher,
    input: Option<Regex>,
    requires: Vec<String>,
    emit: Option<TransientSpec>,
    quick_window_ticks: Option<u64>,
}

struct Rule {
    target: String,
    pattern: Option<Regex>,
    equals_field: Option<String>,
    error_text: String,
}

pub struct SimDevice {
    app_name: String,
    package: String,
    bug_kind: BugKind,
    bug_trigger: BugTrigger,
    symptom_text: String,
    /// Spec states followed by the synthetic crash dialog.
    states: Vec<State>,
    transitions: Vec<Transition>,
    rules: BTreeMap<usize, Vec<Rule>>,
    start: usize,
    crash: usize,

    current: usize,
    entered_at: u64,
    now: u64,
    nav_stack: Vec<usize>,
    fields: BTreeMap<String, String>,
    transients: Vec<(u64, Transient)>,
    truth: GroundTruth,
    steps: usize,
}

impl SimDevice {
    pub fn new(spec: SimAppSpec) -> Result<Self, SpecError> {
        spec.validate()?;
        let ids: Vec<&String> = spec.states.keys().collect();
        let index_of = |id: &str| ids.iter().position(|s| s.as_str() == id).expect("validated state id");

        let mut states = Vec::with_capacity(ids.len() + 1);
        for (id, s) in &spec.states {
            let xml = s.hierarchy.clone().expect("validated hierarchy");
            let tree = parse_hierarchy(&xml).expect("validated hierarchy");
            states.push(State {
                id: id.clone(),
                activity: s.activity.clone(),
                ui: group_widgets_with(&tree, &s.activity),
                hierarchy: xml,
                transient_on_entry: s.transient_on_entry.clone(),
                auto_advance: s.auto_advance.as_ref().map(|a| (a.after_ticks, index_of(&a.to))),
            });
        }
        let crash_xml = crash_dialog(&spec.app_name);
        let crash_tree = parse_hierarchy(&crash_xml).expect("crash dialog parses");
        states.push(State {
            id: "<crash>".into(),
            activity: CRASH_ACTIVITY.into(),
            ui: group_widgets_with(&crash_tree, CRASH_ACTIVITY),
            hierarchy: crash_xml,
            transient_on_entry: None,
            auto_advance: None,
        });

        let transitions = spec
            .transitions
            .iter()
            .map(|t| {
                let target = match (&t.target, t.r#match) {
                    (None, _) => TargetMatcher::Any,
                    (Some(p), MatchMode::Exact) => TargetMatcher::Exact(p.trim().to_owned()),
                    (Some(p), MatchMode::Substring) => TargetMatcher::Substring(p.to_lowercase()),
                    (Some(p), MatchMode::Regex) => TargetMatcher::Regex(compile_anchored(p).expect("validated")),
                };
                Transition {
                    id: t.id.clone(),
                    from: index_of(&t.from),
                    to: index_of(&t.to),
                    action: t.action,
                    target,
                    input: t.input.as_deref().map(|p| compile_anchored(p).expect("validated")),
                    requires: t.requires.iter().map(|r| r.to_lowercase()).collect(),
                    emit: t.emit_transient.clone(),
                    quick_window_ticks: t.quick_window_ms.map(ticks_for_ms),
                }
            })
            .collect();

        let rules = spec
            .text_fields
            .iter()
            .map(|(state, rules)| {
                let compiled = rules
                    .iter()
                    .map(|r| Rule {
                        target: r.target.to_lowercase(),
                        pattern: r.pattern.as_deref().map(|p| Regex::new(p).expect("validated")),
                        equals_field: r.equals_field.as_ref().map(|f| f.to_lowercase()),
                        error_text: r.error_text.clone(),
                    })
                    .collect();
                (index_of(state), compiled)
            })
            .collect();

        let start = index_of(spec.start_state().expect("validated start"));
        let crash = states.len() - 1;
        let mut device = Self {
            app_name: spec.app_name.clone(),
            package: spec.package.clone(),
            bug_kind: spec.bug.kind,
            bug_trigger: spec.bug.trigger.clone(),
            symptom_text: spec.bug.symptom_text.clone(),
            states,
            transitions,
            rules,
            start,
            crash,
            current: start,
            entered_at: 0,
            now: 0,
            nav_stack: Vec::new(),
            fields: BTreeMap::new(),
            transients: Vec::new(),
            truth: GroundTruth::default(),
            steps: 0,
        };
        if let Some(t) = device.states[start].transient_on_entry.clone() {
            device.emit(t);
        }
        Ok(device)
    }

    pub fn app_name(&self) -> &str {
        &self.app_name
    }

    /// Harness-only view of whether the authored bug has fired.
    pub fn bug_triggered(&self) -> GroundTruth {
        self.truth
    }

    pub fn current_state(&self) -> &str {
        &self.states[self.current].id
    }

    pub fn now_ticks(&self) -> u64 {
        self.now
    }

    pub fn grouped_ui(&self) -> &GroupedUiState {
        &self.states[self.current].ui
    }

    fn emit(&mut self, t: TransientSpec) {
        self.transients.push((self.now, Transient { text: t.text, lifetime_ticks: t.lifetime_ticks }));
    }

    /// Moves to `state` at time `at`, firing a state-triggered bug on entry.
    fn enter(&mut self, state: usize, at: u64, step: usize, crash_log: &mut Option<String>) {
        self.current = state;
        self.entered_at = at;
        self.fields.clear();
        if let Some(t) = self.states[state].transient_on_entry.clone() {
            self.transients.push((at, Transient { text: t.text, lifetime_ticks: t.lifetime_ticks }));
        }
        if matches!(&self.bug_trigger, BugTrigger::State(s) if *s == self.states[state].id) {
            self.fire_bug(step, crash_log);
        }
    }

    fn fire_bug(&mut self, step: usize, crash_log: &mut Option<String>) {
        if !self.truth.bug_triggered {
            self.truth = GroundTruth { bug_triggered: true, trigger_step_index: Some(step) };
        }
        if self.bug_kind == BugKind::Crash {
            *crash_log = Some(format!("FATAL EXCEPTION: main\nProcess: {}\n{}", self.package, self.symptom_text));
            self.nav_stack.clear();
            self.current = self.crash;
            self.entered_at = self.now;
            self.fields.clear();
        }
    }

    fn run_auto_advance(&mut self, until: u64, step: usize, crash_log: &mut Option<String>) {
        while let Some((after, to)) = self.states[self.current].auto_advance {
            let due = self.entered_at + after;
            if due > until {
                break;
            }
            self.enter(to, due, step, crash_log);
        }
    }

    fn find_transition(&self, action: &Action, widget: Option<&Widget>) -> Option<usize> {
        let kind = action.kind();
        self.transitions.iter().position(|t| {
            if t.from != self.current || t.action != kind {
                return false;
            }
            let target_ok = match (action, widget) {
                (_, Some(w)) => t.target.matches_widget(w),
                (Action::Scroll { direction } | Action::Swipe { direction }, None) => {
                    t.target.matches_text(direction.as_str())
                }
                (Action::Rotate { orientation }, None) => t.target.matches_text(orientation.as_str()),
                _ => matches!(t.target, TargetMatcher::Any),
            };
            let input_ok = match (&t.input, action) {
                (None, _) => true,
                (Some(re), Action::SetText { input, .. }) => re.is_match(input),
                (Some(_), _) => false,
            };
            let window_ok = t.quick_window_ticks.is_none_or(|w| self.now.saturating_sub(self.entered_at) <= w);
            let requires_ok = t.requires.iter().all(|f| self.fields.contains_key(f));
            target_ok && input_ok && window_ok && requires_ok
        })
    }

    fn take_transition(&mut self, index: usize, step: usize, crash_log: &mut Option<String>) {
        let (emit, id, to) = {
            let t = &self.transitions[index];
            (t.emit.clone(), t.id.clone(), t.to)
        };
        if let Some(e) = emit {
            self.emit(e);
        }
        if matches!(&self.bug_trigger, BugTrigger::Transition(t) if *t == id) {
            self.fire_bug(step, crash_log);
            if crash_log.is_some() {
                return;
            }
        }
        if to != self.current {
            self.nav_stack.push(self.current);
            self.enter(to, self.now, step, crash_log);
        }
    }

    /// Validates `set_text` input against the field rules of the current state.
    fn accept_input(&mut self, widget: &Widget, input: &str) -> Result<(), String> {
        let ids: Vec<String> = identifiers_with_full_id(widget).map(str::to_lowercase).collect();
        let mut key = ids.first().cloned().unwrap_or_else(|| format!("#{}", widget.node_index));
        if let Some(rules) = self.rules.get(&self.current) {
            for rule in rules.iter().filter(|r| ids.contains(&r.target)) {
                key = rule.target.clone();
                let pattern_ok = rule.pattern.as_ref().is_none_or(|p| p.is_match(input));
                let equals_ok =
                    rule.equals_field.as_ref().is_none_or(|f| self.fields.get(f).is_some_and(|v| v == input));
                if !(pattern_ok && equals_ok) {
                    return Err(rule.error_text.clone());
                }
            }
        }
        self.fields.insert(key, input.to_owned());
        Ok(())
    }

    fn apply(
        &mut self,
        action: &Action,
        step: usize,
        crash_log: &mut Option<String>,
    ) -> (OutcomeStatus, Option<String>) {
        match action {
            Action::Success | Action::Fail => {
                (OutcomeStatus::ActionUnsupported, Some("termination actions are not executed on the device".into()))
            }
            Action::Sleep { .. } => (OutcomeStatus::Executed, None),
            Action::Restart => {
                self.nav_stack.clear();
                self.enter(self.start, self.now, step, crash_log);
                (OutcomeStatus::Executed, None)
            }
            Action::Back => {
                if self.current == self.crash {
                    self.enter(self.start, self.now, step, crash_log);
                } else if let Some(t) = self.find_transition(action, None) {
                    self.take_transition(t, step, crash_log);
                } else if let Some(prev) = self.nav_stack.pop() {
                    self.enter(prev, self.now, step, crash_log);
                }
                (OutcomeStatus::Executed, None)
            }
            Action::Scroll { .. } | Action::Swipe { .. } | Action::Rotate { .. } => {
                if let Some(t) = self.find_transition(action, None) {
                    self.take_transition(t, step, crash_log);
                }
                (OutcomeStatus::Executed, None)
            }
            Action::Click { target } | Action::LongClick { target } | Action::SetText { target, .. } => {
                let widget = match resolve_target(&self.states[self.current].ui, target) {
                    Resolution::Found(w) => w.clone(),
                    Resolution::NotFound => {
                        return (OutcomeStatus::TargetNotFound, Some(format!("no widget matches '{target}'")))
                    }
                    Resolution::Ambiguous(ws) => {
                        let labels: Vec<String> = ws.iter().map(|w| widget_label(w)).collect();
                        return (
                            OutcomeStatus::TargetNotFound,
                            Some(format!("'{target}' is ambiguous, it matches {}: {}", ws.len(), labels.join(", "))),
                        );
                    }
                };
                if self.current == self.crash {
                    self.enter(self.start, self.now, step, crash_log);
                    return (OutcomeStatus::Executed, None);
                }
                if let Action::SetText { input, .. } = action {
                    if !widget.editable {
                        return (
                            OutcomeStatus::ActionUnsupported,
                            Some(format!("{} is not an editable field", widget_label(&widget))),
                        );
                    }
                    if let Err(message) = self.accept_input(&widget, input) {
                        self.emit(TransientSpec { text: message.clone(), lifetime_ticks: ERROR_TOAST_TICKS });
                        return (OutcomeStatus::ValidationRejected, Some(message));
                    }
                }
                if let Some(t) = self.find_transition(action, Some(&widget)) {
                    self.take_transition(t, step, crash_log);
                }
                (OutcomeStatus::Executed, None)
            }
        }
    }
}

impl Device for SimDevice {
    fn snapshot(&mut self) -> Result<Snapshot, DeviceError> {
        let s = &self.states[self.current];
        Ok(Snapshot { activity: s.activity.clone(), hierarchy: s.hierarchy.clone() })
    }

    fn execute(&mut self, action: &Action, settle_ms: u64) -> Result<ExecutionOutcome, DeviceError> {
        let step = self.steps;
        self.steps += 1;
        let window_start = self.now;
        let mut crash_log = None;

        self.run_auto_advance(self.now, step, &mut crash_log);
        let before = self.current;
        let (status, detail) = self.apply(action, step, &mut crash_log);

        let mut cost = 1;
        if let Action::Sleep { seconds } = action {
            cost += (seconds * 1000.0 / TICK_MS as f64).ceil() as u64;
        }
        self.now += cost + ticks_for_ms(settle_ms);
        self.run_auto_advance(self.now, step, &mut crash_log);

        let end = self.now;
        let transients = self
            .transients
            .iter()
            .filter(|(at, t)| *at <= end && at + t.lifetime_ticks.max(1) > window_start)
            .map(|(_, t)| t.clone())
            .collect();
        let (a, b) = (&self.states[before], &self.states[self.current]);
        let page_changed = a.activity != b.activity || a.hierarchy != b.hierarchy;

        Ok(ExecutionOutcome { status, detail, transients, crash_log, page_changed })
    }
}

fn crash_dialog(app_name: &str) -> String {
    let widget = |class: &str, text: Option<&str>, id: Option<&str>, bounds: Bounds, clickable: bool| Widget {
        class_name: class.into(),
        text: text.map(Into::into),
        resource_id: id.map(Into::into),
        bounds,
        clickable,
        ..Widget::default()
    };
    let classifier = LayoutClassifier::default();
    let widgets = [
        widget("android.widget.FrameLayout", None, None, Bounds::new(0, 0, 1080, 1920), false),
        widget("android.widget.LinearLayout", None, None, Bounds::new(90, 760, 990, 1160), false),
        widget(
            "android.widget.TextView",
            Some(&format!("{app_name} has stopped")),
            Some("android:id/alertTitle"),
            Bounds::new(150, 800, 930, 880),
            false,
        ),
        widget(
            "android.widget.Button",
            Some("Open app again"),
            Some("android:id/aerr_restart"),
            Bounds::new(150, 940, 930, 1030),
            true,
        ),
        widget(
            "android.widget.Button",
            Some("Close app"),
            Some("android:id/aerr_close"),
            Bounds::new(150, 1050, 930, 1140),
            true,
        ),
    ];
    let parents = [None, Some(0), Some(1), Some(1), Some(1)];
    let mut nodes: Vec<TreeNode> = widgets
        .into_iter()
        .enumerate()
        .map(|(i, mut w)| {
            w.node_index = i;
            TreeNode {
                is_layout: classifier.is_layout(&w.class_name),
                widget: w,
                parent: parents[i],
                children: Vec::new(),
            }
        })
        .collect();
    for (i, parent) in parents.iter().enumerate().skip(1) {
        nodes[parent.expect("non-root")].children.push(i);
    }
    serialize_hierarchy(&WidgetTree::from_parts(nodes, vec![0]))
}
