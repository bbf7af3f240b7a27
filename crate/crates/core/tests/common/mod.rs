//! Generators and reference oracles shared by the integration tests and the
//! acceptance suite. The oracles restate each rule directly and deliberately
//! avoid the library's data structures.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use repro_core::action::{Action, Direction, Orientation};
use repro_core::ui::GroupedUiState;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir().join("reports"))
        .expect("corpus reports directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "txt").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

// ---------------------------------------------------------------- trees

/// A generated node; `layout` is decided by the generator from its own class
/// table, not by the library's classifier.
#[derive(Debug, Clone)]
pub struct GenNode {
    pub class: &'static str,
    pub layout: bool,
    pub text: Option<String>,
    pub desc: Option<String>,
    pub id: Option<String>,
    pub clickable: bool,
    pub long_clickable: bool,
    pub editable: bool,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

const LAYOUTS: &[&str] = &[
    "android.widget.LinearLayout",
    "android.widget.FrameLayout",
    "android.widget.RelativeLayout",
    "androidx.recyclerview.widget.RecyclerView",
    "android.widget.ScrollView",
    "androidx.constraintlayout.widget.ConstraintLayout",
];
const WIDGETS: &[&str] = &[
    "android.widget.TextView",
    "android.widget.Button",
    "android.widget.ImageView",
    "android.widget.ImageButton",
    "android.widget.EditText",
    "android.widget.CheckBox",
    "android.view.View",
];
const WORDS: &[&str] = &["OK", "Cancel", "Settings", "More", "Text size", "Small", "96", "Delete", "a & b", "<x>"];

/// Random tree in document (preorder) order.
pub fn random_tree(rng: &mut StdRng, max_nodes: usize) -> Vec<GenNode> {
    let target = rng.gen_range(1..=max_nodes);
    let mut nodes = Vec::with_capacity(target);
    grow(rng, &mut nodes, None, 0, target);
    nodes
}

fn grow(rng: &mut StdRng, nodes: &mut Vec<GenNode>, parent: Option<usize>, depth: usize, target: usize) {
    let layout = depth < 6 && (parent.is_none() || rng.gen_bool(0.4));
    let class = if layout { *LAYOUTS.choose(rng).unwrap() } else { *WIDGETS.choose(rng).unwrap() };
    let word = |rng: &mut StdRng, p: f64| rng.gen_bool(p).then(|| WORDS.choose(rng).unwrap().to_string());
    let node = GenNode {
        class,
        layout,
        text: word(rng, if layout { 0.05 } else { 0.6 }),
        desc: word(rng, 0.2),
        id: rng.gen_bool(0.4).then(|| format!("com.example:id/w{}", rng.gen_range(0..50))),
        clickable: rng.gen_bool(if layout { 0.3 } else { 0.4 }),
        long_clickable: rng.gen_bool(0.1),
        editable: !layout && rng.gen_bool(0.08),
        parent,
        children: Vec::new(),
    };
    let me = nodes.len();
    nodes.push(node);
    if let Some(p) = parent {
        nodes[p].children.push(me);
    }
    if layout {
        let kids = rng.gen_range(0..=4);
        for _ in 0..kids {
            if nodes.len() >= target {
                break;
            }
            grow(rng, nodes, Some(me), depth + 1, target);
        }
    }
}

/// Tree of exactly `n` nodes: each new node hangs under a random earlier
/// layout, then the arena is renumbered into document order.
pub fn random_tree_exact(rng: &mut StdRng, n: usize) -> Vec<GenNode> {
    let mut raw: Vec<GenNode> = Vec::with_capacity(n);
    let mut layouts: Vec<usize> = Vec::new();
    for i in 0..n {
        let layout = i == 0 || rng.gen_bool(0.35);
        let class = if layout { *LAYOUTS.choose(rng).unwrap() } else { *WIDGETS.choose(rng).unwrap() };
        let parent = (i > 0).then(|| *layouts.choose(rng).unwrap());
        raw.push(GenNode {
            class,
            layout,
            text: rng.gen_bool(0.5).then(|| WORDS.choose(rng).unwrap().to_string()),
            desc: rng.gen_bool(0.2).then(|| WORDS.choose(rng).unwrap().to_string()),
            id: rng.gen_bool(0.4).then(|| format!("com.example:id/w{i}")),
            clickable: rng.gen_bool(0.35),
            long_clickable: rng.gen_bool(0.1),
            editable: !layout && rng.gen_bool(0.08),
            parent,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            raw[p].children.push(i);
        }
        if layout {
            layouts.push(i);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        order.push(i);
        stack.extend(raw[i].children.iter().rev());
    }
    let mut new_index = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    order
        .iter()
        .map(|&old| {
            let mut node = raw[old].clone();
            node.parent = node.parent.map(|p| new_index[p]);
            node.children = node.children.iter().map(|&c| new_index[c]).collect();
            node
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn to_xml(nodes: &[GenNode]) -> String {
    fn write(nodes: &[GenNode], i: usize, out: &mut String) {
        let n = &nodes[i];
        out.push_str(&format!(
            "<node class=\"{}\" text=\"{}\" content-desc=\"{}\" resource-id=\"{}\" clickable=\"{}\" long-clickable=\"{}\" editable=\"{}\" bounds=\"[{},{}][{},{}]\"",
            n.class,
            escape(n.text.as_deref().unwrap_or("")),
            escape(n.desc.as_deref().unwrap_or("")),
            escape(n.id.as_deref().unwrap_or("")),
            n.clickable,
            n.long_clickable,
            n.editable,
            i,
            i * 2,
            i + 100,
            i * 2 + 50
        ));
        if n.children.is_empty() {
            out.push_str("/>");
        } else {
            out.push('>');
            for &c in &n.children {
                write(nodes, c, out);
            }
            out.push_str("</node>");
        }
    }
    let mut out = String::from("<hierarchy>");
    write(nodes, 0, &mut out);
    out.push_str("</hierarchy>");
    out
}

// ---------------------------------------------------------------- grouping oracle

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleGroup {
    pub rule: &'static str,
    pub members: Vec<usize>,
    pub container: Option<usize>,
}

fn interactive(n: &GenNode) -> bool {
    n.clickable || n.long_clickable || n.editable
}

fn subtree(nodes: &[GenNode], i: usize) -> Vec<usize> {
    let mut out = vec![i];
    for &c in &nodes[i].children {
        out.extend(subtree(nodes, c));
    }
    out
}

/// Naive restatement of the three rules. Returns groups in display order and
/// the ungrouped node indices.
pub fn oracle_grouping(nodes: &[GenNode]) -> (Vec<OracleGroup>, Vec<usize>) {
    let clickable_layout = |i: usize| nodes[i].layout && nodes[i].clickable;
    let mut covered = vec![false; nodes.len()];
    let mut groups = Vec::new();

    // Rule 1: clickable layouts without a clickable layout anywhere below.
    for i in 0..nodes.len() {
        let below = subtree(nodes, i);
        if !clickable_layout(i) || below[1..].iter().any(|&d| clickable_layout(d)) {
            continue;
        }
        let mut members: Vec<usize> =
            below[1..].iter().copied().filter(|&d| !nodes[d].layout || interactive(&nodes[d])).collect();
        if members.is_empty() {
            members.push(i);
        }
        for d in below {
            covered[d] = true;
        }
        groups.push(OracleGroup { rule: "clickable-layout", members, container: Some(i) });
    }

    // Rule 2: non-clickable layouts whose children are all leaves, one of them interactive.
    for i in 0..nodes.len() {
        let n = &nodes[i];
        if covered[i] || !n.layout || n.clickable || n.children.is_empty() {
            continue;
        }
        if n.children.iter().any(|&c| !nodes[c].children.is_empty()) {
            continue;
        }
        // A leaf child may itself be a clickable layout already taken by rule 1.
        let free: Vec<usize> = n.children.iter().copied().filter(|&c| !covered[c]).collect();
        if !free.iter().any(|&c| interactive(&nodes[c])) {
            continue;
        }
        let members: Vec<usize> =
            free.iter().copied().filter(|&c| !nodes[c].layout || interactive(&nodes[c])).collect();
        for &c in &free {
            covered[c] = true;
        }
        let container = (!interactive(n)).then_some(i);
        if container.is_some() {
            covered[i] = true;
        }
        groups.push(OracleGroup { rule: "leaf-siblings", members, container });
    }

    // Rule 3: leftover interactive widgets.
    for i in 0..nodes.len() {
        if !covered[i] && interactive(&nodes[i]) {
            covered[i] = true;
            groups.push(OracleGroup { rule: "singleton", members: vec![i], container: None });
        }
    }

    groups.sort_by_key(|g| g.container.iter().chain(&g.members).copied().min().unwrap());
    let visible = |s: &Option<String>| s.as_deref().is_some_and(|t| !t.trim().is_empty());
    let ungrouped = (0..nodes.len())
        .filter(|&i| !covered[i] && !interactive(&nodes[i]) && (visible(&nodes[i].text) || visible(&nodes[i].desc)))
        .collect();
    (groups, ungrouped)
}

/// The library's grouping projected onto the oracle's shape.
pub fn project(state: &GroupedUiState) -> (Vec<OracleGroup>, Vec<usize>) {
    let groups = state
        .groups
        .iter()
        .map(|g| OracleGroup {
            rule: match g.origin {
                repro_core::ui::GroupRule::ClickableLayout => "clickable-layout",
                repro_core::ui::GroupRule::LeafSiblings => "leaf-siblings",
                repro_core::ui::GroupRule::Singleton => "singleton",
            },
            members: g.members.iter().map(|w| w.node_index).collect(),
            container: g.container.as_ref().map(|w| w.node_index),
        })
        .collect();
    (groups, state.ungrouped.iter().map(|w| w.node_index).collect())
}

/// Every clickable widget is accounted for by exactly one group.
pub fn partition_holds(state: &GroupedUiState, clickable: impl Iterator<Item = usize>) -> bool {
    clickable.into_iter().all(|i| state.groups.iter().filter(|g| g.covered().any(|c| c == i)).count() == 1)
}

// ---------------------------------------------------------------- repetition oracle

/// Equivalence key for repetition: identical actions, with every sleep alike.
fn step_key(a: &Action) -> String {
    match a {
        Action::Sleep { .. } => "sleep".to_owned(),
        other => format!("{other:?}"),
    }
}

/// Enumerates every period whose doubled suffix is a tandem repeat and keeps
/// the smallest.
pub fn oracle_repetition(history: &[Action], proposed: &[Action]) -> Option<(usize, Vec<Action>)> {
    let all: Vec<Action> = history.iter().chain(proposed).cloned().collect();
    let keys: Vec<String> = all.iter().map(step_key).collect();
    let n = keys.len();
    let periods: Vec<usize> = (1..=n).filter(|&k| 2 * k <= n && keys[n - 2 * k..n - k] == keys[n - k..]).collect();
    periods.first().map(|&k| (k, all[n - k..].to_vec()))
}

// ---------------------------------------------------------------- actions

const TEXT_ATOMS: &[&str] =
    &["a", "B", " ", "'", "\"", "\\", "\n", "\t", "\r", ",", "[", "]", "é", "中", "96", "x y", "\\n"];

pub fn random_text(rng: &mut StdRng, max_atoms: usize) -> String {
    (0..rng.gen_range(0..=max_atoms)).map(|_| *TEXT_ATOMS.choose(rng).unwrap()).collect()
}

pub fn random_action(rng: &mut StdRng, allow_termination: bool) -> Action {
    let upper = if allow_termination { 11 } else { 9 };
    match rng.gen_range(0..upper) {
        0 => Action::Back,
        1 => Action::Click { target: random_text(rng, 6) },
        2 => Action::LongClick { target: random_text(rng, 6) },
        3 => Action::Scroll { direction: *Direction::ALL.choose(rng).unwrap() },
        4 => Action::Swipe { direction: *Direction::ALL.choose(rng).unwrap() },
        5 => Action::Rotate {
            orientation: if rng.gen_bool(0.5) { Orientation::Landscape } else { Orientation::Portrait },
        },
        6 => Action::SetText { target: random_text(rng, 4), input: random_text(rng, 8) },
        7 => Action::Restart,
        8 => Action::Sleep {
            seconds: match rng.gen_range(0..4) {
                0 => rng.gen_range(0..100) as f64,
                1 => rng.gen_range(0..10_000) as f64 / 1000.0,
                2 => rng.gen::<f64>() * 1e6,
                _ => 0.0,
            },
        },
        9 => Action::Success,
        _ => Action::Fail,
    }
}

/// A valid response body: steps optionally followed by one termination.
pub fn random_sequence(rng: &mut StdRng) -> Vec<Action> {
    let mut v: Vec<Action> = (0..rng.gen_range(0..5)).map(|_| random_action(rng, false)).collect();
    if v.is_empty() || rng.gen_bool(0.3) {
        v.push(if rng.gen_bool(0.5) { Action::Success } else { Action::Fail });
    }
    v
}

// ---------------------------------------------------------------- sessions

use repro_core::device::{load_sim, SimDevice};
use repro_core::llm::{ChatClient, ChatMessage, ChatResponse, LlmError, ScriptReply, TokenUsage};
use repro_core::report::{load_report, BugReport};

/// Wraps a client and keeps every request it saw.
pub struct Recording<C> {
    pub inner: C,
    pub calls: Vec<Vec<ChatMessage>>,
}

impl<C: ChatClient> Recording<C> {
    pub fn new(inner: C) -> Self {
        Self { inner, calls: Vec::new() }
    }
}

impl<C: ChatClient> ChatClient for Recording<C> {
    fn chat(&mut self, messages: &[ChatMessage]) -> Result<ChatResponse, LlmError> {
        self.calls.push(messages.to_vec());
        self.inner.chat(messages)
    }
}

pub fn corpus_case(name: &str) -> (BugReport, SimDevice) {
    let dir = corpus_dir();
    let report = load_report(&dir.join("reports").join(format!("{name}.txt"))).unwrap();
    let device = load_sim(&dir.join("apps").join(format!("{name}.json"))).unwrap();
    (report, device)
}

pub fn reply(text: &str, prompt_tokens: u64) -> ScriptReply {
    ScriptReply::Detailed {
        text: text.to_owned(),
        usage: Some(TokenUsage { prompt: prompt_tokens, completion: 10 }),
        delay_ms: 0,
    }
}

pub fn delayed(text: &str, delay_ms: u64) -> ScriptReply {
    ScriptReply::Detailed { text: text.to_owned(), usage: None, delay_ms }
}
