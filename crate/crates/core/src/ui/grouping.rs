use serde::{Deserialize, Serialize};

use super::{Widget, WidgetTree};

/// Which grouping rule produced a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupRule {
    /// A clickable layout with no clickable layout below it; the whole subtree is one group.
    ClickableLayout,
    /// A non-clickable layout whose children are all leaves, at least one interactive.
    LeafSiblings,
    /// An interactive widget not covered by the first two rules.
    Singleton,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetGroup {
    /// 1-based, sequential in document order.
    pub number: usize,
    /// Widgets shown for the group, in document order.
    pub members: Vec<Widget>,
    pub origin: GroupRule,
    /// The layout that defined the group (rules 1 and 2). Not rendered.
    pub container: Option<Widget>,
}

impl WidgetGroup {
    /// Node indices this group accounts for: members plus the container.
    pub fn covered(&self) -> impl Iterator<Item = usize> + '_ {
        self.container.iter().chain(self.members.iter()).map(|w| w.node_index)
    }

    fn anchor(&self) -> usize {
        self.covered().min().unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedUiState {
    pub activity_name: String,
    pub groups: Vec<WidgetGroup>,
    /// Non-interactive widgets with visible text that no rule captured.
    pub ungrouped: Vec<Widget>,
}

impl GroupedUiState {
    pub fn empty(activity_name: impl Into<String>) -> Self {
        Self { activity_name: activity_name.into(), groups: Vec::new(), ungrouped: Vec::new() }
    }

    /// Every widget the model can see: group members then ungrouped context.
    pub fn visible_widgets(&self) -> impl Iterator<Item = &Widget> {
        self.groups.iter().flat_map(|g| g.members.iter()).chain(self.ungrouped.iter())
    }

    /// Number of the group covering `node_index`, if any.
    pub fn group_of(&self, node_index: usize) -> Option<usize> {
        self.groups.iter().find(|g| g.covered().any(|i| i == node_index)).map(|g| g.number)
    }
}

pub fn group_widgets(tree: &WidgetTree) -> GroupedUiState {
    group_widgets_with(tree, "")
}

/// Applies the three grouping rules in order; a widget consumed by an earlier
/// rule is never reconsidered.
pub fn group_widgets_with(tree: &WidgetTree, activity_name: &str) -> GroupedUiState {
    let n = tree.len();
    let nodes = tree.nodes();
    let is_clickable_layout = |i: usize| nodes[i].is_layout && nodes[i].widget.clickable;
    let eligible = |i: usize| !nodes[i].is_layout || nodes[i].widget.is_interactive();

    // Children always have larger indices than their parent, so a reverse
    // sweep sees every subtree before its root.
    let mut clickable_layout_below = vec![false; n];
    for i in (0..n).rev() {
        clickable_layout_below[i] =
            nodes[i].children.iter().any(|&c| is_clickable_layout(c) || clickable_layout_below[c]);
    }

    let mut consumed = vec![false; n];
    let mut groups = Vec::new();

    for i in 0..n {
        if !is_clickable_layout(i) || clickable_layout_below[i] {
            continue;
        }
        let inside = tree.descendants(i);
        let mut members: Vec<Widget> =
            inside.iter().filter(|&&d| eligible(d)).map(|&d| nodes[d].widget.clone()).collect();
        if members.is_empty() {
            members.push(nodes[i].widget.clone());
        }
        consumed[i] = true;
        for d in inside {
            consumed[d] = true;
        }
        groups.push(WidgetGroup {
            number: 0,
            members,
            origin: GroupRule::ClickableLayout,
            container: Some(nodes[i].widget.clone()),
        });
    }

    for i in 0..n {
        let node = &nodes[i];
        if !node.is_layout || node.widget.clickable || node.children.is_empty() {
            continue;
        }
        if !node.children.iter().all(|&c| tree.is_leaf(c)) {
            continue;
        }
        let free: Vec<usize> = node.children.iter().copied().filter(|&c| !consumed[c]).collect();
        if !free.iter().any(|&c| nodes[c].widget.is_interactive()) {
            continue;
        }
        let members = free.iter().filter(|&&c| eligible(c)).map(|&c| nodes[c].widget.clone()).collect();
        for &c in &free {
            consumed[c] = true;
        }
        // An interactive container stays free so rule 3 can give it a group of its own.
        let container = (!node.widget.is_interactive()).then(|| node.widget.clone());
        if container.is_some() {
            consumed[i] = true;
        }
        groups.push(WidgetGroup { number: 0, members, origin: GroupRule::LeafSiblings, container });
    }

    for i in 0..n {
        if consumed[i] || !nodes[i].widget.is_interactive() {
            continue;
        }
        consumed[i] = true;
        groups.push(WidgetGroup {
            number: 0,
            members: vec![nodes[i].widget.clone()],
            origin: GroupRule::Singleton,
            container: None,
        });
    }

    groups.sort_by_key(WidgetGroup::anchor);
    for (k, g) in groups.iter_mut().enumerate() {
        g.number = k + 1;
    }

    let ungrouped = (0..n)
        .filter(|&i| !consumed[i])
        .map(|i| &nodes[i].widget)
        .filter(|w| !w.is_interactive() && has_visible_text(w))
        .cloned()
        .collect();

    GroupedUiState { activity_name: activity_name.to_owned(), groups, ungrouped }
}

fn has_visible_text(w: &Widget) -> bool {
    [&w.text, &w.content_desc].into_iter().flatten().any(|s| !s.trim().is_empty())
}
