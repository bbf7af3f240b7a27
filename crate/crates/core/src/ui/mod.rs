//! UI snapshot model: hierarchy dump parsing, widget grouping, prompt rendering
//! and target resolution.
//!
//! Everything here is a pure function over an immutable snapshot.

mod grouping;
mod hierarchy;
mod render;
mod resolve;

pub use grouping::{group_widgets, group_widgets_with, GroupRule, GroupedUiState, WidgetGroup};
pub use hierarchy::{parse_hierarchy, parse_hierarchy_with, serialize_hierarchy, HierarchyError};
pub use render::{render_ui_prompt, widget_label};
pub use resolve::{resolve_target, Resolution};

use serde::{Deserialize, Serialize};

/// Pixel rectangle in screen coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl Bounds {
    pub fn new(left: i32, top: i32, right: i32, bottom: i32) -> Self {
        Self { left, top, right, bottom }
    }

    pub fn center(&self) -> (i32, i32) {
        ((self.left + self.right) / 2, (self.top + self.bottom) / 2)
    }

    pub fn is_valid(&self) -> bool {
        self.left >= 0 && self.top >= 0 && self.right >= self.left && self.bottom >= self.top
    }
}

/// One element of a UI hierarchy dump.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Widget {
    pub class_name: String,
    pub resource_id: Option<String>,
    pub content_desc: Option<String>,
    pub text: Option<String>,
    pub bounds: Bounds,
    pub clickable: bool,
    pub long_clickable: bool,
    pub editable: bool,
    /// Position of the element in document order, unique per snapshot.
    pub node_index: usize,
}

impl Widget {
    /// Class name without its package prefix (`android.widget.Button` -> `Button`).
    pub fn short_class(&self) -> &str {
        self.class_name.rsplit('.').next().unwrap_or(&self.class_name)
    }

    /// Resource id without the `package:id/` prefix.
    pub fn short_resource_id(&self) -> Option<&str> {
        self.resource_id.as_deref().map(|id| id.rsplit_once(":id/").map_or(id, |(_, short)| short))
    }

    /// Whether the widget reacts to input for grouping purposes. Editable and
    /// long-clickable widgets count as clickable.
    pub fn is_interactive(&self) -> bool {
        self.clickable || self.long_clickable || self.editable
    }

    /// Identifier fields in label precedence order, skipping blank ones.
    pub fn identifiers(&self) -> impl Iterator<Item = &str> {
        [self.text.as_deref(), self.content_desc.as_deref(), self.short_resource_id()]
            .into_iter()
            .flatten()
            .filter(|s| !s.trim().is_empty())
    }
}

/// Decides which class names denote layouts (view groups).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutClassifier {
    suffixes: Vec<String>,
}

impl Default for LayoutClassifier {
    fn default() -> Self {
        Self::with_suffixes([
            "Layout",
            "ViewGroup",
            "RecyclerView",
            "ListView",
            "GridView",
            "ScrollView",
            "ViewPager",
            "ViewPager2",
            "Toolbar",
            "CardView",
            "RadioGroup",
            "Spinner",
            "WebView",
            "ViewFlipper",
            "ViewSwitcher",
            "TabWidget",
        ])
    }
}

impl LayoutClassifier {
    pub fn with_suffixes<I, S>(suffixes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { suffixes: suffixes.into_iter().map(Into::into).collect() }
    }

    pub fn is_layout(&self, class_name: &str) -> bool {
        let short = class_name.rsplit('.').next().unwrap_or(class_name);
        self.suffixes.iter().any(|s| short.ends_with(s.as_str()))
    }
}

/// Node of a [`WidgetTree`]; indices refer into [`WidgetTree::nodes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub widget: Widget,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub is_layout: bool,
}

/// Parsed hierarchy stored as an arena in document order, so a node's index
/// equals its widget's `node_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidgetTree {
    nodes: Vec<TreeNode>,
    roots: Vec<usize>,
}

impl WidgetTree {
    pub(crate) fn from_parts(nodes: Vec<TreeNode>, roots: Vec<usize>) -> Self {
        Self { nodes, roots }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &TreeNode {
        &self.nodes[index]
    }

    pub fn widget(&self, index: usize) -> &Widget {
        &self.nodes[index].widget
    }

    /// Top-level nodes. A dump normally has exactly one; window stacks may have more.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn root(&self) -> usize {
        self.roots[0]
    }

    pub fn is_leaf(&self, index: usize) -> bool {
        self.nodes[index].children.is_empty()
    }

    /// All strict descendants of `index` in document order.
    pub fn descendants(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.nodes[index].children.iter().rev().copied().collect();
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out
    }
}
