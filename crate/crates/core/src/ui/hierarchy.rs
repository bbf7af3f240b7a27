use std::fmt::Write as _;

use thiserror::Error;

use super::{Bounds, LayoutClassifier, TreeNode, Widget, WidgetTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("malformed hierarchy document: {0}")]
    MalformedDocument(String),
    #[error("hierarchy document has no root element")]
    EmptyDocument,
}

/// Element name of the optional wrapper emitted by UI-automation dumps. It is
/// not a widget itself; its element children are the tree roots.
const WRAPPER: &str = "hierarchy";

pub fn parse_hierarchy(doc: &str) -> Result<WidgetTree, HierarchyError> {
    parse_hierarchy_with(doc, &LayoutClassifier::default())
}

pub fn parse_hierarchy_with(doc: &str, classifier: &LayoutClassifier) -> Result<WidgetTree, HierarchyError> {
    if doc.trim().is_empty() {
        return Err(HierarchyError::EmptyDocument);
    }
    let xml = roxmltree::Document::parse(doc).map_err(|e| HierarchyError::MalformedDocument(e.to_string()))?;
    let top = xml.root_element();

    let top_level: Vec<roxmltree::Node> =
        if top.has_tag_name(WRAPPER) { top.children().filter(|n| n.is_element()).collect() } else { vec![top] };
    if top_level.is_empty() {
        return Err(HierarchyError::EmptyDocument);
    }

    let mut nodes = Vec::new();
    let mut roots = Vec::with_capacity(top_level.len());
    for element in top_level {
        roots.push(nodes.len());
        append_subtree(element, None, classifier, &mut nodes)?;
    }
    Ok(WidgetTree::from_parts(nodes, roots))
}

/// Iterative pre-order walk so deep dumps cannot exhaust the stack.
fn append_subtree(
    element: roxmltree::Node,
    parent: Option<usize>,
    classifier: &LayoutClassifier,
    nodes: &mut Vec<TreeNode>,
) -> Result<(), HierarchyError> {
    let mut stack = vec![(element, parent)];
    while let Some((el, parent)) = stack.pop() {
        let index = nodes.len();
        let widget = read_widget(el, index)?;
        let is_layout = classifier.is_layout(&widget.class_name);
        nodes.push(TreeNode { widget, parent, children: Vec::new(), is_layout });
        if let Some(p) = parent {
            nodes[p].children.push(index);
        }
        let kids: Vec<_> = el.children().filter(|n| n.is_element()).collect();
        for kid in kids.into_iter().rev() {
            stack.push((kid, Some(index)));
        }
    }
    Ok(())
}

fn read_widget(el: roxmltree::Node, node_index: usize) -> Result<Widget, HierarchyError> {
    let non_empty = |name: &str| el.attribute(name).filter(|v| !v.is_empty()).map(str::to_owned);
    let flag = |name: &str| el.attribute(name).is_some_and(|v| v.eq_ignore_ascii_case("true"));

    let class_name = match el.attribute("class") {
        Some(c) if !c.is_empty() => c.to_owned(),
        _ if el.tag_name().name() != "node" => el.tag_name().name().to_owned(),
        _ => String::from("android.view.View"),
    };
    let bounds = match el.attribute("bounds") {
        Some(raw) => parse_bounds(raw).ok_or_else(|| {
            HierarchyError::MalformedDocument(format!("invalid bounds {raw:?} on element {node_index}"))
        })?,
        None => Bounds::default(),
    };

    Ok(Widget {
        class_name,
        resource_id: non_empty("resource-id"),
        content_desc: non_empty("content-desc"),
        text: non_empty("text"),
        bounds,
        clickable: flag("clickable"),
        long_clickable: flag("long-clickable"),
        editable: flag("editable"),
        node_index,
    })
}

/// Parses `[l,t][r,b]`.
fn parse_bounds(raw: &str) -> Option<Bounds> {
    let rest = raw.trim().strip_prefix('[')?;
    let (first, rest) = rest.split_once("][")?;
    let second = rest.strip_suffix(']')?;
    let pair = |s: &str| -> Option<(i32, i32)> {
        let (a, b) = s.split_once(',')?;
        Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
    };
    let (left, top) = pair(first)?;
    let (right, bottom) = pair(second)?;
    let bounds = Bounds { left, top, right, bottom };
    bounds.is_valid().then_some(bounds)
}

/// Writes a tree back out in dump format. `parse_hierarchy` of the result
/// reproduces the tree.
pub fn serialize_hierarchy(tree: &WidgetTree) -> String {
    let mut out = String::from("<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>\n");
    out.push_str("<hierarchy rotation=\"0\">\n");
    for &root in tree.roots() {
        write_node(tree, root, 1, &mut out);
    }
    out.push_str("</hierarchy>\n");
    out
}

fn write_node(tree: &WidgetTree, index: usize, depth: usize, out: &mut String) {
    let node = tree.node(index);
    let w = &node.widget;
    let indent = "  ".repeat(depth);
    let _ = write!(
        out,
        "{indent}<node text=\"{}\" resource-id=\"{}\" class=\"{}\" content-desc=\"{}\" \
         clickable=\"{}\" long-clickable=\"{}\" editable=\"{}\" bounds=\"[{},{}][{},{}]\"",
        escape_attr(w.text.as_deref().unwrap_or("")),
        escape_attr(w.resource_id.as_deref().unwrap_or("")),
        escape_attr(&w.class_name),
        escape_attr(w.content_desc.as_deref().unwrap_or("")),
        w.clickable,
        w.long_clickable,
        w.editable,
        w.bounds.left,
        w.bounds.top,
        w.bounds.right,
        w.bounds.bottom,
    );
    if node.children.is_empty() {
        out.push_str(" />\n");
        return;
    }
    out.push_str(">\n");
    for &child in &node.children {
        write_node(tree, child, depth + 1, out);
    }
    let _ = writeln!(out, "{indent}</node>");
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_button() {
        let doc = r#"<node class="android.widget.Button" text="OK" clickable="true" bounds="[0,0][10,10]"/>"#;
        let tree = parse_hierarchy(doc).unwrap();
        assert_eq!(tree.len(), 1);
        let w = tree.widget(0);
        assert_eq!(w.text.as_deref(), Some("OK"));
        assert!(w.clickable);
        assert!(!w.long_clickable);
        assert!(!w.editable);
    }

    #[test]
    fn wrapper_is_transparent() {
        let doc = r#"<hierarchy rotation="0">
            <node class="android.widget.FrameLayout" bounds="[0,0][100,100]">
              <node class="android.widget.TextView" text="a" bounds="[0,0][10,10]"/>
              <node class="android.widget.TextView" text="b" bounds="[0,10][10,20]"/>
            </node>
          </hierarchy>"#;
        let tree = parse_hierarchy(doc).unwrap();
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.roots(), &[0]);
        assert_eq!(tree.node(0).children, vec![1, 2]);
        assert!(tree.node(0).is_layout);
        assert_eq!(tree.node(2).parent, Some(0));
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse_hierarchy("   "), Err(HierarchyError::EmptyDocument));
        assert_eq!(parse_hierarchy("<hierarchy/>"), Err(HierarchyError::EmptyDocument));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_hierarchy("<node class=\"a\"><node></node>"),
            Err(HierarchyError::MalformedDocument(_))
        ));
        assert!(matches!(parse_hierarchy("<node bounds=\"[5,0][1,1]\"/>"), Err(HierarchyError::MalformedDocument(_))));
        assert!(matches!(parse_hierarchy("<node bounds=\"garbage\"/>"), Err(HierarchyError::MalformedDocument(_))));
    }

    #[test]
    fn bounds_parsing() {
        assert_eq!(parse_bounds("[0,63][1080,210]"), Some(Bounds::new(0, 63, 1080, 210)));
        assert_eq!(parse_bounds("[0,0][0,0]"), Some(Bounds::default()));
        assert_eq!(parse_bounds("[-1,0][0,0]"), None);
        assert_eq!(parse_bounds("[0,0]"), None);
    }

    #[test]
    fn serialize_escapes_and_round_trips() {
        let doc = r#"<hierarchy><node class="android.widget.LinearLayout" clickable="true" bounds="[0,0][50,50]">
            <node class="android.widget.TextView" text="a &quot;b&quot; &amp; c&#10;d" resource-id="com.x:id/t" bounds="[1,1][2,2]"/>
          </node></hierarchy>"#;
        let tree = parse_hierarchy(doc).unwrap();
        assert_eq!(tree.widget(1).text.as_deref(), Some("a \"b\" & c\nd"));
        let again = parse_hierarchy(&serialize_hierarchy(&tree)).unwrap();
        assert_eq!(again, tree);
    }
}
