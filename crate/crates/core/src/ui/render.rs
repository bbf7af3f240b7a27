use std::fmt::Write as _;

use super::{GroupedUiState, Widget};

/// `[Class: identifier]`, where the identifier is the first non-blank of text,
/// content description and resource id, or the bounds center when all are blank.
pub fn widget_label(w: &Widget) -> String {
    match w.identifiers().next() {
        Some(id) => format!("[{}: {}]", w.short_class(), single_line(id)),
        None => {
            let (cx, cy) = w.bounds.center();
            format!("[{}: ({cx},{cy})]", w.short_class())
        }
    }
}

fn single_line(s: &str) -> String {
    s.split(['\n', '\r']).map(str::trim).filter(|p| !p.is_empty()).collect::<Vec<_>>().join(" ")
}

fn join_labels<'a>(widgets: impl Iterator<Item = &'a Widget>) -> String {
    widgets.map(widget_label).collect::<Vec<_>>().join(", ")
}

/// Renders the activity line, one `Group #N: ...` line per group and, when
/// present, an `Ungrouped: ...` line for static context.
pub fn render_ui_prompt(state: &GroupedUiState) -> String {
    let mut out = format!("Activity: {}", state.activity_name);
    for group in &state.groups {
        let _ = write!(out, "\nGroup #{}: {}", group.number, join_labels(group.members.iter()));
    }
    if !state.ungrouped.is_empty() {
        let _ = write!(out, "\nUngrouped: {}", join_labels(state.ungrouped.iter()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ui::Bounds;

    fn widget(class: &str, text: Option<&str>, desc: Option<&str>, id: Option<&str>) -> Widget {
        Widget {
            class_name: format!("android.widget.{class}"),
            text: text.map(Into::into),
            content_desc: desc.map(Into::into),
            resource_id: id.map(Into::into),
            bounds: Bounds::new(0, 0, 100, 40),
            ..Widget::default()
        }
    }

    #[test]
    fn label_cases() {
        assert_eq!(widget_label(&widget("Button", Some("OK"), None, None)), "[Button: OK]");
        assert_eq!(widget_label(&widget("ImageView", None, None, Some("menu_more"))), "[ImageView: menu_more]");
        assert_eq!(
            widget_label(&widget("ImageView", None, None, Some("com.app:id/menu_more"))),
            "[ImageView: menu_more]"
        );
        assert_eq!(widget_label(&widget("View", None, None, None)), "[View: (50,20)]");
        assert_eq!(widget_label(&widget("View", Some("  "), None, None)), "[View: (50,20)]");
        assert_eq!(widget_label(&widget("TextView", Some("a\nb"), None, None)), "[TextView: a b]");
    }

    #[test]
    fn label_precedence_truth_table() {
        // every subset of {text, desc, id}: the first present field in that order wins
        for mask in 0u8..8 {
            let text = (mask & 1 != 0).then_some("T");
            let desc = (mask & 2 != 0).then_some("D");
            let id = (mask & 4 != 0).then_some("I");
            let expected = text.or(desc).or(id).map_or("(50,20)".to_string(), str::to_string);
            let label = widget_label(&widget("View", text, desc, id));
            assert_eq!(label, format!("[View: {expected}]"), "mask {mask}");
        }
    }

    #[test]
    fn empty_state() {
        assert_eq!(render_ui_prompt(&GroupedUiState::empty("MainActivity")), "Activity: MainActivity");
    }
}
