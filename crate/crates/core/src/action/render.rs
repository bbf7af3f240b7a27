use super::Action;

/// Canonical bracketed form, e.g. `['click', 'theme']` or `['sleep', 0.5]`.
pub fn render_action(action: &Action) -> String {
    let mut parts = vec![quote(action.kind().name())];
    match action {
        Action::Click { target } | Action::LongClick { target } => parts.push(quote(target)),
        Action::Scroll { direction } | Action::Swipe { direction } => parts.push(quote(direction.as_str())),
        Action::Rotate { orientation } => parts.push(quote(orientation.as_str())),
        Action::SetText { target, input } => {
            parts.push(quote(target));
            parts.push(quote(input));
        }
        Action::Sleep { seconds } => parts.push(format!("{seconds}")),
        Action::Back | Action::Restart | Action::Success | Action::Fail => {}
    }
    format!("[{}]", parts.join(", "))
}

/// Renders a whole response list: `[[...], [...]]`.
pub fn render_sequence(actions: &[Action]) -> String {
    format!("[{}]", actions.iter().map(render_action).collect::<Vec<_>>().join(", "))
}

/// Python-repr style quoting: single quotes unless the text contains a single
/// quote and no double quote.
fn quote(s: &str) -> String {
    let q = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == q => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(q);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{parse_response, Direction, Orientation};

    #[test]
    fn canonical_forms() {
        assert_eq!(render_action(&Action::Sleep { seconds: 0.5 }), "['sleep', 0.5]");
        assert_eq!(render_action(&Action::Back), "['back']");
        assert_eq!(render_action(&Action::Restart), "['restart']");
        assert_eq!(render_action(&Action::click("theme")), "['click', 'theme']");
        assert_eq!(render_action(&Action::Scroll { direction: Direction::Up }), "['scroll', 'up']");
        assert_eq!(render_action(&Action::set_text("name", "joh")), "['set_text', 'name', 'joh']");
        assert_eq!(render_action(&Action::Rotate { orientation: Orientation::Landscape }), "['rotate', 'landscape']");
        assert_eq!(render_action(&Action::click("it's")), "['click', \"it's\"]");
        assert_eq!(render_action(&Action::click("a'b\"c")), "['click', 'a\\'b\"c']");
    }

    #[test]
    fn sequence_round_trip() {
        let actions = vec![Action::set_text("email", "conf@test.com"), Action::click("Sign up"), Action::Success];
        let rendered = render_sequence(&actions);
        assert_eq!(parse_response(&rendered).unwrap().actions(), actions.as_slice());
    }
}
