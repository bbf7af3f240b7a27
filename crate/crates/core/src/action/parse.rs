//! Response grammar:
//!
//! ```text
//! response := junk* '[' item (',' item)* ']' junk*
//! item     := '[' atom (',' atom)* ']'
//! atom     := quoted-string | number
//! ```
//!
//! Strings may use either quote character and backslash escapes. A trailing
//! comma inside a list is tolerated.

use thiserror::Error;

use super::{Action, ActionKind, ActionSequence, Arity, Direction, Orientation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no action list found; answer with a list such as [['click', 'OK']]")]
    NoActionList,
    #[error("found {0} action lists; answer with exactly one list")]
    MultipleActionLists(usize),
    #[error("action {index} ('{kind}'): {detail}")]
    BadArity { index: usize, kind: String, detail: String },
    #[error("action {index}: unknown action '{name}'")]
    UnknownAction { index: usize, name: String },
    #[error("action {index}: a termination action ('success' or 'fail') must be the last action")]
    MisplacedTermination { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Atom {
    Str(String),
    Num { value: f64, raw: String },
}

impl Atom {
    fn text(&self) -> &str {
        match self {
            Atom::Str(s) => s,
            Atom::Num { raw, .. } => raw,
        }
    }
}

pub fn parse_response(text: &str) -> Result<ActionSequence, ParseError> {
    let bytes = text.as_bytes();
    let mut lists = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes[pos] == b'[' {
            let mut cursor = Cursor { text, pos };
            if let Some(items) = cursor.outer_list() {
                lists.push(items);
                pos = cursor.pos;
                continue;
            }
        }
        pos += 1;
    }

    let items = match lists.len() {
        0 => return Err(ParseError::NoActionList),
        1 => lists.pop().expect("one list"),
        n => return Err(ParseError::MultipleActionLists(n)),
    };
    let actions =
        items.iter().enumerate().map(|(i, atoms)| build_action(i + 1, atoms)).collect::<Result<Vec<_>, _>>()?;
    ActionSequence::new(actions).map_err(|e| match e {
        ParseError::MisplacedTermination { index } => ParseError::MisplacedTermination { index: index + 1 },
        other => other,
    })
}

fn build_action(index: usize, atoms: &[Atom]) -> Result<Action, ParseError> {
    let name = atoms[0].text();
    let kind = match &atoms[0] {
        Atom::Str(s) => ActionKind::from_name(s),
        Atom::Num { .. } => None,
    }
    .ok_or_else(|| ParseError::UnknownAction { index, name: name.to_owned() })?;

    let args = &atoms[1..];
    let bad = |detail: String| ParseError::BadArity { index, kind: kind.name().to_owned(), detail };
    let expected = kind.arity().slots();
    if args.len() != expected.len() {
        let format = std::iter::once("action").chain(expected.iter().copied()).collect::<Vec<_>>().join(", ");
        return Err(bad(format!("expected {} argument(s) in the form [{format}], got {}", expected.len(), args.len())));
    }

    Ok(match kind.arity() {
        Arity::None => match kind {
            ActionKind::Back => Action::Back,
            ActionKind::Restart => Action::Restart,
            ActionKind::Success => Action::Success,
            _ => Action::Fail,
        },
        Arity::Target => {
            let target = args[0].text().to_owned();
            if kind == ActionKind::Click {
                Action::Click { target }
            } else {
                Action::LongClick { target }
            }
        }
        Arity::Direction => {
            let direction = Direction::from_name(args[0].text())
                .ok_or_else(|| bad(format!("direction must be up, down, left or right, got '{}'", args[0].text())))?;
            if kind == ActionKind::Scroll {
                Action::Scroll { direction }
            } else {
                Action::Swipe { direction }
            }
        }
        Arity::Orientation => {
            let orientation = Orientation::from_name(args[0].text())
                .ok_or_else(|| bad(format!("orientation must be landscape or portrait, got '{}'", args[0].text())))?;
            Action::Rotate { orientation }
        }
        Arity::TargetAndInput => {
            Action::SetText { target: args[0].text().to_owned(), input: args[1].text().to_owned() }
        }
        Arity::Duration => {
            let seconds = match &args[0] {
                Atom::Num { value, .. } => Some(*value),
                Atom::Str(s) => s.trim().parse::<f64>().ok(),
            }
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("duration must be a number of seconds, got '{}'", args[0].text())))?;
            if seconds < 0.0 {
                return Err(bad(format!("duration must not be negative, got {seconds}")));
            }
            Action::Sleep { seconds }
        }
    })
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn outer_list(&mut self) -> Option<Vec<Vec<Atom>>> {
        self.list(|c| c.item())
    }

    fn item(&mut self) -> Option<Vec<Atom>> {
        self.list(|c| c.atom())
    }

    /// `'[' elem (',' elem)* ','? ']'`
    fn list<T>(&mut self, mut elem: impl FnMut(&mut Self) -> Option<T>) -> Option<Vec<T>> {
        if !self.eat(b'[') {
            return None;
        }
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if !out.is_empty() && self.eat(b']') {
                return Some(out);
            }
            out.push(elem(self)?);
            self.skip_ws();
            if self.eat(b']') {
                return Some(out);
            }
            if !self.eat(b',') {
                return None;
            }
        }
    }

    fn atom(&mut self) -> Option<Atom> {
        match self.peek()? {
            q @ (b'\'' | b'"') => self.quoted(q).map(Atom::Str),
            b'-' | b'+' | b'.' | b'0'..=b'9' => self.number(),
            _ => None,
        }
    }

    fn quoted(&mut self, quote: u8) -> Option<String> {
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.text[self.pos..].char_indices();
        while let Some((off, c)) = chars.next() {
            match c {
                c if c as u32 == quote as u32 => {
                    self.pos += off + 1;
                    return Some(out);
                }
                '\\' => match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 't')) => out.push('\t'),
                    Some((_, 'r')) => out.push('\r'),
                    Some((_, e @ ('\\' | '\'' | '"'))) => out.push(e),
                    Some((_, other)) => {
                        out.push('\\');
                        out.push(other);
                    }
                    None => return None,
                },
                c => out.push(c),
            }
        }
        None
    }

    fn number(&mut self) -> Option<Atom> {
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut end = start;
        while end < bytes.len() && matches!(bytes[end], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E') {
            end += 1;
        }
        let raw = &self.text[start..end];
        let value: f64 = raw.parse().ok()?;
        self.pos = end;
        Some(Atom::Num { value, raw: raw.to_owned() })
    }
}
