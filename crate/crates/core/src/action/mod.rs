//! Action vocabulary the model answers with, its bracketed-list response
//! grammar, and the canonical rendering used in logs and feedback.

mod parse;
mod render;

pub use parse::{parse_response, ParseError};
pub use render::{render_action, render_sequence};

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Landscape,
    Portrait,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Landscape => "landscape",
            Orientation::Portrait => "portrait",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [Orientation::Landscape, Orientation::Portrait].into_iter().find(|o| o.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

/// Action kinds, in the order they are documented to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Back,
    Click,
    LongClick,
    Scroll,
    Swipe,
    Rotate,
    SetText,
    Restart,
    Sleep,
    Success,
    Fail,
}

/// Argument slots an action kind takes after its name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    None,
    Target,
    Direction,
    Orientation,
    TargetAndInput,
    Duration,
}

impl Arity {
    pub fn slots(self) -> &'static [&'static str] {
        match self {
            Arity::None => &[],
            Arity::Target => &["target"],
            Arity::Direction | Arity::Orientation => &["direction"],
            Arity::TargetAndInput => &["target", "input"],
            Arity::Duration => &["duration"],
        }
    }
}

impl ActionKind {
    pub const ALL: [ActionKind; 11] = [
        ActionKind::Back,
        ActionKind::Click,
        ActionKind::LongClick,
        ActionKind::Scroll,
        ActionKind::Swipe,
        ActionKind::Rotate,
        ActionKind::SetText,
        ActionKind::Restart,
        ActionKind::Sleep,
        ActionKind::Success,
        ActionKind::Fail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Back => "back",
            ActionKind::Click => "click",
            ActionKind::LongClick => "long_click",
            ActionKind::Scroll => "scroll",
            ActionKind::Swipe => "swipe",
            ActionKind::Rotate => "rotate",
            ActionKind::SetText => "set_text",
            ActionKind::Restart => "restart",
            ActionKind::Sleep => "sleep",
            ActionKind::Success => "success",
            ActionKind::Fail => "fail",
        }
    }

    pub fn arity(self) -> Arity {
        match self {
            ActionKind::Back | ActionKind::Restart | ActionKind::Success | ActionKind::Fail => Arity::None,
            ActionKind::Click | ActionKind::LongClick => Arity::Target,
            ActionKind::Scroll | ActionKind::Swipe => Arity::Direction,
            ActionKind::Rotate => Arity::Orientation,
            ActionKind::SetText => Arity::TargetAndInput,
            ActionKind::Sleep => Arity::Duration,
        }
    }

    pub fn is_termination(self) -> bool {
        matches!(self, ActionKind::Success | ActionKind::Fail)
    }

    /// Accepts the canonical name plus hyphen/space spellings and a few
    /// run-together forms models produce.
    pub fn from_name(raw: &str) -> Option<Self> {
        let norm: String =
            raw.trim().chars().map(|c| if c == '-' || c == ' ' { '_' } else { c.to_ascii_lowercase() }).collect();
        let norm = match norm.as_str() {
            "longclick" | "long_press" | "longpress" => "long_click",
            "settext" => "set_text",
            other => other,
        };
        Self::ALL.into_iter().find(|k| k.name() == norm)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Back,
    Click { target: String },
    LongClick { target: String },
    Scroll { direction: Direction },
    Swipe { direction: Direction },
    Rotate { orientation: Orientation },
    SetText { target: String, input: String },
    Restart,
    Sleep { seconds: f64 },
    Success,
    Fail,
}

impl Action {
    pub fn click(target: impl Into<String>) -> Self {
        Action::Click { target: target.into() }
    }

    pub fn long_click(target: impl Into<String>) -> Self {
        Action::LongClick { target: target.into() }
    }

    pub fn set_text(target: impl Into<String>, input: impl Into<String>) -> Self {
        Action::SetText { target: target.into(), input: input.into() }
    }

    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Back => ActionKind::Back,
            Action::Click { .. } => ActionKind::Click,
            Action::LongClick { .. } => ActionKind::LongClick,
            Action::Scroll { .. } => ActionKind::Scroll,
            Action::Swipe { .. } => ActionKind::Swipe,
            Action::Rotate { .. } => ActionKind::Rotate,
            Action::SetText { .. } => ActionKind::SetText,
            Action::Restart => ActionKind::Restart,
            Action::Sleep { .. } => ActionKind::Sleep,
            Action::Success => ActionKind::Success,
            Action::Fail => ActionKind::Fail,
        }
    }

    pub fn target(&self) -> Option<&str> {
        match self {
            Action::Click { target } | Action::LongClick { target } | Action::SetText { target, .. } => Some(target),
            _ => None,
        }
    }

    pub fn is_termination(&self) -> bool {
        self.kind().is_termination()
    }

    /// Equality on (kind, target, direction, input); sleep durations are ignored.
    pub fn same_step(&self, other: &Action) -> bool {
        match (self, other) {
            (Action::Sleep { .. }, Action::Sleep { .. }) => true,
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_action(self))
    }
}

/// Non-empty ordered list of actions; a termination action can only be last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSequence {
    actions: Vec<Action>,
}

impl ActionSequence {
    pub fn new(actions: Vec<Action>) -> Result<Self, ParseError> {
        if actions.is_empty() {
            return Err(ParseError::NoActionList);
        }
        if let Some(index) = actions[..actions.len() - 1].iter().position(Action::is_termination) {
            return Err(ParseError::MisplacedTermination { index });
        }
        Ok(Self { actions })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn into_actions(self) -> Vec<Action> {
        self.actions
    }

    pub fn termination(&self) -> Option<&Action> {
        self.actions.last().filter(|a| a.is_termination())
    }

    /// Actions to execute on the device, i.e. everything but a trailing termination.
    pub fn steps(&self) -> &[Action] {
        match self.termination() {
            Some(_) => &self.actions[..self.actions.len() - 1],
            None => &self.actions,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_has_one_arity_and_round_trips_its_name() {
        for kind in ActionKind::ALL {
            assert_eq!(ActionKind::from_name(kind.name()), Some(kind));
            let _ = kind.arity();
        }
        assert_eq!(ActionKind::from_name("Long-Click"), Some(ActionKind::LongClick));
        assert_eq!(ActionKind::from_name("click "), Some(ActionKind::Click));
        assert_eq!(ActionKind::from_name("jump"), None);
    }

    #[test]
    fn sequence_rejects_early_termination() {
        let err = ActionSequence::new(vec![Action::Success, Action::Back]).unwrap_err();
        assert_eq!(err, ParseError::MisplacedTermination { index: 0 });
        let seq = ActionSequence::new(vec![Action::Back, Action::Fail]).unwrap();
        assert_eq!(seq.steps(), &[Action::Back]);
        assert_eq!(seq.termination(), Some(&Action::Fail));
    }

    #[test]
    fn same_step_ignores_duration_only() {
        assert!(Action::Sleep { seconds: 1.0 }.same_step(&Action::Sleep { seconds: 3.0 }));
        assert!(!Action::click("a").same_step(&Action::click("b")));
        assert!(!Action::click("a").same_step(&Action::long_click("a")));
    }
}
