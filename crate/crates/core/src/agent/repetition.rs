use serde::{Deserialize, Serialize};

use crate::action::Action;

/// A tandem repeat at the end of the action stream: the last `period`
/// actions equal the `period` actions before them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionReport {
    pub period: usize,
    pub repeated: Vec<Action>,
}

/// Looks for the shortest period `k` such that the final `2k` actions of
/// `history ++ proposed` are two identical halves.
pub fn detect_repetition(history: &[Action], proposed: &[Action]) -> Option<RepetitionReport> {
    let seq: Vec<&Action> = history.iter().chain(proposed).collect();
    let n = seq.len();
    (1..=n / 2)
        .find(|&k| (0..k).all(|i| seq[n - 2 * k + i].same_step(seq[n - k + i])))
        .map(|k| RepetitionReport { period: k, repeated: seq[n - k..].iter().map(|a| (*a).clone()).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(t: &str) -> Action {
        Action::click(t)
    }

    #[test]
    fn worked_example() {
        let history = [a("A"), a("B"), a("C"), a("D"), a("B"), a("C")];
        let report = detect_repetition(&history, &[a("D")]).unwrap();
        assert_eq!(report.period, 3);
        assert_eq!(report.repeated, vec![a("B"), a("C"), a("D")]);
    }

    #[test]
    fn nothing_to_repeat() {
        assert_eq!(detect_repetition(&[], &[a("A")]), None);
        assert_eq!(detect_repetition(&[a("A")], &[a("B")]), None);
        assert_eq!(detect_repetition(&[], &[]), None);
    }

    #[test]
    fn smallest_period_wins() {
        let report = detect_repetition(&[a("A"), a("A"), a("A")], &[a("A")]).unwrap();
        assert_eq!(report.period, 1);
    }

    #[test]
    fn sleep_durations_do_not_matter() {
        let history = [a("X"), Action::Sleep { seconds: 0.5 }];
        let report = detect_repetition(&history, &[a("X"), Action::Sleep { seconds: 2.0 }]).unwrap();
        assert_eq!(report.period, 2);
    }
}
