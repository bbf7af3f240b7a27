use serde::{Deserialize, Serialize};

/// Counts tokens for transcript accounting.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> u64;
}

/// `ceil(bytes / 4)`; never zero for non-empty text.
#[derive(Debug, Clone, Copy, Default)]
pub struct ApproxCounter;

impl TokenCounter for ApproxCounter {
    fn count(&self, text: &str) -> u64 {
        (text.len() as u64).div_ceil(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetDecision {
    Ok,
    Summarize,
    Abort,
}

/// Token limit `L`, threshold proportion `TH` and the current count `C`.
///
/// The threshold is held in parts per million so that `C > L * TH` is decided
/// in integer arithmetic (8000 * 0.7 is exactly 5600, not 5599.999...).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenBudget {
    pub limit: u64,
    threshold_ppm: u64,
    pub current: u64,
    pub summarizations: u32,
    pub max_summarizations: u32,
}

impl TokenBudget {
    pub fn new(limit: u64, threshold: f64, max_summarizations: u32) -> Result<Self, String> {
        if limit == 0 {
            return Err("token limit must be positive".into());
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(format!("threshold must lie strictly between 0 and 1, got {threshold}"));
        }
        if max_summarizations == 0 {
            return Err("max summarizations must be positive".into());
        }
        Ok(Self {
            limit,
            threshold_ppm: (threshold * 1_000_000.0).round() as u64,
            current: 0,
            summarizations: 0,
            max_summarizations,
        })
    }

    pub fn with_current(mut self, current: u64, summarizations: u32) -> Self {
        self.current = current;
        self.summarizations = summarizations;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold_ppm as f64 / 1_000_000.0
    }

    pub fn exceeded(&self) -> bool {
        u128::from(self.current) * 1_000_000 > u128::from(self.limit) * u128::from(self.threshold_ppm)
    }
}

pub fn check_budget(budget: &TokenBudget) -> BudgetDecision {
    if !budget.exceeded() {
        BudgetDecision::Ok
    } else if budget.summarizations < budget.max_summarizations {
        BudgetDecision::Summarize
    } else {
        BudgetDecision::Abort
    }
}
