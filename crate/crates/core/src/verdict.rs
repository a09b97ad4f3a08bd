use std::fmt;

/// Three-valued analysis outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Positive,
    Negative,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisVerdict<W> {
    pub outcome: Outcome,
    pub witness: Option<W>,
    /// Work spent (tree nodes, explored states or enumerated candidates).
    pub budget_used: usize,
    pub budget: usize,
    /// Set when the verdict depends on an unverified assumption.
    pub caveat: Option<String>,
}

impl<W> AnalysisVerdict<W> {
    pub fn positive(witness: W, budget_used: usize, budget: usize) -> Self {
        AnalysisVerdict {
            outcome: Outcome::Positive,
            witness: Some(witness),
            budget_used,
            budget,
            caveat: None,
        }
    }

    pub fn negative(witness: Option<W>, budget_used: usize, budget: usize) -> Self {
        AnalysisVerdict {
            outcome: Outcome::Negative,
            witness,
            budget_used,
            budget,
            caveat: None,
        }
    }

    pub fn inconclusive(budget_used: usize, budget: usize) -> Self {
        AnalysisVerdict {
            outcome: Outcome::Inconclusive,
            witness: None,
            budget_used,
            budget,
            caveat: None,
        }
    }

    pub fn with_caveat(mut self, caveat: impl Into<String>) -> Self {
        self.caveat = Some(caveat.into());
        self
    }

    pub fn is_positive(&self) -> bool {
        self.outcome == Outcome::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.outcome == Outcome::Negative
    }

    pub fn is_inconclusive(&self) -> bool {
        self.outcome == Outcome::Inconclusive
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Positive => "positive",
            Outcome::Negative => "negative",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}
