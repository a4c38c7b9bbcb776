//! Tri-state outcomes for horizon-bounded checks.
//!
//! Every decision procedure in this crate reports what finite evidence
//! supports. `Holds` and `Fails` are issued only when a certifying condition
//! met its tolerance at the stated horizon; everything else is
//! `Inconclusive`. Raising the horizon may settle an inconclusive answer, but
//! a correct implementation never turns `Holds` into `Fails` by looking
//! further.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::natset::DensityEstimate;

/// What the evidence gathered at a horizon supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// A certifying condition was met within tolerance.
    Holds,
    /// A refuting witness was found within tolerance.
    Fails,
    /// Neither side reached its threshold at this horizon.
    Inconclusive,
}

impl Outcome {
    /// Three-valued conjunction: any `Fails` wins, then any `Inconclusive`.
    pub fn and(self, other: Outcome) -> Outcome {
        use Outcome::*;
        match (self, other) {
            (Fails, _) | (_, Fails) => Fails,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Holds, Holds) => Holds,
        }
    }

    /// Conjunction over any number of outcomes. Empty input is `Holds`,
    /// matching the convention that a vacuous requirement is satisfied.
    pub fn all<I: IntoIterator<Item = Outcome>>(outcomes: I) -> Outcome {
        outcomes.into_iter().fold(Outcome::Holds, Outcome::and)
    }

    /// Swap `Holds` and `Fails`, keep `Inconclusive`. Used when a question is
    /// answered by refuting its complement.
    pub fn negate(self) -> Outcome {
        match self {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Inconclusive => Outcome::Inconclusive,
        }
    }

    pub fn is_holds(self) -> bool {
        self == Outcome::Holds
    }

    pub fn is_fails(self) -> bool {
        self == Outcome::Fails
    }
}

/// One named piece of evidence inside a [`Verdict`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    /// What was checked, e.g. `"p=l1 eps=0.1"` or a set description.
    pub label: String,
    pub outcome: Outcome,
    /// Human-readable justification: the witness, the measured value, or why
    /// the evidence was insufficient.
    pub note: String,
    /// The density estimate backing this check, when one was computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityEstimate>,
}

impl Check {
    pub fn new(label: impl Into<String>, outcome: Outcome, note: impl Into<String>) -> Check {
        Check {
            label: label.into(),
            outcome,
            note: note.into(),
            density: None,
        }
    }

    pub fn with_density(mut self, estimate: DensityEstimate) -> Check {
        self.density = Some(estimate);
        self
    }
}

/// The aggregated answer to one query: an overall outcome plus the per-check
/// evidence that produced it. The overall outcome is always the three-valued
/// conjunction of the check outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub checks: Vec<Check>,
    /// Non-fatal observations, e.g. a degenerate construction that still
    /// evaluates. Warnings never change the outcome.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Verdict {
    /// A verdict backed by a single check.
    pub fn single(check: Check) -> Verdict {
        Verdict {
            outcome: check.outcome,
            checks: vec![check],
            warnings: Vec::new(),
        }
    }

    /// Conjunction of several checks. An empty list holds vacuously; callers
    /// that consider emptiness an error should say so in their own check.
    pub fn from_checks(checks: Vec<Check>) -> Verdict {
        let outcome = Outcome::all(checks.iter().map(|c| c.outcome));
        Verdict {
            outcome,
            checks,
            warnings: Vec::new(),
        }
    }

    /// Merge another verdict's evidence into this one, conjoining outcomes.
    pub fn conjoin(mut self, other: Verdict) -> Verdict {
        self.outcome = self.outcome.and(other.outcome);
        self.checks.extend(other.checks);
        self.warnings.extend(other.warnings);
        self
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Verdict {
        self.warnings.push(warning.into());
        self
    }

    /// Flip holds and fails in both the outcome and the checks, relabelling
    /// nothing. Used by stationarity, which negates a membership question.
    pub fn negated(mut self) -> Verdict {
        self.outcome = self.outcome.negate();
        for check in &mut self.checks {
            check.outcome = check.outcome.negate();
        }
        self
    }

    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn is_inconclusive(&self) -> bool {
        self.outcome == Outcome::Inconclusive
    }
}
