//! Run reports emitted by the generators and the analysis command.

use serde::Serialize;

use crate::cca::TestArray;
use crate::interactions::{compute_universe, enumerate_all, enumerate_valid};
use crate::model::SutModel;
use crate::verify::Variant;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sat,
    Heuristic,
    Cca,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Sat => write!(f, "sat"),
            Algorithm::Heuristic => write!(f, "heuristic"),
            Algorithm::Cca => write!(f, "cca"),
        }
    }
}

/// Interaction-space statistics for a model at a given `(d, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnalysisStats {
    /// Count of valid `t`-way interactions.
    pub valid_interactions: usize,
    /// Count of invalid `t`-way interactions.
    pub invalid_interactions: usize,
    /// Count of masked (set, target) pairs with sets of size exactly `d`.
    pub masked_pairs: u64,
}

impl AnalysisStats {
    pub fn compute(m: &SutModel, d: usize, t: usize) -> Result<AnalysisStats> {
        let universe = compute_universe(m, d, t)?;
        Self::from_universe(m, &universe)
    }

    /// Derives the statistics from an already-computed universe.
    pub fn from_universe(
        m: &SutModel,
        universe: &crate::interactions::MaskingUniverse,
    ) -> Result<AnalysisStats> {
        let valid = enumerate_valid(m, universe.t, false).len();
        let total = enumerate_all(m, universe.t, false).len();
        Ok(AnalysisStats {
            valid_interactions: valid,
            invalid_interactions: total - valid,
            masked_pairs: universe.masked_pairs,
        })
    }
}

/// One size attempt of the satisfiability search.
#[derive(Debug, Clone, Serialize)]
pub struct SizeAttempt {
    pub size: usize,
    /// `sat`, `unsat`, or `budget-exceeded`.
    pub outcome: String,
    pub millis: u64,
}

/// The per-row removal log of the heuristic, in visit order.
#[derive(Debug, Clone, Serialize)]
pub struct RemovalTrace {
    pub seed: u64,
    /// `(row index, removed)` — each row index appears exactly once.
    pub steps: Vec<(usize, bool)>,
}

/// Everything a generation run reports, next to the array itself.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub model: String,
    pub algorithm: Algorithm,
    pub d: usize,
    pub t: usize,
    pub variant: Variant,
    /// Row count of the emitted array.
    pub size: usize,
    pub wall_time_ms: u64,
    pub seed: u64,
    /// True iff a one-smaller size was refuted within the budget.
    pub optimal: bool,
    pub stats: AnalysisStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<RemovalTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_log: Option<Vec<SizeAttempt>>,
    /// The generated array; serialized separately as CSV.
    #[serde(skip)]
    pub array: TestArray,
}
