//! Fault identification from test outcomes.
//!
//! A row fails iff it covers at least one faulty interaction. Given an
//! outcome, every interaction of the target strength that appears in some
//! failed row and in no passing row is flagged as faulty. On a detecting
//! array this recovers exactly the faulty set plus the interactions the
//! faulty set masks; in simulation mode the masked ones can be told apart
//! and annotated.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cca::TestArray;
use crate::interactions::{is_masking, rho_single, Interaction, InteractionSet};
use crate::model::SutModel;

/// Per-row verdict of a test run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowOutcome {
    Pass,
    Fail,
}

/// The outcome of executing every row of an array, indexed by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome(pub Vec<RowOutcome>);

impl Outcome {
    pub fn failed_rows(&self) -> BTreeSet<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, o)| **o == RowOutcome::Fail)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Annotation attached to a flagged interaction by [`annotate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Annotation {
    /// The interaction was in the injected faulty set.
    Confirmed,
    /// Masked by the injected set; inherently indistinguishable from faulty.
    MaskedSuspect,
    /// Neither injected nor masked: the run violated the (d, t) assumptions.
    AssumptionViolation,
}

/// Interactions identified as faulty, with optional simulation annotations.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnosis {
    pub flagged: InteractionSet,
    pub annotations: BTreeMap<Interaction, Annotation>,
}

/// Simulates a test run: a row fails iff it covers a member of `faulty`.
pub fn run_tests(a: &TestArray, faulty: &InteractionSet) -> Outcome {
    Outcome(
        a.rows()
            .iter()
            .map(|row| {
                if faulty.iter().any(|t| t.covered_by(row)) {
                    RowOutcome::Fail
                } else {
                    RowOutcome::Pass
                }
            })
            .collect(),
    )
}

/// Flags every interaction of the target strength (exactly `t`, or at most
/// `t` including the empty interaction) that appears in at least one failed
/// row and in no passing row.
pub fn identify(a: &TestArray, outcome: &Outcome, t: usize, at_most: bool) -> Diagnosis {
    assert_eq!(outcome.0.len(), a.len(), "outcome length must match array");
    let failed = outcome.failed_rows();

    // Candidates appearing in the array: collect strength-t subsets of the
    // failed rows only, since flagged rows must all be failed.
    let mut candidates: BTreeSet<Interaction> = BTreeSet::new();
    let strengths: Vec<usize> = if at_most { (0..=t).collect() } else { vec![t] };
    for &row_idx in &failed {
        let row = &a.rows()[row_idx];
        for &s in &strengths {
            for params in combinations(a_k(a), s) {
                let pairs: Vec<(usize, usize)> =
                    params.iter().map(|&p| (p, row.values[p])).collect();
                candidates.insert(Interaction::new(pairs).expect("distinct parameters"));
            }
        }
    }

    let flagged: InteractionSet = candidates
        .into_iter()
        .filter(|c| {
            let rows = rho_single(a.rows(), c);
            !rows.is_empty() && rows.is_subset(&failed)
        })
        .collect();
    Diagnosis {
        flagged,
        annotations: BTreeMap::new(),
    }
}

/// Strength-ordered parameter index combinations.
fn combinations(k: usize, s: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..k).combinations(s).collect()
}

fn a_k(a: &TestArray) -> usize {
    a.rows().first().map_or(0, |r| r.values.len())
}

/// Annotates a diagnosis against a known injected faulty set: injected
/// interactions are confirmed; flagged strangers are masked suspects when
/// the injected set masks them, and assumption-violation indicators
/// otherwise (more than `d` faults, or a strength mismatch).
pub fn annotate(m: &SutModel, diag: &Diagnosis, assumed_faulty: &InteractionSet) -> Diagnosis {
    let mut annotations = BTreeMap::new();
    for t in diag.flagged.iter() {
        let ann = if assumed_faulty.contains(t) {
            Annotation::Confirmed
        } else if is_masking(m, assumed_faulty, t) {
            Annotation::MaskedSuspect
        } else {
            Annotation::AssumptionViolation
        };
        annotations.insert(t.clone(), ann);
    }
    Diagnosis {
        flagged: diag.flagged.clone(),
        annotations,
    }
}

/// Prunes flagged interactions that strictly contain another flagged one,
/// keeping only minimal suspects. Off by default; meaningful in at-most
/// strength mode where a faulty interaction flags its supersets too.
pub fn reduce_to_minimal(diag: &Diagnosis) -> Diagnosis {
    let flagged: InteractionSet = diag
        .flagged
        .iter()
        .filter(|t| {
            !diag
                .flagged
                .iter()
                .any(|other| *other != **t && other.is_subset_of(t))
        })
        .cloned()
        .collect();
    let annotations = diag
        .annotations
        .iter()
        .filter(|(t, _)| flagged.contains(t))
        .map(|(t, a)| (t.clone(), *a))
        .collect();
    Diagnosis {
        flagged,
        annotations,
    }
}
