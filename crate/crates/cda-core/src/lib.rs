//! Combinatorial interaction testing with constraints: covering, locating,
//! and detecting arrays over finite parameter models.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`model`] — the SUT model (`.sut` DSL): parameters, finite value
//!   domains, and a boolean constraint formula.
//! * [`constraints`] — evaluation of the constraint formula, satisfiability
//!   queries over partial assignments, and an embedded CNF decision
//!   procedure.
//! * [`interactions`] — the interaction algebra: coverage, row sets,
//!   validity, masking, and the non-masking pair universe.
//! * [`cca`] — constrained covering array generation (in-parameter-order
//!   growth), used as the seed and size bound for both detecting-array
//!   generators.
//! * [`cda_sat`] — minimal detecting-array search via repeated
//!   satisfiability queries with a descending size.
//! * [`cda_heuristic`] — the two-step heuristic: seed with a covering
//!   array, then randomly remove rows while the detecting property holds.
//! * [`verify`] — definition-level oracles for covering, locating, and
//!   detecting arrays, with violation witnesses.
//! * [`localize`] — fault identification from test outcomes.
//! * [`report`], [`io`] — run reports and the on-disk file formats.
//! * [`modelgen`] — seeded random models and arrays for randomized
//!   verification.
//!
//! ```
//! use cda_core::verify::{self, Variant};
//! use cda_core::{cda_heuristic, model};
//!
//! let m = model::parse_model(
//!     "model \"tiny\";
//!      param a : x | y ;
//!      param b : u | v | w ;
//!      constraint a = x -> b != u ;",
//! )?;
//! let report = cda_heuristic::generate_heuristic_cda(&m, 1, 1, 0)?;
//! assert!(verify::is_cda(&m, &report.array, 1, 1, Variant::EXACT)?.passed());
//! # Ok::<(), cda_core::Error>(())
//! ```

pub mod cca;
pub mod cda_heuristic;
pub mod cda_sat;
pub mod constraints;
pub mod interactions;
pub mod io;
pub mod localize;
pub mod model;
pub mod modelgen;
pub mod report;
pub mod verify;

mod bits;

pub use cca::TestArray;
pub use interactions::{Interaction, InteractionSet, MaskingUniverse};
pub use model::{ConstraintExpr, Parameter, SutModel, TestCase};
pub use report::{Algorithm, AnalysisStats, GenerationReport};
pub use verify::{Variant, Verdict, Violation};

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] model::ParseError),
    #[error("model admits no valid test case")]
    UnsatisfiableModel,
    #[error("strength {strength} out of range for {k} parameters")]
    StrengthOutOfRange { strength: usize, k: usize },
    #[error("d + t = {dt} exceeds the parameter count {k}")]
    DtOutOfRange { dt: usize, k: usize },
    #[error(
        "combinatorial budget exceeded: {candidates} candidate pairs for (d={d}, t={t}), cap {cap}"
    )]
    CombinatorialBudget {
        d: usize,
        t: usize,
        candidates: u128,
        cap: u128,
    },
    #[error("enumeration budget exceeded: {0}")]
    EnumerationBudget(String),
    #[error("formula size budget exceeded: {vars} variables / {clauses} clauses, cap {cap}")]
    FormulaBudget {
        vars: usize,
        clauses: usize,
        cap: usize,
    },
    #[error("seed array is not a detecting array: row set for pair #{pair_index} is empty")]
    InvalidSeedArray { pair_index: usize },
    #[error("row {row} is invalid under the model constraints")]
    InvalidRow { row: usize },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
