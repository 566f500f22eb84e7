//! Minimal detecting-array generation through satisfiability: encode "a
//! `(d, t)` detecting array of size N exists" as CNF, then search sizes
//! downward from the covering-array bound until a size is refuted.
//!
//! The search is linear rather than binary on purpose: refutations are the
//! expensive solves, and a descending scan only ever pays for one of them,
//! at the very end.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::cca::{cca_upper_bound, TestArray};
use crate::constraints::{solve_seeded, Lit, PropFormula, SatOutcome};
use crate::interactions::{compute_universe, Interaction, InteractionSet, MaskingUniverse};
use crate::model::SutModel;
use crate::report::{Algorithm, AnalysisStats, GenerationReport, SizeAttempt};
use crate::verify::Variant;
use crate::{Error, Result};

/// Cap on encoded formula size (variables plus clauses).
const FORMULA_CAP: usize = 20_000_000;

/// Builds the size-`n` existence formula for a `(d, t)` detecting array:
/// all rows satisfy the model constraints, and for every non-masking pair
/// in the universe some row covers the target but no member of the set.
///
/// Coverage literals are shared: one auxiliary per (row, interaction), and
/// one "row covers some member" auxiliary per (row, set), reused across
/// every pair with an equal set.
pub fn build_exist_cda(
    m: &SutModel,
    d: usize,
    t: usize,
    n: usize,
    universe: &MaskingUniverse,
) -> Result<PropFormula> {
    let _ = (d, t);
    let mut interactions: BTreeMap<&Interaction, Vec<Lit>> = BTreeMap::new();
    let mut sets: BTreeMap<&InteractionSet, Vec<Lit>> = BTreeMap::new();
    for (set, target) in &universe.pairs {
        interactions.entry(target).or_default();
        for member in set.iter() {
            interactions.entry(member).or_default();
        }
        if set.len() >= 2 {
            sets.entry(set).or_default();
        }
    }

    let estimated_vars = n
        .saturating_mul(m.parameters.iter().map(|p| p.values.len()).sum::<usize>())
        .saturating_add(n.saturating_mul(interactions.len() + sets.len()))
        .saturating_add(n.saturating_mul(universe.pairs.len()));
    if estimated_vars.saturating_mul(4) > FORMULA_CAP {
        return Err(Error::FormulaBudget {
            vars: estimated_vars,
            clauses: estimated_vars.saturating_mul(3),
            cap: FORMULA_CAP,
        });
    }

    // No symmetry breaking: row permutations of a solution are distinct
    // models. Candidate for future work if large instances need it.
    let mut f = PropFormula::for_rows(m, n);
    f.assert_valid_rows(m);

    // cov[row][interaction] <-> the row covers the interaction.
    for (target, lits) in interactions.iter_mut() {
        for row in 0..n {
            let cells: Vec<Lit> = target
                .pairs()
                .iter()
                .map(|&(p, v)| f.cell(row, p, v))
                .collect();
            lits.push(f.define_conj(&cells));
        }
    }
    // set_cov[row][set] <-> the row covers some member of the set.
    for (set, lits) in sets.iter_mut() {
        #[allow(clippy::needless_range_loop)] // `row` indexes several maps
        for row in 0..n {
            let members: Vec<Lit> = set.iter().map(|t| interactions[t][row]).collect();
            lits.push(f.define_disj(&members));
        }
    }

    for (set, target) in &universe.pairs {
        let mut locating = Vec::with_capacity(n);
        for row in 0..n {
            let covers_target = interactions[target][row];
            let lit = match set.len() {
                // An empty set masks nothing and covers no row.
                0 => covers_target,
                1 => {
                    let member = set.iter().next().expect("size 1");
                    f.define_and(covers_target, -interactions[member][row])
                }
                _ => f.define_and(covers_target, -sets[set][row]),
            };
            locating.push(lit);
        }
        f.add_clause(locating);
    }
    Ok(f)
}

/// Options for [`generate_min_cda_with`].
#[derive(Debug, Clone, Default)]
pub struct SatSearchOptions {
    /// Dump every size's formula as `<model>_d<d>_t<t>_n<N>.cnf` here.
    pub dimacs_dir: Option<PathBuf>,
}

/// Runs the descending satisfiability search under a global wall-clock
/// budget and returns the smallest array found.
///
/// The report is `optimal` iff some size was refuted (the returned array is
/// one row larger) within the budget. On exhaustion the best confirmed
/// array is returned, which is the seed covering array if no solve
/// completed.
pub fn generate_min_cda(
    m: &SutModel,
    d: usize,
    t: usize,
    seed: u64,
    budget: Duration,
) -> Result<GenerationReport> {
    generate_min_cda_with(m, d, t, seed, budget, &SatSearchOptions::default())
}

pub fn generate_min_cda_with(
    m: &SutModel,
    d: usize,
    t: usize,
    seed: u64,
    budget: Duration,
    opts: &SatSearchOptions,
) -> Result<GenerationReport> {
    let started = Instant::now();
    let seed_array = cca_upper_bound(m, d, t, seed)?;
    let universe = compute_universe(m, d, t)?;
    let stats = AnalysisStats::from_universe(m, &universe)?;

    let mut best = seed_array;
    let mut optimal = false;
    let mut log: Vec<SizeAttempt> = Vec::new();

    let mut n = best.len().wrapping_sub(1);
    while n != usize::MAX {
        let remaining = budget.saturating_sub(started.elapsed());
        if remaining.is_zero() {
            break;
        }
        let formula = build_exist_cda(m, d, t, n, &universe)?;
        if let Some(dir) = &opts.dimacs_dir {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}_d{}_t{}_s{}_n{}.cnf", m.name, d, t, seed, n));
            let mut file = std::fs::File::create(path)?;
            formula.write_dimacs(&mut file)?;
        }
        let solve_started = Instant::now();
        let outcome = solve_seeded(&formula, Some(remaining), seed);
        let millis = solve_started.elapsed().as_millis() as u64;
        match outcome {
            SatOutcome::Sat(assignment) => {
                log.push(SizeAttempt {
                    size: n,
                    outcome: "sat".into(),
                    millis,
                });
                let array = TestArray::new(m, formula.decode_rows(&assignment))?;
                if !crate::interactions::satisfies_universe(array.rows(), &universe) {
                    return Err(Error::Format(
                        "decoded array failed verification; encoding bug".into(),
                    ));
                }
                best = array;
                if n == 0 {
                    // Nothing smaller exists.
                    optimal = true;
                    break;
                }
                n -= 1;
            }
            SatOutcome::Unsat => {
                log.push(SizeAttempt {
                    size: n,
                    outcome: "unsat".into(),
                    millis,
                });
                optimal = true;
                break;
            }
            SatOutcome::BudgetExceeded => {
                log.push(SizeAttempt {
                    size: n,
                    outcome: "budget-exceeded".into(),
                    millis,
                });
                break;
            }
        }
    }

    Ok(GenerationReport {
        model: m.name.clone(),
        algorithm: Algorithm::Sat,
        d,
        t,
        variant: Variant::EXACT,
        size: best.len(),
        wall_time_ms: started.elapsed().as_millis() as u64,
        seed,
        optimal,
        stats,
        trace: None,
        size_log: Some(log),
        array: best,
    })
}
