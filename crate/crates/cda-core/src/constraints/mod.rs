//! Constraint evaluation and satisfiability queries over the model.
//!
//! Queries about partial assignments (interaction validity, masking) have
//! two interchangeable answers: exhaustive enumeration of the assignment
//! space when it is small, and a CNF encoding handed to the embedded
//! decision procedure otherwise. The two paths agree by construction and
//! are cross-checked in tests.

mod cnf;
mod solver;

pub use cnf::{Lit, PropFormula};

use std::time::Duration;

use crate::interactions::{Interaction, InteractionSet};
use crate::model::{ConstraintExpr, SutModel, TestCase};
use solver::{SolveResult, Solver};

/// Assignment-space size up to which queries enumerate instead of encoding.
pub const ENUMERATION_CUTOFF: u128 = 4096;

/// Evaluates a constraint expression on a full assignment.
pub fn eval(expr: &ConstraintExpr, tc: &TestCase) -> bool {
    match expr {
        ConstraintExpr::True => true,
        ConstraintExpr::False => false,
        ConstraintExpr::Eq(p, v) => tc.values[*p] == *v,
        ConstraintExpr::Neq(p, v) => tc.values[*p] != *v,
        ConstraintExpr::Not(e) => !eval(e, tc),
        ConstraintExpr::And(a, b) => eval(a, tc) && eval(b, tc),
        ConstraintExpr::Or(a, b) => eval(a, tc) || eval(b, tc),
        ConstraintExpr::Implies(a, b) => !eval(a, tc) || eval(b, tc),
    }
}

/// True iff the test case satisfies every declared constraint.
pub fn is_valid(m: &SutModel, tc: &TestCase) -> bool {
    m.constraints.iter().all(|c| eval(c, tc))
}

/// Iterates the full assignment space in lexicographic order.
pub(crate) fn all_assignments(m: &SutModel) -> impl Iterator<Item = TestCase> + '_ {
    let k = m.k();
    let mut current = vec![0usize; k];
    let mut done = k == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = TestCase::new(current.clone());
        // Odometer step.
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            current[i] += 1;
            if current[i] < m.domain_size(i) {
                break;
            }
            current[i] = 0;
        }
        Some(out)
    })
}

/// All valid test cases, in lexicographic order.
pub fn exhaustive_suite(m: &SutModel) -> Vec<TestCase> {
    all_assignments(m).filter(|tc| is_valid(m, tc)).collect()
}

fn enumeration_feasible(m: &SutModel) -> bool {
    m.total_assignments()
        .is_some_and(|n| n <= ENUMERATION_CUTOFF)
}

// ---------------------------------------------------------------------------
// Solving
// ---------------------------------------------------------------------------

/// Result of a satisfiability query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// Satisfying assignment indexed by 1-based variable; entry 0 unused.
    Sat(Vec<bool>),
    Unsat,
    /// The time budget ran out before an answer; not an error.
    BudgetExceeded,
}

/// Decides a formula within an optional wall-clock budget.
pub fn solve(f: &PropFormula, budget: Option<Duration>) -> SatOutcome {
    solve_seeded(f, budget, 0)
}

/// As [`solve`], with an explicit seed for the solver's phase heuristics.
pub fn solve_seeded(f: &PropFormula, budget: Option<Duration>, seed: u64) -> SatOutcome {
    let mut solver = Solver::new(f.num_vars(), seed);
    for clause in f.clauses() {
        solver.add_clause(clause);
    }
    match solver.solve(budget) {
        SolveResult::Sat(model) => SatOutcome::Sat(model),
        SolveResult::Unsat => SatOutcome::Unsat,
        SolveResult::Budget => SatOutcome::BudgetExceeded,
    }
}

/// One-row formula: exactly-one cell clauses plus the model constraints.
pub fn one_row_formula(m: &SutModel) -> PropFormula {
    let mut f = PropFormula::for_rows(m, 1);
    f.assert_valid_rows(m);
    f
}

// ---------------------------------------------------------------------------
// Partial-assignment queries
// ---------------------------------------------------------------------------

/// Finds a valid test case covering the interaction, or `None` iff the
/// interaction is invalid. The empty interaction asks for any valid row.
pub fn complete(m: &SutModel, t: &Interaction) -> Option<TestCase> {
    if enumeration_feasible(m) {
        return all_assignments(m).find(|tc| is_valid(m, tc) && t.covered_by(tc));
    }
    let mut f = one_row_formula(m);
    for &(param, value) in t.pairs() {
        f.add_clause(vec![f.cell(0, param, value)]);
    }
    match solve(&f, None) {
        SatOutcome::Sat(assignment) => {
            let row = f.decode_rows(&assignment).pop().expect("one row");
            debug_assert!(is_valid(m, &row));
            Some(row)
        }
        SatOutcome::Unsat => None,
        SatOutcome::BudgetExceeded => unreachable!("no budget was set"),
    }
}

/// True iff some valid test case covers `t` and covers no member of `set`,
/// i.e. `set` does not mask `t`. Callers ensure `t` is not in `set`.
pub fn check_unmasking(m: &SutModel, set: &InteractionSet, t: &Interaction) -> bool {
    debug_assert!(!set.contains(t));
    if enumeration_feasible(m) {
        return all_assignments(m).any(|tc| {
            is_valid(m, &tc)
                && t.covered_by(&tc)
                && set.iter().all(|member| !member.covered_by(&tc))
        });
    }
    let mut f = one_row_formula(m);
    for &(param, value) in t.pairs() {
        f.add_clause(vec![f.cell(0, param, value)]);
    }
    for member in set.iter() {
        // At least one pair of the member must differ.
        let clause: Vec<Lit> = member
            .pairs()
            .iter()
            .map(|&(param, value)| -f.cell(0, param, value))
            .collect();
        f.add_clause(clause);
    }
    match solve(&f, None) {
        SatOutcome::Sat(_) => true,
        SatOutcome::Unsat => false,
        SatOutcome::BudgetExceeded => unreachable!("no budget was set"),
    }
}

/// Solver-backed variants of [`complete`] / [`check_unmasking`], used to
/// cross-check the enumeration path on models where both are feasible.
#[doc(hidden)]
pub mod dual {
    use super::*;

    pub fn complete_by_solver(m: &SutModel, t: &Interaction) -> Option<TestCase> {
        let mut f = one_row_formula(m);
        for &(param, value) in t.pairs() {
            f.add_clause(vec![f.cell(0, param, value)]);
        }
        match solve(&f, None) {
            SatOutcome::Sat(a) => Some(f.decode_rows(&a).pop().expect("one row")),
            _ => None,
        }
    }

    pub fn complete_by_enumeration(m: &SutModel, t: &Interaction) -> Option<TestCase> {
        all_assignments(m).find(|tc| is_valid(m, tc) && t.covered_by(tc))
    }

    pub fn unmasking_by_solver(m: &SutModel, set: &InteractionSet, t: &Interaction) -> bool {
        let mut f = one_row_formula(m);
        for &(param, value) in t.pairs() {
            f.add_clause(vec![f.cell(0, param, value)]);
        }
        for member in set.iter() {
            let clause: Vec<Lit> = member
                .pairs()
                .iter()
                .map(|&(param, value)| -f.cell(0, param, value))
                .collect();
            f.add_clause(clause);
        }
        matches!(solve(&f, None), SatOutcome::Sat(_))
    }

    pub fn unmasking_by_enumeration(m: &SutModel, set: &InteractionSet, t: &Interaction) -> bool {
        all_assignments(m).any(|tc| {
            is_valid(m, &tc)
                && t.covered_by(&tc)
                && set.iter().all(|member| !member.covered_by(&tc))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::Interaction;
    use crate::model::parse_model;

    fn shopping() -> SutModel {
        parse_model(include_str!("../../../../fixtures/shopping.sut")).unwrap()
    }

    fn ia(pairs: &[(usize, usize)]) -> Interaction {
        Interaction::new(pairs.to_vec()).unwrap()
    }

    #[test]
    fn eval_on_the_shopping_model() {
        let m = shopping();
        assert!(is_valid(&m, &TestCase::new(vec![0, 0, 0, 0])));
        assert!(!is_valid(&m, &TestCase::new(vec![0, 1, 0, 0])));
    }

    #[test]
    fn eval_true_everywhere() {
        let m = parse_model("model \"m\"; param a : x | y ;").unwrap();
        for tc in all_assignments(&m) {
            assert!(is_valid(&m, &tc));
        }
    }

    #[test]
    fn complete_detects_invalid_interaction() {
        let m = shopping();
        // international address with same-day shipping
        assert_eq!(complete(&m, &ia(&[(1, 1), (2, 0)])), None);
    }

    #[test]
    fn complete_on_empty_interaction() {
        let m = shopping();
        let tc = complete(&m, &Interaction::empty()).unwrap();
        assert!(is_valid(&m, &tc));
    }

    #[test]
    fn complete_gift_card_forces_domestic_same_day() {
        let m = shopping();
        let tc = complete(&m, &ia(&[(3, 3)])).unwrap();
        assert_eq!(tc.values[1], 0);
        assert_eq!(tc.values[2], 0);
    }

    #[test]
    fn unmasking_examples_from_shopping_model() {
        let m = shopping();
        let set1 = InteractionSet::from_iter([ia(&[(0, 0), (1, 0)])]);
        assert!(!check_unmasking(&m, &set1, &ia(&[(0, 0), (2, 0)])));

        assert!(check_unmasking(
            &m,
            &InteractionSet::default(),
            &ia(&[(0, 0), (2, 0)])
        ));

        let set4 = InteractionSet::from_iter([ia(&[(2, 0), (3, 3)])]);
        assert!(!check_unmasking(&m, &set4, &ia(&[(1, 0), (3, 3)])));
    }

    #[test]
    fn solve_contradictory_cells_unsat() {
        let m = parse_model("model \"m\"; param a : x | y ;").unwrap();
        let mut f = one_row_formula(&m);
        f.add_clause(vec![f.cell(0, 0, 0)]);
        f.add_clause(vec![f.cell(0, 0, 1)]);
        assert_eq!(solve(&f, None), SatOutcome::Unsat);
    }

    #[test]
    fn solve_one_row_decodes_to_valid_case() {
        let m = shopping();
        let f = one_row_formula(&m);
        match solve(&f, None) {
            SatOutcome::Sat(a) => {
                let row = f.decode_rows(&a).pop().unwrap();
                assert!(is_valid(&m, &row));
            }
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn solve_empty_formula_is_sat() {
        let m = parse_model("model \"m\"; param a : x | y ;").unwrap();
        // A zero-row layout has no variables and no clauses.
        let f = PropFormula::for_rows(&m, 0);
        assert_eq!(solve(&f, None), SatOutcome::Sat(vec![false]));
    }

    /// Every model of the one-row encoding decodes to a valid test case and
    /// every valid test case appears as a model: enumerate models with
    /// blocking clauses and compare with the exhaustive filter.
    #[test]
    fn one_row_encoding_is_sound_and_complete() {
        for text in [
            include_str!("../../../../fixtures/shopping.sut"),
            "model \"m\"; param a : x | y ; param b : u | v | w ; constraint a = x -> b != u ;",
            "model \"m\"; param a : x | y ; constraint FALSE ;",
        ] {
            let m = parse_model(text).unwrap();
            let mut f = one_row_formula(&m);
            let mut decoded = std::collections::BTreeSet::new();
            loop {
                match solve(&f, None) {
                    SatOutcome::Sat(a) => {
                        let row = f.decode_rows(&a).pop().unwrap();
                        let blocking: Vec<Lit> =
                            (0..m.k()).map(|p| -f.cell(0, p, row.values[p])).collect();
                        assert!(decoded.insert(row), "duplicate model decode");
                        f.add_clause(blocking);
                    }
                    SatOutcome::Unsat => break,
                    SatOutcome::BudgetExceeded => unreachable!(),
                }
            }
            let expected: std::collections::BTreeSet<_> =
                exhaustive_suite(&m).into_iter().collect();
            assert_eq!(decoded, expected);
        }
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let m = shopping();
        let f = one_row_formula(&m);
        assert_eq!(solve(&f, Some(Duration::ZERO)), SatOutcome::BudgetExceeded);
    }
}
