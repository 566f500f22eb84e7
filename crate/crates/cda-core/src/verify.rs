//! Definition-level verification of covering, locating, and detecting
//! arrays, with violation witnesses.
//!
//! The detecting and locating checks sweep candidate pairs lazily in
//! canonical order and stop at the first violation; a full witness list is
//! available behind [`VerifyOptions::all_witnesses`]. All four variants
//! (exact / at-most on both the set size and the strength) share one
//! enumeration core. These verifiers double as the brute-force reference
//! the randomized theorem suite checks the generators against.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::bits::Bits;
use crate::cca::TestArray;
use crate::constraints::{self, ENUMERATION_CUTOFF};
use crate::interactions::{
    self, enumerate_valid, rho, rho_single, CoverMap, Interaction, InteractionSet, PAIR_CAP,
};
use crate::model::{SutModel, TestCase};
use crate::{Error, Result};

/// Exact or at-most quantification for the set size `d` and strength `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    AtMost,
}

/// Which of the four array variants is being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Variant {
    pub d_mode: Mode,
    pub t_mode: Mode,
}

impl Variant {
    pub const EXACT: Variant = Variant {
        d_mode: Mode::Exact,
        t_mode: Mode::Exact,
    };
    pub const AT_MOST_D: Variant = Variant {
        d_mode: Mode::AtMost,
        t_mode: Mode::Exact,
    };
    pub const AT_MOST_T: Variant = Variant {
        d_mode: Mode::Exact,
        t_mode: Mode::AtMost,
    };
    pub const AT_MOST_BOTH: Variant = Variant {
        d_mode: Mode::AtMost,
        t_mode: Mode::AtMost,
    };
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d = match self.d_mode {
            Mode::Exact => "d",
            Mode::AtMost => "d*",
        };
        let t = match self.t_mode {
            Mode::Exact => "t",
            Mode::AtMost => "t*",
        };
        write!(f, "({d},{t})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// A valid interaction no row covers.
    CoverageMiss,
    /// A non-masking pair whose target rows are swallowed by the set rows.
    CdaPair,
    /// Two distinguishable sets with identical covering rows.
    ClaPair,
}

/// A reproducible witness: replaying the reported row sets against the
/// array recreates the failure.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The uncovered or masked-in-array target interaction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Interaction>,
    /// The interaction set of a detecting pair, or the first locating set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<InteractionSet>,
    /// The second locating set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set2: Option<InteractionSet>,
    /// Rows covering the target (or first set).
    pub rows_target: BTreeSet<usize>,
    /// Rows covering the set (or second set).
    pub rows_set: BTreeSet<usize>,
}

/// Outcome of a verification run.
#[derive(Debug, Clone)]
pub enum Verdict {
    Pass,
    Fail(Violation),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(v) => Some(v),
        }
    }
}

/// Knobs for the pairwise sweeps.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Cap on enumerated candidate pairs; exceeding it is an error.
    pub pair_cap: u128,
    /// Collect every violation instead of stopping at the first.
    pub all_witnesses: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            pair_cap: PAIR_CAP,
            all_witnesses: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Covering
// ---------------------------------------------------------------------------

/// Checks that every valid `t`-way interaction is covered by some row.
pub fn is_cca(m: &SutModel, a: &TestArray, t: usize) -> Verdict {
    for target in enumerate_valid(m, t, false) {
        let rows = rho_single(a.rows(), &target);
        if rows.is_empty() {
            return Verdict::Fail(Violation {
                kind: ViolationKind::CoverageMiss,
                target: Some(target),
                set: None,
                set2: None,
                rows_target: BTreeSet::new(),
                rows_set: BTreeSet::new(),
            });
        }
    }
    Verdict::Pass
}

// ---------------------------------------------------------------------------
// Masking oracle shared by the pairwise sweeps
// ---------------------------------------------------------------------------

/// Answers masking queries either through bitsets over the exhaustive suite
/// (small models) or through per-pair satisfiability queries.
struct MaskChecker<'m> {
    m: &'m SutModel,
    suite_cover: Option<CoverMap>,
    scratch: Bits,
}

impl<'m> MaskChecker<'m> {
    fn new(m: &'m SutModel, base: &[Interaction]) -> MaskChecker<'m> {
        let desk = m
            .total_assignments()
            .is_some_and(|n| n <= ENUMERATION_CUTOFF);
        let suite_cover = desk.then(|| {
            let suite = constraints::exhaustive_suite(m);
            CoverMap::build(&suite, base.iter())
        });
        let scratch = Bits::empty(suite_cover.as_ref().map_or(0, |c| c.n_rows));
        MaskChecker {
            m,
            suite_cover,
            scratch,
        }
    }

    /// True iff `set` does not mask `target` (`target` not in `set`).
    fn unmasked(&mut self, set: &InteractionSet, target: &Interaction) -> bool {
        let MaskChecker {
            m,
            suite_cover,
            scratch,
        } = self;
        match suite_cover {
            Some(cover) => {
                cover.union_into(set, scratch);
                cover.bits(target).any_outside(scratch)
            }
            None => constraints::check_unmasking(m, set, target),
        }
    }

    /// Row sets over the exhaustive suite are equal, i.e. the two sets are
    /// indistinguishable on every array of valid rows.
    fn same_suite_rows(&mut self, s1: &InteractionSet, s2: &InteractionSet) -> bool {
        let MaskChecker {
            m,
            suite_cover,
            scratch,
        } = self;
        match suite_cover {
            Some(cover) => {
                cover.union_into(s1, scratch);
                let mut other = Bits::empty(cover.n_rows);
                cover.union_into(s2, &mut other);
                *scratch == other
            }
            None => !distinguishable_by_solver(m, s1, s2),
        }
    }
}

// ---------------------------------------------------------------------------
// Detecting
// ---------------------------------------------------------------------------

/// Checks the `(d, t)` detecting condition under the given variant.
pub fn is_cda(
    m: &SutModel,
    a: &TestArray,
    d: usize,
    t: usize,
    variant: Variant,
) -> Result<Verdict> {
    let mut v = cda_violations(m, a, d, t, variant, &VerifyOptions::default())?;
    Ok(match v.pop() {
        None => Verdict::Pass,
        Some(w) => Verdict::Fail(w),
    })
}

/// As [`is_cda`], returning every violation when requested.
pub fn cda_violations(
    m: &SutModel,
    a: &TestArray,
    d: usize,
    t: usize,
    variant: Variant,
    opts: &VerifyOptions,
) -> Result<Vec<Violation>> {
    let base: Vec<Interaction> = enumerate_valid(m, t, variant.t_mode == Mode::AtMost)
        .into_iter()
        .collect();
    let sizes: Vec<usize> = match variant.d_mode {
        Mode::Exact => vec![d],
        Mode::AtMost => (0..=d).collect(),
    };
    check_pair_budget(&base, &sizes, opts.pair_cap, d, t)?;

    let array_cover = CoverMap::build(a.rows(), base.iter());
    let mut checker = MaskChecker::new(m, &base);
    let mut union_a = Bits::empty(a.len());
    let mut found = Vec::new();

    for &size in &sizes {
        for combo in (0..base.len()).combinations(size) {
            let set: InteractionSet = combo.iter().map(|&i| base[i].clone()).collect();
            if variant.t_mode == Mode::AtMost && !interactions::is_independent(&set) {
                // No target can make the union independent again.
                continue;
            }
            array_cover.union_into(&set, &mut union_a);
            for (i, target) in base.iter().enumerate() {
                if combo.contains(&i) {
                    continue; // membership direction holds trivially
                }
                if variant.t_mode == Mode::AtMost
                    && set
                        .iter()
                        .any(|member| member.is_subset_of(target) || target.is_subset_of(member))
                {
                    continue; // set + target not independent
                }
                if array_cover.bits(target).any_outside(&union_a) {
                    continue; // some row separates the target from the set
                }
                if !checker.unmasked(&set, target) {
                    continue; // exempted: the constraints force the overlap
                }
                found.push(Violation {
                    kind: ViolationKind::CdaPair,
                    target: Some(target.clone()),
                    set: Some(set.clone()),
                    set2: None,
                    rows_target: array_cover.bits(target).iter_ones().collect(),
                    rows_set: union_a.iter_ones().collect(),
                });
                if !opts.all_witnesses {
                    return Ok(found);
                }
            }
        }
    }
    Ok(found)
}

// ---------------------------------------------------------------------------
// Locating
// ---------------------------------------------------------------------------

/// Checks the `(d, t)` locating condition under the given variant: every
/// pair of distinguishable (and, in at-most-strength modes, independent)
/// interaction sets of the variant's cardinality covers distinct row sets.
pub fn is_cla(
    m: &SutModel,
    a: &TestArray,
    d: usize,
    t: usize,
    variant: Variant,
) -> Result<Verdict> {
    let mut v = cla_violations(m, a, d, t, variant, &VerifyOptions::default())?;
    Ok(match v.pop() {
        None => Verdict::Pass,
        Some(w) => Verdict::Fail(w),
    })
}

pub fn cla_violations(
    m: &SutModel,
    a: &TestArray,
    d: usize,
    t: usize,
    variant: Variant,
    opts: &VerifyOptions,
) -> Result<Vec<Violation>> {
    let base: Vec<Interaction> = enumerate_valid(m, t, variant.t_mode == Mode::AtMost)
        .into_iter()
        .collect();
    let sizes: Vec<usize> = match variant.d_mode {
        Mode::Exact => vec![d],
        Mode::AtMost => (0..=d).collect(),
    };

    // Materialize candidate sets of every admissible size.
    let mut subsets: Vec<InteractionSet> = Vec::new();
    let mut count: u128 = 0;
    for &size in &sizes {
        count = count.saturating_add(binomial(base.len(), size));
    }
    if count.saturating_mul(count) / 2 > opts.pair_cap {
        return Err(Error::CombinatorialBudget {
            d,
            t,
            candidates: count.saturating_mul(count) / 2,
            cap: opts.pair_cap,
        });
    }
    for &size in &sizes {
        for combo in (0..base.len()).combinations(size) {
            let set: InteractionSet = combo.iter().map(|&i| base[i].clone()).collect();
            if variant.t_mode == Mode::AtMost && !interactions::is_independent(&set) {
                continue;
            }
            subsets.push(set);
        }
    }

    let array_cover = CoverMap::build(a.rows(), base.iter());
    let mut checker = MaskChecker::new(m, &base);
    let mut covers_a: Vec<Bits> = Vec::with_capacity(subsets.len());
    let mut scratch = Bits::empty(a.len());
    for set in &subsets {
        array_cover.union_into(set, &mut scratch);
        covers_a.push(scratch.clone());
    }

    let mut found = Vec::new();
    for i in 0..subsets.len() {
        for j in i + 1..subsets.len() {
            if covers_a[i] != covers_a[j] {
                continue;
            }
            if checker.same_suite_rows(&subsets[i], &subsets[j]) {
                continue; // indistinguishable pairs are exempt
            }
            found.push(Violation {
                kind: ViolationKind::ClaPair,
                target: None,
                set: Some(subsets[i].clone()),
                set2: Some(subsets[j].clone()),
                rows_target: rho(a.rows(), &subsets[i]),
                rows_set: rho(a.rows(), &subsets[j]),
            });
            if !opts.all_witnesses {
                return Ok(found);
            }
        }
    }
    Ok(found)
}

/// True iff some valid test case covers a member of exactly one of the two
/// sets, i.e. some array of valid rows tells them apart.
pub fn distinguishable(m: &SutModel, s1: &InteractionSet, s2: &InteractionSet) -> bool {
    if m.total_assignments()
        .is_some_and(|n| n <= ENUMERATION_CUTOFF)
    {
        constraints::exhaustive_suite(m).iter().any(|row| {
            let c1 = s1.iter().any(|t| t.covered_by(row));
            let c2 = s2.iter().any(|t| t.covered_by(row));
            c1 != c2
        })
    } else {
        distinguishable_by_solver(m, s1, s2)
    }
}

fn distinguishable_by_solver(m: &SutModel, s1: &InteractionSet, s2: &InteractionSet) -> bool {
    let mut f = constraints::one_row_formula(m);
    let encode_covers_some = |f: &mut constraints::PropFormula, s: &InteractionSet| {
        let members: Vec<constraints::Lit> = s
            .iter()
            .map(|t| {
                let cells: Vec<constraints::Lit> =
                    t.pairs().iter().map(|&(p, v)| f.cell(0, p, v)).collect();
                f.define_conj(&cells)
            })
            .collect();
        f.define_disj(&members)
    };
    let a1 = encode_covers_some(&mut f, s1);
    let a2 = encode_covers_some(&mut f, s2);
    // Exactly one of the two holds.
    f.add_clause(vec![a1, a2]);
    f.add_clause(vec![-a1, -a2]);
    matches!(
        constraints::solve(&f, None),
        constraints::SatOutcome::Sat(_)
    )
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn check_pair_budget(
    base: &[Interaction],
    sizes: &[usize],
    cap: u128,
    d: usize,
    t: usize,
) -> Result<()> {
    let mut candidates: u128 = 0;
    for &size in sizes {
        let combos = binomial(base.len(), size);
        candidates = candidates
            .saturating_add(combos.saturating_mul(base.len().saturating_sub(size) as u128));
    }
    if candidates > cap {
        return Err(Error::CombinatorialBudget {
            d,
            t,
            candidates,
            cap,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Theorem oracles
// ---------------------------------------------------------------------------

/// Bounds for the randomized theorem sweep.
#[derive(Debug, Clone, Copy)]
pub struct TheoremBounds {
    pub max_d: usize,
    pub max_t: usize,
    /// Random arrays sampled from the exhaustive suite per (d, t) point.
    pub sampled_arrays: usize,
    pub seed: u64,
}

impl Default for TheoremBounds {
    fn default() -> Self {
        TheoremBounds {
            max_d: 2,
            max_t: 2,
            sampled_arrays: 3,
            seed: 0,
        }
    }
}

/// One implication checked over generated and sampled arrays.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub name: &'static str,
    /// Cases where the implication's premise held.
    pub cases: usize,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub checks: Vec<TheoremCheck>,
}

impl TheoremReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.counterexample.is_none())
    }
}

/// Exercises the structural facts relating the array classes on one model:
/// the exhaustive suite detects; a strength-`(d+t)` covering array detects
/// in at-most/at-most mode; detecting implies locating implies covering;
/// exact-size and at-most-size verdicts agree below the tau bound; and the
/// at-most/at-most verdict dominates the weaker variants.
///
/// Any counterexample is a bug in either a generator or a verifier.
pub fn theorem_oracles(m: &SutModel, bounds: &TheoremBounds) -> Result<TheoremReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(bounds.seed);

    let suite_rows = constraints::exhaustive_suite(m);
    let suite = TestArray::from_valid_rows(suite_rows.clone());
    let k = m.k();

    let mut exhaustive_detects = TheoremCheck {
        name: "exhaustive-suite-is-cda",
        cases: 0,
        counterexample: None,
    };
    let mut cca_detects = TheoremCheck {
        name: "covering-array-is-at-most-cda",
        cases: 0,
        counterexample: None,
    };
    let mut cda_locates = TheoremCheck {
        name: "cda-implies-cla",
        cases: 0,
        counterexample: None,
    };
    let mut cda_covers = TheoremCheck {
        name: "at-most-cda-implies-cca",
        cases: 0,
        counterexample: None,
    };
    let mut tau_agrees = TheoremCheck {
        name: "exact-equals-at-most-below-tau",
        cases: 0,
        counterexample: None,
    };
    let mut chain = TheoremCheck {
        name: "variant-implication-chain",
        cases: 0,
        counterexample: None,
    };
    let mut downward = TheoremCheck {
        name: "at-most-downward-monotonicity",
        cases: 0,
        counterexample: None,
    };

    for t in 1..=bounds.max_t.min(k) {
        let tau_t = interactions::tau(m, t, bounds.max_d)?;
        for d in 0..=bounds.max_d.min(k.saturating_sub(t)) {
            let mut arrays: Vec<(String, TestArray)> = Vec::new();
            let generated = crate::cca::cca_upper_bound(m, d, t, bounds.seed)?;
            arrays.push((format!("cca(d+t) d={d} t={t}"), generated.clone()));

            // Theorem: the generated covering array detects in the
            // strongest (at-most/at-most) mode.
            cca_detects.cases += 1;
            if let Verdict::Fail(w) = is_cda(m, &generated, d, t, Variant::AT_MOST_BOTH)? {
                cca_detects
                    .counterexample
                    .get_or_insert(format!("d={d} t={t}: {w:?}"));
            }

            // Theorem: the exhaustive suite is a detecting array in every
            // variant.
            for variant in [Variant::EXACT, Variant::AT_MOST_BOTH] {
                exhaustive_detects.cases += 1;
                if let Verdict::Fail(w) = is_cda(m, &suite, d, t, variant)? {
                    exhaustive_detects
                        .counterexample
                        .get_or_insert(format!("d={d} t={t} {variant}: {w:?}"));
                }
            }

            for _ in 0..bounds.sampled_arrays {
                let n = rng.gen_range(1..=suite_rows.len());
                let rows: Vec<TestCase> = (0..n)
                    .map(|_| suite_rows[rng.gen_range(0..suite_rows.len())].clone())
                    .collect();
                arrays.push((
                    format!("sampled n={n} d={d} t={t}"),
                    TestArray::from_valid_rows(rows),
                ));
            }

            for (label, array) in &arrays {
                let exact = is_cda(m, array, d, t, Variant::EXACT)?;
                let at_most_d = is_cda(m, array, d, t, Variant::AT_MOST_D)?;
                let at_most_both = is_cda(m, array, d, t, Variant::AT_MOST_BOTH)?;
                let at_most_t = is_cda(m, array, d, t, Variant::AT_MOST_T)?;

                // Theorem: below the tau bound the exact-size and
                // at-most-size verdicts coincide.
                if d <= tau_t {
                    tau_agrees.cases += 1;
                    if exact.passed() != at_most_d.passed() {
                        tau_agrees.counterexample.get_or_insert(format!(
                            "{label}: exact={} at-most={}",
                            exact.passed(),
                            at_most_d.passed()
                        ));
                    }
                }

                // Observation: at-most/at-most implies both mixed modes,
                // and each mixed mode implies exact/exact.
                chain.cases += 1;
                let ok = (!at_most_both.passed() || (at_most_d.passed() && at_most_t.passed()))
                    && (!at_most_d.passed() || exact.passed())
                    && (!at_most_t.passed() || exact.passed());
                if !ok {
                    chain.counterexample.get_or_insert(format!(
                        "{label}: both={} d*={} t*={} exact={}",
                        at_most_both.passed(),
                        at_most_d.passed(),
                        at_most_t.passed(),
                        exact.passed()
                    ));
                }

                // Theorem: a detecting array locates.
                if exact.passed() {
                    cda_locates.cases += 1;
                    if let Verdict::Fail(w) = is_cla(m, array, d, t, Variant::EXACT)? {
                        cda_locates
                            .counterexample
                            .get_or_insert(format!("{label}: {w:?}"));
                    }
                }

                // Theorem: an at-most-size detecting array covers.
                if at_most_d.passed() {
                    cda_covers.cases += 1;
                    if let Verdict::Fail(w) = is_cca(m, array, t) {
                        cda_covers
                            .counterexample
                            .get_or_insert(format!("{label}: {w:?}"));
                    }
                }

                // Observation: the at-most/at-most property persists when
                // the size bound or the strength bound shrinks.
                if at_most_both.passed() {
                    if d >= 1 {
                        downward.cases += 1;
                        if !is_cda(m, array, d - 1, t, Variant::AT_MOST_BOTH)?.passed() {
                            downward
                                .counterexample
                                .get_or_insert(format!("{label}: fails at d-1"));
                        }
                    }
                    if t >= 2 {
                        downward.cases += 1;
                        if !is_cda(m, array, d, t - 1, Variant::AT_MOST_BOTH)?.passed() {
                            downward
                                .counterexample
                                .get_or_insert(format!("{label}: fails at t-1"));
                        }
                    }
                }
            }
        }
    }

    Ok(TheoremReport {
        checks: vec![
            exhaustive_detects,
            cca_detects,
            cda_locates,
            cda_covers,
            tau_agrees,
            chain,
            downward,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn shopping() -> SutModel {
        parse_model(include_str!("../../../fixtures/shopping.sut")).unwrap()
    }

    fn array(m: &SutModel, rows: &[[usize; 4]]) -> TestArray {
        TestArray::new(m, rows.iter().map(|r| TestCase::new(r.to_vec())).collect()).unwrap()
    }

    fn ia(pairs: &[(usize, usize)]) -> Interaction {
        Interaction::new(pairs.to_vec()).unwrap()
    }

    const CCA2: [[usize; 4]; 12] = [
        [0, 0, 0, 0],
        [0, 0, 0, 3],
        [0, 1, 1, 1],
        [0, 1, 2, 2],
        [1, 0, 0, 2],
        [1, 0, 0, 3],
        [1, 0, 2, 1],
        [1, 1, 1, 0],
        [2, 0, 0, 1],
        [2, 0, 0, 3],
        [2, 0, 1, 2],
        [2, 1, 2, 0],
    ];

    const CDA11: [[usize; 4]; 8] = [
        [0, 0, 0, 0],
        [0, 1, 2, 1],
        [1, 0, 0, 3],
        [1, 0, 1, 1],
        [1, 1, 1, 2],
        [2, 0, 0, 3],
        [2, 0, 2, 2],
        [2, 1, 1, 0],
    ];

    #[test]
    fn the_12_row_array_covers_pairs() {
        let m = shopping();
        assert!(is_cca(&m, &array(&m, &CCA2), 2).passed());
    }

    #[test]
    fn deleting_a_row_breaks_coverage_with_a_witness() {
        let m = shopping();
        let mut rows = CCA2.to_vec();
        rows.remove(11); // the only row with price=usd1000, method=seven_day
        let a = array(&m, &rows);
        match is_cca(&m, &a, 2) {
            Verdict::Fail(w) => {
                assert_eq!(w.kind, ViolationKind::CoverageMiss);
                let target = w.target.unwrap();
                // The witness must be one of the interactions only row 11 covered.
                let full = array(&m, &CCA2);
                let rows_in_full = rho_single(full.rows(), &target);
                assert_eq!(rows_in_full, BTreeSet::from([11]));
            }
            Verdict::Pass => panic!("expected a coverage miss"),
        }
    }

    #[test]
    fn empty_array_misses_coverage() {
        let m = shopping();
        let a = TestArray::new(&m, vec![]).unwrap();
        assert!(!is_cca(&m, &a, 1).passed());
    }

    #[test]
    fn the_24_row_array_is_a_12_detecting_array() {
        let m = shopping();
        let rows: Vec<TestCase> = crate::interactions::tests::da24_rows();
        let a = TestArray::new(&m, rows).unwrap();
        assert!(is_cda(&m, &a, 1, 2, Variant::EXACT).unwrap().passed());
        // The same array in the strongest mode.
        assert!(is_cda(&m, &a, 1, 2, Variant::AT_MOST_BOTH)
            .unwrap()
            .passed());
        // And it locates.
        assert!(is_cla(&m, &a, 1, 2, Variant::EXACT).unwrap().passed());
    }

    #[test]
    fn the_8_row_array_detects_singles_but_not_pairs() {
        let m = shopping();
        let a = array(&m, &CDA11);
        assert!(is_cda(&m, &a, 1, 1, Variant::EXACT).unwrap().passed());
        let verdict = is_cda(&m, &a, 1, 2, Variant::EXACT).unwrap();
        assert!(!verdict.passed());
        // Witness replay: the reported pair really collides in the array
        // and is not exempted by masking.
        let w = verdict.violation().unwrap().clone();
        let target = w.target.unwrap();
        let set = w.set.unwrap();
        assert_eq!(rho_single(a.rows(), &target), w.rows_target);
        assert_eq!(rho(a.rows(), &set), w.rows_set);
        assert!(w.rows_target.is_subset(&w.rows_set));
        assert!(!interactions::is_masking(&m, &set, &target));
    }

    #[test]
    fn exhaustive_suite_detects_everything_small() {
        let m = shopping();
        let suite = TestArray::from_valid_rows(constraints::exhaustive_suite(&m));
        for d in 0..=2 {
            for t in 1..=2 {
                assert!(
                    is_cda(&m, &suite, d, t, Variant::EXACT).unwrap().passed(),
                    "d={d} t={t}"
                );
            }
        }
    }

    #[test]
    fn the_17_row_array_locates_at_most_one_pair() {
        let m = shopping();
        let rows: [[usize; 4]; 17] = [
            [0, 0, 0, 0],
            [0, 0, 0, 3],
            [0, 0, 1, 1],
            [0, 1, 1, 2],
            [0, 1, 2, 0],
            [1, 0, 0, 2],
            [1, 0, 0, 3],
            [1, 0, 1, 2],
            [1, 1, 1, 1],
            [1, 1, 2, 0],
            [1, 1, 2, 2],
            [2, 0, 0, 1],
            [2, 0, 0, 3],
            [2, 0, 2, 0],
            [2, 1, 1, 0],
            [2, 1, 1, 2],
            [2, 1, 2, 1],
        ];
        let a = array(&m, &rows);
        assert!(is_cla(&m, &a, 1, 2, Variant::AT_MOST_D).unwrap().passed());
    }

    #[test]
    fn the_plain_covering_array_does_not_locate_pairs() {
        let m = shopping();
        let a = array(&m, &CCA2);
        let verdict = is_cla(&m, &a, 1, 2, Variant::EXACT).unwrap();
        let w = verdict.violation().expect("a covering array cannot locate");
        // Witness replay: the two reported sets are distinguishable yet
        // cover identical rows of this array.
        let s1 = w.set.clone().unwrap();
        let s2 = w.set2.clone().unwrap();
        assert!(distinguishable(&m, &s1, &s2));
        assert_eq!(rho(a.rows(), &s1), rho(a.rows(), &s2));
        assert_eq!(w.rows_target, w.rows_set);
    }

    #[test]
    fn distinguishable_examples() {
        let m = shopping();
        let s1 = InteractionSet::from_iter([ia(&[(1, 0), (3, 3)])]);
        let s2 = InteractionSet::from_iter([ia(&[(2, 0), (3, 3)])]);
        assert!(!distinguishable(&m, &s1, &s2));
        assert!(!distinguishable(&m, &s1, &s1));
        let s3 = InteractionSet::from_iter([ia(&[(0, 0)])]);
        let s4 = InteractionSet::from_iter([ia(&[(0, 1)])]);
        assert!(distinguishable(&m, &s3, &s4));
        // The solver-backed path agrees with the enumeration path.
        assert!(!distinguishable_by_solver(&m, &s1, &s2));
        assert!(distinguishable_by_solver(&m, &s3, &s4));
    }

    #[test]
    fn theorem_oracles_pass_on_the_shopping_model() {
        let m = shopping();
        let report = theorem_oracles(
            &m,
            &TheoremBounds {
                max_d: 1,
                max_t: 2,
                sampled_arrays: 2,
                seed: 1,
            },
        )
        .unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert!(report.checks.iter().all(|c| c.cases > 0), "{report:?}");
    }

    #[test]
    fn budget_cap_is_enforced() {
        let m = shopping();
        let a = array(&m, &CCA2);
        let err = cda_violations(
            &m,
            &a,
            1,
            2,
            Variant::EXACT,
            &VerifyOptions {
                pair_cap: 10,
                all_witnesses: false,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::CombinatorialBudget { .. }));
    }
}
