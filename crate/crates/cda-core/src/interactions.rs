//! Interactions (partial assignments) and their algebra: coverage, row
//! sets, validity, independence, masking, and the universe of non-masking
//! pairs that drives both generators and the verifiers.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::bits::Bits;
use crate::constraints::{self, ENUMERATION_CUTOFF};
use crate::model::{SutModel, TestCase};
use crate::{Error, Result};

/// A set of (parameter, value) pairs with strictly increasing parameter
/// indices. The empty interaction is first-class: it has strength 0 and is
/// covered by every test case.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Interaction {
    pairs: Vec<(usize, usize)>,
}

impl Interaction {
    /// Builds an interaction from pairs, sorting by parameter.
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Interaction> {
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Format(
                "interaction mentions a parameter twice".into(),
            ));
        }
        Ok(Interaction { pairs })
    }

    pub fn empty() -> Interaction {
        Interaction::default()
    }

    pub fn strength(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn value_at(&self, param: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&param, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// True iff the test case agrees with every pair.
    pub fn covered_by(&self, tc: &TestCase) -> bool {
        self.pairs.iter().all(|&(p, v)| tc.values[p] == v)
    }

    pub fn is_subset_of(&self, other: &Interaction) -> bool {
        self.pairs
            .iter()
            .all(|&(p, v)| other.value_at(p) == Some(v))
    }

    /// All pairs fall inside the model's parameter and value ranges.
    pub fn in_domain(&self, m: &SutModel) -> bool {
        self.pairs
            .iter()
            .all(|&(p, v)| p < m.k() && v < m.domain_size(p))
    }

    /// Human-readable form using the model's symbolic names.
    pub fn label(&self, m: &SutModel) -> String {
        if self.pairs.is_empty() {
            return "{}".into();
        }
        let body = self
            .pairs
            .iter()
            .map(|&(p, v)| format!("{}={}", m.parameters[p].name, m.value_name(p, v)))
            .join(",");
        format!("{{{body}}}")
    }
}

/// True iff the test case covers the interaction.
pub fn covers(tc: &TestCase, t: &Interaction) -> bool {
    t.covered_by(tc)
}

/// A deduplicated set of interactions with deterministic iteration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct InteractionSet(BTreeSet<Interaction>);

impl InteractionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, t: Interaction) -> bool {
        self.0.insert(t)
    }

    pub fn contains(&self, t: &Interaction) -> bool {
        self.0.contains(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interaction> + Clone {
        self.0.iter()
    }
}

impl FromIterator<Interaction> for InteractionSet {
    fn from_iter<I: IntoIterator<Item = Interaction>>(iter: I) -> Self {
        InteractionSet(iter.into_iter().collect())
    }
}

impl IntoIterator for InteractionSet {
    type Item = Interaction;
    type IntoIter = std::collections::btree_set::IntoIter<Interaction>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a InteractionSet {
    type Item = &'a Interaction;
    type IntoIter = std::collections::btree_set::Iter<'a, Interaction>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

// ---------------------------------------------------------------------------
// Row sets
// ---------------------------------------------------------------------------

/// Indices of rows covering the interaction.
pub fn rho_single(rows: &[TestCase], t: &Interaction) -> BTreeSet<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, row)| t.covered_by(row))
        .map(|(i, _)| i)
        .collect()
}

/// Indices of rows covering at least one member of the set.
pub fn rho(rows: &[TestCase], set: &InteractionSet) -> BTreeSet<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, row)| set.iter().any(|t| t.covered_by(row)))
        .map(|(i, _)| i)
        .collect()
}

/// Precomputed coverage bitsets for a family of interactions over a fixed
/// row list; the working representation behind masking checks and the
/// verifiers.
#[derive(Debug)]
pub(crate) struct CoverMap {
    pub n_rows: usize,
    map: std::collections::BTreeMap<Interaction, Bits>,
}

impl CoverMap {
    pub fn build<'a>(
        rows: &[TestCase],
        items: impl IntoIterator<Item = &'a Interaction>,
    ) -> CoverMap {
        let mut map = std::collections::BTreeMap::new();
        for t in items {
            let mut bits = Bits::empty(rows.len());
            for (i, row) in rows.iter().enumerate() {
                if t.covered_by(row) {
                    bits.set(i);
                }
            }
            map.insert(t.clone(), bits);
        }
        CoverMap {
            n_rows: rows.len(),
            map,
        }
    }

    pub fn bits(&self, t: &Interaction) -> &Bits {
        &self.map[t]
    }

    /// Union of the members' row sets, written into `out`.
    pub fn union_into(&self, set: &InteractionSet, out: &mut Bits) {
        out.clear();
        for t in set.iter() {
            out.union_with(self.bits(t));
        }
    }
}

// ---------------------------------------------------------------------------
// Validity and masking
// ---------------------------------------------------------------------------

/// All interactions of strength exactly `t` (or at most `t`), valid or not.
pub(crate) fn enumerate_all(m: &SutModel, t: usize, at_most: bool) -> Vec<Interaction> {
    let strengths = if at_most { 0..=t } else { t..=t };
    let mut out = Vec::new();
    for s in strengths {
        for params in (0..m.k()).combinations(s) {
            let mut stack: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
            for &p in &params {
                let mut next = Vec::new();
                for prefix in &stack {
                    for v in 0..m.domain_size(p) {
                        let mut ext = prefix.clone();
                        ext.push((p, v));
                        next.push(ext);
                    }
                }
                stack = next;
            }
            for pairs in stack {
                out.push(Interaction { pairs });
            }
        }
    }
    out
}

/// The set of valid interactions of strength `t` (exactly, or at most when
/// `at_most` is set). An interaction is valid iff some valid test case
/// covers it.
pub fn enumerate_valid(m: &SutModel, t: usize, at_most: bool) -> InteractionSet {
    let candidates = enumerate_all(m, t, at_most);
    if m.total_assignments()
        .is_some_and(|n| n <= ENUMERATION_CUTOFF)
    {
        let suite = constraints::exhaustive_suite(m);
        candidates
            .into_iter()
            .filter(|t| suite.iter().any(|row| t.covered_by(row)))
            .collect()
    } else {
        candidates
            .into_iter()
            .filter(|t| constraints::complete(m, t).is_some())
            .collect()
    }
}

/// True iff no member of the set is a subset of a distinct member.
pub fn is_independent(set: &InteractionSet) -> bool {
    set.iter()
        .tuple_combinations()
        .all(|(a, b)| !a.is_subset_of(b) && !b.is_subset_of(a))
}

/// True iff `set` masks `t`: `t` is not in `set`, and every valid test
/// case covering `t` also covers some member of `set`.
pub fn is_masking(m: &SutModel, set: &InteractionSet, t: &Interaction) -> bool {
    !set.contains(t) && !constraints::check_unmasking(m, set, t)
}

/// The universe of non-masking pairs for `(d, t)`: every pair of a size-`d`
/// subset of the valid `t`-way interactions and a valid `t`-way interaction
/// outside it that the subset does not mask.
#[derive(Debug, Clone)]
pub struct MaskingUniverse {
    pub d: usize,
    pub t: usize,
    /// Non-masking pairs in canonical (lexicographic) order.
    pub pairs: Vec<(InteractionSet, Interaction)>,
    /// Count of masked pairs over the same index set.
    pub masked_pairs: u64,
}

/// Default cap on the candidate pair count enumerated by
/// [`compute_universe`] (and by the pairwise verifier sweeps).
pub const PAIR_CAP: u128 = 100_000_000;

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

/// Enumerates the non-masking universe for `(d, t)`.
pub fn compute_universe(m: &SutModel, d: usize, t: usize) -> Result<MaskingUniverse> {
    compute_universe_capped(m, d, t, PAIR_CAP)
}

pub fn compute_universe_capped(
    m: &SutModel,
    d: usize,
    t: usize,
    cap: u128,
) -> Result<MaskingUniverse> {
    let base: Vec<Interaction> = enumerate_valid(m, t, false).into_iter().collect();
    let candidates =
        binomial(base.len(), d).saturating_mul((base.len() - d.min(base.len())) as u128);
    if candidates > cap {
        return Err(Error::CombinatorialBudget {
            d,
            t,
            candidates,
            cap,
        });
    }

    let desk = m
        .total_assignments()
        .is_some_and(|n| n <= ENUMERATION_CUTOFF);
    let cover = if desk {
        let suite = constraints::exhaustive_suite(m);
        Some(CoverMap::build(&suite, base.iter()))
    } else {
        None
    };

    let mut pairs = Vec::new();
    let mut masked: u64 = 0;
    let mut union = Bits::empty(cover.as_ref().map_or(0, |c| c.n_rows));
    for combo in (0..base.len()).combinations(d) {
        let set: InteractionSet = combo.iter().map(|&i| base[i].clone()).collect();
        if let Some(cover) = &cover {
            cover.union_into(&set, &mut union);
        }
        for (i, target) in base.iter().enumerate() {
            if combo.contains(&i) {
                continue;
            }
            let unmasked = match &cover {
                Some(cover) => cover.bits(target).any_outside(&union),
                None => constraints::check_unmasking(m, &set, target),
            };
            if unmasked {
                pairs.push((set.clone(), target.clone()));
            } else {
                masked += 1;
            }
        }
    }
    Ok(MaskingUniverse {
        d,
        t,
        pairs,
        masked_pairs: masked,
    })
}

/// True iff the rows separate every pair of the universe: for each
/// `(set, target)` some row covers the target and no member of the set.
///
/// Recomputes coverage from scratch, so generators can cross-check their
/// incremental state against it; equivalent to the exact-mode detecting
/// condition whenever the universe matches `(d, t)`.
pub fn satisfies_universe(rows: &[TestCase], universe: &MaskingUniverse) -> bool {
    let mut items: BTreeSet<&Interaction> = BTreeSet::new();
    for (set, target) in &universe.pairs {
        items.insert(target);
        items.extend(set.iter());
    }
    let cover = CoverMap::build(rows, items);
    let mut union = Bits::empty(rows.len());
    universe.pairs.iter().all(|(set, target)| {
        cover.union_into(set, &mut union);
        cover.bits(target).any_outside(&union)
    })
}

// ---------------------------------------------------------------------------
// The tau bound
// ---------------------------------------------------------------------------

/// Largest `tau <= cap` such that every set of at most `tau` valid `t`-way
/// interactions leaves some valid test case uncovered; 0 when `t` is 0.
///
/// Brute force over the exhaustive suite; a desk-scale diagnostic.
pub fn tau(m: &SutModel, t: usize, cap: usize) -> Result<usize> {
    if t == 0 {
        return Ok(0);
    }
    if !m
        .total_assignments()
        .is_some_and(|n| n <= ENUMERATION_CUTOFF)
    {
        return Err(Error::EnumerationBudget(format!(
            "assignment space exceeds {ENUMERATION_CUTOFF}"
        )));
    }
    let suite = constraints::exhaustive_suite(m);
    let base: Vec<Interaction> = enumerate_valid(m, t, false).into_iter().collect();
    let cover = CoverMap::build(&suite, base.iter());

    const SUBSET_CAP: u128 = 5_000_000;
    let mut result = 0;
    for size in 1..=cap {
        if size > base.len() {
            // No larger subsets exist; the condition holds vacuously.
            result = cap;
            break;
        }
        if binomial(base.len(), size) > SUBSET_CAP {
            return Err(Error::EnumerationBudget(format!(
                "more than {SUBSET_CAP} subsets of size {size}"
            )));
        }
        let mut union = Bits::empty(suite.len());
        let all_covered = (0..base.len()).combinations(size).any(|combo| {
            union.clear();
            for &i in &combo {
                union.union_with(cover.bits(&base[i]));
            }
            (0..suite.len()).all(|r| union.get(r))
        });
        if all_covered {
            break;
        }
        result = size;
    }
    Ok(result)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::parse_model;

    fn shopping() -> SutModel {
        parse_model(include_str!("../../../fixtures/shopping.sut")).unwrap()
    }

    pub(crate) fn ia(pairs: &[(usize, usize)]) -> Interaction {
        Interaction::new(pairs.to_vec()).unwrap()
    }

    /// Rows of the 24-row (1,2) detecting array fixture, by value index.
    pub(crate) const DA24: [[usize; 4]; 24] = [
        [0, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 0, 3],
        [0, 0, 1, 1],
        [0, 0, 2, 2],
        [0, 1, 1, 2],
        [0, 1, 2, 0],
        [0, 1, 2, 1],
        [1, 0, 0, 2],
        [1, 0, 0, 3],
        [1, 0, 1, 0],
        [1, 0, 2, 1],
        [1, 1, 1, 1],
        [1, 1, 2, 0],
        [1, 1, 2, 2],
        [2, 0, 0, 0],
        [2, 0, 0, 1],
        [2, 0, 0, 2],
        [2, 0, 0, 3],
        [2, 0, 1, 2],
        [2, 0, 2, 0],
        [2, 1, 1, 0],
        [2, 1, 1, 1],
        [2, 1, 2, 2],
    ];

    pub(crate) fn da24_rows() -> Vec<TestCase> {
        DA24.iter().map(|r| TestCase::new(r.to_vec())).collect()
    }

    #[test]
    fn covers_basics() {
        let tc = TestCase::new(vec![0, 0, 0, 0]);
        assert!(covers(&tc, &ia(&[(0, 0), (1, 0)])));
        let tc2 = TestCase::new(vec![0, 1, 2, 1]);
        assert!(!covers(&tc2, &ia(&[(2, 0)])));
        assert!(covers(&tc2, &Interaction::empty()));
    }

    #[test]
    fn interaction_rejects_duplicate_parameter() {
        assert!(Interaction::new(vec![(1, 0), (1, 1)]).is_err());
    }

    #[test]
    fn rho_on_the_24_row_array() {
        let rows = da24_rows();
        // {price=usd50, payment=gift_card} is covered only by the third row.
        let tb = InteractionSet::from_iter([ia(&[(0, 0), (3, 3)])]);
        assert_eq!(rho(&rows, &tb), BTreeSet::from([2]));

        assert_eq!(rho(&rows, &InteractionSet::default()), BTreeSet::new());

        let t3 = InteractionSet::from_iter([ia(&[(1, 0), (2, 0)])]);
        assert_eq!(
            rho(&rows, &t3),
            BTreeSet::from([0, 1, 2, 8, 9, 15, 16, 17, 18])
        );

        let all = InteractionSet::from_iter([Interaction::empty()]);
        assert_eq!(rho(&rows, &all).len(), rows.len());
    }

    #[test]
    fn valid_two_way_counts_match_the_shopping_model() {
        let m = shopping();
        let valid = enumerate_valid(&m, 2, false);
        assert_eq!(valid.len(), 49);
        let all = enumerate_all(&m, 2, false);
        assert_eq!(all.len(), 53);
        let invalid: Vec<Interaction> = all.into_iter().filter(|t| !valid.contains(t)).collect();
        let expected = [
            ia(&[(1, 1), (2, 0)]),
            ia(&[(1, 1), (3, 3)]),
            ia(&[(2, 2), (3, 3)]),
            ia(&[(2, 1), (3, 3)]),
        ];
        assert_eq!(invalid.len(), 4);
        for t in &expected {
            assert!(invalid.contains(t), "missing {t:?}");
        }
    }

    #[test]
    fn strength_zero_yields_the_empty_interaction() {
        let m = shopping();
        let set = enumerate_valid(&m, 0, false);
        assert_eq!(set.len(), 1);
        assert!(set.contains(&Interaction::empty()));
    }

    #[test]
    fn independence_checks() {
        let a = ia(&[(0, 0)]);
        let ab = ia(&[(0, 0), (1, 0)]);
        let c = ia(&[(1, 1)]);
        assert!(!is_independent(&InteractionSet::from_iter([
            a.clone(),
            ab.clone()
        ])));
        assert!(is_independent(&InteractionSet::from_iter([
            a.clone(),
            c.clone()
        ])));
        assert!(!is_independent(&InteractionSet::from_iter([
            Interaction::empty(),
            a.clone()
        ])));
    }

    #[test]
    fn masking_examples() {
        let m = shopping();
        // {price=usd500, address=domestic} masks {price=usd500, method=same_day}
        let set2 = InteractionSet::from_iter([ia(&[(0, 1), (1, 0)])]);
        assert!(is_masking(&m, &set2, &ia(&[(0, 1), (2, 0)])));

        // A set never masks its own member.
        let t = ia(&[(0, 1), (1, 0)]);
        assert!(!is_masking(&m, &set2, &t));

        let set4 = InteractionSet::from_iter([ia(&[(2, 0), (3, 3)])]);
        assert!(is_masking(&m, &set4, &ia(&[(0, 2), (3, 3)])));
    }

    #[test]
    fn universe_of_the_shopping_model() {
        let m = shopping();
        let u = compute_universe(&m, 1, 2).unwrap();
        assert_eq!(u.masked_pairs, 31);
        assert_eq!(u.pairs.len(), 49 * 48 - 31);
    }

    #[test]
    fn universe_with_d_zero_pairs_every_valid_interaction_with_empty_set() {
        let m = shopping();
        let u = compute_universe(&m, 0, 2).unwrap();
        assert_eq!(u.masked_pairs, 0);
        assert_eq!(u.pairs.len(), 49);
        assert!(u.pairs.iter().all(|(s, _)| s.is_empty()));
    }

    #[test]
    fn universe_members_pass_check_unmasking_and_the_complement_fails() {
        let m = shopping();
        let u = compute_universe(&m, 1, 1).unwrap();
        for (set, t) in &u.pairs {
            assert!(constraints::check_unmasking(&m, set, t));
        }
        // Complement count: every pair is either in the universe or masked.
        let n = enumerate_valid(&m, 1, false).len() as u64;
        assert_eq!(u.pairs.len() as u64 + u.masked_pairs, n * (n - 1));
        // And the complement really fails the unmasking check.
        let valid: Vec<Interaction> = enumerate_valid(&m, 1, false).into_iter().collect();
        let mut masked_seen = 0u64;
        for blocker in &valid {
            for target in &valid {
                if blocker == target {
                    continue;
                }
                let set = InteractionSet::from_iter([blocker.clone()]);
                if !u.pairs.contains(&(set.clone(), target.clone())) {
                    assert!(!constraints::check_unmasking(&m, &set, target));
                    masked_seen += 1;
                }
            }
        }
        assert_eq!(masked_seen, u.masked_pairs);
    }

    #[test]
    fn satisfies_universe_matches_the_exact_verifier() {
        let m = shopping();
        let u = compute_universe(&m, 1, 1).unwrap();
        let suite = constraints::exhaustive_suite(&m);
        assert!(satisfies_universe(&suite, &u));
        assert!(!satisfies_universe(&suite[..1], &u));
    }

    #[test]
    fn tau_rejects_oversized_models() {
        let mut text = String::from("model \"wide\";\n");
        for i in 0..13 {
            text.push_str(&format!("param p{i} : a | b ;\n"));
        }
        let m = parse_model(&text).unwrap();
        assert!(matches!(tau(&m, 1, 2), Err(Error::EnumerationBudget(_))));
    }

    #[test]
    fn universe_budget_error_on_absurd_cap() {
        let m = shopping();
        let err = compute_universe_capped(&m, 1, 2, 10).unwrap_err();
        assert!(matches!(err, Error::CombinatorialBudget { .. }));
    }

    #[test]
    fn tau_is_zero_at_strength_zero() {
        let m = shopping();
        assert_eq!(tau(&m, 0, 3).unwrap(), 0);
    }

    #[test]
    fn tau_single_binary_parameter() {
        let m = parse_model("model \"m\"; param a : x | y ;").unwrap();
        // Any one 1-way interaction leaves the other row; both together
        // cover everything.
        assert_eq!(tau(&m, 1, 3).unwrap(), 1);
    }

    #[test]
    fn tau_of_the_shopping_model_is_positive() {
        let m = shopping();
        assert!(tau(&m, 2, 2).unwrap() >= 1);
    }

    #[test]
    fn masking_is_monotone_in_the_masking_set() {
        let m = shopping();
        let valid: Vec<Interaction> = enumerate_valid(&m, 2, false).into_iter().collect();
        let t = ia(&[(0, 0), (2, 0)]);
        let small = InteractionSet::from_iter([ia(&[(0, 0), (1, 0)])]);
        assert!(is_masking(&m, &small, &t));
        for extra in valid.iter().take(8) {
            if *extra == t || small.contains(extra) {
                continue;
            }
            let mut bigger = small.clone();
            bigger.insert(extra.clone());
            assert!(is_masking(&m, &bigger, &t), "extra {extra:?}");
        }
    }

    #[test]
    fn exhaustive_suite_has_48_rows() {
        let m = shopping();
        assert_eq!(constraints::exhaustive_suite(&m).len(), 48);
    }
}
