//! Constrained covering array generation by in-parameter-order growth.
//!
//! The generator seeds both detecting-array algorithms: a covering array of
//! strength `d + t` is already a `(d, t)` detecting array, so its size is
//! the upper bound the searches start from.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::constraints;
use crate::interactions::Interaction;
use crate::model::{SutModel, TestCase};
use crate::{Error, Result};

/// An ordered list of test cases. Row identity is the index; duplicates are
/// allowed. Arrays built through [`TestArray::new`] contain only valid rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestArray {
    rows: Vec<TestCase>,
}

impl TestArray {
    /// Builds an array, rejecting rows that are malformed or violate the
    /// model constraints.
    pub fn new(m: &SutModel, rows: Vec<TestCase>) -> Result<TestArray> {
        for (i, row) in rows.iter().enumerate() {
            if !m.in_domain(row) || !constraints::is_valid(m, row) {
                return Err(Error::InvalidRow { row: i });
            }
        }
        Ok(TestArray { rows })
    }

    /// Wraps rows that are already known to be valid.
    pub(crate) fn from_valid_rows(rows: Vec<TestCase>) -> TestArray {
        TestArray { rows }
    }

    pub fn rows(&self) -> &[TestCase] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Partially fixed row used during construction; `None` is a free cell.
type PartialRow = Vec<Option<usize>>;

fn fixed_pairs(row: &PartialRow) -> Vec<(usize, usize)> {
    row.iter()
        .enumerate()
        .filter_map(|(p, v)| v.map(|v| (p, v)))
        .collect()
}

fn extendable(m: &SutModel, pairs: Vec<(usize, usize)>) -> bool {
    let t = Interaction::new(pairs).expect("distinct parameters by construction");
    constraints::complete(m, &t).is_some()
}

fn covered_by_partial(row: &PartialRow, t: &Interaction) -> bool {
    t.pairs().iter().all(|&(p, v)| row[p] == Some(v))
}

/// Generates a covering array of the given strength.
///
/// The construction is deterministic: ties in the horizontal extension pick
/// the lowest value index, free cells are filled with the lowest value that
/// keeps the row completable, and the vertical phase walks interactions in
/// canonical order. The seed is accepted for interface uniformity with the
/// randomized generators and does not influence the result.
pub fn generate_cca(m: &SutModel, strength: usize, seed: u64) -> Result<TestArray> {
    let _ = seed;
    let k = m.k();
    if strength < 1 || strength > k {
        return Err(Error::StrengthOutOfRange { strength, k });
    }

    // Every valid value combination of the first `strength` parameters
    // becomes one seed row.
    let mut rows: Vec<PartialRow> = Vec::new();
    let first_params: Vec<usize> = (0..strength).collect();
    for combo in value_products(m, &first_params) {
        if extendable(m, combo.clone()) {
            let mut row: PartialRow = vec![None; k];
            for &(p, v) in &combo {
                row[p] = Some(v);
            }
            rows.push(row);
        }
    }

    for p in strength..k {
        // Valid target interactions that involve parameter p.
        let mut pending: BTreeSet<Interaction> = BTreeSet::new();
        for earlier in (0..p).combinations(strength - 1) {
            let mut params = earlier.clone();
            params.push(p);
            for pairs in value_products(m, &params) {
                let t = Interaction::new(pairs).expect("distinct parameters");
                if constraints::complete(m, &t).is_some() {
                    pending.insert(t);
                }
            }
        }

        // Horizontal extension: give every row a value for p.
        for row in rows.iter_mut() {
            let fixed = fixed_pairs(row);
            let mut best: Option<(usize, usize)> = None; // (gain, value)
            for v in 0..m.domain_size(p) {
                let mut with_v = fixed.clone();
                with_v.push((p, v));
                if !extendable(m, with_v) {
                    continue;
                }
                row[p] = Some(v);
                let gain = pending
                    .iter()
                    .filter(|t| covered_by_partial(row, t))
                    .count();
                row[p] = None;
                if best.is_none_or(|(g, _)| gain > g) {
                    best = Some((gain, v));
                }
            }
            let (_, v) = best.expect("an extendable row admits some value");
            row[p] = Some(v);
            pending.retain(|t| !covered_by_partial(row, t));
        }

        // Vertical extension: place every remaining interaction, reusing
        // free cells of existing rows when the merge stays completable.
        for t in pending {
            let mut placed = false;
            for row in rows.iter_mut() {
                let compatible = t
                    .pairs()
                    .iter()
                    .all(|&(tp, tv)| row[tp].is_none() || row[tp] == Some(tv));
                if !compatible {
                    continue;
                }
                let mut merged = fixed_pairs(row);
                for &(tp, tv) in t.pairs() {
                    if row[tp].is_none() {
                        merged.push((tp, tv));
                    }
                }
                merged.sort_unstable();
                if extendable(m, merged) {
                    for &(tp, tv) in t.pairs() {
                        row[tp] = Some(tv);
                    }
                    placed = true;
                    break;
                }
            }
            if !placed {
                let mut row: PartialRow = vec![None; k];
                for &(tp, tv) in t.pairs() {
                    row[tp] = Some(tv);
                }
                rows.push(row);
            }
        }
    }

    // Fill remaining free cells with the lowest value keeping the row valid.
    let mut done: Vec<TestCase> = Vec::with_capacity(rows.len());
    for mut row in rows {
        for p in 0..k {
            if row[p].is_some() {
                continue;
            }
            let fixed = fixed_pairs(&row);
            let v = (0..m.domain_size(p))
                .find(|&v| {
                    let mut with_v = fixed.clone();
                    with_v.push((p, v));
                    with_v.sort_unstable();
                    extendable(m, with_v)
                })
                .expect("an extendable row admits some value");
            row[p] = Some(v);
        }
        done.push(TestCase::new(row.into_iter().map(|v| v.unwrap()).collect()));
    }
    TestArray::new(m, done)
}

/// The `(d + t)`-strength covering array used as seed and size bound for
/// detecting-array generation; such an array already has the `(d, t)`
/// detecting property.
pub fn cca_upper_bound(m: &SutModel, d: usize, t: usize, seed: u64) -> Result<TestArray> {
    let k = m.k();
    if d + t > k {
        return Err(Error::DtOutOfRange { dt: d + t, k });
    }
    generate_cca(m, d + t, seed)
}

/// All value assignments over the given parameters, lexicographic.
fn value_products(m: &SutModel, params: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for &p in params {
        let mut next = Vec::with_capacity(out.len() * m.domain_size(p));
        for prefix in &out {
            for v in 0..m.domain_size(p) {
                let mut ext = prefix.clone();
                ext.push((p, v));
                next.push(ext);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::verify;

    fn shopping() -> SutModel {
        parse_model(include_str!("../../../fixtures/shopping.sut")).unwrap()
    }

    #[test]
    fn rejects_invalid_rows() {
        let m = shopping();
        let err = TestArray::new(&m, vec![TestCase::new(vec![0, 1, 0, 0])]).unwrap_err();
        assert!(matches!(err, Error::InvalidRow { row: 0 }));
    }

    #[test]
    fn pairwise_array_for_the_shopping_model() {
        let m = shopping();
        let a = generate_cca(&m, 2, 0).unwrap();
        assert!(a.len() <= 20, "unexpectedly large: {} rows", a.len());
        assert!(verify::is_cca(&m, &a, 2).passed());
    }

    #[test]
    fn full_strength_array_is_the_exhaustive_suite() {
        let m = shopping();
        let a = generate_cca(&m, 4, 0).unwrap();
        let got: BTreeSet<TestCase> = a.rows().iter().cloned().collect();
        let expected: BTreeSet<TestCase> = constraints::exhaustive_suite(&m).into_iter().collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 48);
    }

    #[test]
    fn strength_out_of_range() {
        let m = shopping();
        assert!(matches!(
            generate_cca(&m, 5, 0),
            Err(Error::StrengthOutOfRange { strength: 5, k: 4 })
        ));
        assert!(matches!(
            generate_cca(&m, 0, 0),
            Err(Error::StrengthOutOfRange { .. })
        ));
    }

    #[test]
    fn upper_bound_requires_d_plus_t_within_k() {
        let m = shopping();
        assert!(matches!(
            cca_upper_bound(&m, 3, 2, 0),
            Err(Error::DtOutOfRange { dt: 5, k: 4 })
        ));
    }

    #[test]
    fn stronger_arrays_cover_weaker_strengths() {
        let m = shopping();
        let a = generate_cca(&m, 3, 0).unwrap();
        for t in 1..=3 {
            assert!(verify::is_cca(&m, &a, t).passed(), "strength {t}");
        }
    }

    #[test]
    fn deterministic_output() {
        let m = shopping();
        assert_eq!(
            generate_cca(&m, 2, 0).unwrap(),
            generate_cca(&m, 2, 7).unwrap()
        );
    }
}
