//! Seeded random models and arrays for randomized verification.
//!
//! The sampler draws small constrained models that always admit at least
//! one valid test case, which is what the theorem sweep and the
//! localization robustness suites iterate over.

use rand::Rng;

use crate::constraints;
use crate::model::{ConstraintExpr, Parameter, SutModel, TestCase};

/// Shape bounds for [`random_model`].
#[derive(Debug, Clone, Copy)]
pub struct ModelShape {
    pub max_params: usize,
    pub max_domain: usize,
    pub max_constraints: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_params: 5,
            max_domain: 3,
            max_constraints: 3,
        }
    }
}

/// Draws a random model within the shape bounds. Constraints are random
/// implications and disjunctions over atoms; sets that wipe out the whole
/// assignment space are discarded and redrawn, so the result always has at
/// least one valid test case.
pub fn random_model<R: Rng>(rng: &mut R, shape: &ModelShape) -> SutModel {
    let k = rng.gen_range(2..=shape.max_params.max(2));
    let parameters: Vec<Parameter> = (0..k)
        .map(|i| {
            // Keep large-k models mostly binary so sweeps stay desk-scale.
            let max_dom = if k >= 5 { 2 } else { shape.max_domain.max(2) };
            let dom = rng.gen_range(2..=max_dom.max(2));
            Parameter {
                name: format!("p{i}"),
                values: (0..dom).map(|v| format!("v{v}")).collect(),
            }
        })
        .collect();
    let mut m = SutModel {
        name: "random".into(),
        parameters,
        constraints: Vec::new(),
    };
    let want = rng.gen_range(0..=shape.max_constraints);
    let mut guard = 0;
    while m.constraints.len() < want && guard < 40 {
        guard += 1;
        let c = random_constraint(rng, &m);
        m.constraints.push(c);
        if constraints::exhaustive_suite(&m).is_empty() {
            m.constraints.pop();
        }
    }
    m
}

fn random_atom<R: Rng>(rng: &mut R, m: &SutModel) -> ConstraintExpr {
    let p = rng.gen_range(0..m.k());
    let v = rng.gen_range(0..m.domain_size(p));
    if rng.gen() {
        ConstraintExpr::Eq(p, v)
    } else {
        ConstraintExpr::Neq(p, v)
    }
}

fn random_constraint<R: Rng>(rng: &mut R, m: &SutModel) -> ConstraintExpr {
    let a = random_atom(rng, m);
    let b = random_atom(rng, m);
    match rng.gen_range(0..4) {
        0 => ConstraintExpr::Implies(Box::new(a), Box::new(b)),
        1 => ConstraintExpr::Or(Box::new(a), Box::new(b)),
        2 => ConstraintExpr::Implies(Box::new(a), Box::new(ConstraintExpr::Not(Box::new(b)))),
        _ => {
            let c = random_atom(rng, m);
            ConstraintExpr::Or(
                Box::new(ConstraintExpr::And(Box::new(a), Box::new(b))),
                Box::new(c),
            )
        }
    }
}

/// Samples an array of up to `max_rows` valid rows, drawn with replacement
/// from the exhaustive suite.
pub fn random_array<R: Rng>(rng: &mut R, m: &SutModel, max_rows: usize) -> crate::TestArray {
    let suite = constraints::exhaustive_suite(m);
    let n = rng.gen_range(1..=max_rows.max(1));
    let rows: Vec<TestCase> = (0..n)
        .map(|_| suite[rng.gen_range(0..suite.len())].clone())
        .collect();
    crate::TestArray::new(m, rows).expect("sampled rows are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn models_are_always_satisfiable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = random_model(&mut rng, &ModelShape::default());
            assert!(!constraints::exhaustive_suite(&m).is_empty());
            assert!(m.total_assignments().unwrap() <= 3u128.pow(5));
        }
    }

    #[test]
    fn sampled_arrays_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = random_model(&mut rng, &ModelShape::default());
        let a = random_array(&mut rng, &m, 10);
        assert!(!a.is_empty());
    }
}
