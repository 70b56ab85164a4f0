//! Probability vectors on a finite group: points of the simplex `S(G)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupSpec, QuotientGroup};

/// Entries in `[-NEGATIVE_CLAMP, 0)` are treated as round-off and clamped to 0.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Largest accepted deviation of the raw total mass from 1.
pub const PRE_NORMALIZATION_TOL: f64 = 1e-6;
/// Post-normalization mass tolerance every `SimplexPoint` satisfies.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Validates `raw` as a point of `S(G)`, checking the length against `group`.
    pub fn on_group(group: &GroupSpec, raw: &[f64]) -> Result<Self> {
        if raw.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                found: raw.len(),
            });
        }
        validate_simplex(raw)
    }

    pub fn delta(n: usize, index: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Self { weights }
    }

    /// Uniform distribution on `support` (flat indices, assumed distinct).
    pub fn uniform_on(n: usize, support: &[usize]) -> Self {
        let w = 1.0 / support.len() as f64;
        let mut weights = vec![0.0; n];
        for &i in support {
            weights[i] = w;
        }
        Self { weights }
    }

    /// Wraps the output of a stochastic map: clamps round-off negatives down
    /// to `-floor` and renormalizes the total mass to 1.
    pub(crate) fn from_map_output(mut weights: Vec<f64>, floor: f64) -> Self {
        for w in weights.iter_mut() {
            if *w < 0.0 && *w >= -floor {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total != 1.0 {
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        Self { weights }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }

    pub fn sup_distance_to_center(&self) -> f64 {
        sup_distance_to_center(self)
    }

    /// `Σ x_i²`.
    pub fn sum_of_squares(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    pub fn max_abs_diff(&self, other: &SimplexPoint) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn validate_simplex(raw: &[f64]) -> Result<SimplexPoint> {
    if raw.is_empty() {
        return Err(Error::InvalidArgument("empty weight vector".into()));
    }
    let mut weights = Vec::with_capacity(raw.len());
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < -NEGATIVE_CLAMP {
            return Err(Error::NegativeMass { index, value });
        }
        weights.push(value.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > PRE_NORMALIZATION_TOL {
        return Err(Error::MassDeviation(total));
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(SimplexPoint { weights })
}

pub fn haar_center(group: &GroupSpec) -> SimplexPoint {
    let n = group.order();
    SimplexPoint {
        weights: vec![1.0 / n as f64; n],
    }
}

/// Push-forward of `x` to `G/H`: each coset receives the mass of its members.
pub fn factor_measure(x: &SimplexPoint, quotient: &QuotientGroup) -> Result<SimplexPoint> {
    let weights = project_weights(x.weights(), quotient)?;
    Ok(SimplexPoint { weights })
}

/// Coset sums of an arbitrary real vector (not necessarily a measure).
pub fn project_weights(x: &[f64], quotient: &QuotientGroup) -> Result<Vec<f64>> {
    let projection = quotient.projection();
    if x.len() != projection.len() {
        return Err(Error::DimensionMismatch {
            expected: projection.len(),
            found: x.len(),
        });
    }
    let mut out = vec![0.0; quotient.order()];
    for (w, &c) in x.iter().zip(projection) {
        out[c] += w;
    }
    Ok(out)
}

pub fn sup_norm(x: &SimplexPoint) -> f64 {
    x.weights.iter().copied().fold(0.0, f64::max)
}

pub fn sup_distance_to_center(x: &SimplexPoint) -> f64 {
    let c = 1.0 / x.len() as f64;
    x.weights.iter().map(|w| (w - c).abs()).fold(0.0, f64::max)
}

/// Symmetric Dirichlet(1) sample: normalized i.i.d. unit exponentials.
pub fn sample_interior(group: &GroupSpec, seed: u64) -> SimplexPoint {
    sample_interior_n(group.order(), seed)
}

pub(crate) fn sample_interior_n(n: usize, seed: u64) -> SimplexPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..n)
        .map(|_| loop {
            let e: f64 = rng.sample(Exp1);
            if e > 0.0 {
                break e;
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    SimplexPoint { weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_subgroups, parse_group_spec, quotient, Subgroup};

    #[test]
    fn validation_examples() {
        assert!(validate_simplex(&[0.5, 0.5]).is_ok());
        assert!(matches!(
            validate_simplex(&[1.0, -0.2, 0.2]),
            Err(Error::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(
            validate_simplex(&[0.3, 0.3, 0.3]),
            Err(Error::MassDeviation(_))
        ));
        assert!(matches!(validate_simplex(&[f64::NAN, 1.0]), Err(Error::NonFinite(0))));
        assert!(validate_simplex(&[f64::INFINITY]).is_err());
        assert!(validate_simplex(&[]).is_err());
    }

    #[test]
    fn tiny_negatives_are_clamped() {
        let x = validate_simplex(&[1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(x.weights()[1], 0.0);
        assert!((x.mass() - 1.0).abs() < MASS_TOL);
    }

    #[test]
    fn near_unit_mass_is_renormalized() {
        let x = validate_simplex(&[0.5, 0.5 + 1e-7]).unwrap();
        assert!((x.mass() - 1.0).abs() < MASS_TOL);
    }

    #[test]
    fn center_examples() {
        let z3 = parse_group_spec("Z3").unwrap();
        assert_eq!(haar_center(&z3).weights(), &[1.0 / 3.0; 3]);
        assert_eq!(haar_center(&parse_group_spec("Z1").unwrap()).weights(), &[1.0]);
        assert_eq!(haar_center(&parse_group_spec("Z2xZ2").unwrap()).weights(), &[0.25; 4]);
    }

    #[test]
    fn norm_examples() {
        let z2 = parse_group_spec("Z2").unwrap();
        let c = haar_center(&z2);
        assert_eq!(c.sup_distance_to_center(), 0.0);
        assert_eq!(c.sup_norm(), 0.5);
        let d = SimplexPoint::delta(2, 0);
        assert_eq!(d.sup_distance_to_center(), 0.5);
        assert_eq!(d.sup_norm(), 1.0);
        let x = validate_simplex(&[0.7, 0.3]).unwrap();
        assert!((x.sup_distance_to_center() - 0.2).abs() < 1e-15);
        assert_eq!(x.sup_norm(), 0.7);
    }

    #[test]
    fn factor_measure_examples() {
        let z4 = parse_group_spec("Z4").unwrap();
        let h = Subgroup::from_members(&z4, &[0, 2]).unwrap();
        let q = quotient(&z4, &h).unwrap();
        let x = validate_simplex(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let y = factor_measure(&x, &q).unwrap();
        assert!((y.weights()[q.project(0)] - 0.4).abs() < 1e-15);
        assert!((y.weights()[q.project(1)] - 0.6).abs() < 1e-15);

        let trivial = quotient(&z4, &Subgroup::trivial(&z4)).unwrap();
        assert_eq!(factor_measure(&x, &trivial).unwrap(), x);

        let z3 = parse_group_spec("Z3").unwrap();
        assert!(factor_measure(&haar_center(&z3), &q).is_err());
    }

    #[test]
    fn center_pushes_forward_to_center() {
        for desc in ["Z16", "Z4xZ4", "Z2xZ8", "Z2xZ2xZ2xZ2", "Z12", "Z2xZ6"] {
            let grp = parse_group_spec(desc).unwrap();
            for h in enumerate_subgroups(&grp).unwrap() {
                let q = quotient(&grp, &h).unwrap();
                let y = factor_measure(&haar_center(&grp), &q).unwrap();
                assert!(y.max_abs_diff(&haar_center(q.spec())) < 1e-15);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_and_interior() {
        let grp = parse_group_spec("Z4xZ3").unwrap();
        assert_eq!(sample_interior(&grp, 11), sample_interior(&grp, 11));
        assert_ne!(sample_interior(&grp, 11), sample_interior(&grp, 12));
        for seed in 0..200 {
            let x = sample_interior(&grp, seed);
            assert!(x.is_strictly_positive());
            assert!((x.mass() - 1.0).abs() < MASS_TOL);
        }
    }

    #[test]
    fn sampler_mean_is_near_center() {
        let z4 = parse_group_spec("Z4").unwrap();
        let mut mean = [0.0; 4];
        for seed in 0..1000 {
            for (m, w) in mean.iter_mut().zip(sample_interior(&z4, seed).weights()) {
                *m += w / 1000.0;
            }
        }
        for m in mean {
            assert!((m - 0.25).abs() < 0.05, "{mean:?}");
        }
    }

    #[test]
    fn distance_zero_only_at_center() {
        let z5 = parse_group_spec("Z5").unwrap();
        assert_eq!(haar_center(&z5).sup_distance_to_center(), 0.0);
        for seed in 0..50 {
            assert!(sample_interior(&z5, seed).sup_distance_to_center() > 0.0);
        }
    }
}
