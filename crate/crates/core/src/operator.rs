//! Quadratic stochastic operators induced by a subgroup and a positive measure.
//!
//! For `f, g, h ∈ G` the heredity coefficients are
//!
//! ```text
//! p_{fg,h} = μ(h) / μ(f+g+H)   if h ∈ f+g+H,   0 otherwise,
//! ```
//!
//! and the operator acts by `(Vx)_h = Σ_{f,g} p_{fg,h} x_f x_g`.
//!
//! The numerator is `μ(h)`. Taken literally, a numerator of `μ(g)` gives row
//! sums `|H|·μ(g)/μ(f+g+H)`, which are not 1 in general; `μ(h)` restores
//! `Σ_h p_{fg,h} = 1` and reproduces both degenerate cases (`H = {e}` gives the
//! indicator of `h = f+g`, `H = G` gives `p_{fg,h} = μ(h)`).
//!
//! Summing the coefficients over a coset collapses the operator onto `G/H`:
//! `(Vx)_h = μ(h)/μ(h+H) · (πx ∗ πx)(h+H)`, which is the `O(n²)` (or
//! transform-accelerated) path used by [`OperatorMode::Convolution`].

use serde::{Deserialize, Serialize};

use crate::convolution::{
    convolve_direct, CharacterTransform, ConvolutionPath, TRANSFORM_NEGATIVE_FLOOR,
};
use crate::error::{Error, Result};
use crate::group::{quotient, GroupSpec, QuotientGroup, Subgroup};
use crate::simplex::{factor_measure, project_weights, SimplexPoint};

/// Largest order for which the `n³` coefficient tensor is materialized.
pub const DENSE_BOUND: usize = 64;

/// Measure entries below this are rejected as not strictly positive.
pub const MU_FLOOR: f64 = 1e-15;

/// Row-sum tolerance for the stochasticity check.
pub const STOCHASTICITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorMode {
    /// Contract the stored coefficient tensor.
    Dense,
    /// Coset-aggregated convolution.
    #[default]
    Convolution,
}

#[derive(Clone, Debug)]
pub struct QsoOperator {
    group: GroupSpec,
    subgroup: Subgroup,
    mu: SimplexPoint,
    quotient: QuotientGroup,
    coset_mass: Vec<f64>,
    mode: OperatorMode,
    coefficients: Option<Vec<f64>>,
    path: ConvolutionPath,
    transform: Option<CharacterTransform>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub max_row_deviation: f64,
    pub symmetry_deviation: f64,
    pub min_coefficient: f64,
}

impl CoefficientReport {
    pub fn passes(&self) -> bool {
        self.max_row_deviation <= STOCHASTICITY_TOL
            && self.symmetry_deviation <= STOCHASTICITY_TOL
            && self.min_coefficient >= 0.0
    }
}

pub fn build_operator(group: &GroupSpec, subgroup: &Subgroup, mu: &SimplexPoint) -> Result<QsoOperator> {
    build_operator_with_mode(group, subgroup, mu, OperatorMode::Convolution)
}

pub fn build_operator_with_mode(
    group: &GroupSpec,
    subgroup: &Subgroup,
    mu: &SimplexPoint,
    mode: OperatorMode,
) -> Result<QsoOperator> {
    subgroup.check_group(group)?;
    let n = group.order();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu.len(),
        });
    }
    if let Some((index, &value)) = mu.weights().iter().enumerate().find(|(_, &w)| w < MU_FLOOR) {
        return Err(Error::NotStrictlyPositive { index, value });
    }
    if mode == OperatorMode::Dense && n > DENSE_BOUND {
        return Err(Error::DenseStorageBound {
            order: n,
            bound: DENSE_BOUND,
        });
    }
    let quotient = quotient(group, subgroup)?;
    let coset_mass = factor_measure(mu, &quotient)?.into_weights();
    let mut op = QsoOperator {
        group: group.clone(),
        subgroup: subgroup.clone(),
        mu: mu.clone(),
        quotient,
        coset_mass,
        mode,
        coefficients: None,
        path: ConvolutionPath::default(),
        transform: None,
    };
    if n <= DENSE_BOUND {
        op.coefficients = Some(op.coefficient_tensor());
    }
    op.refresh_transform();
    Ok(op)
}

impl QsoOperator {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn mu(&self) -> &SimplexPoint {
        &self.mu
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    pub fn quotient(&self) -> &QuotientGroup {
        &self.quotient
    }

    /// `μ(c)` for each coset `c`, indexed by quotient flat index.
    pub fn coset_mass(&self) -> &[f64] {
        &self.coset_mass
    }

    pub fn convolution_path(&self) -> ConvolutionPath {
        self.path
    }

    pub fn with_convolution_path(mut self, path: ConvolutionPath) -> Self {
        self.path = path;
        self.refresh_transform();
        self
    }

    pub fn has_dense_coefficients(&self) -> bool {
        self.coefficients.is_some()
    }

    fn refresh_transform(&mut self) {
        self.transform = self
            .path
            .uses_transform(self.quotient.order())
            .then(|| CharacterTransform::new(self.quotient.spec()));
    }

    /// Evaluates `p_{fg,h}` from the defining rule.
    pub fn coefficient(&self, f: usize, g: usize, h: usize) -> f64 {
        let c = self.quotient.project(self.group.add_index(f, g));
        if self.quotient.project(h) == c {
            self.mu.weights()[h] / self.coset_mass[c]
        } else {
            0.0
        }
    }

    fn coefficient_tensor(&self) -> Vec<f64> {
        let n = self.group.order();
        let mut t = vec![0.0; n * n * n];
        for f in 0..n {
            for g in 0..n {
                let c = self.quotient.project(self.group.add_index(f, g));
                let row = &mut t[(f * n + g) * n..(f * n + g + 1) * n];
                for &h in &self.quotient.cosets()[c].members {
                    row[h] = self.mu.weights()[h] / self.coset_mass[c];
                }
            }
        }
        t
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.group.order() {
            return Err(Error::DimensionMismatch {
                expected: self.group.order(),
                found: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &SimplexPoint) -> Result<SimplexPoint> {
        self.check_len(x.len())?;
        let raw = match self.mode {
            OperatorMode::Dense => self.dense_bilinear(x.weights(), x.weights()),
            OperatorMode::Convolution => self.bilinear_raw(x.weights(), x.weights())?,
        };
        finish_output(raw)
    }

    /// Always evaluates through the coefficient tensor (stored or lazily computed).
    pub fn apply_dense(&self, x: &SimplexPoint) -> Result<SimplexPoint> {
        self.check_len(x.len())?;
        finish_output(self.dense_bilinear(x.weights(), x.weights()))
    }

    /// The quadratic map on all of `R^n`, without renormalization.
    pub fn apply_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.bilinear_raw(x, x)
    }

    /// Symmetric bilinear form `B(a,b)_h = Σ_{f,g} p_{fg,h} a_f b_g`, so that
    /// `Vx = B(x,x)` and the differential of `V` at `x` is `v ↦ 2·B(x,v)`.
    pub fn bilinear_raw(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let same = std::ptr::eq(a, b);
        if self.subgroup.is_trivial() {
            return Ok(self.convolve_on_quotient(a, b, same));
        }
        let pa = project_weights(a, &self.quotient)?;
        let z = if same {
            self.convolve_on_quotient(&pa, &pa, true)
        } else {
            let pb = project_weights(b, &self.quotient)?;
            self.convolve_on_quotient(&pa, &pb, false)
        };
        let mu = self.mu.weights();
        Ok((0..self.group.order())
            .map(|h| {
                let c = self.quotient.project(h);
                mu[h] / self.coset_mass[c] * z[c]
            })
            .collect())
    }

    pub fn differential(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.bilinear_raw(x, v)?.into_iter().map(|w| 2.0 * w).collect())
    }

    fn convolve_on_quotient(&self, a: &[f64], b: &[f64], same: bool) -> Vec<f64> {
        match &self.transform {
            Some(t) if same => t.self_convolve(a),
            Some(t) => t.convolve(a, b),
            None => convolve_direct(self.quotient.spec(), a, b),
        }
    }

    fn dense_bilinear(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.group.order();
        let mut out = vec![0.0; n];
        match &self.coefficients {
            Some(t) => {
                for f in 0..n {
                    for g in 0..n {
                        let w = a[f] * b[g];
                        if w == 0.0 {
                            continue;
                        }
                        let row = &t[(f * n + g) * n..(f * n + g + 1) * n];
                        for (o, p) in out.iter_mut().zip(row) {
                            *o += p * w;
                        }
                    }
                }
            }
            None => {
                for f in 0..n {
                    for g in 0..n {
                        let w = a[f] * b[g];
                        if w == 0.0 {
                            continue;
                        }
                        for (h, o) in out.iter_mut().enumerate() {
                            *o += self.coefficient(f, g, h) * w;
                        }
                    }
                }
            }
        }
        out
    }

    /// Group self-convolution; only defined for the trivial subgroup.
    pub fn apply_convolution(&self, x: &SimplexPoint) -> Result<SimplexPoint> {
        if !self.subgroup.is_trivial() {
            return Err(Error::NontrivialSubgroup(self.subgroup.order()));
        }
        self.check_len(x.len())?;
        finish_output(self.convolve_on_quotient(x.weights(), x.weights(), true))
    }
}

fn finish_output(raw: Vec<f64>) -> Result<SimplexPoint> {
    let out = SimplexPoint::from_map_output(raw, TRANSFORM_NEGATIVE_FLOOR);
    for (index, &value) in out.weights().iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < 0.0 {
            return Err(Error::NegativeMass { index, value });
        }
    }
    Ok(out)
}

/// Row sums, symmetry and sign of every coefficient.
pub fn check_stochasticity(op: &QsoOperator) -> CoefficientReport {
    let n = op.group.order();
    let lazy;
    let tensor: &[f64] = match &op.coefficients {
        Some(t) => t,
        None => {
            lazy = op.coefficient_tensor();
            &lazy
        }
    };
    let mut report = CoefficientReport {
        max_row_deviation: 0.0,
        symmetry_deviation: 0.0,
        min_coefficient: f64::INFINITY,
    };
    for f in 0..n {
        for g in 0..n {
            let row = &tensor[(f * n + g) * n..(f * n + g + 1) * n];
            let mirror = &tensor[(g * n + f) * n..(g * n + f + 1) * n];
            let sum: f64 = row.iter().sum();
            report.max_row_deviation = report.max_row_deviation.max((sum - 1.0).abs());
            for (p, q) in row.iter().zip(mirror) {
                report.symmetry_deviation = report.symmetry_deviation.max((p - q).abs());
                report.min_coefficient = report.min_coefficient.min(*p);
            }
        }
    }
    report
}

/// Self-convolution on `group`, choosing the route by size.
pub fn apply_convolution(group: &GroupSpec, x: &SimplexPoint) -> Result<SimplexPoint> {
    apply_convolution_with(group, x, ConvolutionPath::default())
}

pub fn apply_convolution_with(
    group: &GroupSpec,
    x: &SimplexPoint,
    path: ConvolutionPath,
) -> Result<SimplexPoint> {
    if x.len() != group.order() {
        return Err(Error::DimensionMismatch {
            expected: group.order(),
            found: x.len(),
        });
    }
    let raw = if path.uses_transform(group.order()) {
        CharacterTransform::new(group).self_convolve(x.weights())
    } else {
        convolve_direct(group, x.weights(), x.weights())
    };
    finish_output(raw)
}

/// The operator induced on `G/K` by the factor measure `μ_K`, together with
/// the projection that intertwines the two dynamics.
#[derive(Clone, Debug)]
pub struct QuotientDynamics {
    pub quotient: QuotientGroup,
    pub operator: QsoOperator,
}

impl QuotientDynamics {
    pub fn project(&self, x: &SimplexPoint) -> Result<SimplexPoint> {
        factor_measure(x, &self.quotient)
    }
}

/// Builds `V_K` on `S(G/K)` from `μ_K` with the trivial subgroup.
///
/// The projection intertwines `V` and `V_K` (`π∘V = V_K∘π`) exactly when the
/// operator's own subgroup is contained in `K`; other `K` are rejected.
pub fn quotient_operator(op: &QsoOperator, k: &Subgroup) -> Result<QuotientDynamics> {
    k.check_group(&op.group)?;
    if !op.subgroup.is_subset_of(k) {
        return Err(Error::SubgroupNotContained);
    }
    let quotient = quotient(&op.group, k)?;
    let mu_k = factor_measure(&op.mu, &quotient)?;
    let operator = build_operator(quotient.spec(), &Subgroup::trivial(quotient.spec()), &mu_k)?
        .with_convolution_path(op.path);
    Ok(QuotientDynamics { quotient, operator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_subgroups, parse_group_spec};
    use crate::simplex::{haar_center, sample_interior, validate_simplex};

    fn g(s: &str) -> GroupSpec {
        parse_group_spec(s).unwrap()
    }

    fn close(a: &SimplexPoint, b: &[f64], tol: f64) -> bool {
        a.weights().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn trivial_subgroup_gives_indicator_coefficients() {
        let grp = g("Z4xZ2");
        let op = build_operator(&grp, &Subgroup::trivial(&grp), &sample_interior(&grp, 1)).unwrap();
        for f in 0..8 {
            for gg in 0..8 {
                for h in 0..8 {
                    let expected = if h == grp.add_index(f, gg) { 1.0 } else { 0.0 };
                    assert_eq!(op.coefficient(f, gg, h), expected);
                }
            }
        }
        let r = check_stochasticity(&op);
        assert_eq!(r.max_row_deviation, 0.0);
        assert_eq!(r.symmetry_deviation, 0.0);
    }

    #[test]
    fn whole_group_gives_mu() {
        let grp = g("Z6");
        let mu = sample_interior(&grp, 5);
        let op = build_operator(&grp, &Subgroup::whole(&grp), &mu).unwrap();
        for f in 0..6 {
            for gg in 0..6 {
                for h in 0..6 {
                    assert!((op.coefficient(f, gg, h) - mu.weights()[h]).abs() < 1e-15);
                }
            }
        }
        let x = sample_interior(&grp, 9);
        assert!(close(&op.apply(&x).unwrap(), mu.weights(), 1e-15));
        assert!(close(&op.apply_dense(&x).unwrap(), mu.weights(), 1e-15));
        let uniform = haar_center(&grp);
        let op = build_operator(&grp, &Subgroup::whole(&grp), &uniform).unwrap();
        assert!(check_stochasticity(&op).max_row_deviation < 1e-15);
    }

    #[test]
    fn half_subgroup_of_z4_coefficients() {
        let grp = g("Z4");
        let h = Subgroup::from_members(&grp, &[0, 2]).unwrap();
        let op = build_operator(&grp, &h, &haar_center(&grp)).unwrap();
        let row: Vec<f64> = (0..4).map(|k| op.coefficient(0, 1, k)).collect();
        assert_eq!(row, vec![0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn rejects_non_positive_mu() {
        let grp = g("Z3");
        let mu = validate_simplex(&[0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(
            build_operator(&grp, &Subgroup::trivial(&grp), &mu),
            Err(Error::NotStrictlyPositive { index: 2, .. })
        ));
        let tiny = validate_simplex(&[0.5, 0.5 - 1e-16, 1e-16]).unwrap();
        assert!(build_operator(&grp, &Subgroup::trivial(&grp), &tiny).is_err());
    }

    #[test]
    fn rejects_foreign_subgroup() {
        let z4 = g("Z4");
        let z6 = g("Z6");
        let h = Subgroup::trivial(&z6);
        assert!(build_operator(&z4, &h, &haar_center(&z4)).is_err());
    }

    #[test]
    fn dense_mode_is_bounded() {
        let grp = g("Z65");
        let err = build_operator_with_mode(
            &grp,
            &Subgroup::trivial(&grp),
            &haar_center(&grp),
            OperatorMode::Dense,
        );
        assert!(matches!(err, Err(Error::DenseStorageBound { order: 65, bound: 64 })));
        let op = build_operator(&grp, &Subgroup::trivial(&grp), &haar_center(&grp)).unwrap();
        assert!(!op.has_dense_coefficients());
    }

    #[test]
    fn z2_convolution_example() {
        let grp = g("Z2");
        let op = build_operator(&grp, &Subgroup::trivial(&grp), &haar_center(&grp)).unwrap();
        let x = validate_simplex(&[0.7, 0.3]).unwrap();
        assert!(close(&op.apply(&x).unwrap(), &[0.58, 0.42], 1e-15));
    }

    #[test]
    fn center_is_fixed_for_trivial_subgroup() {
        let grp = g("Z3xZ3");
        let op = build_operator(&grp, &Subgroup::trivial(&grp), &haar_center(&grp)).unwrap();
        let c = haar_center(&grp);
        assert!(op.apply(&c).unwrap().max_abs_diff(&c) < 1e-16);
    }

    #[test]
    fn convolution_examples() {
        let z3 = g("Z3");
        let y = apply_convolution(&z3, &SimplexPoint::delta(3, 1)).unwrap();
        assert_eq!(y.weights(), &[0.0, 0.0, 1.0]);

        let z4 = g("Z4");
        let x = validate_simplex(&[0.5, 0.0, 0.5, 0.0]).unwrap();
        assert!(close(&apply_convolution(&z4, &x).unwrap(), &[0.5, 0.0, 0.5, 0.0], 0.0));
        let x = validate_simplex(&[0.0, 0.5, 0.0, 0.5]).unwrap();
        assert!(close(&apply_convolution(&z4, &x).unwrap(), &[0.5, 0.0, 0.5, 0.0], 0.0));

        let y = apply_convolution_with(&z4, &x, ConvolutionPath::Transform).unwrap();
        assert!(close(&y, &[0.5, 0.0, 0.5, 0.0], 1e-15));
    }

    #[test]
    fn apply_convolution_requires_trivial_subgroup() {
        let grp = g("Z4");
        let h = Subgroup::from_members(&grp, &[0, 2]).unwrap();
        let op = build_operator(&grp, &h, &haar_center(&grp)).unwrap();
        assert_eq!(
            op.apply_convolution(&haar_center(&grp)),
            Err(Error::NontrivialSubgroup(2))
        );
    }

    #[test]
    fn dimension_mismatch_on_apply() {
        let grp = g("Z4");
        let op = build_operator(&grp, &Subgroup::trivial(&grp), &haar_center(&grp)).unwrap();
        assert!(matches!(
            op.apply(&haar_center(&g("Z3"))),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn dense_and_aggregated_paths_agree() {
        for desc in ["Z8", "Z2xZ4", "Z3xZ3", "Z12"] {
            let grp = g(desc);
            for (i, h) in enumerate_subgroups(&grp).unwrap().into_iter().enumerate() {
                let mu = sample_interior(&grp, 100 + i as u64);
                let op = build_operator(&grp, &h, &mu).unwrap();
                let x = sample_interior(&grp, 200 + i as u64);
                let a = op.apply(&x).unwrap();
                let b = op.apply_dense(&x).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-15, "{desc} {h:?}");
            }
        }
    }

    #[test]
    fn stochasticity_on_z6_half_subgroup() {
        let grp = g("Z6");
        let h = Subgroup::from_members(&grp, &[0, 3]).unwrap();
        for seed in 0..20 {
            let op = build_operator(&grp, &h, &sample_interior(&grp, seed)).unwrap();
            let r = check_stochasticity(&op);
            assert!(r.passes(), "{r:?}");
            assert!(r.max_row_deviation < 1e-12);
        }
    }

    #[test]
    fn quotient_operator_examples() {
        let grp = g("Z4");
        let h = Subgroup::from_members(&grp, &[0, 2]).unwrap();
        let op = build_operator(&grp, &h, &sample_interior(&grp, 3)).unwrap();
        let qd = quotient_operator(&op, &h).unwrap();
        let x = validate_simplex(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let lhs = qd.project(&op.apply(&x).unwrap()).unwrap();
        let rhs = qd.operator.apply(&qd.project(&x).unwrap()).unwrap();
        let even = qd.quotient.project(0);
        let odd = qd.quotient.project(1);
        for side in [&lhs, &rhs] {
            assert!((side.weights()[even] - 0.52).abs() < 1e-15);
            assert!((side.weights()[odd] - 0.48).abs() < 1e-15);
        }

        let whole = quotient_operator(&op, &Subgroup::whole(&grp)).unwrap();
        assert_eq!(whole.operator.group().order(), 1);
        assert_eq!(whole.operator.apply(&haar_center(whole.operator.group())).unwrap().weights(), &[1.0]);

        assert_eq!(
            quotient_operator(&op, &Subgroup::trivial(&grp)).unwrap_err(),
            Error::SubgroupNotContained
        );

        let trivial_op = build_operator(&grp, &Subgroup::trivial(&grp), &haar_center(&grp)).unwrap();
        let same = quotient_operator(&trivial_op, &Subgroup::trivial(&grp)).unwrap();
        let x = sample_interior(&grp, 4);
        assert!(same.operator.apply(&x).unwrap().max_abs_diff(&trivial_op.apply(&x).unwrap()) < 1e-16);
    }

    #[test]
    fn transform_path_operator_matches_direct() {
        let grp = g("Z8xZ12");
        let mu = haar_center(&grp);
        let direct = build_operator(&grp, &Subgroup::trivial(&grp), &mu)
            .unwrap()
            .with_convolution_path(ConvolutionPath::Direct);
        let fast = direct.clone().with_convolution_path(ConvolutionPath::Transform);
        let x = sample_interior(&grp, 77);
        assert!(direct.apply(&x).unwrap().max_abs_diff(&fast.apply(&x).unwrap()) < 1e-12);
    }
}
