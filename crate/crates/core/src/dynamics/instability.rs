//! Expanding directions of the first-return map along periodic coset orbits.
//!
//! For the trivial subgroup `V(x) = x ∗ x`, so `DV(x)·v = 2·(x ∗ v)`. At the
//! uniform state on `p+H`, convolving with a vector that is constant on
//! `H`-cosets just translates it by `p`. The vector `e` that is `+1` on one
//! coset and `−1` on another therefore returns to itself after a full period
//! `l` (the accumulated shift lies in `H`) scaled by `2^l`.
//!
//! At the center every tangent vector is annihilated: `u ∗ v = (Σ v)/n = 0`.

use serde::Serialize;

use super::exceptional::ExceptionalState;
use crate::error::{Error, Result};
use crate::group::{quotient, GroupSpec, Subgroup};
use crate::operator::{build_operator, QsoOperator};
use crate::simplex::haar_center;

/// Central-difference step for the cross-check.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct InstabilityReport {
    /// Period `l` of the orbit; the first-return map is `T = V^l`.
    pub period: usize,
    /// Representative of the coset carrying `+1`.
    pub positive_coset: usize,
    /// Representative of the coset carrying `−1`.
    pub negative_coset: usize,
    pub direction: Vec<f64>,
    /// `⟨e, DT·e⟩ / ⟨e, e⟩` with `DT` the accumulated product of step differentials.
    pub growth_factor: f64,
    /// `||DT·e − growth·e||_∞ / ||e||_∞`; zero when `e` is an exact eigenvector.
    pub eigen_residual: f64,
    /// The same Rayleigh quotient from central differences of `T`.
    pub fd_growth_factor: f64,
    pub fd_relative_deviation: f64,
}

fn trivial_operator(group: &GroupSpec) -> Result<QsoOperator> {
    build_operator(group, &Subgroup::trivial(group), &haar_center(group))
}

/// Row-major `n x n` matrix of `v ↦ DV(x)·v`.
fn step_differential(op: &QsoOperator, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let mut m = vec![0.0; n * n];
    let mut basis = vec![0.0; n];
    for col in 0..n {
        basis[col] = 1.0;
        let image = op.differential(x, &basis)?;
        basis[col] = 0.0;
        for (row, v) in image.into_iter().enumerate() {
            m[row * n + col] = v;
        }
    }
    Ok(m)
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn mat_vec(a: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn power_raw(op: &QsoOperator, x: &[f64], times: usize) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    for _ in 0..times {
        y = op.apply_raw(&y)?;
    }
    Ok(y)
}

fn central_difference(op: &QsoOperator, x: &[f64], v: &[f64], times: usize) -> Result<Vec<f64>> {
    let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + FD_STEP * b).collect();
    let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - FD_STEP * b).collect();
    let fp = power_raw(op, &plus, times)?;
    let fm = power_raw(op, &minus, times)?;
    Ok(fp
        .iter()
        .zip(&fm)
        .map(|(a, b)| (a - b) / (2.0 * FD_STEP))
        .collect())
}

/// Growth of the `±1` coset direction under the first-return differential.
pub fn instability_report(group: &GroupSpec, ex: &ExceptionalState) -> Result<InstabilityReport> {
    if ex.subgroup.is_whole() {
        return Err(Error::CenterHasNoUnstableDirection);
    }
    if !ex.is_periodic() {
        return Err(Error::NotPeriodic(ex.doubling_preperiod));
    }
    ex.subgroup.check_group(group)?;
    let n = group.order();
    let op = trivial_operator(group)?;
    let q = quotient(group, &ex.subgroup)?;
    let positive = q.project(ex.shift_index);
    let negative = (0..q.order())
        .filter(|&c| c != positive)
        .min_by_key(|&c| q.cosets()[c].representative)
        .expect("a proper subgroup has at least two cosets");
    let mut direction = vec![0.0; n];
    for &s in &q.cosets()[positive].members {
        direction[s] = 1.0;
    }
    for &s in &q.cosets()[negative].members {
        direction[s] = -1.0;
    }

    let period = ex.doubling_period;
    let mut jacobian: Vec<f64> = (0..n * n).map(|k| f64::from(u8::from(k / n == k % n))).collect();
    let mut x = ex.state.clone();
    for _ in 0..period {
        let step = step_differential(&op, x.weights())?;
        jacobian = mat_mul(&step, &jacobian, n);
        x = op.apply(&x)?;
    }
    let image = mat_vec(&jacobian, &direction);
    let norm2 = dot(&direction, &direction);
    let growth_factor = dot(&direction, &image) / norm2;
    let eigen_residual = image
        .iter()
        .zip(&direction)
        .map(|(a, e)| (a - growth_factor * e).abs())
        .fold(0.0, f64::max);

    let fd = central_difference(&op, ex.state.weights(), &direction, period)?;
    let fd_growth_factor = dot(&direction, &fd) / norm2;
    let fd_relative_deviation = (fd_growth_factor - growth_factor).abs() / growth_factor.abs();

    Ok(InstabilityReport {
        period,
        positive_coset: q.cosets()[positive].representative,
        negative_coset: q.cosets()[negative].representative,
        direction,
        growth_factor,
        eigen_residual,
        fd_growth_factor,
        fd_relative_deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CenterSpectrum {
    /// `max_k ||DV(u)·v_k|| / ||v_k||` over the tangent basis `v_k = δ_k − δ_0`.
    pub max_growth: f64,
    /// The same maximum from central differences.
    pub max_fd_growth: f64,
}

pub fn center_tangent_spectrum(group: &GroupSpec) -> Result<CenterSpectrum> {
    let n = group.order();
    let op = trivial_operator(group)?;
    let center = haar_center(group);
    let mut spectrum = CenterSpectrum {
        max_growth: 0.0,
        max_fd_growth: 0.0,
    };
    let norm = std::f64::consts::SQRT_2;
    for k in 1..n {
        let mut v = vec![0.0; n];
        v[0] = -1.0;
        v[k] = 1.0;
        let image = op.differential(center.weights(), &v)?;
        let fd = central_difference(&op, center.weights(), &v, 1)?;
        spectrum.max_growth = spectrum.max_growth.max(dot(&image, &image).sqrt() / norm);
        spectrum.max_fd_growth = spectrum.max_fd_growth.max(dot(&fd, &fd).sqrt() / norm);
    }
    Ok(spectrum)
}
