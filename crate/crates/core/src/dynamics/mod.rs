//! Orbits of group-induced operators and the regularity diagnostics built on them.

mod cycle;
mod envelope;
mod exceptional;
mod instability;

pub use cycle::{detect_cycle, quantize, Cycle, CycleDetector, CYCLE_QUANTUM};
pub use envelope::{envelope_branch, envelope_f, envelope_f_oracle, envelope_f_recurrence};
pub use exceptional::{
    check_exceptional_state, doubling_orbit, enumerate_exceptional_states, is_coset,
    verify_coset_criterion, ExceptionalCheck, ExceptionalState,
};
pub use instability::{
    center_tangent_spectrum, instability_report, CenterSpectrum, InstabilityReport, FD_STEP,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::QsoOperator;
use crate::simplex::SimplexPoint;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_STEPS: usize = 10_000;
/// Allowed sup-norm increase per step before monotonicity counts as violated.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergedToCenter,
    CycleDetected,
    BudgetExhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryReport {
    /// Number of operator applications performed.
    pub steps: usize,
    /// `||V^t x||_∞` for `t = 0..=steps`.
    pub sup_norm_series: Vec<f64>,
    /// `max_i |(V^t x)_i − 1/n|` for `t = 0..=steps`.
    pub center_distance_series: Vec<f64>,
    pub verdict: Verdict,
    pub cycle: Option<Cycle>,
    pub final_state: SimplexPoint,
}

impl TrajectoryReport {
    /// Largest single-step increase of the sup-norm (non-positive when monotone).
    pub fn max_sup_norm_increase(&self) -> f64 {
        self.sup_norm_series
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.sup_norm_series.len() < 2 || self.max_sup_norm_increase() <= MONOTONE_SLACK
    }

    pub fn final_center_distance(&self) -> f64 {
        *self.center_distance_series.last().expect("series holds x0")
    }
}

/// Applies `op` until the orbit is within `tol` of the center, revisits a
/// quantized state, or `max_steps` applications have been made.
pub fn iterate(
    op: &QsoOperator,
    x0: &SimplexPoint,
    max_steps: usize,
    tol: f64,
) -> Result<TrajectoryReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_steps < 1 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    if x0.len() != op.group().order() {
        return Err(Error::DimensionMismatch {
            expected: op.group().order(),
            found: x0.len(),
        });
    }
    let mut detector = CycleDetector::new();
    let mut x = x0.clone();
    let mut sup_norm_series = vec![x.sup_norm()];
    let mut center_distance_series = vec![x.sup_distance_to_center()];
    let mut steps = 0;
    let mut cycle = None;
    let verdict = loop {
        if *center_distance_series.last().unwrap() < tol {
            break Verdict::ConvergedToCenter;
        }
        if let Some(c) = detector.push(x.weights()) {
            cycle = Some(c);
            break Verdict::CycleDetected;
        }
        if steps == max_steps {
            break Verdict::BudgetExhausted;
        }
        x = op.apply(&x)?;
        steps += 1;
        sup_norm_series.push(x.sup_norm());
        center_distance_series.push(x.sup_distance_to_center());
    };
    Ok(TrajectoryReport {
        steps,
        sup_norm_series,
        center_distance_series,
        verdict,
        cycle,
        final_state: x,
    })
}

/// `(1/k) Σ_{i<k} V^i x0`.
pub fn cesaro_average(op: &QsoOperator, x0: &SimplexPoint, k: usize) -> Result<SimplexPoint> {
    Ok(cesaro_series(op, x0, k)?.pop().expect("k >= 1"))
}

/// Running Cesàro means `(1/m) Σ_{i<m} V^i x0` for `m = 1..=k`.
pub fn cesaro_series(op: &QsoOperator, x0: &SimplexPoint, k: usize) -> Result<Vec<SimplexPoint>> {
    if k < 1 {
        return Err(Error::InvalidArgument("Cesàro average needs k >= 1".into()));
    }
    let mut sum = vec![0.0; x0.len()];
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(k);
    for m in 1..=k {
        for (s, w) in sum.iter_mut().zip(x.weights()) {
            *s += w;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / m as f64).collect();
        out.push(SimplexPoint::from_map_output(mean, 0.0));
        if m < k {
            x = op.apply(&x)?;
        }
    }
    Ok(out)
}
