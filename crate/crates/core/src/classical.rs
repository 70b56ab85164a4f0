//! The three-point Volterra family and Zakharevitch's non-ergodic operator.
//!
//! ```text
//! x' = x(1 + a·y − b·z)
//! y' = y(1 − a·x + c·z)
//! z' = z(1 + b·x − c·y)        a, b, c ∈ [−1, 1]
//! ```
//!
//! On the simplex `1 = x + y + z`, so each factor is rewritten as a
//! combination of `x, y, z` with non-negative coefficients, e.g.
//! `1 + a·y − b·z = x + (1+a)·y + (1−b)·z`. That form has no cancellation,
//! which lets [`VolterraOrbit`] iterate in log coordinates: the orbit of
//! `a = b = c = 1` spends super-exponentially long stretches near the
//! vertices, with the other coordinates far below the smallest `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolterraParams {
    a: f64,
    b: f64,
    c: f64,
}

impl VolterraParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("c", c)] {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::VolterraParameter { name, value });
            }
        }
        Ok(Self { a, b, c })
    }

    pub fn zakharevitch() -> Self {
        Self { a: 1.0, b: 1.0, c: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Row `i` holds the non-negative weights of `(x, y, z)` in factor `i`.
    fn factor_weights(&self) -> [[f64; 3]; 3] {
        let (a, b, c) = (self.a, self.b, self.c);
        [
            [1.0, 1.0 + a, 1.0 - b],
            [1.0 - a, 1.0, 1.0 + c],
            [1.0 + b, 1.0 - c, 1.0],
        ]
    }
}

fn three(x: &SimplexPoint) -> Result<[f64; 3]> {
    <[f64; 3]>::try_from(x.weights()).map_err(|_| Error::DimensionMismatch {
        expected: 3,
        found: x.len(),
    })
}

pub fn volterra_apply(params: &VolterraParams, x: &SimplexPoint) -> Result<SimplexPoint> {
    let v = three(x)?;
    let w = params.factor_weights();
    let out: Vec<f64> = (0..3)
        .map(|i| v[i] * (w[i][0] * v[0] + w[i][1] * v[1] + w[i][2] * v[2]))
        .collect();
    // Off the unit sphere the map squares the mass, so drift doubles each step.
    Ok(SimplexPoint::from_map_output(out, 0.0))
}

/// `(x² + 2xy, y² + 2yz, z² + 2xz)`.
pub fn zakharevitch_apply(x: &SimplexPoint) -> Result<SimplexPoint> {
    let [x, y, z] = three(x)?;
    Ok(SimplexPoint::from_map_output(
        vec![x * (x + 2.0 * y), y * (y + 2.0 * z), z * (z + 2.0 * x)],
        0.0,
    ))
}

/// Non-ergodic iff `a, b, c` share a strict sign; a zero breaks the tie.
pub fn nonergodic_predicate(params: &VolterraParams) -> bool {
    let p = [params.a, params.b, params.c];
    p.iter().all(|&v| v > 0.0) || p.iter().all(|&v| v < 0.0)
}

/// Volterra orbit iterated on `log x`, yielding linear weights.
#[derive(Clone, Debug)]
pub struct VolterraOrbit {
    weights: [[f64; 3]; 3],
    logs: [f64; 3],
}

impl VolterraOrbit {
    pub fn new(params: &VolterraParams, x0: &SimplexPoint) -> Result<Self> {
        let v = three(x0)?;
        Ok(Self {
            weights: params.factor_weights(),
            logs: v.map(f64::ln),
        })
    }

    pub fn log_state(&self) -> [f64; 3] {
        self.logs
    }

    pub fn state(&self) -> [f64; 3] {
        self.logs.map(f64::exp)
    }

    pub fn advance(&mut self) {
        let mut next = [f64::NEG_INFINITY; 3];
        for (i, slot) in next.iter_mut().enumerate() {
            let terms: Vec<f64> = (0..3)
                .filter(|&k| self.weights[i][k] > 0.0)
                .map(|k| self.weights[i][k].ln() + self.logs[k])
                .collect();
            *slot = self.logs[i] + log_sum_exp(&terms);
        }
        let total = log_sum_exp(&next);
        self.logs = next.map(|l| l - total);
    }
}

impl Iterator for VolterraOrbit {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let out = self.state().to_vec();
        self.advance();
        Some(out)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Oscillation of the running Cesàro mean, sampled at window ends.
#[derive(Clone, Debug, Serialize)]
pub struct ErgodicityDiagnostic {
    /// `max_i (max_j R_j[i] − min_j R_j[i])`.
    pub value: f64,
    pub window: usize,
    pub horizon: usize,
    /// Step counts `t` at which `R_j` was sampled.
    pub checkpoints: Vec<usize>,
    /// `R_j`: the mean of the orbit over `[window, t_j)`.
    pub running_means: Vec<Vec<f64>>,
    /// Mean of the orbit over each window (including the burn-in window).
    pub block_means: Vec<Vec<f64>>,
}

/// Runs `orbit` for `horizon` points in windows of `window` points.
///
/// The first window is burn-in: the Cesàro limit is independent of any finite
/// prefix. The running mean of the remainder is sampled at the end of every
/// following window, and the diagnostic is its largest per-coordinate spread.
/// A convergent orbit gives a spread near round-off; an orbit whose averages
/// keep drifting gives a spread of order one. This is evidence, not proof.
pub fn ergodicity_diagnostic<I>(orbit: I, window: usize, horizon: usize) -> Result<ErgodicityDiagnostic>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    if window == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    if horizon < 2 * window {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be at least twice the window {window}"
        )));
    }
    let windows = horizon / window;
    let mut iter = orbit.into_iter();
    let mut next_point = || {
        iter.next()
            .ok_or_else(|| Error::InvalidArgument("orbit ended before the horizon".into()))
    };
    let mut block_means = Vec::with_capacity(windows);
    let mut running_means: Vec<Vec<f64>> = Vec::with_capacity(windows - 1);
    let mut checkpoints = Vec::with_capacity(windows - 1);
    // Sums are kept relative to the first post-burn-in point, so a constant
    // orbit produces exactly constant means.
    let mut reference: Vec<f64> = Vec::new();
    let mut tail_offset: Vec<f64> = Vec::new();
    for j in 0..windows {
        let first = next_point()?;
        let mut block_offset = vec![0.0; first.len()];
        if j == 1 {
            reference = first.clone();
            tail_offset = vec![0.0; first.len()];
        }
        let mut x = first.clone();
        for step in 0..window {
            if step > 0 {
                x = next_point()?;
            }
            for (i, w) in x.iter().enumerate() {
                block_offset[i] += w - first[i];
                if j > 0 {
                    tail_offset[i] += w - reference[i];
                }
            }
        }
        block_means.push(
            first
                .iter()
                .zip(&block_offset)
                .map(|(f, o)| f + o / window as f64)
                .collect(),
        );
        if j > 0 {
            let count = (j * window) as f64;
            running_means.push(
                reference
                    .iter()
                    .zip(&tail_offset)
                    .map(|(r, o)| r + o / count)
                    .collect(),
            );
            checkpoints.push((j + 1) * window);
        }
    }
    let dims = running_means.first().map_or(0, Vec::len);
    let value = (0..dims)
        .map(|i| {
            let (lo, hi) = running_means
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[i]), hi.max(r[i])));
            hi - lo
        })
        .fold(0.0, f64::max);
    Ok(ErgodicityDiagnostic {
        value,
        window,
        horizon,
        checkpoints,
        running_means,
        block_means,
    })
}

/// [`ergodicity_diagnostic`] over the orbit of `x0` under `apply`.
pub fn ergodicity_diagnostic_fn<F>(
    mut apply: F,
    x0: &SimplexPoint,
    window: usize,
    horizon: usize,
) -> Result<ErgodicityDiagnostic>
where
    F: FnMut(&SimplexPoint) -> Result<SimplexPoint>,
{
    let mut failure = None;
    let mut state = Some(x0.clone());
    let orbit = std::iter::from_fn(|| {
        let current = state.take()?;
        match apply(&current) {
            Ok(next) => state = Some(next),
            Err(e) => failure = Some(e),
        }
        Some(current.into_weights())
    });
    let result = ergodicity_diagnostic(orbit, window, horizon);
    match failure {
        Some(e) => Err(e),
        None => result,
    }
}
