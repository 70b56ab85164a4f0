//! The envelope `f(p) = max { Σ x_i² : Σ x_i = 1, 0 ≤ x_i ≤ p }`.
//!
//! The maximum does not depend on the dimension once it is feasible, and on
//! `[1/(k+1), 1/k]` it equals `k·p² + (1 − k·p)²`. Since `Σ x_j²` bounds every
//! coordinate of the self-convolution, `f` controls how far one step can push
//! the sup-norm: `||x||_∞ ≤ p` implies `||Vx||_∞ ≤ f(p) ≤ p`.

use crate::error::{Error, Result};

/// `k·p² + (1 − k·p)²`: `k` coordinates at the cap, one holding the remainder.
pub fn envelope_branch(k: u32, p: f64) -> f64 {
    let k = f64::from(k);
    let rest = 1.0 - k * p;
    k * p * p + rest * rest
}

fn check_domain(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::EnvelopeDomain(p));
    }
    Ok(())
}

/// Closed form with `k = ⌊1/p⌋`.
pub fn envelope_f(p: f64) -> Result<f64> {
    check_domain(p)?;
    let k = (1.0 / p).floor().clamp(1.0, f64::from(u32::MAX)) as u32;
    Ok(envelope_branch(k, p))
}

/// Maximizes over the vertices of `{Σ x_i = 1, 0 ≤ x_i ≤ p} ⊂ R^n`.
///
/// A convex function attains its maximum over a polytope at a vertex, and a
/// vertex here has every coordinate but one at a bound. Enumerates how many
/// coordinates sit at `p` and keeps the feasible candidates.
pub fn envelope_f_oracle(p: f64, n: usize) -> Result<f64> {
    check_domain(p)?;
    check_feasible(p, n)?;
    let mut best = f64::NEG_INFINITY;
    for at_cap in 0..n {
        let free = 1.0 - at_cap as f64 * p;
        if free < -1e-15 || free > p + 1e-15 {
            continue;
        }
        let free = free.clamp(0.0, p);
        best = best.max(at_cap as f64 * p * p + free * free);
    }
    // n coordinates all at the cap is a vertex only when n·p = 1.
    if ((n as f64) * p - 1.0).abs() <= 1e-15 {
        best = best.max(n as f64 * p * p);
    }
    Ok(best)
}

fn check_feasible(p: f64, n: usize) -> Result<()> {
    let np = n as f64 * p;
    if np < 1.0 - 1e-12 {
        return Err(Error::Infeasible(np));
    }
    Ok(())
}

/// `f_n(p) = p² + (1−p)²·f_{n−1}(p/(1−p))`, with `f_m(q) = 1` once `q ≥ 1`.
pub fn envelope_f_recurrence(p: f64, n: usize) -> Result<f64> {
    check_domain(p)?;
    check_feasible(p, n)?;
    let mut value = 0.0;
    let mut scale = 1.0;
    let mut cap = p;
    let mut dims = n;
    loop {
        if cap >= 1.0 || dims == 1 {
            return Ok(value + scale);
        }
        value += scale * cap * cap;
        scale *= (1.0 - cap) * (1.0 - cap);
        cap /= 1.0 - cap;
        dims -= 1;
    }
}
