//! Coset-uniform states: the orbits that do not reach the center.
//!
//! Under self-convolution the uniform state on `p+H` maps to the uniform
//! state on `2p+H`, so these states follow the doubling map on `G/H` and are
//! eventually periodic. A finite set `A` supports such a state exactly when
//! `i + j − k ∈ A` for all `i, j, k ∈ A`, i.e. when `A` is a coset.

use std::collections::HashMap;

use serde::Serialize;

use super::cycle::{detect_cycle, Cycle};
use crate::error::Result;
use crate::group::{cosets, enumerate_subgroups, quotient, Element, GroupSpec, QuotientGroup, Subgroup};
use crate::operator::QsoOperator;
use crate::simplex::SimplexPoint;

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalState {
    /// Canonical representative `p` of the support `p+H`.
    pub shift: Element,
    pub shift_index: usize,
    pub subgroup: Subgroup,
    /// Uniform on `p+H`, zero elsewhere.
    pub state: SimplexPoint,
    pub doubling_preperiod: usize,
    pub doubling_period: usize,
}

impl ExceptionalState {
    pub fn is_periodic(&self) -> bool {
        self.doubling_preperiod == 0
    }

    pub fn cycle(&self) -> Cycle {
        Cycle {
            preperiod: self.doubling_preperiod,
            period: self.doubling_period,
        }
    }
}

/// Pre-period and period of `c, 2c, 4c, ...` in `G/H`, starting from the
/// coset of `p`. Computed on integer labels, so the result is exact.
pub fn doubling_orbit(quotient: &QuotientGroup, p: usize) -> Cycle {
    let spec = quotient.spec();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut c = quotient.project(p);
    for step in 0.. {
        if let Some(&first) = seen.get(&c) {
            return Cycle {
                preperiod: first,
                period: step - first,
            };
        }
        seen.insert(c, step);
        c = spec.add_index(c, c);
    }
    unreachable!("a finite orbit revisits a label")
}

/// One state per subgroup `H` and coset `p+H`, in subgroup order then
/// representative order.
pub fn enumerate_exceptional_states(group: &GroupSpec) -> Result<Vec<ExceptionalState>> {
    let n = group.order();
    let mut out = Vec::new();
    for h in enumerate_subgroups(group)? {
        let q = quotient(group, &h)?;
        for coset in cosets(group, &h)? {
            let cycle = doubling_orbit(&q, coset.representative);
            out.push(ExceptionalState {
                shift: group.element_at(coset.representative)?,
                shift_index: coset.representative,
                subgroup: h.clone(),
                state: SimplexPoint::uniform_on(n, &coset.members),
                doubling_preperiod: cycle.preperiod,
                doubling_period: cycle.period,
            });
        }
    }
    Ok(out)
}

/// `∀ i, j, k ∈ A: i + j − k ∈ A`. Elements are flat indices.
pub fn verify_coset_criterion(group: &GroupSpec, set: &[usize]) -> bool {
    if set.is_empty() || set.iter().any(|&a| a >= group.order()) {
        return false;
    }
    let mut member = vec![false; group.order()];
    for &a in set {
        member[a] = true;
    }
    set.iter().all(|&i| {
        set.iter().all(|&j| {
            let s = group.add_index(i, j);
            set.iter().all(|&k| member[group.sub_index(s, k)])
        })
    })
}

/// Whether `A − a0` is a subgroup for some (any) `a0 ∈ A`.
pub fn is_coset(group: &GroupSpec, set: &[usize]) -> bool {
    let Some(&a0) = set.first() else {
        return false;
    };
    if set.iter().any(|&a| a >= group.order()) {
        return false;
    }
    let shifted: Vec<usize> = set.iter().map(|&a| group.sub_index(a, a0)).collect();
    Subgroup::from_members(group, &shifted).is_ok()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalCheck {
    /// `max_i |(V s)_i − u_{2p+H}(i)|`.
    pub image_deviation: f64,
    /// Cycle found by iterating the vector state.
    pub vector_cycle: Option<Cycle>,
    pub label_cycle: Cycle,
}

impl ExceptionalCheck {
    pub fn cycles_match(&self) -> bool {
        self.vector_cycle == Some(self.label_cycle)
    }
}

/// Compares one application of `op` with the doubled coset, and the cycle of
/// the vector orbit with the label-level doubling orbit.
pub fn check_exceptional_state(op: &QsoOperator, ex: &ExceptionalState) -> Result<ExceptionalCheck> {
    let group = op.group();
    let n = group.order();
    let doubled = group.add_index(ex.shift_index, ex.shift_index);
    let target: Vec<usize> = ex
        .subgroup
        .members()
        .iter()
        .map(|&h| group.add_index(doubled, h))
        .collect();
    let expected = SimplexPoint::uniform_on(n, &target);
    let image = op.apply(&ex.state)?;
    let image_deviation = image.max_abs_diff(&expected);

    let horizon = ex.doubling_preperiod + ex.doubling_period + 1;
    let mut series = Vec::with_capacity(horizon);
    let mut x = ex.state.clone();
    for _ in 0..horizon {
        let next = op.apply(&x)?;
        series.push(x);
        x = next;
    }
    Ok(ExceptionalCheck {
        image_deviation,
        vector_cycle: detect_cycle(&series),
        label_cycle: ex.cycle(),
    })
}
