//! Group convolution on `Z_{m1} x ... x Z_{mr}`.
//!
//! Two routes: the direct `O(n²)` sum over pairs, and the character
//! transform (a multidimensional DFT, one axis per cyclic factor) in which
//! convolution becomes pointwise multiplication.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::group::GroupSpec;

/// Above this order the transform route is used by default.
pub const TRANSFORM_THRESHOLD: usize = 64;

/// Transform outputs may carry negative round-off down to this size; it is
/// clamped to zero before renormalizing.
pub const TRANSFORM_NEGATIVE_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolutionPath {
    Direct,
    Transform,
    /// Transform when the order exceeds the threshold, direct otherwise.
    Auto { threshold: usize },
}

impl Default for ConvolutionPath {
    fn default() -> Self {
        ConvolutionPath::Auto {
            threshold: TRANSFORM_THRESHOLD,
        }
    }
}

impl ConvolutionPath {
    pub fn uses_transform(self, order: usize) -> bool {
        match self {
            ConvolutionPath::Direct => false,
            ConvolutionPath::Transform => true,
            ConvolutionPath::Auto { threshold } => order > threshold,
        }
    }
}

/// `(a ∗ b)_h = Σ_{f+g=h} a_f b_g`.
pub fn convolve_direct(group: &GroupSpec, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = group.order();
    assert_eq!(a.len(), n);
    assert_eq!(b.len(), n);
    let mut out = vec![0.0; n];
    if group.rank() == 1 {
        for (f, &af) in a.iter().enumerate() {
            if af == 0.0 {
                continue;
            }
            let (head, tail) = b.split_at(n - f);
            // g < n - f lands at f + g, the rest wraps around to f + g - n.
            for (o, &bg) in out[f..].iter_mut().zip(head) {
                *o += af * bg;
            }
            for (o, &bg) in out[..f].iter_mut().zip(tail) {
                *o += af * bg;
            }
        }
        return out;
    }
    for (f, &af) in a.iter().enumerate() {
        if af == 0.0 {
            continue;
        }
        for (g, &bg) in b.iter().enumerate() {
            out[group.add_index(f, g)] += af * bg;
        }
    }
    out
}

pub fn self_convolve_direct(group: &GroupSpec, x: &[f64]) -> Vec<f64> {
    convolve_direct(group, x, x)
}

/// Cached per-axis DFT plans for one group.
#[derive(Clone)]
pub struct CharacterTransform {
    group: GroupSpec,
    forward: Vec<Option<Arc<dyn Fft<f64>>>>,
    inverse: Vec<Option<Arc<dyn Fft<f64>>>>,
}

impl fmt::Debug for CharacterTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacterTransform")
            .field("group", &self.group)
            .finish_non_exhaustive()
    }
}

impl CharacterTransform {
    pub fn new(group: &GroupSpec) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let plan = |m: usize, planner: &mut FftPlanner<f64>, inverse: bool| {
            (m > 1).then(|| {
                if inverse {
                    planner.plan_fft_inverse(m)
                } else {
                    planner.plan_fft_forward(m)
                }
            })
        };
        let forward = group
            .factors()
            .iter()
            .map(|&m| plan(m, &mut planner, false))
            .collect();
        let inverse = group
            .factors()
            .iter()
            .map(|&m| plan(m, &mut planner, true))
            .collect();
        Self {
            group: group.clone(),
            forward,
            inverse,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// Evaluates every character: `x̂(χ) = Σ_g x_g χ(g)`, in place.
    pub fn forward(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse; divide by the group order to invert `forward`.
    pub fn inverse(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex<f64>], plans: &[Option<Arc<dyn Fft<f64>>>]) {
        let n = self.group.order();
        assert_eq!(data.len(), n);
        let mut line = Vec::new();
        for ((plan, &m), &stride) in plans
            .iter()
            .zip(self.group.factors())
            .zip(self.group.strides())
        {
            let Some(plan) = plan else { continue };
            if stride == 1 {
                for chunk in data.chunks_exact_mut(m) {
                    plan.process(chunk);
                }
                continue;
            }
            line.resize(m, Complex::default());
            let block = stride * m;
            for start in (0..n).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    plan.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }

    pub fn convolve(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward(&mut fa);
        self.forward(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        self.finish(fa)
    }

    /// `x ∗ x` via pointwise squaring of the character values.
    pub fn self_convolve(&self, x: &[f64]) -> Vec<f64> {
        let mut fx: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward(&mut fx);
        for v in fx.iter_mut() {
            *v = *v * *v;
        }
        self.finish(fx)
    }

    fn finish(&self, mut data: Vec<Complex<f64>>) -> Vec<f64> {
        self.inverse(&mut data);
        let scale = 1.0 / self.group.order() as f64;
        data.into_iter().map(|v| v.re * scale).collect()
    }
}
