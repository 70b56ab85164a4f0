//! Exact-revisit detection on quantized simplex states.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::simplex::SimplexPoint;

/// Quantization step per coordinate. Coset-uniform states are separated by
/// at least `1/|G|`, far above this.
pub const CYCLE_QUANTUM: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cycle {
    pub preperiod: usize,
    pub period: usize,
}

pub fn quantize(x: &[f64]) -> Vec<i64> {
    x.iter().map(|w| (w / CYCLE_QUANTUM).round() as i64).collect()
}

fn fingerprint(q: &[i64]) -> u64 {
    let mut h = DefaultHasher::new();
    q.hash(&mut h);
    h.finish()
}

/// Incremental detector keyed by a hash of each quantized state.
#[derive(Debug, Default)]
pub struct CycleDetector {
    seen: HashMap<u64, usize>,
    count: usize,
}

impl CycleDetector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the next state; returns the cycle closed by it, if any.
    pub fn push(&mut self, x: &[f64]) -> Option<Cycle> {
        let key = fingerprint(&quantize(x));
        let index = self.count;
        self.count += 1;
        match self.seen.get(&key) {
            Some(&first) => Some(Cycle {
                preperiod: first,
                period: index - first,
            }),
            None => {
                self.seen.insert(key, index);
                None
            }
        }
    }
}

/// First exact revisit in `series`, comparing quantized states.
pub fn detect_cycle(series: &[SimplexPoint]) -> Option<Cycle> {
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    for (index, x) in series.iter().enumerate() {
        let q = quantize(x.weights());
        if let Some(&first) = seen.get(&q) {
            return Some(Cycle {
                preperiod: first,
                period: index - first,
            });
        }
        seen.insert(q, index);
    }
    None
}
