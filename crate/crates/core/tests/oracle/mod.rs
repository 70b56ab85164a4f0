//! Brute-force reference implementations that share no code with the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

/// Mixed-radix group `Z_{m_1} x ... x Z_{m_r}`, last factor varying fastest.
#[derive(Clone, Debug)]
pub struct Brute {
    pub factors: Vec<usize>,
    pub order: usize,
}

impl Brute {
    pub fn new(factors: &[usize]) -> Self {
        Self {
            factors: factors.to_vec(),
            order: factors.iter().product(),
        }
    }

    pub fn digits(&self, mut i: usize) -> Vec<usize> {
        let mut d = vec![0; self.factors.len()];
        for (k, &m) in self.factors.iter().enumerate().rev() {
            d[k] = i % m;
            i /= m;
        }
        d
    }

    pub fn index(&self, d: &[usize]) -> usize {
        d.iter().zip(&self.factors).fold(0, |acc, (&x, &m)| acc * m + x % m)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<usize> = (0..da.len()).map(|k| (da[k] + db[k]) % self.factors[k]).collect();
        self.index(&s)
    }

    pub fn neg(&self, a: usize) -> usize {
        let d: Vec<usize> = self
            .digits(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &m)| (m - x) % m)
            .collect();
        self.index(&d)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `(a ∗ b)(h) = Σ_f a_f b_{h−f}`.
    pub fn convolve(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.order];
        for f in 0..self.order {
            for g in 0..self.order {
                out[self.add(f, g)] += a[f] * b[g];
            }
        }
        out
    }

    /// Finite non-empty subsets closed under addition are subgroups.
    pub fn is_subgroup(&self, set: &BTreeSet<usize>) -> bool {
        !set.is_empty() && set.iter().all(|&a| set.iter().all(|&b| set.contains(&self.add(a, b))))
    }

    pub fn is_coset(&self, set: &[usize]) -> bool {
        let Some(&a0) = set.first() else {
            return false;
        };
        let shifted: BTreeSet<usize> = set.iter().map(|&a| self.sub(a, a0)).collect();
        shifted.len() == set.len() && self.is_subgroup(&shifted)
    }

    /// `{a + b : a, b ∈ set}`.
    pub fn sumset(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &a in set {
            for &b in set {
                out.insert(self.add(a, b));
            }
        }
        out
    }

    /// Pre-period and period of `A, A+A, (A+A)+(A+A), ...` as sets.
    pub fn set_doubling_orbit(&self, start: &BTreeSet<usize>) -> (usize, usize) {
        let mut seen: Vec<BTreeSet<usize>> = Vec::new();
        let mut a = start.clone();
        loop {
            if let Some(first) = seen.iter().position(|s| *s == a) {
                return (first, seen.len() - first);
            }
            seen.push(a.clone());
            a = self.sumset(&a);
        }
    }

    /// `h ∈ f + g + H`, with `H` given as a membership mask.
    pub fn in_shifted(&self, h: usize, f: usize, g: usize, subgroup: &[bool]) -> bool {
        subgroup[self.sub(h, self.add(f, g))]
    }

    /// `p_{fg,h} = μ(h) / μ(f+g+H)` on `f+g+H`, else 0.
    pub fn coefficient(&self, f: usize, g: usize, h: usize, subgroup: &[bool], mu: &[f64]) -> f64 {
        if !self.in_shifted(h, f, g, subgroup) {
            return 0.0;
        }
        let mass: f64 = (0..self.order)
            .filter(|&k| self.in_shifted(k, f, g, subgroup))
            .map(|k| mu[k])
            .sum();
        mu[h] / mass
    }

    /// `Σ_{f,g} p_{fg,h} x_f x_g` from the coefficient definition.
    pub fn apply_definition(&self, x: &[f64], subgroup: &[bool], mu: &[f64]) -> Vec<f64> {
        let n = self.order;
        let coset_mass: Vec<f64> = (0..n)
            .map(|s| (0..n).filter(|&k| subgroup[self.sub(k, s)]).map(|k| mu[k]).sum())
            .collect();
        let mut out = vec![0.0; n];
        for f in 0..n {
            for g in 0..n {
                let s = self.add(f, g);
                let w = x[f] * x[g] / coset_mass[s];
                for (h, o) in out.iter_mut().enumerate() {
                    if subgroup[self.sub(h, s)] {
                        *o += w * mu[h];
                    }
                }
            }
        }
        out
    }

    /// Coset labels: the smallest member of each coset of `H`.
    pub fn coset_label(&self, g: usize, subgroup: &[bool]) -> usize {
        (0..self.order).find(|&k| subgroup[self.sub(g, k)]).unwrap()
    }
}

pub fn mask(n: usize, members: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in members {
        m[i] = true;
    }
    m
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest `Σ x_i²` with `0 ≤ x_i ≤ p`, `Σ x_i = 1`: fill coordinates greedily.
pub fn greedy_envelope(p: f64, n: usize) -> f64 {
    let mut left = 1.0_f64;
    let mut total = 0.0;
    for _ in 0..n {
        let take = left.min(p);
        total += take * take;
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    total
}
