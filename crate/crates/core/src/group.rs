//! Finite Abelian groups realized as direct products of cyclic groups.
//!
//! Elements are addressed by a mixed-radix flat index: the last factor varies
//! fastest, so `Z4xZ2` orders its elements `(0,0), (0,1), (1,0), ...`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default order bound for brute-force subgroup enumeration.
pub const DEFAULT_MAX_ORDER: usize = 64;

/// Environment variable overriding [`DEFAULT_MAX_ORDER`].
pub const MAX_ORDER_ENV: &str = "QSO_LAB_MAX_ORDER";

/// Subgroup-enumeration bound, honoring `QSO_LAB_MAX_ORDER` when it parses.
pub fn max_order_bound() -> usize {
    std::env::var(MAX_ORDER_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&b| b >= 1)
        .unwrap_or(DEFAULT_MAX_ORDER)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    factors: Vec<usize>,
    strides: Vec<usize>,
    order: usize,
}

impl GroupSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::MalformedGroup(String::new()));
        }
        if let Some(&bad) = factors.iter().find(|&&m| m == 0) {
            return Err(Error::InvalidFactor(bad as u64));
        }
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1];
        }
        let order = factors.iter().product();
        Ok(Self {
            factors,
            strides,
            order,
        })
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn identity(&self) -> Element {
        Element {
            residues: vec![0; self.rank()],
        }
    }

    /// Builds an element from arbitrary integers, reducing each modulo its factor.
    pub fn element(&self, residues: &[i64]) -> Result<Element> {
        self.check_rank(residues.len())?;
        Ok(Element {
            residues: residues
                .iter()
                .zip(&self.factors)
                .map(|(&r, &m)| r.rem_euclid(m as i64) as usize)
                .collect(),
        })
    }

    pub fn element_at(&self, index: usize) -> Result<Element> {
        self.check_index(index)?;
        Ok(Element {
            residues: self.digits(index),
        })
    }

    pub fn index_of(&self, a: &Element) -> Result<usize> {
        self.check_element(a)?;
        Ok(self.encode(&a.residues))
    }

    pub(crate) fn digits(&self, index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.factors)
            .map(|(&s, &m)| (index / s) % m)
            .collect()
    }

    pub(crate) fn encode(&self, residues: &[usize]) -> usize {
        residues.iter().zip(&self.strides).map(|(r, s)| r * s).sum()
    }

    /// Group law on flat indices. Callers guarantee both indices are in range.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        if self.factors.len() == 1 {
            let s = a + b;
            return if s >= self.order { s - self.order } else { s };
        }
        let mut out = 0;
        for (&s, &m) in self.strides.iter().zip(&self.factors) {
            let mut d = (a / s) % m + (b / s) % m;
            if d >= m {
                d -= m;
            }
            out += d * s;
        }
        out
    }

    pub fn negate_index(&self, a: usize) -> usize {
        let mut out = 0;
        for (&s, &m) in self.strides.iter().zip(&self.factors) {
            let d = (a / s) % m;
            out += ((m - d) % m) * s;
        }
        out
    }

    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        self.add_index(a, self.negate_index(b))
    }

    /// `k·a`.
    pub fn scale_index(&self, a: usize, k: u64) -> usize {
        let digits = self.digits(a);
        let scaled: Vec<usize> = digits
            .iter()
            .zip(&self.factors)
            .map(|(&d, &m)| ((d as u128 * k as u128) % m as u128) as usize)
            .collect();
        self.encode(&scaled)
    }

    fn check_rank(&self, found: usize) -> Result<()> {
        if found != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found,
            });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.order {
            return Err(Error::IndexOutOfRange {
                index,
                order: self.order,
            });
        }
        Ok(())
    }

    fn check_element(&self, a: &Element) -> Result<()> {
        self.check_rank(a.residues.len())?;
        if a.residues.iter().zip(&self.factors).any(|(&r, &m)| r >= m) {
            return Err(Error::InvalidArgument(format!(
                "element {a} is not reduced for {self}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|m| format!("Z{m}")).collect();
        f.write_str(&parts.join("x"))
    }
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSpec({self})")
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_group_spec(s)
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_group_spec(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses descriptors such as `"Z4xZ2"`; case-insensitive, whitespace ignored.
pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let cleaned: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase();
    let malformed = || Error::MalformedGroup(text.to_string());
    if cleaned.is_empty() {
        return Err(malformed());
    }
    let mut factors = Vec::new();
    for part in cleaned.split('x') {
        let digits = part.strip_prefix('z').ok_or_else(malformed)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let m: u64 = digits.parse().map_err(|_| malformed())?;
        if m < 1 {
            return Err(Error::InvalidFactor(m));
        }
        factors.push(usize::try_from(m).map_err(|_| malformed())?);
    }
    factors
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .ok_or_else(malformed)?;
    GroupSpec::new(factors)
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    residues: Vec<usize>,
}

impl Element {
    pub fn residues(&self) -> &[usize] {
        &self.residues
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.residues.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn add(group: &GroupSpec, a: &Element, b: &Element) -> Result<Element> {
    group.check_element(a)?;
    group.check_element(b)?;
    let residues = a
        .residues
        .iter()
        .zip(&b.residues)
        .zip(&group.factors)
        .map(|((&x, &y), &m)| (x + y) % m)
        .collect();
    Ok(Element { residues })
}

pub fn negate(group: &GroupSpec, a: &Element) -> Result<Element> {
    group.check_element(a)?;
    let residues = a
        .residues
        .iter()
        .zip(&group.factors)
        .map(|(&x, &m)| (m - x) % m)
        .collect();
    Ok(Element { residues })
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Subgroup {
    group_order: usize,
    members: Vec<usize>,
    #[serde(skip)]
    mask: Vec<bool>,
}

impl Subgroup {
    /// Validates an explicit member set (flat indices) as a subgroup of `group`.
    pub fn from_members(group: &GroupSpec, members: &[usize]) -> Result<Self> {
        let n = group.order();
        let mut mask = vec![false; n];
        for &m in members {
            group.check_index(m)?;
            mask[m] = true;
        }
        if !mask[0] {
            return Err(Error::NotASubgroup("missing the neutral element"));
        }
        let sorted: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        for &a in &sorted {
            if !mask[group.negate_index(a)] {
                return Err(Error::NotASubgroup("not closed under negation"));
            }
            for &b in &sorted {
                if !mask[group.add_index(a, b)] {
                    return Err(Error::NotASubgroup("not closed under addition"));
                }
            }
        }
        Ok(Self::from_mask(n, mask))
    }

    pub fn trivial(group: &GroupSpec) -> Self {
        let mut mask = vec![false; group.order()];
        mask[0] = true;
        Self::from_mask(group.order(), mask)
    }

    pub fn whole(group: &GroupSpec) -> Self {
        Self::from_mask(group.order(), vec![true; group.order()])
    }

    fn from_mask(group_order: usize, mask: Vec<bool>) -> Self {
        let members = (0..group_order).filter(|&i| mask[i]).collect();
        Self {
            group_order,
            members,
            mask,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn index(&self) -> usize {
        self.group_order / self.order()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.mask.get(index).copied().unwrap_or(false)
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.order() == self.group_order
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.group_order == other.group_order && self.members.iter().all(|&m| other.contains(m))
    }

    pub(crate) fn check_group(&self, group: &GroupSpec) -> Result<()> {
        if self.group_order != group.order() {
            return Err(Error::ForeignSubgroup {
                expected: group.order(),
                found: self.group_order,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup{:?}", self.members)
    }
}

impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.order(), &self.members).cmp(&(other.order(), &other.members))
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Smallest subgroup containing `generators`, given as flat indices.
pub fn closure_of_indices(group: &GroupSpec, generators: &[usize]) -> Result<Subgroup> {
    for &g in generators {
        group.check_index(g)?;
    }
    let mut mask = vec![false; group.order()];
    mask[0] = true;
    let mut members = vec![0usize];
    let mut cursor = 0;
    // Every element of a finite group has finite order, so closing under
    // "add a generator" already yields inverses.
    while cursor < members.len() {
        let a = members[cursor];
        cursor += 1;
        for &g in generators {
            let s = group.add_index(a, g);
            if !mask[s] {
                mask[s] = true;
                members.push(s);
            }
        }
    }
    Ok(Subgroup::from_mask(group.order(), mask))
}

pub fn subgroup_closure(group: &GroupSpec, generators: &[Element]) -> Result<Subgroup> {
    let indices = generators
        .iter()
        .map(|g| group.index_of(g))
        .collect::<Result<Vec<_>>>()?;
    closure_of_indices(group, &indices)
}

/// All subgroups, sorted by order then members. Fails above [`max_order_bound`].
pub fn enumerate_subgroups(group: &GroupSpec) -> Result<Vec<Subgroup>> {
    enumerate_subgroups_bounded(group, max_order_bound())
}

pub fn enumerate_subgroups_bounded(group: &GroupSpec, bound: usize) -> Result<Vec<Subgroup>> {
    if group.order() > bound {
        return Err(Error::OrderBound {
            order: group.order(),
            bound,
        });
    }
    // Grow subgroups one generator at a time; every subgroup is reached
    // because it is generated by a chain of its own elements.
    let trivial = Subgroup::trivial(group);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(trivial.members.clone());
    let mut found = vec![trivial];
    let mut cursor = 0;
    while cursor < found.len() {
        let base = found[cursor].members.clone();
        cursor += 1;
        for g in 0..group.order() {
            if found[cursor - 1].contains(g) {
                continue;
            }
            let mut gens = base.clone();
            gens.push(g);
            let next = closure_of_indices(group, &gens)?;
            if seen.insert(next.members.clone()) {
                found.push(next);
            }
        }
    }
    found.sort();
    Ok(found)
}

#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct Coset {
    pub representative: usize,
    pub members: Vec<usize>,
}

impl fmt::Debug for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+H{:?}", self.representative, self.members)
    }
}

/// Partition of `group` into cosets of `subgroup`, ordered by representative
/// (the smallest flat index in each coset).
pub fn cosets(group: &GroupSpec, subgroup: &Subgroup) -> Result<Vec<Coset>> {
    subgroup.check_group(group)?;
    let n = group.order();
    let mut assigned = vec![false; n];
    let mut out = Vec::with_capacity(subgroup.index());
    for r in 0..n {
        if assigned[r] {
            continue;
        }
        let mut members: Vec<usize> = subgroup
            .members()
            .iter()
            .map(|&h| group.add_index(r, h))
            .collect();
        members.sort_unstable();
        for &m in &members {
            if assigned[m] {
                return Err(Error::NotASubgroup("cosets overlap"));
            }
            assigned[m] = true;
        }
        out.push(Coset {
            representative: r,
            members,
        });
    }
    Ok(out)
}

/// `G/H` realized as a concrete cyclic product together with the projection.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    spec: GroupSpec,
    projection: Vec<usize>,
    cosets: Vec<Coset>,
    subgroup: Subgroup,
}

impl QuotientGroup {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// Map from flat index in `G` to flat index in `G/H`.
    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    pub fn project(&self, index: usize) -> usize {
        self.projection[index]
    }

    /// Cosets indexed by their flat index in the quotient.
    pub fn cosets(&self) -> &[Coset] {
        &self.cosets
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }
}

pub fn quotient(group: &GroupSpec, subgroup: &Subgroup) -> Result<QuotientGroup> {
    subgroup.check_group(group)?;
    let n = group.order();
    let (spec, projection) = if subgroup.is_trivial() {
        (group.clone(), (0..n).collect::<Vec<_>>())
    } else {
        let map = QuotientMap::new(group, subgroup);
        let projection = (0..n).map(|i| map.project(group, i)).collect();
        (map.spec, projection)
    };
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); spec.order()];
    for (i, &c) in projection.iter().enumerate() {
        fibers[c].push(i);
    }
    if fibers.iter().any(|f| f.len() != subgroup.order()) {
        return Err(Error::NotASubgroup("projection fibers are uneven"));
    }
    let cosets = fibers
        .into_iter()
        .map(|members| Coset {
            representative: members[0],
            members,
        })
        .collect();
    Ok(QuotientGroup {
        spec,
        projection,
        cosets,
        subgroup: subgroup.clone(),
    })
}

/// Diagonalizes the relation lattice of `G/H` by unimodular row and column
/// operations. With `G = Z^r / diag(m)` and relations from generators of `H`,
/// the column transform maps residue vectors onto the diagonal coordinates.
struct QuotientMap {
    spec: GroupSpec,
    // Column transform restricted to the kept (non-unit) diagonal entries.
    columns: Vec<Vec<i64>>,
    moduli: Vec<i64>,
}

impl QuotientMap {
    fn new(group: &GroupSpec, subgroup: &Subgroup) -> Self {
        let r = group.rank();
        let mut rows: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut row = vec![0i64; r];
                row[i] = group.factors()[i] as i64;
                row
            })
            .collect();
        for g in minimal_generators(group, subgroup) {
            rows.push(group.digits(g).into_iter().map(|d| d as i64).collect());
        }
        let (diagonal, transform) = diagonalize(rows, r);
        let mut columns = Vec::new();
        let mut moduli = Vec::new();
        for (t, &d) in diagonal.iter().enumerate() {
            if d > 1 {
                columns.push((0..r).map(|i| transform[i][t]).collect());
                moduli.push(d);
            }
        }
        let factors: Vec<usize> = if moduli.is_empty() {
            vec![1]
        } else {
            moduli.iter().map(|&d| d as usize).collect()
        };
        Self {
            spec: GroupSpec::new(factors).expect("positive diagonal"),
            columns,
            moduli,
        }
    }

    fn project(&self, group: &GroupSpec, index: usize) -> usize {
        if self.moduli.is_empty() {
            return 0;
        }
        let digits = group.digits(index);
        let coords: Vec<usize> = self
            .columns
            .iter()
            .zip(&self.moduli)
            .map(|(col, &d)| {
                let v: i128 = digits
                    .iter()
                    .zip(col)
                    .map(|(&x, &q)| x as i128 * q as i128)
                    .sum();
                v.rem_euclid(d as i128) as usize
            })
            .collect();
        self.spec.encode(&coords)
    }
}

/// A small generating set: add members that are not yet in the span.
fn minimal_generators(group: &GroupSpec, subgroup: &Subgroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = Subgroup::trivial(group);
    for &m in subgroup.members() {
        if !span.contains(m) {
            gens.push(m);
            span = closure_of_indices(group, &gens).expect("members are in range");
        }
    }
    gens
}

/// Returns the diagonal of `P·A·Q` and the unimodular column transform `Q`.
fn diagonalize(mut a: Vec<Vec<i64>>, cols: usize) -> (Vec<i64>, Vec<Vec<i64>>) {
    let rows = a.len();
    let mut q: Vec<Vec<i64>> = (0..cols)
        .map(|i| (0..cols).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut diagonal = Vec::with_capacity(cols);
    for t in 0..cols.min(rows) {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs());
            let Some((pi, pj)) = pivot else {
                break;
            };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                for row in q.iter_mut() {
                    row.swap(t, pj);
                }
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let f = a[i][t] / p;
                if f != 0 {
                    for j in t..cols {
                        a[i][j] -= f * a[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let f = a[t][j] / p;
                if f != 0 {
                    for row in a.iter_mut() {
                        row[j] -= f * row[t];
                    }
                    for row in q.iter_mut() {
                        row[j] -= f * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if clean {
                break;
            }
        }
        diagonal.push(a[t][t].abs());
    }
    (diagonal, q)
}

/// Every Abelian group of order `n` up to isomorphism, as invariant-factor
/// products `Z_{d1} x ... x Z_{dk}` with `d1 | d2 | ... | dk`.
pub fn abelian_groups_of_order(n: usize) -> Vec<GroupSpec> {
    fn extend(remaining: usize, prev: usize, acc: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if remaining == 1 {
            if !acc.is_empty() {
                out.insert(acc.clone());
            }
            return;
        }
        for d in 2..=remaining {
            if remaining.is_multiple_of(d) && d.is_multiple_of(prev) {
                acc.push(d);
                extend(remaining / d, d, acc, out);
                acc.pop();
            }
        }
    }
    if n == 1 {
        return vec![GroupSpec::cyclic(1).expect("Z1")];
    }
    let mut out = BTreeSet::new();
    extend(n, 1, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|f| GroupSpec::new(f).expect("factors are positive"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupSpec {
        parse_group_spec(s).unwrap()
    }

    #[test]
    fn parses_descriptors() {
        let z3 = g("Z3");
        assert_eq!(z3.factors(), &[3]);
        assert_eq!(z3.order(), 3);
        let p = g("Z4xZ2");
        assert_eq!(p.factors(), &[4, 2]);
        assert_eq!(p.order(), 8);
        assert_eq!(g(" z4 X z2 "), p);
        assert_eq!(p.to_string(), "Z4xZ2");
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert_eq!(parse_group_spec("Z0"), Err(Error::InvalidFactor(0)));
        for bad in ["", "Z", "4", "Z4x", "Z-1", "Y4", "Z4*Z2", "Z4xxZ2"] {
            assert!(parse_group_spec(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn add_and_negate_examples() {
        let z4 = g("Z4");
        let a = z4.element(&[3]).unwrap();
        let b = z4.element(&[2]).unwrap();
        assert_eq!(add(&z4, &a, &b).unwrap().residues(), &[1]);
        assert_eq!(add(&z4, &a, &z4.identity()).unwrap(), a);

        let p = g("Z4xZ2");
        let x = p.element(&[3, 1]).unwrap();
        let y = p.element(&[1, 1]).unwrap();
        assert_eq!(add(&p, &x, &y).unwrap(), p.identity());
        assert_eq!(negate(&p, &x).unwrap(), y);

        let z5 = g("Z5");
        assert_eq!(negate(&z5, &z5.element(&[2]).unwrap()).unwrap().residues(), &[3]);
        assert_eq!(negate(&z5, &z5.identity()).unwrap(), z5.identity());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = g("Z4xZ2");
        let z4 = g("Z4");
        let a = z4.element(&[1]).unwrap();
        assert!(matches!(
            add(&p, &a, &a),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(negate(&p, &a).is_err());
    }

    #[test]
    fn group_axioms_exhaustive_on_small_groups() {
        for desc in ["Z1", "Z6", "Z2xZ2", "Z4xZ2", "Z2xZ3xZ2"] {
            let grp = g(desc);
            let n = grp.order();
            for a in 0..n {
                assert_eq!(grp.add_index(a, 0), a);
                assert_eq!(grp.add_index(a, grp.negate_index(a)), 0);
                for b in 0..n {
                    assert_eq!(grp.add_index(a, b), grp.add_index(b, a));
                    for c in 0..n {
                        assert_eq!(
                            grp.add_index(grp.add_index(a, b), c),
                            grp.add_index(a, grp.add_index(b, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn flat_index_roundtrip() {
        let grp = g("Z3xZ4xZ2");
        for i in 0..grp.order() {
            let e = grp.element_at(i).unwrap();
            assert_eq!(grp.index_of(&e).unwrap(), i);
        }
        assert!(grp.element_at(24).is_err());
    }

    #[test]
    fn closure_examples() {
        let z6 = g("Z6");
        let h = subgroup_closure(&z6, &[z6.element(&[2]).unwrap()]).unwrap();
        assert_eq!(h.members(), &[0, 2, 4]);
        let z4 = g("Z4");
        assert_eq!(subgroup_closure(&z4, &[]).unwrap().members(), &[0]);
        let v = g("Z2xZ2");
        let gens = [v.element(&[1, 0]).unwrap(), v.element(&[0, 1]).unwrap()];
        assert_eq!(subgroup_closure(&v, &gens).unwrap().order(), 4);
    }

    #[test]
    fn enumeration_examples() {
        let subs = enumerate_subgroups(&g("Z4")).unwrap();
        let members: Vec<&[usize]> = subs.iter().map(|s| s.members()).collect();
        assert_eq!(members, vec![&[0][..], &[0, 2], &[0, 1, 2, 3]]);
        assert_eq!(enumerate_subgroups(&g("Z2xZ2")).unwrap().len(), 5);
        assert_eq!(enumerate_subgroups(&g("Z1")).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_respects_bound() {
        let big = g("Z65");
        assert!(matches!(
            enumerate_subgroups_bounded(&big, 64),
            Err(Error::OrderBound { order: 65, bound: 64 })
        ));
    }

    #[test]
    fn explicit_member_validation() {
        let z6 = g("Z6");
        assert!(Subgroup::from_members(&z6, &[0, 3]).is_ok());
        assert!(Subgroup::from_members(&z6, &[0, 1]).is_err());
        assert!(Subgroup::from_members(&z6, &[3]).is_err());
    }

    #[test]
    fn coset_examples() {
        let z6 = g("Z6");
        let h = Subgroup::from_members(&z6, &[0, 3]).unwrap();
        let cs = cosets(&z6, &h).unwrap();
        let members: Vec<Vec<usize>> = cs.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 3], vec![1, 4], vec![2, 5]]);

        let whole = Subgroup::whole(&z6);
        assert_eq!(cosets(&z6, &whole).unwrap().len(), 1);

        let z4 = g("Z4");
        let singletons = cosets(&z4, &Subgroup::trivial(&z4)).unwrap();
        assert_eq!(singletons.len(), 4);
        assert!(singletons.iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn quotient_examples() {
        let z4 = g("Z4");
        let h = Subgroup::from_members(&z4, &[0, 2]).unwrap();
        let q = quotient(&z4, &h).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(q.project(0), q.project(2));
        assert_ne!(q.project(0), q.project(1));

        let p = g("Z4xZ2");
        let q = quotient(&p, &Subgroup::trivial(&p)).unwrap();
        assert_eq!(q.spec(), &p);
        assert_eq!(q.projection(), &(0..8).collect::<Vec<_>>()[..]);

        let q = quotient(&p, &Subgroup::whole(&p)).unwrap();
        assert_eq!(q.order(), 1);
        assert!(q.projection().iter().all(|&c| c == 0));
    }

    #[test]
    fn quotient_projection_is_a_homomorphism() {
        for desc in ["Z8", "Z4xZ2", "Z2xZ2xZ2", "Z6xZ3", "Z12"] {
            let grp = g(desc);
            for h in enumerate_subgroups(&grp).unwrap() {
                let q = quotient(&grp, &h).unwrap();
                assert_eq!(q.order() * h.order(), grp.order());
                for a in 0..grp.order() {
                    for b in 0..grp.order() {
                        assert_eq!(
                            q.project(grp.add_index(a, b)),
                            q.spec().add_index(q.project(a), q.project(b)),
                            "{desc} / {h:?}"
                        );
                    }
                }
                for c in q.cosets() {
                    assert!(c.members.iter().all(|&m| q.project(m) == q.project(c.representative)));
                    assert_eq!(c.members.len(), h.order());
                }
            }
        }
    }

    #[test]
    fn counts_abelian_groups() {
        let counts: Vec<usize> = (1..=16).map(|n| abelian_groups_of_order(n).len()).collect();
        // number of partitions of each prime exponent, multiplied
        assert_eq!(counts, vec![1, 1, 1, 2, 1, 1, 1, 3, 2, 1, 1, 2, 1, 1, 1, 5]);
        assert!(abelian_groups_of_order(8)
            .iter()
            .any(|s| s.factors() == [2, 2, 2]));
    }

    #[test]
    fn lagrange_holds_for_enumerated_subgroups() {
        for desc in ["Z12", "Z2xZ6", "Z3xZ3"] {
            let grp = g(desc);
            for h in enumerate_subgroups(&grp).unwrap() {
                assert_eq!(grp.order() % h.order(), 0);
                assert!(h.contains(0));
            }
        }
    }
}
