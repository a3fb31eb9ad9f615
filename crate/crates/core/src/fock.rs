//! Energy-truncated fermionic Fock space.
//!
//! A basis vector is labelled by its occupied modes: negative modes `n`
//! (created by `a(z^n)`) and nonnegative modes `m` (created by `a(z^m)*`).
//! The vector itself is the ordered product
//! `a(z^{neg[0]}) a(z^{neg[1]}) ⋯ a(z^{star[0]})* a(z^{star[1]})* ⋯ Ω`
//! with `neg` stored descending and `star` ascending, so the generator
//! closest to the vacuum carries the largest mode of each kind. All
//! operator signs in this crate are relative to this order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{GradedOperator, GradedSpace, Parity, WeightShift};
use crate::half::HalfInt;
use crate::linalg::{self, C64};

/// Default refusal threshold for `enumerate_basis`.
pub const DEFAULT_DIM_LIMIT: usize = 250_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    NS,
    R,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::NS => "ns",
            Sector::R => "r",
        })
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ns" => Ok(Sector::NS),
            "r" => Ok(Sector::R),
            _ => Err(Error::Parse(format!("unknown sector {s:?}, expected ns or r"))),
        }
    }
}

/// Energy of the single mode `k` as an occupied orbital.
pub fn orbital_energy(k: i64, sector: Sector) -> HalfInt {
    match sector {
        Sector::NS if k < 0 => HalfInt::from_twice(-2 * k - 1),
        Sector::NS => HalfInt::from_twice(2 * k + 1),
        Sector::R => HalfInt::from_int(k.abs()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState {
    neg: Vec<i64>,
    star: Vec<i64>,
}

impl BasisState {
    pub fn new(neg: Vec<i64>, star: Vec<i64>) -> Result<Self> {
        if neg.iter().any(|&n| n >= 0) || neg.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidState(format!(
                "negative modes must be < 0 and strictly descending: {neg:?}"
            )));
        }
        if star.iter().any(|&m| m < 0) || star.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidState(format!(
                "starred modes must be >= 0 and strictly ascending: {star:?}"
            )));
        }
        Ok(BasisState { neg, star })
    }

    pub fn vacuum() -> Self {
        BasisState { neg: Vec::new(), star: Vec::new() }
    }

    pub fn is_vacuum(&self) -> bool {
        self.neg.is_empty() && self.star.is_empty()
    }

    pub fn neg_modes(&self) -> &[i64] {
        &self.neg
    }

    pub fn star_modes(&self) -> &[i64] {
        &self.star
    }

    pub fn particle_count(&self) -> usize {
        self.neg.len() + self.star.len()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.particle_count())
    }

    pub fn energy(&self, sector: Sector) -> HalfInt {
        self.neg
            .iter()
            .chain(&self.star)
            .map(|&k| orbital_energy(k, sector))
            .sum()
    }

    pub fn energy_ns(&self) -> HalfInt {
        self.energy(Sector::NS)
    }

    pub fn occupies(&self, k: i64) -> bool {
        if k < 0 {
            self.neg.binary_search_by(|x| k.cmp(x)).is_ok()
        } else {
            self.star.binary_search(&k).is_ok()
        }
    }

    /// Number of generators standing left of the slot of mode `k` in the
    /// canonical product.
    pub fn preceding(&self, k: i64) -> usize {
        if k < 0 {
            self.neg.iter().take_while(|&&x| x > k).count()
        } else {
            self.neg.len() + self.star.iter().take_while(|&&x| x < k).count()
        }
    }

    /// Generators `(mode, starred)` in canonical left-to-right order.
    pub fn word(&self) -> Vec<(i64, bool)> {
        self.neg
            .iter()
            .map(|&n| (n, false))
            .chain(self.star.iter().map(|&m| (m, true)))
            .collect()
    }

    /// Adds mode `k`, which must be unoccupied.
    pub(crate) fn inserted(&self, k: i64) -> BasisState {
        let mut s = self.clone();
        if k < 0 {
            let pos = s.neg.iter().take_while(|&&x| x > k).count();
            s.neg.insert(pos, k);
        } else {
            let pos = s.star.iter().take_while(|&&x| x < k).count();
            s.star.insert(pos, k);
        }
        s
    }

    /// Removes mode `k`, which must be occupied.
    pub(crate) fn removed(&self, k: i64) -> BasisState {
        let mut s = self.clone();
        if k < 0 {
            s.neg.retain(|&x| x != k);
        } else {
            s.star.retain(|&x| x != k);
        }
        s
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{neg:{:?}, star:{:?}}}", self.neg, self.star)
    }
}

/// Every basis state with NS energy at most `cutoff`, ordered by energy and
/// then lexicographically by `(star, neg)`.
#[derive(Debug)]
pub struct FockTruncation {
    cutoff: HalfInt,
    basis: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

/// Serialized form of one basis vector.
#[derive(Debug, Serialize)]
pub struct BasisRecord {
    pub neg: Vec<i64>,
    pub star: Vec<i64>,
    pub energy_ns: HalfInt,
    pub energy_r: HalfInt,
    pub parity: usize,
}

impl FockTruncation {
    pub fn cutoff(&self) -> HalfInt {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.basis[i]
    }

    pub fn index_of(&self, s: &BasisState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn energies(&self, sector: Sector) -> Vec<HalfInt> {
        self.basis.iter().map(|s| s.energy(sector)).collect()
    }

    pub fn records(&self) -> Vec<BasisRecord> {
        self.basis
            .iter()
            .map(|s| BasisRecord {
                neg: s.neg.clone(),
                star: s.star.clone(),
                energy_ns: s.energy(Sector::NS),
                energy_r: s.energy(Sector::R),
                parity: s.parity().bit(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("basis records serialize")
    }
}

pub fn enumerate_basis(cutoff: HalfInt) -> Result<Arc<FockTruncation>> {
    enumerate_basis_with_limit(cutoff, DEFAULT_DIM_LIMIT)
}

pub fn enumerate_basis_with_limit(cutoff: HalfInt, limit: usize) -> Result<Arc<FockTruncation>> {
    if cutoff < HalfInt::ZERO {
        return Err(Error::InvalidState(format!("negative cutoff {cutoff}")));
    }
    // Orbitals in order of increasing energy: -1, 0, -2, 1, -3, 2, ...
    let mut orbitals = Vec::new();
    let mut level = 0i64;
    while HalfInt::from_twice(2 * level + 1) <= cutoff {
        orbitals.push((-level - 1, 2 * level + 1));
        orbitals.push((level, 2 * level + 1));
        level += 1;
    }
    let mut basis = Vec::new();
    let mut chosen = Vec::new();
    collect(&orbitals, 0, cutoff.twice(), &mut chosen, &mut basis, limit, cutoff)?;
    basis.sort_by(|a, b| {
        a.energy_ns()
            .cmp(&b.energy_ns())
            .then_with(|| a.star.cmp(&b.star))
            .then_with(|| a.neg.cmp(&b.neg))
    });
    let index = basis.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(Arc::new(FockTruncation { cutoff, basis, index }))
}

fn collect(
    orbitals: &[(i64, i64)],
    from: usize,
    budget: i64,
    chosen: &mut Vec<i64>,
    out: &mut Vec<BasisState>,
    limit: usize,
    cutoff: HalfInt,
) -> Result<()> {
    let mut neg: Vec<i64> = chosen.iter().copied().filter(|&k| k < 0).collect();
    let mut star: Vec<i64> = chosen.iter().copied().filter(|&k| k >= 0).collect();
    neg.sort_unstable_by(|a, b| b.cmp(a));
    star.sort_unstable();
    out.push(BasisState { neg, star });
    if out.len() > limit {
        return Err(Error::DimensionLimit { cutoff: cutoff.to_string(), dim: out.len(), limit });
    }
    for i in from..orbitals.len() {
        let (k, cost) = orbitals[i];
        if cost > budget {
            break;
        }
        chosen.push(k);
        collect(orbitals, i + 1, budget - cost, chosen, out, limit, cutoff)?;
        chosen.pop();
    }
    Ok(())
}

/// `e^{2πiθ L_0}` on the truncation; even and diagonal.
pub fn rotation_operator(theta: f64, sector: Sector, trunc: &Arc<FockTruncation>) -> GradedOperator {
    let space = GradedSpace::fock(trunc, sector);
    let mut m = linalg::zeros(trunc.dim(), trunc.dim());
    for (i, s) in trunc.basis().iter().enumerate() {
        let e = s.energy(sector);
        // Reduce the phase exactly before evaluating: θ·E mod 1 for integer θ.
        let phase = if theta.fract() == 0.0 {
            let t = (theta as i64).rem_euclid(2) * e.twice();
            std::f64::consts::PI * (t.rem_euclid(4) as f64)
        } else {
            2.0 * std::f64::consts::PI * theta * e.to_f64()
        };
        m[(i, i)] = C64::from_polar(1.0, phase);
        if theta.fract() == 0.0 {
            m[(i, i)] = C64::new(m[(i, i)].re.round(), 0.0);
        }
    }
    GradedOperator {
        matrix: m,
        domain: space.clone(),
        codomain: space,
        parity: Some(Parity::Even),
        weight_shift: WeightShift::Exact(HalfInt::ZERO),
    }
}
