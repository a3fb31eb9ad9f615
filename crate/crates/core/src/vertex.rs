//! Vertex-operator modes of the charged free fermion.
//!
//! Modes are evaluated matrix-free: `mode_apply` acts on a single basis
//! vector of the full Fock space through the Borcherds product recursion
//! seeded by the two generating fields
//! `Y(a(z^{-1})Ω, z) = Σ a(z^n) z^{-n-1}` and
//! `Y(a(z^0)*Ω, z) = Σ a(z^{-n-1})* z^{-n-1}`.
//! Compressing the resulting vectors to a truncation afterwards gives the
//! exact compression of the true mode, whatever annihilators the word holds.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::car::{apply_mode, mode_weight};
use crate::error::{Error, Result};
use crate::fock::{BasisState, FockTruncation, Sector};
use crate::graded::{GradedOperator, GradedSpace, Parity, WeightShift};
use crate::half::HalfInt;
use crate::linalg::{self, C64, ZERO};

/// One generator `a(z^k)` (`starred = false`) or `a(z^k)*`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub k: i64,
    pub starred: bool,
}

impl Generator {
    pub const fn new(k: i64, starred: bool) -> Self {
        Generator { k, starred }
    }

    pub fn weight(self) -> HalfInt {
        mode_weight(self.k, self.starred)
    }
}

/// `n(n-1)⋯(n-j+1)/j!` for any integer `n`.
pub fn generalized_binomial(n: i64, j: u32) -> i128 {
    let mut c: i128 = 1;
    for i in 0..j as i128 {
        c = c * (n as i128 - i) / (i + 1);
    }
    c
}

/// A finitely supported vector of the full Fock space with real coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    terms: BTreeMap<BasisState, f64>,
}

impl SparseVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(s: BasisState) -> Self {
        let mut v = Self::zero();
        v.terms.insert(s, 1.0);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, other: &SparseVector, c: f64) {
        if c == 0.0 {
            return;
        }
        for (s, x) in &other.terms {
            let e = self.terms.entry(s.clone()).or_insert(0.0);
            *e += c * x;
            if *e == 0.0 {
                self.terms.remove(s);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisState, f64)> {
        self.terms.iter().map(|(s, &x)| (s, x))
    }

    pub fn coeff(&self, s: &BasisState) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        self.terms.iter().map(|(s, x)| x * other.coeff(s)).sum()
    }

    pub fn apply_generator(&self, g: Generator) -> SparseVector {
        let mut out = SparseVector::zero();
        for (s, x) in &self.terms {
            if let Some((sign, t)) = apply_mode(g.k, g.starred, s) {
                out.add_scaled(&SparseVector::basis(t), sign * x);
            }
        }
        out
    }

    /// Coordinates in a truncation; components outside it are dropped.
    pub fn coordinates(&self, trunc: &FockTruncation) -> Vec<C64> {
        let mut v = vec![ZERO; trunc.dim()];
        for (s, x) in &self.terms {
            if let Some(i) = trunc.index_of(s) {
                v[i] = C64::new(*x, 0.0);
            }
        }
        v
    }
}

/// The vector `word·Ω`, generators applied right to left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateWord {
    word: Vec<Generator>,
}

impl StateWord {
    pub fn new(word: Vec<Generator>) -> Self {
        StateWord { word }
    }

    pub fn vacuum() -> Self {
        StateWord { word: Vec::new() }
    }

    /// The canonical word of a basis state, so that `vector()` is exactly that state.
    pub fn from_state(s: &BasisState) -> Self {
        StateWord {
            word: s.word().into_iter().map(|(k, st)| Generator::new(k, st)).collect(),
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.word
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.word.len())
    }

    /// `h(ξ)`, the sum of the generator weight shifts.
    pub fn weight(&self) -> HalfInt {
        self.word.iter().map(|g| g.weight()).sum()
    }

    pub fn vector(&self) -> SparseVector {
        let mut v = SparseVector::basis(BasisState::vacuum());
        for g in self.word.iter().rev() {
            v = v.apply_generator(*g);
        }
        v
    }

    pub fn target(&self, trunc: &FockTruncation) -> Vec<C64> {
        self.vector().coordinates(trunc)
    }
}

type ApplyKey = (Vec<Generator>, i64, BasisState);
type MatrixKey = (Vec<Generator>, i64, HalfInt);

/// Memoized evaluator of modes. Lookups take a read lock and inserts a
/// write lock, so one engine can be shared across threads.
#[derive(Default)]
pub struct ModeEngine {
    vectors: RwLock<HashMap<ApplyKey, Arc<SparseVector>>>,
    matrices: RwLock<HashMap<MatrixKey, Arc<GradedOperator>>>,
}

impl ModeEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Field mode `ψ_j = a(z^j)` or `ψ*_j = a(z^{-j-1})*` of a seeding generator.
    fn field_generator(starred: bool, j: i64) -> Generator {
        if starred {
            Generator::new(-j - 1, true)
        } else {
            Generator::new(j, false)
        }
    }

    /// `ξ_m η` for a word `ξ` and basis vector `η`, exactly, in the full Fock space.
    pub fn mode_apply(&self, word: &[Generator], m: i64, eta: &BasisState) -> Arc<SparseVector> {
        let key = (word.to_vec(), m, eta.clone());
        if let Some(v) = self.vectors.read().expect("mode memo poisoned").get(&key) {
            return v.clone();
        }
        let v = Arc::new(self.compute(word, m, eta));
        self.vectors.write().expect("mode memo poisoned").insert(key, v.clone());
        v
    }

    pub fn mode_apply_vector(&self, word: &[Generator], m: i64, v: &SparseVector) -> SparseVector {
        let mut out = SparseVector::zero();
        for (s, x) in v.terms() {
            out.add_scaled(&self.mode_apply(word, m, s), x);
        }
        out
    }

    fn compute(&self, word: &[Generator], m: i64, eta: &BasisState) -> SparseVector {
        let Some((&g, rest)) = word.split_first() else {
            return if m == -1 { SparseVector::basis(eta.clone()) } else { SparseVector::zero() };
        };
        // g·ξ' = η_n ξ' with η = a(z^{-1})Ω (n = k) or η = a(z^0)*Ω (n = -k-1).
        let n = if g.starred { -g.k - 1 } else { g.k };
        let h_rest: HalfInt = rest.iter().map(|g| g.weight()).sum();
        let p_rest = rest.len() as i64;
        let e = eta.energy_ns();
        let mut out = SparseVector::zero();

        // Σ_j (-1)^j C(n,j) η_{n-j} ξ'_{m+j}: the inner vector has energy
        // e + h' - (m+j) - 1, which must stay nonnegative.
        let first_bound = (e + h_rest - HalfInt::from_int(m + 1)).floor();
        let j1 = if n >= 0 { first_bound.min(n) } else { first_bound };
        for j in 0..=j1.max(-1) {
            let c = binomial_sign(n, j);
            if c == 0.0 {
                continue;
            }
            let inner = self.mode_apply(rest, m + j, eta);
            if inner.is_zero() {
                continue;
            }
            let gen = Self::field_generator(g.starred, n - j);
            out.add_scaled(&inner.apply_generator(gen), c);
        }

        // -(-1)^{p(ξ')+n} Σ_j (-1)^j C(n,j) ξ'_{m+n-j} η_j: η_j removes a mode
        // of energy j + 1/2, which must not exceed e.
        let second_bound = (e - HalfInt::HALF).floor();
        let j2 = if n >= 0 { second_bound.min(n) } else { second_bound };
        let outer_sign = if (p_rest + n).rem_euclid(2) == 0 { -1.0 } else { 1.0 };
        for j in 0..=j2.max(-1) {
            let c = binomial_sign(n, j);
            if c == 0.0 {
                continue;
            }
            let gen = Self::field_generator(g.starred, j);
            let Some((sign, lowered)) = apply_mode(gen.k, gen.starred, eta) else {
                continue;
            };
            let w = self.mode_apply(rest, m + n - j, &lowered);
            out.add_scaled(&w, outer_sign * c * sign);
        }
        debug_assert!(self.first_residual_vanishes(word, m, eta, j1), "first j-sum bound too small");
        out
    }

    /// The first omitted term of the first j-sum is zero.
    fn first_residual_vanishes(&self, word: &[Generator], m: i64, eta: &BasisState, j1: i64) -> bool {
        let rest = &word[1..];
        let j = j1.max(-1) + 1;
        let g = word[0];
        let n = if g.starred { -g.k - 1 } else { g.k };
        if n >= 0 && j > n {
            return true;
        }
        let h_rest: HalfInt = rest.iter().map(|g| g.weight()).sum();
        let energy = eta.energy_ns() + h_rest - HalfInt::from_int(m + j + 1);
        energy < HalfInt::ZERO && (rest.len() > 1 || self.compute(rest, m + j, eta).is_zero())
    }

    /// `mode(ξ, m)` compressed to `trunc`, memoized per `(word, m, cutoff)`.
    pub fn mode(&self, xi: &StateWord, m: i64, trunc: &Arc<FockTruncation>) -> Arc<GradedOperator> {
        let key = (xi.word.clone(), m, trunc.cutoff());
        if let Some(op) = self.matrices.read().expect("mode memo poisoned").get(&key) {
            return op.clone();
        }
        let op = Arc::new(self.mode_between(xi, m, trunc, trunc));
        self.matrices.write().expect("mode memo poisoned").insert(key, op.clone());
        op
    }

    /// `mode(ξ, m)` compressed from one truncation into another.
    pub fn mode_between(
        &self,
        xi: &StateWord,
        m: i64,
        from: &Arc<FockTruncation>,
        to: &Arc<FockTruncation>,
    ) -> GradedOperator {
        let mut mat = linalg::zeros(to.dim(), from.dim());
        for (j, s) in from.basis().iter().enumerate() {
            let v = self.mode_apply(&xi.word, m, s);
            for (t, x) in v.terms() {
                if let Some(i) = to.index_of(t) {
                    mat[(i, j)] = C64::new(x, 0.0);
                }
            }
        }
        GradedOperator {
            matrix: mat,
            domain: GradedSpace::fock(from, Sector::NS),
            codomain: GradedSpace::fock(to, Sector::NS),
            parity: Some(xi.parity()),
            weight_shift: WeightShift::Exact(xi.weight() - HalfInt::from_int(m + 1)),
        }
    }

    pub fn cached_vectors(&self) -> usize {
        self.vectors.read().expect("mode memo poisoned").len()
    }
}

fn binomial_sign(n: i64, j: i64) -> f64 {
    let c = generalized_binomial(n, j as u32) as f64;
    if j % 2 == 0 {
        c
    } else {
        -c
    }
}

/// A partial sum of `Y(ξ, z)` with its edge-term norms.
#[derive(Clone, Debug)]
pub struct FieldSeries {
    pub operator: GradedOperator,
    /// `‖ξ_n z^{-n-1}‖` for `n` at the lower and upper end of the range.
    pub edge_norms: (f64, f64),
}

impl FieldSeries {
    /// Norm of the last included band, the larger of the two edge terms.
    pub fn tail_norm(&self) -> f64 {
        self.edge_norms.0.max(self.edge_norms.1)
    }
}

/// `Σ_{n ∈ [lo, hi]} ξ_n z^{-n-1}` on the truncation.
pub fn field_series(
    engine: &ModeEngine,
    xi: &StateWord,
    z: Complex64,
    trunc: &Arc<FockTruncation>,
    lo: i64,
    hi: i64,
) -> Result<FieldSeries> {
    if !(z.norm() > 0.0 && z.norm() < 1.0) {
        return Err(Error::Domain(format!("field_series needs 0 < |z| < 1, got {z}")));
    }
    if lo > hi {
        return Err(Error::Domain(format!("empty mode range [{lo}, {hi}]")));
    }
    let space = GradedSpace::fock(trunc, Sector::NS);
    let mut sum = linalg::zeros(trunc.dim(), trunc.dim());
    let mut edge = (0.0, 0.0);
    for n in lo..=hi {
        let term = linalg::scale(&engine.mode(xi, n, trunc).matrix, z.powi((-n - 1) as i32));
        if n == lo {
            edge.0 = linalg::op_norm(&term)?;
        }
        if n == hi {
            edge.1 = linalg::op_norm(&term)?;
        }
        sum = sum + term;
    }
    let operator = GradedOperator {
        matrix: sum,
        domain: space.clone(),
        codomain: space,
        parity: Some(xi.parity()),
        weight_shift: if lo == hi {
            WeightShift::Exact(xi.weight() - HalfInt::from_int(lo + 1))
        } else {
            WeightShift::Mixed
        },
    };
    Ok(FieldSeries { operator, edge_norms: edge })
}
