//! The CAR representation on the truncated Fock space.
//!
//! `a(z^k)` creates mode `k` when `k < 0` and removes it when `k >= 0`;
//! `a(z^k)*` does the opposite. The sign is `(-1)` to the number of
//! generators standing left of the affected slot.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::fock::{BasisState, FockTruncation, Sector};
use crate::graded::{GradedOperator, GradedSpace, Parity, WeightShift};
use crate::half::HalfInt;
use crate::linalg::{self, CMat, C64, ZERO};


/// Applies `a(z^k)` or `a(z^k)*` to a basis state; `None` is the zero vector.
pub fn apply_mode(k: i64, starred: bool, state: &BasisState) -> Option<(f64, BasisState)> {
    let creates = (k < 0) != starred;
    let occupied = state.occupies(k);
    if creates == occupied {
        return None;
    }
    let sign = if state.preceding(k) % 2 == 0 { 1.0 } else { -1.0 };
    let next = if creates { state.inserted(k) } else { state.removed(k) };
    Some((sign, next))
}

/// NS weight shift of `a(z^k)` (unstarred) or `a(z^k)*`.
pub fn mode_weight(k: i64, starred: bool) -> HalfInt {
    let w = HalfInt::from_twice(2 * k + 1);
    if starred {
        w
    } else {
        -w
    }
}

/// Compression of a single mode operator to `trunc`.
pub fn mode_matrix(k: i64, starred: bool, trunc: &Arc<FockTruncation>) -> GradedOperator {
    mode_matrix_between(k, starred, trunc, trunc)
}

/// Compression of a single mode operator from one truncation into another.
pub fn mode_matrix_between(
    k: i64,
    starred: bool,
    from: &Arc<FockTruncation>,
    to: &Arc<FockTruncation>,
) -> GradedOperator {
    let mut m = linalg::zeros(to.dim(), from.dim());
    for (j, s) in from.basis().iter().enumerate() {
        if let Some((sign, t)) = apply_mode(k, starred, s) {
            if let Some(i) = to.index_of(&t) {
                m[(i, j)] = C64::new(sign, 0.0);
            }
        }
    }
    GradedOperator {
        matrix: m,
        domain: GradedSpace::fock(from, Sector::NS),
        codomain: GradedSpace::fock(to, Sector::NS),
        parity: Some(Parity::Odd),
        weight_shift: WeightShift::Exact(mode_weight(k, starred)),
    }
}

/// A trigonometric polynomial `sum c_n z^n` on the unit circle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CircleFunction {
    coeffs: BTreeMap<i64, C64>,
}

impl CircleFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(n: i64, c: C64) -> Self {
        let mut f = Self::zero();
        f.add_term(n, c);
        f
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, C64)>>(terms: I) -> Self {
        let mut f = Self::zero();
        for (n, c) in terms {
            f.add_term(n, c);
        }
        f
    }

    pub fn add_term(&mut self, n: i64, c: C64) {
        let e = self.coeffs.entry(n).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.coeffs.remove(&n);
        }
    }

    pub fn coeff(&self, n: i64) -> C64 {
        self.coeffs.get(&n).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<f, g>` in `L^2(S^1)`, linear in `f`.
    pub fn inner(&self, g: &CircleFunction) -> C64 {
        self.terms().map(|(n, c)| c * g.coeff(n).conj()).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self::from_terms(self.terms().map(|(n, c)| (n, c * s)))
    }

    pub fn plus(&self, g: &CircleFunction) -> Self {
        Self::from_terms(self.terms().chain(g.terms()))
    }

    /// Multiplication by `z^k`.
    pub fn shifted(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(n, c)| (n + k, c)))
    }

    /// Pointwise complex conjugate on the circle: `z^n -> z^{-n}`.
    pub fn conjugate(&self) -> Self {
        Self::from_terms(self.terms().map(|(n, c)| (-n, c.conj())))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms().map(|(n, c)| c * z.powi(n as i32)).sum()
    }

    /// Largest energy increase among the modes of `a(f)` or `a(f)*`, at least 0.
    pub fn max_raise(&self, starred: bool) -> HalfInt {
        self.coeffs
            .keys()
            .map(|&k| mode_weight(k, starred))
            .fold(HalfInt::ZERO, HalfInt::max)
    }

    /// Largest energy decrease among the modes of `a(f)` or `a(f)*`, at least 0.
    pub fn max_lower(&self, starred: bool) -> HalfInt {
        self.coeffs
            .keys()
            .map(|&k| -mode_weight(k, starred))
            .fold(HalfInt::ZERO, HalfInt::max)
    }
}

/// `a(f)`, or `a(f)* = sum conj(c_k) a(z^k)*` when `starred`.
pub fn smeared(f: &CircleFunction, starred: bool, trunc: &Arc<FockTruncation>) -> GradedOperator {
    smeared_between(f, starred, trunc, trunc)
}

pub fn smeared_between(
    f: &CircleFunction,
    starred: bool,
    from: &Arc<FockTruncation>,
    to: &Arc<FockTruncation>,
) -> GradedOperator {
    let mut m = linalg::zeros(to.dim(), from.dim());
    let mut shifts = Vec::new();
    for (j, s) in from.basis().iter().enumerate() {
        for (k, c) in f.terms() {
            let c = if starred { c.conj() } else { c };
            if let Some((sign, t)) = apply_mode(k, starred, s) {
                if let Some(i) = to.index_of(&t) {
                    m[(i, j)] += c * sign;
                }
            }
        }
    }
    for (k, _) in f.terms() {
        shifts.push(mode_weight(k, starred));
    }
    shifts.dedup();
    let weight_shift = match shifts.as_slice() {
        [] => WeightShift::Exact(HalfInt::ZERO),
        [s] => WeightShift::Exact(*s),
        _ => WeightShift::Mixed,
    };
    GradedOperator {
        matrix: m,
        domain: GradedSpace::fock(from, Sector::NS),
        codomain: GradedSpace::fock(to, Sector::NS),
        parity: Some(Parity::Odd),
        weight_shift,
    }
}

/// Basis indices with `energy + max_raise <= cutoff`: on these columns the
/// compressed product of two operators raising by at most `max_raise`
/// (at every intermediate step) equals the compressed true product.
pub fn safe_window(trunc: &FockTruncation, max_raise: HalfInt) -> Vec<usize> {
    trunc
        .basis()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.energy_ns() + max_raise <= trunc.cutoff())
        .map(|(i, _)| i)
        .collect()
}

/// `xy + yx` as a plain matrix.
pub fn anticommutator(x: &GradedOperator, y: &GradedOperator) -> CMat {
    &x.matrix * &y.matrix + &y.matrix * &x.matrix
}

/// Max entry of `{x, y} - c·1` over the given columns.
pub fn anticommutator_defect(x: &GradedOperator, y: &GradedOperator, c: C64, cols: &[usize]) -> f64 {
    let ac = anticommutator(x, y);
    let mut worst: f64 = 0.0;
    for &j in cols {
        for i in 0..ac.nrows() {
            let target = if i == j { c } else { ZERO };
            worst = worst.max((ac[(i, j)] - target).norm());
        }
    }
    worst
}
