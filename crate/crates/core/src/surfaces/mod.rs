//! Operators assigned to the standard planar spin surfaces: the disk, the
//! NS and R annuli and the NS pair of pants.
//!
//! Boundary circles are ordered globally as the outer unit circle, then the
//! circle at `w`, then the circle at `0`. Operators map the incoming
//! factors (domain) to the outgoing factors (codomain).

mod hardy;
mod relations;
mod sewing;

pub use hardy::{hardy_basis, perp_element, perp_elements, HardyElement};
pub use relations::{
    solve_intertwiner, verify_commutation, CommutationReport, ElementResidual, Intertwiner,
};
pub use sewing::{conjugate_check_annulus, conjugate_check_pants, conjugate_pants_elements, sew, PantsConjugateCheck};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{BasisState, FockTruncation, Sector};
use crate::graded::{GradedOperator, GradedSpace, Parity, WeightShift};
use crate::half::HalfInt;
use crate::linalg::{self, C64, ZERO};
use crate::vertex::{Generator, ModeEngine, SparseVector};

const SQRT_TOL: f64 = 1e-12;

fn check_sqrt(name: &str, q: C64, s: C64) -> Result<()> {
    if (s * s - q).norm() > SQRT_TOL * q.norm().max(1.0) {
        return Err(Error::Moduli(format!("{name}_sqrt² = {} differs from {name} = {q}", s * s)));
    }
    Ok(())
}

/// `q^e` for half-integer `e`, always as a power of the chosen square root.
pub fn half_power(q_sqrt: C64, e: HalfInt) -> C64 {
    q_sqrt.powi(e.twice() as i32)
}

/// Moduli `(w, q1, q1^{1/2}, q2, q2^{1/2})` of the NS pair of pants.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub w: Complex64,
    pub q1: Complex64,
    pub q1_sqrt: Complex64,
    pub q2: Complex64,
    pub q2_sqrt: Complex64,
}

impl ModuliPoint {
    pub fn new(w: C64, q1: C64, q1_sqrt: C64, q2: C64, q2_sqrt: C64) -> Result<Self> {
        check_sqrt("q1", q1, q1_sqrt)?;
        check_sqrt("q2", q2, q2_sqrt)?;
        let (aw, a1, a2) = (w.norm(), q1.norm(), q2.norm());
        if !(0.0 < a1 + a2 && a1 + a2 < aw && aw < 1.0 - a1) {
            return Err(Error::Moduli(format!(
                "need 0 < |q1| + |q2| < |w| < 1 - |q1|, got |w| = {aw}, |q1| = {a1}, |q2| = {a2}"
            )));
        }
        if a1 == 0.0 || a2 == 0.0 {
            return Err(Error::Moduli("q1 and q2 must be nonzero".into()));
        }
        Ok(ModuliPoint { w, q1, q1_sqrt, q2, q2_sqrt })
    }

    /// Moduli from `w`, `q1^{1/2}`, `q2^{1/2}`.
    pub fn from_roots(w: C64, q1_sqrt: C64, q2_sqrt: C64) -> Result<Self> {
        Self::new(w, q1_sqrt * q1_sqrt, q1_sqrt, q2_sqrt * q2_sqrt, q2_sqrt)
    }

    /// The complex-conjugate surface.
    pub fn conj(&self) -> Self {
        ModuliPoint {
            w: self.w.conj(),
            q1: self.q1.conj(),
            q1_sqrt: self.q1_sqrt.conj(),
            q2: self.q2.conj(),
            q2_sqrt: self.q2_sqrt.conj(),
        }
    }

    /// The geometric rate `max(|w|, |q2/w|, |q1/w|)` governing the band tails.
    pub fn rate(&self) -> f64 {
        let aw = self.w.norm();
        aw.max(self.q2.norm() / aw).max(self.q1.norm() / aw)
    }
}

/// An annulus `{|q| <= |z| <= 1}` with its sector and, for NS, `q^{1/2}`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusPoint {
    pub q: Complex64,
    pub q_sqrt: Option<Complex64>,
    pub sector: Sector,
}

impl AnnulusPoint {
    pub fn new(q: C64, q_sqrt: Option<C64>, sector: Sector) -> Result<Self> {
        if !(q.norm() > 0.0 && q.norm() < 1.0) {
            return Err(Error::Moduli(format!("annulus needs 0 < |q| < 1, got {q}")));
        }
        Self::unchecked(q, q_sqrt, sector)
    }

    /// Skips the `|q| < 1` check, for degenerate limits such as `q = 1`.
    pub fn unchecked(q: C64, q_sqrt: Option<C64>, sector: Sector) -> Result<Self> {
        match (sector, q_sqrt) {
            (Sector::NS, None) => Err(Error::Moduli("NS annulus needs q_sqrt".into())),
            (_, Some(s)) => {
                check_sqrt("q", q, s)?;
                Ok(AnnulusPoint { q, q_sqrt, sector })
            }
            (Sector::R, None) => Ok(AnnulusPoint { q, q_sqrt, sector }),
        }
    }

    pub fn ns(q_sqrt: C64) -> Result<Self> {
        Self::new(q_sqrt * q_sqrt, Some(q_sqrt), Sector::NS)
    }

    pub fn r(q: C64) -> Result<Self> {
        Self::new(q, None, Sector::R)
    }

    /// `q^e`; half-integer exponents go through `q_sqrt`.
    pub fn power(&self, e: HalfInt) -> C64 {
        match self.q_sqrt {
            Some(s) => half_power(s, e),
            None => {
                debug_assert!(e.is_integer(), "half-integer power of an R annulus");
                self.q.powi(e.floor() as i32)
            }
        }
    }

    pub fn conj(&self) -> Self {
        AnnulusPoint { q: self.q.conj(), q_sqrt: self.q_sqrt.map(|s| s.conj()), sector: self.sector }
    }

    /// Composition law with multiplied square roots.
    pub fn compose(&self, other: &AnnulusPoint) -> Result<Self> {
        if self.sector != other.sector {
            return Err(Error::SectorMismatch(format!("{} and {}", self.sector, other.sector)));
        }
        let q_sqrt = match (self.q_sqrt, other.q_sqrt) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Ok(AnnulusPoint { q: self.q * other.q, q_sqrt, sector: self.sector })
    }
}

/// A standard geometry.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Geometry {
    Disk,
    Annulus(AnnulusPoint),
    Pants(ModuliPoint),
}

impl Geometry {
    /// Outgoing and incoming circle counts.
    pub fn circles(&self) -> (usize, usize) {
        match self {
            Geometry::Disk => (1, 0),
            Geometry::Annulus(_) => (1, 1),
            Geometry::Pants(_) => (1, 2),
        }
    }

    pub fn sector(&self) -> Sector {
        match self {
            Geometry::Annulus(a) => a.sector,
            _ => Sector::NS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Disk => "disk",
            Geometry::Annulus(_) => "annulus",
            Geometry::Pants(_) => "pants",
        }
    }
}

/// `Ω` as a coordinate vector.
pub fn disk_vacuum(trunc: &FockTruncation) -> Vec<C64> {
    let mut v = vec![ZERO; trunc.dim()];
    v[0] = C64::new(1.0, 0.0);
    v
}

/// The disk operator `C -> F`, `1 ↦ Ω`.
pub fn disk_operator(trunc: &Arc<FockTruncation>) -> GradedOperator {
    let mut m = linalg::zeros(trunc.dim(), 1);
    m[(0, 0)] = C64::new(1.0, 0.0);
    GradedOperator {
        matrix: m,
        domain: GradedSpace::scalar(),
        codomain: GradedSpace::fock(trunc, Sector::NS),
        parity: Some(Parity::Even),
        weight_shift: WeightShift::Exact(HalfInt::ZERO),
    }
}

/// `q^{L_0}` in the annulus sector.
pub fn annulus_operator(a: &AnnulusPoint, trunc: &Arc<FockTruncation>) -> GradedOperator {
    let space = GradedSpace::fock(trunc, a.sector);
    let mut m = linalg::zeros(trunc.dim(), trunc.dim());
    for (i, s) in trunc.basis().iter().enumerate() {
        m[(i, i)] = a.power(s.energy(a.sector));
    }
    GradedOperator {
        matrix: m,
        domain: space.clone(),
        codomain: space,
        parity: Some(Parity::Even),
        weight_shift: WeightShift::Exact(HalfInt::ZERO),
    }
}

/// A closed range `lo..=hi` of mode indices `n` in the pants series.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub lo: i64,
    pub hi: i64,
}

impl Band {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty band [{lo}, {hi}]")));
        }
        Ok(Band { lo, hi })
    }

    pub fn radius(r: i64) -> Self {
        Band { lo: -r, hi: r }
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }
}

fn word_of(s: &BasisState) -> Vec<Generator> {
    s.word().into_iter().map(|(k, st)| Generator::new(k, st)).collect()
}

/// One term `w^{-n-1} Σ q1^{E_S} q2^{e_η} (ξ_S)_n η` of the pants series as
/// sparse output vectors, one per input basis pair (first factor major).
fn pants_term(engine: &ModeEngine, x: &ModuliPoint, trunc_in: &FockTruncation, n: i64) -> Vec<(C64, Arc<SparseVector>)> {
    let basis = trunc_in.basis();
    let wn = x.w.powi((-n - 1) as i32);
    let mut cols = Vec::with_capacity(basis.len() * basis.len());
    for s in basis {
        let word = word_of(s);
        let c1 = half_power(x.q1_sqrt, s.energy_ns());
        for eta in basis {
            let c = wn * c1 * half_power(x.q2_sqrt, eta.energy_ns());
            cols.push((c, engine.mode_apply(&word, n, eta)));
        }
    }
    cols
}

/// The pants partial sum over a band together with its term norms.
#[derive(Clone, Debug)]
pub struct PantsOperator {
    pub moduli: ModuliPoint,
    pub band: Band,
    pub operator: GradedOperator,
}

/// `T(ξ ⊗ η) = Σ_{n in band} (q1^{L0} ξ)_n q2^{L0} η w^{-n-1}` as a map
/// `F_in ⊗ F_in -> F_out`, with the circle at `w` as the first factor.
pub fn pants_operator(
    engine: &ModeEngine,
    x: &ModuliPoint,
    trunc_in: &Arc<FockTruncation>,
    trunc_out: &Arc<FockTruncation>,
    band: Band,
) -> PantsOperator {
    let d = trunc_in.dim();
    let mut m = linalg::zeros(trunc_out.dim(), d * d);
    for n in band.lo..=band.hi {
        for (col, (c, v)) in pants_term(engine, x, trunc_in, n).into_iter().enumerate() {
            for (t, val) in v.terms() {
                if let Some(row) = trunc_out.index_of(t) {
                    m[(row, col)] += c * val;
                }
            }
        }
    }
    let f = GradedSpace::fock(trunc_in, Sector::NS);
    PantsOperator {
        moduli: *x,
        band,
        operator: GradedOperator {
            matrix: m,
            domain: f.tensor(&f),
            codomain: GradedSpace::fock(trunc_out, Sector::NS),
            parity: Some(Parity::Even),
            weight_shift: WeightShift::Mixed,
        },
    }
}

/// Operator norm of the single series term `n`, measured on the full
/// (untruncated) output space.
pub fn pants_term_norm(engine: &ModeEngine, x: &ModuliPoint, trunc_in: &FockTruncation, n: i64) -> Result<f64> {
    let cols = pants_term(engine, x, trunc_in, n);
    let mut rows: BTreeMap<&BasisState, usize> = BTreeMap::new();
    for (_, v) in &cols {
        for (t, _) in v.terms() {
            let next = rows.len();
            rows.entry(t).or_insert(next);
        }
    }
    if rows.is_empty() {
        return Ok(0.0);
    }
    let mut m = linalg::zeros(rows.len(), cols.len());
    for (j, (c, v)) in cols.iter().enumerate() {
        for (t, val) in v.terms() {
            m[(rows[t], j)] = c * val;
        }
    }
    linalg::op_norm(&m)
}

/// Band-tail norm at radius `r`: the larger of the two edge terms `n = ±r`.
pub fn pants_tail_norm(engine: &ModeEngine, x: &ModuliPoint, trunc_in: &FockTruncation, r: i64) -> Result<f64> {
    Ok(pants_term_norm(engine, x, trunc_in, -r)?.max(pants_term_norm(engine, x, trunc_in, r)?))
}

/// Least-squares slope of `log y` against `x`, as a per-step rate `e^{slope}`.
pub fn fitted_rate(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, &y)| y > 0.0).map(|(&x, &y)| (x, y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

/// JSON record for one surface computation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub geometry: Geometry,
    pub cutoff: HalfInt,
    pub band: Option<Band>,
    pub residuals: BTreeMap<String, f64>,
    pub singular_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
}
