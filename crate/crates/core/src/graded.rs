//! Z/2-graded spaces with tensor-factor structure, and operators between them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{FockTruncation, Sector};
use crate::half::HalfInt;
use crate::linalg::{self, CMat, C64, ZERO};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: usize) -> Self {
        if bit % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// `(-1)^p`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn add(self, other: Parity) -> Parity {
        Parity::from_bit(self.bit() + other.bit())
    }

    /// `(-1)^{p q}`.
    pub fn koszul(self, other: Parity) -> f64 {
        if self.is_odd() && other.is_odd() {
            -1.0
        } else {
            1.0
        }
    }
}

/// One tensor factor: a basis parity vector, optional energies, and the
/// truncation it came from when it is a Fock factor.
#[derive(Clone, Debug)]
pub struct Factor {
    parity: Arc<[Parity]>,
    energy: Option<Arc<[HalfInt]>>,
    sector: Option<Sector>,
    truncation: Option<Arc<FockTruncation>>,
}

impl Factor {
    pub fn from_parities(parity: Vec<Parity>) -> Self {
        Factor {
            parity: parity.into(),
            energy: None,
            sector: None,
            truncation: None,
        }
    }

    /// Even and odd dimensions, even basis vectors first.
    pub fn from_dims(even: usize, odd: usize) -> Self {
        let mut p = vec![Parity::Even; even];
        p.extend(std::iter::repeat(Parity::Odd).take(odd));
        Self::from_parities(p)
    }

    pub fn fock(trunc: &Arc<FockTruncation>, sector: Sector) -> Self {
        Factor {
            parity: trunc.basis().iter().map(|s| s.parity()).collect::<Vec<_>>().into(),
            energy: Some(trunc.basis().iter().map(|s| s.energy_ns()).collect::<Vec<_>>().into()),
            sector: Some(sector),
            truncation: Some(trunc.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parity
    }

    pub fn energies(&self) -> Option<&[HalfInt]> {
        self.energy.as_deref()
    }

    pub fn sector(&self) -> Option<Sector> {
        self.sector
    }

    pub fn truncation(&self) -> Option<&Arc<FockTruncation>> {
        self.truncation.as_ref()
    }

    /// `(even dimension, odd dimension)`.
    pub fn dims(&self) -> (usize, usize) {
        let odd = self.parity.iter().filter(|p| p.is_odd()).count();
        (self.dim() - odd, odd)
    }

    pub fn same_shape(&self, other: &Factor) -> bool {
        self.parity == other.parity
    }
}

/// An ordered tensor product of factors; the empty product is `C`.
#[derive(Clone, Debug)]
pub struct GradedSpace {
    factors: Vec<Factor>,
    parity: Vec<Parity>,
    energy: Option<Vec<HalfInt>>,
}

impl GradedSpace {
    pub fn new(factors: Vec<Factor>) -> Self {
        let mut parity = vec![Parity::Even];
        let mut energy = Some(vec![HalfInt::ZERO]);
        for f in &factors {
            parity = parity
                .iter()
                .flat_map(|a| f.parity.iter().map(move |b| a.add(*b)))
                .collect();
            energy = match (energy, f.energies()) {
                (Some(e), Some(fe)) => Some(e.iter().flat_map(|a| fe.iter().map(move |b| *a + *b)).collect()),
                _ => None,
            };
        }
        GradedSpace { factors, parity, energy }
    }

    /// The scalar space `C` (one even basis vector, no factors).
    pub fn scalar() -> Self {
        Self::new(Vec::new())
    }

    pub fn single(factor: Factor) -> Self {
        Self::new(vec![factor])
    }

    pub fn fock(trunc: &Arc<FockTruncation>, sector: Sector) -> Self {
        Self::single(Factor::fock(trunc, sector))
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::dim).collect()
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parity
    }

    /// Total NS energy of each basis vector, when every factor carries energies.
    pub fn energies(&self) -> Option<&[HalfInt]> {
        self.energy.as_deref()
    }

    pub fn dims(&self) -> (usize, usize) {
        let odd = self.parity.iter().filter(|p| p.is_odd()).count();
        (self.dim() - odd, odd)
    }

    pub fn tensor(&self, other: &GradedSpace) -> GradedSpace {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        GradedSpace::new(f)
    }

    pub fn same_shape(&self, other: &GradedSpace) -> bool {
        self.factors.len() == other.factors.len()
            && self.factors.iter().zip(&other.factors).all(|(a, b)| a.same_shape(b))
    }

    /// Splits a flat index into per-factor indices.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let dims = self.factor_dims();
        let mut out = vec![0; dims.len()];
        for (slot, d) in out.iter_mut().zip(&dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        self.factors.iter().zip(multi).fold(0, |acc, (f, i)| acc * f.dim() + i)
    }

    /// Energy of factor `k` at each flat basis index.
    pub fn factor_energy(&self, k: usize) -> Option<Vec<HalfInt>> {
        let e = self.factors[k].energies()?;
        Some((0..self.dim()).map(|i| e[self.unflatten(i)[k]]).collect())
    }

    /// The grading involution `d`.
    pub fn grading(&self) -> CMat {
        let n = self.dim();
        let mut m = linalg::zeros(n, n);
        for (i, p) in self.parity.iter().enumerate() {
            m[(i, i)] = C64::new(p.sign(), 0.0);
        }
        m
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WeightShift {
    Exact(HalfInt),
    Mixed,
}

impl WeightShift {
    fn add(self, other: WeightShift) -> WeightShift {
        match (self, other) {
            (WeightShift::Exact(a), WeightShift::Exact(b)) => WeightShift::Exact(a + b),
            _ => WeightShift::Mixed,
        }
    }

    fn neg(self) -> WeightShift {
        match self {
            WeightShift::Exact(a) => WeightShift::Exact(-a),
            WeightShift::Mixed => WeightShift::Mixed,
        }
    }
}

/// A complex matrix `codomain x domain` tagged with grading metadata.
///
/// `parity = None` marks an inhomogeneous operator.
#[derive(Clone, Debug)]
pub struct GradedOperator {
    pub matrix: CMat,
    pub domain: GradedSpace,
    pub codomain: GradedSpace,
    pub parity: Option<Parity>,
    pub weight_shift: WeightShift,
}

impl GradedOperator {
    /// Wraps a matrix, inferring parity and weight shift from its nonzero pattern.
    pub fn new(matrix: CMat, domain: GradedSpace, codomain: GradedSpace) -> Result<Self> {
        check_shape(&matrix, &domain, &codomain)?;
        let parity = observed_parity(&matrix, &domain, &codomain, 0.0);
        let weight_shift = observed_weight_shift(&matrix, &domain, &codomain);
        Ok(GradedOperator { matrix, domain, codomain, parity, weight_shift })
    }

    /// Wraps a matrix with stated metadata, which is then checked.
    pub fn with_meta(
        matrix: CMat,
        domain: GradedSpace,
        codomain: GradedSpace,
        parity: Option<Parity>,
        weight_shift: WeightShift,
    ) -> Result<Self> {
        check_shape(&matrix, &domain, &codomain)?;
        let op = GradedOperator { matrix, domain, codomain, parity, weight_shift };
        op.check_metadata()?;
        Ok(op)
    }

    pub fn identity(space: &GradedSpace) -> Self {
        GradedOperator {
            matrix: linalg::identity(space.dim()),
            domain: space.clone(),
            codomain: space.clone(),
            parity: Some(Parity::Even),
            weight_shift: WeightShift::Exact(HalfInt::ZERO),
        }
    }

    pub fn zero(domain: &GradedSpace, codomain: &GradedSpace, parity: Parity, shift: WeightShift) -> Self {
        GradedOperator {
            matrix: linalg::zeros(codomain.dim(), domain.dim()),
            domain: domain.clone(),
            codomain: codomain.clone(),
            parity: Some(parity),
            weight_shift: shift,
        }
    }

    pub fn grading(space: &GradedSpace) -> Self {
        GradedOperator {
            matrix: space.grading(),
            domain: space.clone(),
            codomain: space.clone(),
            parity: Some(Parity::Even),
            weight_shift: WeightShift::Exact(HalfInt::ZERO),
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_even(&self) -> bool {
        self.parity == Some(Parity::Even)
    }

    /// Verifies that stated parity and weight shift match the nonzero pattern.
    pub fn check_metadata(&self) -> Result<()> {
        let (dp, cp) = (self.domain.parities(), self.codomain.parities());
        let ee = (self.domain.energies(), self.codomain.energies());
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                if self.matrix[(i, j)] == ZERO {
                    continue;
                }
                if let Some(p) = self.parity {
                    if cp[i] != dp[j].add(p) {
                        return Err(Error::Dimension(format!(
                            "entry ({i},{j}) violates stated parity {p:?}"
                        )));
                    }
                }
                if let (WeightShift::Exact(s), (Some(de), Some(ce))) = (self.weight_shift, ee) {
                    if ce[i] != de[j] + s {
                        return Err(Error::Dimension(format!(
                            "entry ({i},{j}) violates stated weight shift {s}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedOperator) -> Result<GradedOperator> {
        if self.cols() != other.rows() || !self.domain.same_shape(&other.codomain) {
            return Err(Error::Dimension(format!(
                "compose: {}x{} after {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(GradedOperator {
            matrix: &self.matrix * &other.matrix,
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            parity: match (self.parity, other.parity) {
                (Some(a), Some(b)) => Some(a.add(b)),
                _ => None,
            },
            weight_shift: self.weight_shift.add(other.weight_shift),
        })
    }

    pub fn adjoint(&self) -> GradedOperator {
        GradedOperator {
            matrix: linalg::adjoint(&self.matrix),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            parity: self.parity,
            weight_shift: self.weight_shift.neg(),
        }
    }

    pub fn scaled(&self, s: C64) -> GradedOperator {
        GradedOperator { matrix: linalg::scale(&self.matrix, s), ..self.clone() }
    }

    fn combine(&self, other: &GradedOperator, sign: f64) -> Result<GradedOperator> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Dimension("sum of operators with different shapes".into()));
        }
        let matrix = if sign > 0.0 { &self.matrix + &other.matrix } else { &self.matrix - &other.matrix };
        Ok(GradedOperator {
            matrix,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            parity: if self.parity == other.parity { self.parity } else { None },
            weight_shift: if self.weight_shift == other.weight_shift {
                self.weight_shift
            } else {
                WeightShift::Mixed
            },
        })
    }

    pub fn plus(&self, other: &GradedOperator) -> Result<GradedOperator> {
        self.combine(other, 1.0)
    }

    pub fn minus(&self, other: &GradedOperator) -> Result<GradedOperator> {
        self.combine(other, -1.0)
    }

    /// Component of the given parity.
    pub fn part(&self, p: Parity) -> GradedOperator {
        let (dp, cp) = (self.domain.parities(), self.codomain.parities());
        let matrix = faer::Mat::from_fn(self.rows(), self.cols(), |i, j| {
            if cp[i] == dp[j].add(p) {
                self.matrix[(i, j)]
            } else {
                ZERO
            }
        });
        GradedOperator { matrix, parity: Some(p), ..self.clone() }
    }

    /// Parity actually realized by the entries, `None` when mixed.
    pub fn observed_parity(&self) -> Option<Parity> {
        observed_parity(&self.matrix, &self.domain, &self.codomain, 0.0)
    }

    /// Like `observed_parity`, ignoring entries of modulus at most `tol`.
    pub fn observed_parity_with_tolerance(&self, tol: f64) -> Option<Parity> {
        observed_parity(&self.matrix, &self.domain, &self.codomain, tol)
    }

    pub fn observed_weight_shift(&self) -> WeightShift {
        observed_weight_shift(&self.matrix, &self.domain, &self.codomain)
    }
}

fn check_shape(m: &CMat, domain: &GradedSpace, codomain: &GradedSpace) -> Result<()> {
    if m.nrows() != codomain.dim() || m.ncols() != domain.dim() {
        return Err(Error::Dimension(format!(
            "matrix {}x{} between spaces of dimension {} -> {}",
            m.nrows(),
            m.ncols(),
            domain.dim(),
            codomain.dim()
        )));
    }
    Ok(())
}

fn observed_parity(m: &CMat, domain: &GradedSpace, codomain: &GradedSpace, tol: f64) -> Option<Parity> {
    let (dp, cp) = (domain.parities(), codomain.parities());
    let mut seen: Option<Parity> = None;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)].norm() > tol {
                let p = Parity::from_bit(dp[j].bit() + cp[i].bit());
                match seen {
                    None => seen = Some(p),
                    Some(q) if q != p => return None,
                    _ => {}
                }
            }
        }
    }
    Some(seen.unwrap_or(Parity::Even))
}

fn observed_weight_shift(m: &CMat, domain: &GradedSpace, codomain: &GradedSpace) -> WeightShift {
    let (Some(de), Some(ce)) = (domain.energies(), codomain.energies()) else {
        return WeightShift::Mixed;
    };
    let mut seen = None;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != ZERO {
                let s = ce[i] - de[j];
                match seen {
                    None => seen = Some(s),
                    Some(t) if t != s => return WeightShift::Mixed,
                    _ => {}
                }
            }
        }
    }
    WeightShift::Exact(seen.unwrap_or(HalfInt::ZERO))
}
