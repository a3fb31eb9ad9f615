//! The Hardy commutation relations `a(f¹)T = (-1)^{p(T)} T a(f⁰)` and
//! `a(g¹)*T = -(-1)^{p(T)} T a(g⁰)*`, as residuals and as a linear system.
//!
//! For inhomogeneous `T` the sign `(-1)^{p(T)} T` is written `d T d`, which
//! is linear in `T`. Every residual is restricted to the rows and columns
//! where compressing the products to the truncations is exact.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HardyElement;
use crate::car::{smeared, CircleFunction};
use crate::error::{Error, Result};
use crate::fock::{orbital_energy, FockTruncation, Sector};
use crate::graded::{GradedOperator, GradedSpace, WeightShift};
use crate::half::HalfInt;
use crate::linalg::{self, CMat, C64};

/// Residual of one element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementResidual {
    pub label: String,
    pub perp: bool,
    pub residual: f64,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutationReport {
    pub max_residual: f64,
    pub elements: Vec<ElementResidual>,
    /// Elements whose exact window was empty, so they constrain nothing.
    pub vacuous: usize,
    pub max_tail_bound: f64,
}

/// Drops modes whose omission cannot change an exact-window entry: on the
/// incoming side, annihilators of orbitals above the cutoff (no domain state
/// holds them); on the outgoing side, creators of such orbitals (their image
/// leaves the truncation).
fn effective(f: &CircleFunction, cutoff: HalfInt, starred: bool, incoming: bool) -> CircleFunction {
    CircleFunction::from_terms(f.terms().filter(|&(k, _)| {
        let creates = (k < 0) != starred;
        creates == incoming || orbital_energy(k, Sector::NS) <= cutoff
    }))
}

fn truncations(space: &GradedSpace) -> Result<Vec<Arc<FockTruncation>>> {
    space
        .factors()
        .iter()
        .map(|f| {
            f.truncation()
                .cloned()
                .ok_or_else(|| Error::FactorMismatch("relations need Fock factors".into()))
        })
        .collect()
}

/// `d ⊗ ⋯ ⊗ d ⊗ x ⊗ 1 ⊗ ⋯ ⊗ 1` with `x` on factor `i`.
fn on_factor(space: &GradedSpace, i: usize, x: &CMat) -> CMat {
    let mut acc = linalg::identity(1);
    for (j, f) in space.factors().iter().enumerate() {
        let piece = if j < i {
            GradedSpace::single(f.clone()).grading()
        } else if j == i {
            x.clone()
        } else {
            linalg::identity(f.dim())
        };
        acc = linalg::kron(&acc, &piece);
    }
    acc
}

/// The smeared field of `components` on a tensor product of Fock factors,
/// with the exact-window condition per factor as `(max_raise, max_lower)`.
struct FieldOnSpace {
    op: CMat,
    raise: Vec<HalfInt>,
    lower: Vec<HalfInt>,
}

fn field_on_space(
    space: &GradedSpace,
    truncs: &[Arc<FockTruncation>],
    comps: &[CircleFunction],
    starred: bool,
    incoming: bool,
) -> FieldOnSpace {
    let mut op = linalg::zeros(space.dim(), space.dim());
    let mut raise = Vec::new();
    let mut lower = Vec::new();
    for (i, (t, f)) in truncs.iter().zip(comps).enumerate() {
        let f = effective(f, t.cutoff(), starred, incoming);
        raise.push(f.max_raise(starred));
        lower.push(f.max_lower(starred));
        if !f.is_zero() {
            op = op + on_factor(space, i, &smeared(&f, starred, t).matrix);
        }
    }
    FieldOnSpace { op, raise, lower }
}

/// Flat indices whose factor energies satisfy `e_i + margin_i <= cutoff_i`.
fn window(space: &GradedSpace, truncs: &[Arc<FockTruncation>], margin: &[HalfInt]) -> Vec<usize> {
    (0..space.dim())
        .filter(|&idx| {
            let multi = space.unflatten(idx);
            multi
                .iter()
                .zip(truncs)
                .zip(margin)
                .all(|((&k, t), &m)| t.state(k).energy_ns() + m <= t.cutoff())
        })
        .collect()
}

struct Constraint {
    label: String,
    perp: bool,
    norm: f64,
    a: CMat,
    b: CMat,
    /// `+1` for `a T - dTd b`, `-1` for `a T + dTd b`.
    sign: f64,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn constraints(
    domain: &GradedSpace,
    codomain: &GradedSpace,
    elements: &[HardyElement],
    perp: &[HardyElement],
) -> Result<Vec<Constraint>> {
    let dt = truncations(domain)?;
    let ct = truncations(codomain)?;
    let n_out = ct.len();
    let n = n_out + dt.len();
    let mut out = Vec::new();
    for (is_perp, list) in [(false, elements), (true, perp)] {
        for h in list {
            if h.components.len() != n {
                return Err(Error::FactorMismatch(format!(
                    "element {} has {} components for {} circles",
                    h.label,
                    h.components.len(),
                    n
                )));
            }
            let one = field_on_space(codomain, &ct, &h.components[..n_out], is_perp, false);
            let zero = field_on_space(domain, &dt, &h.components[n_out..], is_perp, true);
            out.push(Constraint {
                label: h.label.clone(),
                perp: is_perp,
                norm: h.norm(),
                a: one.op,
                b: zero.op,
                sign: if is_perp { -1.0 } else { 1.0 },
                rows: window(codomain, &ct, &one.lower),
                cols: window(domain, &dt, &zero.raise),
            });
        }
    }
    Ok(out)
}

/// Residuals of `T` against both relation families, normalized by the element norm.
pub fn verify_commutation(t: &GradedOperator, elements: &[HardyElement], perp: &[HardyElement]) -> Result<CommutationReport> {
    let cs = constraints(&t.domain, &t.codomain, elements, perp)?;
    let dd = &t.codomain.grading() * &t.matrix * &t.domain.grading();
    let mut report = CommutationReport {
        max_residual: 0.0,
        elements: Vec::new(),
        vacuous: 0,
        max_tail_bound: elements.iter().chain(perp).map(|h| h.tail_bound).fold(0.0, f64::max),
    };
    for c in cs {
        if c.rows.is_empty() || c.cols.is_empty() {
            report.vacuous += 1;
        }
        let lhs = &c.a * &t.matrix;
        let rhs = &dd * &c.b;
        let diff = lhs - linalg::scale(&rhs, C64::new(c.sign, 0.0));
        let r = linalg::max_abs(&linalg::select(&diff, &c.rows, &c.cols)) / c.norm.max(f64::MIN_POSITIVE);
        report.max_residual = report.max_residual.max(r);
        report.elements.push(ElementResidual {
            label: c.label,
            perp: c.perp,
            residual: r,
            rows: c.rows.len(),
            cols: c.cols.len(),
        });
    }
    Ok(report)
}

/// Least singular vector of the stacked relation system.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub operator: GradedOperator,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Second-smallest over smallest singular value.
    pub gap: f64,
    pub equations: usize,
}

/// Solves for `T: domain -> codomain` obeying the relations of all elements,
/// returning the least singular vector and the spectrum.
pub fn solve_intertwiner(
    domain: &GradedSpace,
    codomain: &GradedSpace,
    elements: &[HardyElement],
    perp: &[HardyElement],
) -> Result<Intertwiner> {
    let cs = constraints(domain, codomain, elements, perp)?;
    let (nr, nc) = (codomain.dim(), domain.dim());
    let unknowns = nr * nc;
    let dout: Vec<f64> = codomain.parities().iter().map(|p| p.sign()).collect();
    let din: Vec<f64> = domain.parities().iter().map(|p| p.sign()).collect();
    let equations: usize = cs.iter().map(|c| c.rows.len() * c.cols.len()).sum();
    if equations + 1 < unknowns {
        return Err(Error::IllConditioned(format!(
            "{equations} equations cannot pin down {unknowns} unknowns"
        )));
    }
    // Row-major unknown index u(r, c) = r·nc + c.
    let mut l = linalg::zeros(equations, unknowns);
    let mut e = 0;
    for c in &cs {
        for &r in &c.rows {
            for &col in &c.cols {
                for k in 0..nr {
                    let a = c.a[(r, k)];
                    if a != C64::new(0.0, 0.0) {
                        l[(e, k * nc + col)] += a;
                    }
                }
                for k in 0..nc {
                    let b = c.b[(k, col)];
                    if b != C64::new(0.0, 0.0) {
                        l[(e, r * nc + k)] -= b * (c.sign * dout[r] * din[k]);
                    }
                }
                e += 1;
            }
        }
    }
    let svd = linalg::thin_svd(&l)?;
    let s = svd.s.clone();
    if s.len() < unknowns {
        return Err(Error::IllConditioned("fewer singular values than unknowns".into()));
    }
    let smallest = s[unknowns - 1];
    let gap = if unknowns >= 2 { s[unknowns - 2] / smallest } else { f64::INFINITY };
    let mut m = linalg::zeros(nr, nc);
    for r in 0..nr {
        for col in 0..nc {
            m[(r, col)] = svd.v[(r * nc + col, unknowns - 1)];
        }
    }
    let operator = GradedOperator {
        matrix: m,
        domain: domain.clone(),
        codomain: codomain.clone(),
        parity: None,
        weight_shift: WeightShift::Mixed,
    };
    let parity = operator.observed_parity_with_tolerance(1e-8 * linalg::fro_norm(&operator.matrix));
    Ok(Intertwiner { operator: GradedOperator { parity, ..operator }, singular_values: s, gap, equations })
}
