//! Sewing through partial supertraces and the unitarity checks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{annulus_operator, hardy_basis, pants_operator, solve_intertwiner, verify_commutation, AnnulusPoint, Band, Geometry, HardyElement, ModuliPoint};
use crate::car::CircleFunction;
use crate::error::{Error, Result};
use crate::fock::FockTruncation;
use crate::graded::{GradedOperator, GradedSpace};
use crate::linalg::{self, C64};
use crate::supertrace::compose_via_supertrace;
use crate::vertex::ModeEngine;

/// Sews the first `n_l` incoming circles of `x2` to the last `n_l` outgoing
/// circles of `x1`.
pub fn sew(x2: &GradedOperator, x1: &GradedOperator, n_l: usize) -> Result<GradedOperator> {
    let ins = x2.domain.factors();
    let outs = x1.codomain.factors();
    if n_l > ins.len() || n_l > outs.len() {
        return Err(Error::FactorMismatch(format!(
            "cannot sew {n_l} circles: {} incoming, {} outgoing",
            ins.len(),
            outs.len()
        )));
    }
    for (a, b) in ins[..n_l].iter().zip(&outs[outs.len() - n_l..]) {
        if a.sector() != b.sector() {
            return Err(Error::SectorMismatch(format!("{:?} against {:?}", a.sector(), b.sector())));
        }
    }
    let remaining_in = ins.len() - n_l + x1.domain.factors().len();
    let remaining_out = x2.codomain.factors().len() + outs.len() - n_l;
    if remaining_in == 0 && remaining_out == 0 {
        return Err(Error::ClosedSurface);
    }
    compose_via_supertrace(x2, x1, n_l)
}

/// Largest entry of `(q^{L0})† - conj(q)^{L0}`.
pub fn conjugate_check_annulus(a: &AnnulusPoint, trunc: &Arc<FockTruncation>) -> f64 {
    let t = annulus_operator(a, trunc);
    let tc = annulus_operator(&a.conj(), trunc);
    linalg::max_abs(&(linalg::adjoint(&t.matrix) - tc.matrix))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PantsConjugateCheck {
    /// Relative distance between `T†` and the solved intertwiner, up to scale.
    pub distance: f64,
    pub gap: f64,
    /// Residual of `T†` against the conjugate relations.
    pub residual: f64,
}

fn conj_z(f: &CircleFunction) -> CircleFunction {
    f.shifted(1).conjugate()
}

/// Relations for maps `F -> F ⊗ F` obtained by taking adjoints of the
/// pants relations: `(conj(z h2), conj(z h3); conj(z h1))` and `(h2, h3; -h1)`.
pub fn conjugate_pants_elements(elements: &[HardyElement]) -> (Vec<HardyElement>, Vec<HardyElement>) {
    let k = elements
        .iter()
        .map(|h| HardyElement {
            label: format!("adjoint {}", h.label),
            components: vec![conj_z(&h.components[1]), conj_z(&h.components[2]), conj_z(&h.components[0])],
            tail_bound: h.tail_bound,
        })
        .collect();
    let perp = elements
        .iter()
        .map(|h| HardyElement {
            label: format!("adjoint perp {}", h.label),
            components: vec![
                h.components[1].clone(),
                h.components[2].clone(),
                h.components[0].scaled(C64::new(-1.0, 0.0)),
            ],
            tail_bound: h.tail_bound,
        })
        .collect();
    (k, perp)
}

/// Compares the adjoint of the pants partial sum with the intertwiner of
/// the conjugate surface.
pub fn conjugate_check_pants(
    engine: &ModeEngine,
    x: &ModuliPoint,
    trunc: &Arc<FockTruncation>,
    band: Band,
    n_range: std::ops::RangeInclusive<i64>,
    order: usize,
) -> Result<PantsConjugateCheck> {
    let t = pants_operator(engine, x, trunc, trunc, band).operator;
    let adj = t.adjoint();
    let (k, perp) = conjugate_pants_elements(&hardy_basis(&Geometry::Pants(*x), n_range, order));
    let residual = verify_commutation(&adj, &k, &perp)?.max_residual;
    let f = GradedSpace::fock(trunc, crate::fock::Sector::NS);
    let solved = solve_intertwiner(&f, &f.tensor(&f), &k, &perp)?;
    Ok(PantsConjugateCheck {
        distance: linalg::phase_distance(&solved.operator.matrix, &adj.matrix),
        gap: solved.gap,
        residual,
    })
}
