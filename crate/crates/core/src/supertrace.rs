//! Graded tensor products, braidings and partial supertraces.

use crate::error::{Error, Result};
use crate::graded::{GradedOperator, GradedSpace, Parity, WeightShift};
use crate::half::HalfInt;
use crate::linalg::{self, CMat, C64};

/// `x1 ⊗̂ x2 = x1 d^{p(x2)} ⊗ x2`, extended linearly to inhomogeneous `x2`.
pub fn graded_tensor(x1: &GradedOperator, x2: &GradedOperator) -> GradedOperator {
    let d = x1.domain.grading();
    let matrix = match x2.parity {
        Some(Parity::Even) => linalg::kron(&x1.matrix, &x2.matrix),
        Some(Parity::Odd) => linalg::kron(&(&x1.matrix * &d), &x2.matrix),
        None => {
            let e = x2.part(Parity::Even);
            let o = x2.part(Parity::Odd);
            linalg::kron(&x1.matrix, &e.matrix) + linalg::kron(&(&x1.matrix * &d), &o.matrix)
        }
    };
    GradedOperator {
        matrix,
        domain: x1.domain.tensor(&x2.domain),
        codomain: x1.codomain.tensor(&x2.codomain),
        parity: match (x1.parity, x2.parity) {
            (Some(a), Some(b)) => Some(a.add(b)),
            _ => None,
        },
        weight_shift: match (x1.weight_shift, x2.weight_shift) {
            (WeightShift::Exact(a), WeightShift::Exact(b)) => WeightShift::Exact(a + b),
            _ => WeightShift::Mixed,
        },
    }
}

/// The braiding unitary `β(σ)`: the factor at old position `perm[i]` moves to
/// new position `i`, with the Koszul sign of every transposed pair.
pub fn braiding(space: &GradedSpace, perm: &[usize]) -> Result<GradedOperator> {
    let n = space.factors().len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::FactorMismatch(format!("{perm:?} is not a permutation of {n} factors")));
    }
    let target = GradedSpace::new(perm.iter().map(|&p| space.factors()[p].clone()).collect());
    let dim = space.dim();
    let mut m = linalg::zeros(dim, dim);
    for col in 0..dim {
        let multi = space.unflatten(col);
        let par: Vec<Parity> = (0..n).map(|k| space.factors()[k].parities()[multi[k]]).collect();
        let mut sign = 1.0;
        for a in 0..n {
            for b in a + 1..n {
                // New positions a < b hold old factors perm[a], perm[b]; they crossed if perm[a] > perm[b].
                if perm[a] > perm[b] {
                    sign *= par[perm[a]].koszul(par[perm[b]]);
                }
            }
        }
        let new_multi: Vec<usize> = perm.iter().map(|&p| multi[p]).collect();
        m[(target.flatten(&new_multi), col)] = C64::new(sign, 0.0);
    }
    Ok(GradedOperator {
        matrix: m,
        domain: space.clone(),
        codomain: target,
        parity: Some(Parity::Even),
        weight_shift: WeightShift::Exact(HalfInt::ZERO),
    })
}

/// Permutation that moves factor `pos` of `n` to the end.
pub fn move_to_end(n: usize, pos: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != pos).chain(std::iter::once(pos)).collect()
}

/// `tr^s_L(x) = tr_L(x (1 ⊗̂ d_L))` for `x: H ⊗ L -> K ⊗ L`, where `L` is the
/// product of the last `n_l` factors of both domain and codomain.
pub fn partial_supertrace(x: &GradedOperator, n_l: usize) -> Result<GradedOperator> {
    let df = x.domain.factors();
    let cf = x.codomain.factors();
    if n_l > df.len() || n_l > cf.len() {
        return Err(Error::FactorMismatch(format!(
            "cannot trace {n_l} factors of a map with {} -> {} factors",
            df.len(),
            cf.len()
        )));
    }
    let l_dom = GradedSpace::new(df[df.len() - n_l..].to_vec());
    let l_cod = GradedSpace::new(cf[cf.len() - n_l..].to_vec());
    if !l_dom.same_shape(&l_cod) {
        return Err(Error::FactorMismatch("traced factors differ between domain and codomain".into()));
    }
    let h = GradedSpace::new(df[..df.len() - n_l].to_vec());
    let k = GradedSpace::new(cf[..cf.len() - n_l].to_vec());
    let dl = l_dom.dim();
    let lp = l_dom.parities();
    let mut m = linalg::zeros(k.dim(), h.dim());
    for j in 0..h.dim() {
        for i in 0..k.dim() {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..dl {
                acc += x.matrix[(i * dl + l, j * dl + l)] * lp[l].sign();
            }
            m[(i, j)] = acc;
        }
    }
    Ok(GradedOperator {
        matrix: m,
        domain: h,
        codomain: k,
        parity: x.parity,
        weight_shift: x.weight_shift,
    })
}

/// Partial supertrace pairing domain factor `dom_pos` with codomain factor
/// `cod_pos`: both are braided to the end first, `tr^s(β' x β^{-1})`.
pub fn partial_supertrace_at(x: &GradedOperator, dom_pos: usize, cod_pos: usize) -> Result<GradedOperator> {
    let nd = x.domain.factors().len();
    let nc = x.codomain.factors().len();
    if dom_pos >= nd || cod_pos >= nc {
        return Err(Error::FactorMismatch(format!(
            "trace positions ({dom_pos}, {cod_pos}) out of range for {nd} -> {nc} factors"
        )));
    }
    let b = braiding(&x.domain, &move_to_end(nd, dom_pos))?;
    let bc = braiding(&x.codomain, &move_to_end(nc, cod_pos))?;
    let moved = bc.compose(x)?.compose(&b.adjoint())?;
    partial_supertrace(&moved, 1)
}

/// Full supertrace `tr(x d)` of an endomorphism.
pub fn supertrace(x: &GradedOperator) -> C64 {
    let p = x.domain.parities();
    (0..x.cols()).map(|i| x.matrix[(i, i)] * p[i].sign()).sum()
}

/// Splits off the factor counts `(#L, #M)` and `(#K, #L)` and checks that `L` agrees.
fn check_sewable(x2: &GradedOperator, x1: &GradedOperator, n_l: usize) -> Result<()> {
    let x2d = x2.domain.factors();
    let x1c = x1.codomain.factors();
    if n_l > x2d.len() || n_l > x1c.len() {
        return Err(Error::FactorMismatch("not enough factors to sew".into()));
    }
    let a = GradedSpace::new(x2d[..n_l].to_vec());
    let b = GradedSpace::new(x1c[x1c.len() - n_l..].to_vec());
    if !a.same_shape(&b) {
        return Err(Error::FactorMismatch("sewn factors have different shapes".into()));
    }
    Ok(())
}

/// `tr^s_L(x2 ⊗̂ x1)` for `x2: L ⊗ M -> N` and `x1: H -> K ⊗ L`, as a map
/// `M ⊗ H -> N ⊗ K`. `L` is the first `n_l` factors of `x2`'s domain and the
/// last `n_l` factors of `x1`'s codomain.
pub fn compose_via_supertrace(x2: &GradedOperator, x1: &GradedOperator, n_l: usize) -> Result<GradedOperator> {
    check_sewable(x2, x1, n_l)?;
    let t = graded_tensor(x2, x1);
    // Domain L ⊗ M ⊗ H: move the first n_l factors to the end.
    let nd = t.domain.factors().len();
    let perm: Vec<usize> = (n_l..nd).chain(0..n_l).collect();
    let b = braiding(&t.domain, &perm)?;
    let moved = t.compose(&b.adjoint())?;
    partial_supertrace(&moved, n_l)
}

/// The right-hand side `(x2 ⊗̂ 1_K) β' (1_M ⊗̂ x1)` of the composition
/// identity, with `β': M ⊗ K ⊗ L -> L ⊗ M ⊗ K`.
pub fn compose_direct(x2: &GradedOperator, x1: &GradedOperator, n_l: usize) -> Result<GradedOperator> {
    check_sewable(x2, x1, n_l)?;
    let x2d = x2.domain.factors();
    let x1c = x1.codomain.factors();
    let m = GradedSpace::new(x2d[n_l..].to_vec());
    let k = GradedSpace::new(x1c[..x1c.len() - n_l].to_vec());
    let right = graded_tensor(&GradedOperator::identity(&m), x1);
    let left = graded_tensor(x2, &GradedOperator::identity(&k));
    let nm = m.factors().len();
    let nk = k.factors().len();
    let total = nm + nk + n_l;
    let perm: Vec<usize> = (nm + nk..total).chain(0..nm + nk).collect();
    let beta = braiding(&right.codomain, &perm)?;
    left.compose(&beta)?.compose(&right)
}

/// Largest entry of `a - b`.
pub fn max_difference(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs(&(a - b))
}
