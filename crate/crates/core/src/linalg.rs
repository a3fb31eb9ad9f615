//! Thin helpers over `faer` dense complex matrices.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

/// Entrywise complex conjugate.
pub fn conj(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.norm_max()
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| Error::Numerical(format!("singular values: {e:?}")))
}

/// Spectral norm.
pub fn op_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Full SVD `a = U diag(s) V^H`, singular values descending.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Result<Svd> {
    let d = a
        .svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let s = d.S().column_vector().iter().map(|x| x.re).collect();
    Ok(Svd {
        u: d.U().to_owned(),
        s,
        v: d.V().to_owned(),
    })
}

pub fn thin_svd(a: &CMat) -> Result<Svd> {
    let d = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("thin svd: {e:?}")))?;
    let s = d.S().column_vector().iter().map(|x| x.re).collect();
    Ok(Svd {
        u: d.U().to_owned(),
        s,
        v: d.V().to_owned(),
    })
}

/// Solves `a x = b` with partial-pivot LU.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve: {}x{} system with {} right-hand rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    Ok(a.partial_piv_lu().solve(b))
}

/// Inverse via partial-pivot LU.
pub fn inverse(a: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("inverse of a non-square matrix".into()));
    }
    Ok(a.partial_piv_lu().inverse())
}

/// Rows and columns picked by index lists.
pub fn select(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn column(a: &CMat, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

/// Hermitian inner product `sum conj(x_i) y_i`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `min over unit phases c of ||c·a − b|| / ||b||`, for operators known up to scale.
pub fn phase_distance(a: &CMat, b: &CMat) -> f64 {
    let nb = fro_norm(b);
    let mut ip = ZERO;
    let mut na2 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            ip += a[(i, j)].conj() * b[(i, j)];
            na2 += a[(i, j)].norm_sqr();
        }
    }
    if na2 == 0.0 || nb == 0.0 {
        return if na2 == 0.0 && nb == 0.0 { 0.0 } else { 1.0 };
    }
    // Best complex multiple, which absorbs both phase and normalization.
    let c = ip / na2;
    fro_norm(&(scale(a, c) - b)) / nb
}
