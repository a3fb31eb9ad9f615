//! Cauchy transform, Kerzman–Stein operator and Hardy projections for planar
//! domains bounded by circles.
//!
//! Each boundary circle is parametrized as `γ_j(ζ) = c_j + s_j ζ` over the unit
//! circle, with a complex scale `s_j`. Boundary functions live in
//! `⊕_j L²(S¹, dθ/2π)` and are sampled at `ζ_l = e^{2πil/N}`. Matrices act on
//! the circle-major stack of samples; since the quadrature weights are uniform,
//! the Hilbert-space adjoint is the conjugate transpose.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::car::CircleFunction;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Outgoing,
    Incoming,
}

impl Orientation {
    /// `+1` for the outer circle (counterclockwise), `-1` for holes.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Outgoing => 1.0,
            Orientation::Incoming => -1.0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCircle {
    pub center: C64,
    pub scale: C64,
    pub orientation: Orientation,
}

impl BoundaryCircle {
    pub fn at(&self, zeta: C64) -> C64 {
        self.center + self.scale * zeta
    }

    pub fn radius(&self) -> f64 {
        self.scale.norm()
    }
}

/// A disk with circular holes: the first circle is the outer boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarDomain {
    circles: Vec<BoundaryCircle>,
}

impl PlanarDomain {
    pub fn new(circles: Vec<BoundaryCircle>) -> Result<Self> {
        let Some((outer, holes)) = circles.split_first() else {
            return Err(Error::Domain("a domain needs an outer circle".into()));
        };
        if outer.orientation != Orientation::Outgoing || holes.iter().any(|h| h.orientation != Orientation::Incoming) {
            return Err(Error::Domain("the outer circle must be outgoing and every hole incoming".into()));
        }
        if circles.iter().any(|c| !(c.radius() > 0.0)) {
            return Err(Error::Domain("circle radii must be positive".into()));
        }
        for (i, h) in holes.iter().enumerate() {
            if (h.center - outer.center).norm() + h.radius() >= outer.radius() {
                return Err(Error::Domain(format!("hole {} is not inside the outer circle", i + 1)));
            }
            for g in &holes[i + 1..] {
                if (h.center - g.center).norm() <= h.radius() + g.radius() {
                    return Err(Error::Domain("holes intersect".into()));
                }
            }
        }
        Ok(PlanarDomain { circles })
    }

    pub fn disk() -> Self {
        PlanarDomain { circles: vec![Self::outer()] }
    }

    fn outer() -> BoundaryCircle {
        BoundaryCircle { center: ZERO, scale: C64::new(1.0, 0.0), orientation: Orientation::Outgoing }
    }

    /// `{|q| <= |z| <= 1}` with the inner circle parametrized by `ζ ↦ qζ`.
    pub fn annulus(q: C64) -> Result<Self> {
        Self::new(vec![Self::outer(), BoundaryCircle { center: ZERO, scale: q, orientation: Orientation::Incoming }])
    }

    /// The pair of pants with holes `ζ ↦ w + q1 ζ` and `ζ ↦ q2 ζ`.
    pub fn pants(w: C64, q1: C64, q2: C64) -> Result<Self> {
        Self::new(vec![
            Self::outer(),
            BoundaryCircle { center: w, scale: q1, orientation: Orientation::Incoming },
            BoundaryCircle { center: ZERO, scale: q2, orientation: Orientation::Incoming },
        ])
    }

    pub fn circles(&self) -> &[BoundaryCircle] {
        &self.circles
    }
}

/// Uniform nodes `ζ_l = e^{2πil/N}` on every circle.
#[derive(Clone, Debug)]
pub struct BoundaryDiscretization {
    n: usize,
    nodes: Vec<C64>,
    circles: usize,
}

impl BoundaryDiscretization {
    pub fn new(domain: &PlanarDomain, n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Domain(format!("grid size must be even and at least 4, got {n}")));
        }
        Ok(BoundaryDiscretization { n, nodes: unit_nodes(n), circles: domain.circles.len() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn total(&self) -> usize {
        self.n * self.circles
    }
}

fn unit_nodes(n: usize) -> Vec<C64> {
    (0..n).map(|l| C64::from_polar(1.0, 2.0 * PI * l as f64 / n as f64)).collect()
}

/// Fourier index of FFT slot `k`, in `-N/2..N/2`.
fn mode_of(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Per-circle samples with conversion to and from Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    n: usize,
    samples: Vec<Vec<C64>>,
}

impl BoundaryData {
    pub fn from_samples(samples: Vec<Vec<C64>>) -> Result<Self> {
        let n = samples.first().map_or(0, |s| s.len());
        if n == 0 || samples.iter().any(|s| s.len() != n) {
            return Err(Error::Dimension("every circle needs the same nonzero number of samples".into()));
        }
        Ok(BoundaryData { n, samples })
    }

    /// Samples a trigonometric polynomial per circle.
    pub fn from_functions(fs: &[CircleFunction], n: usize) -> Self {
        let nodes = unit_nodes(n);
        BoundaryData { n, samples: fs.iter().map(|f| nodes.iter().map(|&z| f.eval(z)).collect()).collect() }
    }

    /// Inverse of `fourier`: coefficients indexed `-N/2..N/2` in FFT order.
    pub fn from_fourier(coeffs: Vec<Vec<C64>>) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let mut samples = Vec::new();
        for mut c in coeffs {
            let fft = planner.plan_fft_inverse(c.len());
            fft.process(&mut c);
            samples.push(c);
        }
        Self::from_samples(samples)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[Vec<C64>] {
        &self.samples
    }

    /// Fourier coefficients per circle, slot `k` holding mode `k` for `k < N/2`
    /// and mode `k - N` otherwise.
    pub fn fourier(&self) -> Vec<Vec<C64>> {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(self.n);
        self.samples
            .iter()
            .map(|s| {
                let mut c = s.clone();
                fft.process(&mut c);
                c.iter().map(|x| x / self.n as f64).collect()
            })
            .collect()
    }

    pub fn coefficient(&self, circle: usize, mode: i64) -> C64 {
        let n = self.n as i64;
        if mode < -n / 2 || mode >= n / 2 {
            return ZERO;
        }
        self.fourier()[circle][mode.rem_euclid(n) as usize]
    }

    /// Fraction of the energy carried by modes with `|m| > N/4`.
    pub fn high_mode_fraction(&self) -> f64 {
        let mut hi = 0.0;
        let mut all = 0.0;
        for c in self.fourier() {
            for (k, x) in c.iter().enumerate() {
                let e = x.norm_sqr();
                all += e;
                if mode_of(k, self.n).unsigned_abs() as usize > self.n / 4 {
                    hi += e;
                }
            }
        }
        if all == 0.0 {
            0.0
        } else {
            hi / all
        }
    }

    pub fn to_vector(&self) -> Vec<C64> {
        self.samples.concat()
    }

    pub fn from_vector(v: &[C64], n: usize) -> Result<Self> {
        if n == 0 || v.len() % n != 0 {
            return Err(Error::Dimension(format!("vector of length {} is not a stack of {n}-sample circles", v.len())));
        }
        Self::from_samples(v.chunks(n).map(|c| c.to_vec()).collect())
    }
}

/// Orthogonal projection onto Fourier modes `lo..=hi` in the sample basis.
fn mode_projection(n: usize, lo: i64, hi: i64) -> CMat {
    let nodes = unit_nodes(n);
    let mut p = linalg::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            // Σ_m ζ_k^m conj(ζ_l)^m / N, using ζ_k ζ_l^{-1} = ζ_{k-l}.
            let d = nodes[(k + n - l) % n];
            let mut acc = ZERO;
            for m in lo..=hi {
                acc += d.powi(m as i32);
            }
            p[(k, l)] = acc / n as f64;
        }
    }
    p
}

fn off_diagonal_block(domain: &PlanarDomain, disc: &BoundaryDiscretization, i: usize, j: usize) -> CMat {
    let (ci, cj) = (domain.circles[i], domain.circles[j]);
    let n = disc.n;
    let eps = cj.orientation.sign();
    CMat::from_fn(n, n, |k, l| {
        let zl = disc.nodes[l];
        eps * cj.scale * zl / (cj.at(zl) - ci.at(disc.nodes[k])) / n as f64
    })
}

fn set_block(m: &mut CMat, n: usize, i: usize, j: usize, b: &CMat) {
    for k in 0..n {
        for l in 0..n {
            m[(i * n + k, j * n + l)] = b[(k, l)];
        }
    }
}

/// `p_Γ`: the projection onto nonnegative modes on the outer circle and
/// negative modes on holes. These are also the self-interaction blocks of `C`.
pub fn classical_projection(domain: &PlanarDomain, disc: &BoundaryDiscretization) -> CMat {
    let n = disc.n;
    let h = n as i64 / 2;
    let mut m = linalg::zeros(disc.total(), disc.total());
    for (i, c) in domain.circles.iter().enumerate() {
        let p = match c.orientation {
            Orientation::Outgoing => mode_projection(n, 0, h - 1),
            Orientation::Incoming => mode_projection(n, -h, -1),
        };
        set_block(&mut m, n, i, i, &p);
    }
    m
}

/// Boundary values of the Cauchy integral from inside the domain. On each
/// circle the singular part `½u + Hu` is the exact Fourier multiplier; the
/// interaction between distinct circles has a smooth kernel and uses the
/// trapezoid rule.
pub fn cauchy_matrix(domain: &PlanarDomain, disc: &BoundaryDiscretization) -> CMat {
    let n = disc.n;
    let mut m = classical_projection(domain, disc);
    for i in 0..domain.circles.len() {
        for j in 0..domain.circles.len() {
            if i != j {
                set_block(&mut m, n, i, j, &off_diagonal_block(domain, disc, i, j));
            }
        }
    }
    m
}

#[derive(Clone, Debug)]
pub struct CauchyResult {
    pub data: BoundaryData,
    pub aliasing_warning: Option<String>,
}

/// Fraction of energy above `N/4` that triggers the aliasing warning.
pub const ALIASING_THRESHOLD: f64 = 1e-12;

pub fn cauchy_transform(u: &BoundaryData, domain: &PlanarDomain, disc: &BoundaryDiscretization) -> Result<CauchyResult> {
    if u.n() != disc.n || u.samples().len() != domain.circles.len() {
        return Err(Error::Dimension("boundary data does not match the discretization".into()));
    }
    let frac = u.high_mode_fraction();
    let aliasing_warning = (frac > ALIASING_THRESHOLD)
        .then(|| format!("{frac:.3e} of the energy sits above N/4; results may be aliased"));
    let c = cauchy_matrix(domain, disc);
    let x = u.to_vector();
    let y: Vec<C64> = (0..c.nrows()).map(|i| (0..c.ncols()).map(|j| c[(i, j)] * x[j]).sum()).collect();
    Ok(CauchyResult { data: BoundaryData::from_vector(&y, disc.n)?, aliasing_warning })
}

/// `C* v = v - conj(±z r C(±conj(z) r^{-1} conj(v)))` with `r = s_j`, as a matrix.
pub fn formal_adjoint(domain: &PlanarDomain, disc: &BoundaryDiscretization, c: &CMat) -> CMat {
    let n = disc.n;
    let total = disc.total();
    let mut d1 = vec![ZERO; total];
    let mut d2 = vec![ZERO; total];
    for (j, circ) in domain.circles.iter().enumerate() {
        let eps = circ.orientation.sign();
        for (l, &z) in disc.nodes.iter().enumerate() {
            d1[j * n + l] = eps * z * circ.scale;
            d2[j * n + l] = eps * z.conj() / circ.scale;
        }
    }
    CMat::from_fn(total, total, |a, b| {
        let id = if a == b { C64::new(1.0, 0.0) } else { ZERO };
        id - d1[a].conj() * c[(a, b)].conj() * d2[b].conj()
    })
}

/// `A = C - C*` assembled from its kernel. Off the diagonal circle blocks the
/// kernel is sampled directly; within a circle the kernel is sampled off the
/// diagonal and the diagonal is filled by a quadratic least-squares fit to
/// the four nearest neighbours.
pub fn kerzman_stein_kernel(domain: &PlanarDomain, disc: &BoundaryDiscretization) -> CMat {
    let n = disc.n;
    let nc = domain.circles.len();
    let mut a = linalg::zeros(disc.total(), disc.total());
    for i in 0..nc {
        for j in 0..nc {
            if i == j {
                continue;
            }
            let cij = off_diagonal_block(domain, disc, i, j);
            let cji = off_diagonal_block(domain, disc, j, i);
            set_block(&mut a, n, i, j, &(cij - linalg::adjoint(&cji)));
        }
        let circ = domain.circles[i];
        let eps = circ.orientation.sign();
        let kernel = |k: usize, l: usize| {
            let (zk, zl) = (disc.nodes[k], disc.nodes[l]);
            eps * circ.scale * zl / (circ.at(zl) - circ.at(zk)) / n as f64
        };
        let mut b = CMat::from_fn(n, n, |k, l| if k == l { ZERO } else { kernel(k, l) - kernel(l, k).conj() });
        for k in 0..n {
            let at = |off: i64| b[(k, (k as i64 + off).rem_euclid(n as i64) as usize)];
            let sum = at(-2) + at(-1) + at(1) + at(2);
            let sum_x2 = at(-1) + at(1) + (at(-2) + at(2)) * 4.0;
            b[(k, k)] = (sum * 34.0 - sum_x2 * 10.0) / 36.0;
        }
        set_block(&mut a, n, i, i, &b);
    }
    a
}

#[derive(Clone, Debug)]
pub struct KerzmanStein {
    pub c: CMat,
    pub c_star: CMat,
    pub a: CMat,
    /// `max |C* - C^H|`: the formal adjoint against the matrix adjoint.
    pub adjoint_defect: f64,
    /// `max |A - A_kernel|`.
    pub kernel_defect: f64,
    /// `max |A + A^H|`.
    pub skew_defect: f64,
}

pub fn kerzman_stein(domain: &PlanarDomain, disc: &BoundaryDiscretization) -> KerzmanStein {
    let c = cauchy_matrix(domain, disc);
    let c_star = formal_adjoint(domain, disc, &c);
    let a = &c - &c_star;
    let kernel = kerzman_stein_kernel(domain, disc);
    KerzmanStein {
        adjoint_defect: linalg::max_abs(&(&c_star - linalg::adjoint(&c))),
        kernel_defect: linalg::max_abs(&(&a - kernel)),
        skew_defect: linalg::max_abs(&(&a + linalg::adjoint(&a))),
        c,
        c_star,
        a,
    }
}

#[derive(Clone, Debug)]
pub struct HardyProjection {
    pub q: CMat,
    pub ks: KerzmanStein,
    /// Condition number of `1 + A`.
    pub condition: f64,
    pub idempotence: f64,
    pub self_adjointness: f64,
}

/// `q_Σ = C (1 + A)^{-1}`.
pub fn hardy_projection_numeric(domain: &PlanarDomain, disc: &BoundaryDiscretization) -> Result<HardyProjection> {
    let ks = kerzman_stein(domain, disc);
    let one_plus_a = linalg::identity(disc.total()) + &ks.a;
    let s = linalg::singular_values(&one_plus_a)?;
    let condition = s[0] / s[s.len() - 1];
    if !condition.is_finite() || condition > 1e12 {
        return Err(Error::IllConditioned(format!("1 + A has condition number {condition:e}")));
    }
    // q (1 + A) = C, solved through the adjoint system (1 + A)^H q^H = C^H.
    let qh = linalg::solve(&linalg::adjoint(&one_plus_a), &linalg::adjoint(&ks.c))?;
    let q = linalg::adjoint(&qh);
    let idempotence = linalg::max_abs(&(&q * &q - &q));
    let self_adjointness = linalg::max_abs(&(&q - linalg::adjoint(&q)));
    Ok(HardyProjection { q, ks, condition, idempotence, self_adjointness })
}

/// Settings for the direct boundary limit of the Cauchy integral.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct DirectLimit {
    /// Fine trapezoid grid for the interior evaluations.
    pub fine: usize,
    /// Step in the parameter-radial direction, relative to the circle radius.
    pub step: f64,
    /// Number of interior points fed to the extrapolation.
    pub points: usize,
}

impl Default for DirectLimit {
    fn default() -> Self {
        DirectLimit { fine: 8192, step: 0.005, points: 8 }
    }
}

fn neville_at_zero(xs: &[f64], ys: &[C64]) -> C64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (p[i] * xj - p[i + 1] * xi) / (xj - xi);
        }
    }
    p[0]
}

/// Boundary values of the Cauchy integral of `u` obtained by evaluating it at
/// interior points approaching each node and extrapolating to the boundary.
pub fn plemelj_direct_limit(
    u: &[CircleFunction],
    domain: &PlanarDomain,
    disc: &BoundaryDiscretization,
    opts: DirectLimit,
) -> Result<BoundaryData> {
    if u.len() != domain.circles.len() {
        return Err(Error::Dimension("one function per circle is required".into()));
    }
    let fine_nodes = unit_nodes(opts.fine);
    // Per circle: (γ_j(ζ_l), ε_j s_j ζ_l u_j(ζ_l) / N_f).
    let weights: Vec<Vec<(C64, C64)>> = domain
        .circles
        .iter()
        .zip(u)
        .map(|(c, f)| {
            let samples = BoundaryData::from_functions(std::slice::from_ref(f), opts.fine).samples[0].clone();
            fine_nodes
                .iter()
                .zip(samples)
                .map(|(&z, v)| (c.at(z), c.orientation.sign() * c.scale * z * v / opts.fine as f64))
                .collect()
        })
        .collect();
    let integral = |t: C64| -> C64 {
        weights.iter().flatten().map(|&(s, w)| w / (s - t)).sum()
    };
    let xs: Vec<f64> = (1..=opts.points).map(|m| m as f64 * opts.step).collect();
    let mut samples = Vec::new();
    for c in &domain.circles {
        let inward = -c.orientation.sign();
        let vals = disc
            .nodes
            .iter()
            .map(|&z| {
                let ys: Vec<C64> = xs.iter().map(|&x| integral(c.at(z * (1.0 + inward * x)))).collect();
                neville_at_zero(&xs, &ys)
            })
            .collect();
        samples.push(vals);
    }
    BoundaryData::from_samples(samples)
}

/// `max |direct limit - (½u + Hu)|` at the nodes.
pub fn plemelj_check(u: &[CircleFunction], domain: &PlanarDomain, disc: &BoundaryDiscretization, opts: DirectLimit) -> Result<f64> {
    let direct = plemelj_direct_limit(u, domain, disc, opts)?;
    let split = cauchy_transform(&BoundaryData::from_functions(u, disc.n), domain, disc)?;
    Ok(direct
        .to_vector()
        .iter()
        .zip(split.data.to_vector())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Orthogonality of the numeric Hardy space to `conj(r) M_{±conj(z)} conj(H²)`.
/// Hardy vectors are `q_Σ` applied to the Fourier modes `|m| <= modes` on
/// every circle; returns the largest normalized inner product.
pub fn perp_formula_check(domain: &PlanarDomain, disc: &BoundaryDiscretization, q: &CMat, modes: i64) -> f64 {
    let n = disc.n;
    let mut hardy: Vec<Vec<C64>> = Vec::new();
    for j in 0..domain.circles.len() {
        for m in -modes..=modes {
            let mut x = vec![ZERO; disc.total()];
            for (l, z) in disc.nodes.iter().enumerate() {
                x[j * n + l] = z.powi(m as i32);
            }
            let h: Vec<C64> = (0..disc.total()).map(|a| (0..disc.total()).map(|b| q[(a, b)] * x[b]).sum()).collect();
            if h.iter().map(|v| v.norm_sqr()).sum::<f64>() > 1e-20 {
                hardy.push(h);
            }
        }
    }
    let perp: Vec<Vec<C64>> = hardy
        .iter()
        .map(|h| {
            let mut g = vec![ZERO; disc.total()];
            for (j, c) in domain.circles.iter().enumerate() {
                for (l, z) in disc.nodes.iter().enumerate() {
                    g[j * n + l] = c.orientation.sign() * c.scale.conj() * z.conj() * h[j * n + l].conj();
                }
            }
            g
        })
        .collect();
    let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for h in &hardy {
        for g in &perp {
            worst = worst.max(linalg::dot(h, g).norm() / (norm(h) * norm(g)));
        }
    }
    worst
}

/// Singular values of `q_Σ - p_Γ` and their partial sums.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceClassReport {
    pub grid: usize,
    pub singular_values: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Least-squares per-index ratio `s_{k+1}/s_k` over the reported range.
    pub decay_per_index: f64,
    /// Change of the partial sum over the last ten reported terms.
    pub tail_change: f64,
}

pub fn trace_class_diagnostic(domain: &PlanarDomain, disc: &BoundaryDiscretization, q: &CMat, count: usize) -> Result<TraceClassReport> {
    let diff = q - classical_projection(domain, disc);
    let s = linalg::singular_values(&diff)?;
    let s: Vec<f64> = s.into_iter().take(count).collect();
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = s.iter().map(|x| {
        acc += x;
        acc
    }).collect();
    let ks: Vec<f64> = (1..=s.len()).map(|k| k as f64).collect();
    let decay_per_index = crate::surfaces::fitted_rate(&ks, &s);
    let tail_change = if s.len() > 10 { partial_sums[s.len() - 1] - partial_sums[s.len() - 11] } else { f64::NAN };
    Ok(TraceClassReport { grid: disc.n, singular_values: s, partial_sums, decay_per_index, tail_change })
}
