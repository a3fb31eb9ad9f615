//! Explicit spanning families of the Hardy spaces of the standard geometries.

use serde::{Deserialize, Serialize};

use super::{half_power, Geometry};
use crate::car::CircleFunction;
use crate::fock::Sector;
use crate::half::HalfInt;
use crate::linalg::C64;

/// Boundary values of one Hardy-space section, one function per circle,
/// outgoing circles first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyElement {
    pub label: String,
    #[serde(skip)]
    pub components: Vec<CircleFunction>,
    /// Bound on the discarded Fourier tail of the truncated series.
    pub tail_bound: f64,
}

impl HardyElement {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|f| f.norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &HardyElement) -> C64 {
        self.components.iter().zip(&other.components).map(|(f, g)| f.inner(g)).sum()
    }
}

fn binom_f64(n: i64, j: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c *= (n - i as i64) as f64 / (i + 1) as f64;
    }
    c
}

/// `Σ_{j=0}^{order} C(n,j) a^j b^{n-j} z^{s·j + t}`, i.e. the expansion of
/// `(a z^s + b)^n z^t` truncated at `order`, plus a bound on the rest.
fn binomial_series(n: i64, a: C64, b: C64, s: i64, t: i64, order: usize) -> (CircleFunction, f64) {
    let mut f = CircleFunction::zero();
    let bn = b.powi(n as i32);
    let ratio = a / b;
    let last = if n >= 0 { (n as usize).min(order) } else { order };
    let mut rp = C64::new(1.0, 0.0);
    for j in 0..=last {
        f.add_term(s * j as i64 + t, bn * rp * binom_f64(n, j));
        rp *= ratio;
    }
    if n >= 0 && last == n as usize {
        return (f, 0.0);
    }
    // The terms decay geometrically once j exceeds |n|; sum a long stretch
    // of them and close with a geometric bound.
    let r = ratio.norm();
    let mut tail = 0.0;
    let mut term = bn.norm() * r.powi(last as i32 + 1);
    let mut j = last + 1;
    while j < last + 400 {
        tail += term * binom_f64(n, j).abs();
        term *= r;
        j += 1;
    }
    tail += term * binom_f64(n, j).abs() / (1.0 - r).max(1e-300);
    (f, tail)
}

/// Spanning elements for the mode indices in `n_range`.
///
/// Pants elements use two families: `((z-w)^n, q1^{n+1/2} z^n, q2^{1/2}(q2 z - w)^n)`
/// for every `n`, and `(z^n, q1^{1/2}(q1 z + w)^n, q2^{n+1/2} z^n)` for `n < 0`,
/// which supplies the poles at the origin. `order` truncates the non-terminating expansions.
pub fn hardy_basis(geometry: &Geometry, n_range: std::ops::RangeInclusive<i64>, order: usize) -> Vec<HardyElement> {
    let one = C64::new(1.0, 0.0);
    let mut out = Vec::new();
    for n in n_range {
        match geometry {
            Geometry::Disk => {
                if n >= 0 {
                    out.push(HardyElement {
                        label: format!("z^{n}"),
                        components: vec![CircleFunction::monomial(n, one)],
                        tail_bound: 0.0,
                    });
                }
            }
            Geometry::Annulus(a) => {
                let inner = match a.sector {
                    Sector::NS => a.power(HalfInt::from_twice(2 * n + 1)),
                    Sector::R => a.q.powi(n as i32),
                };
                out.push(HardyElement {
                    label: format!("annulus n={n}"),
                    components: vec![CircleFunction::monomial(n, one), CircleFunction::monomial(n, inner)],
                    tail_bound: 0.0,
                });
            }
            Geometry::Pants(x) => {
                let (outer, t1) = binomial_series(n, -x.w, one, 1, 0, order);
                // (z - w)^n = z^n (1 - w/z)^n: expand in powers of z^{-1}.
                let outer = reindex(&outer, n, -1);
                let (third, t3) = binomial_series(n, x.q2, -x.w, 1, 0, order);
                out.push(HardyElement {
                    label: format!("(z-w)^{n}"),
                    components: vec![
                        outer,
                        CircleFunction::monomial(n, half_power(x.q1_sqrt, HalfInt::from_twice(2 * n + 1))),
                        third.scaled(x.q2_sqrt),
                    ],
                    tail_bound: t1 + t3 * x.q2_sqrt.norm(),
                });
                if n < 0 {
                    let (second, t2) = binomial_series(n, x.q1, x.w, 1, 0, order);
                    out.push(HardyElement {
                        label: format!("z^{n}"),
                        components: vec![
                            CircleFunction::monomial(n, one),
                            second.scaled(x.q1_sqrt),
                            CircleFunction::monomial(n, half_power(x.q2_sqrt, HalfInt::from_twice(2 * n + 1))),
                        ],
                        tail_bound: t2 * x.q1_sqrt.norm(),
                    });
                }
            }
        }
    }
    out
}

/// Maps `Σ c_j z^j` (powers of the ratio) to `Σ c_j z^{n + step·j}`.
fn reindex(f: &CircleFunction, n: i64, step: i64) -> CircleFunction {
    CircleFunction::from_terms(f.terms().map(|(j, c)| (n + step * j, c)))
}

/// `M_± conj(M_z h)`: conjugate after multiplying NS components by `z`, then
/// negate the incoming components.
pub fn perp_element(h: &HardyElement, n_out: usize, sector: Sector) -> HardyElement {
    let components = h
        .components
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let shifted = match sector {
                Sector::NS => f.shifted(1),
                Sector::R => f.clone(),
            };
            let g = shifted.conjugate();
            if i < n_out {
                g
            } else {
                g.scaled(C64::new(-1.0, 0.0))
            }
        })
        .collect();
    HardyElement { label: format!("perp {}", h.label), components, tail_bound: h.tail_bound }
}

pub fn perp_elements(geometry: &Geometry, n_range: std::ops::RangeInclusive<i64>, order: usize) -> Vec<HardyElement> {
    let (n_out, _) = geometry.circles();
    hardy_basis(geometry, n_range, order)
        .iter()
        .map(|h| perp_element(h, n_out, geometry.sector()))
        .collect()
}
