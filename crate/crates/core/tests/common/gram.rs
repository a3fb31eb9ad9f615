use fermion_cft::linalg::{self, CMat, C64};

/// Orthogonal projection onto the closed span of `(zⁿ, qⁿzⁿ)` on the annulus
/// boundary, written in the sample basis of an `n`-point grid per circle.
/// Distinct Laurent modes are orthogonal, so Gram–Schmidt acts mode by mode.
pub fn annulus_projection(q: f64, n: usize) -> CMat {
    let nodes: Vec<C64> = (0..n).map(|l| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / n as f64)).collect();
    let h = n as i64 / 2;
    let mut p = linalg::zeros(2 * n, 2 * n);
    for m in -h..h {
        let v = [1.0, q.powi(m as i32)];
        let vv = v[0] * v[0] + v[1] * v[1];
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                let c = vi * vj / vv / n as f64;
                for k in 0..n {
                    for l in 0..n {
                        p[(i * n + k, j * n + l)] += nodes[k].powi(m as i32) * nodes[l].conj().powi(m as i32) * c;
                    }
                }
            }
        }
    }
    p
}
