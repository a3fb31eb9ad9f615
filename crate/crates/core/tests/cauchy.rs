mod common;

use fermion_cft::car::CircleFunction;
use fermion_cft::cauchy::*;
use fermion_cft::linalg::{self, CMat, C64};
use fermion_cft::surfaces::{hardy_basis, perp_elements, AnnulusPoint, Geometry, ModuliPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pants() -> PlanarDomain {
    PlanarDomain::pants(re(0.5), re(0.1), re(0.1)).unwrap()
}

fn domains() -> Vec<(&'static str, PlanarDomain)> {
    vec![("disk", PlanarDomain::disk()), ("annulus", PlanarDomain::annulus(re(0.5)).unwrap()), ("pants", pants())]
}

fn apply(m: &CMat, x: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

fn random_data(rng: &mut ChaCha8Rng, circles: usize, band: i64) -> Vec<CircleFunction> {
    (0..circles)
        .map(|_| CircleFunction::from_terms((-band..=band).map(|n| (n, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))))
        .collect()
}

#[test]
fn disk_kerzman_stein_vanishes() {
    let dom = PlanarDomain::disk();
    let disc = BoundaryDiscretization::new(&dom, 128).unwrap();
    let hp = hardy_projection_numeric(&dom, &disc).unwrap();
    assert!(linalg::max_abs(&hp.ks.a) < 1e-10);
    assert!(linalg::max_abs(&(&hp.q - classical_projection(&dom, &disc))) < 1e-10);
}

#[test]
fn constants_reproduce_on_the_disk() {
    let dom = PlanarDomain::disk();
    let disc = BoundaryDiscretization::new(&dom, 32).unwrap();
    let u = BoundaryData::from_functions(&[CircleFunction::monomial(0, C64::new(2.0, -1.0))], 32);
    let r = cauchy_transform(&u, &dom, &disc).unwrap();
    for v in r.data.to_vector() {
        assert!((v - C64::new(2.0, -1.0)).norm() < 1e-14);
    }
}

#[test]
fn annulus_laurent_data_is_fixed() {
    let q = 0.5;
    let dom = PlanarDomain::annulus(re(q)).unwrap();
    let disc = BoundaryDiscretization::new(&dom, 64).unwrap();
    for n in -5..=5 {
        let u = BoundaryData::from_functions(&[CircleFunction::monomial(n, re(1.0)), CircleFunction::monomial(n, re(q.powi(n as i32)))], 64);
        let cu = cauchy_transform(&u, &dom, &disc).unwrap().data;
        let err = cu.to_vector().iter().zip(u.to_vector()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10 * q.powi(-(n.abs() as i32)), "n = {n}: {err}");
    }
}

#[test]
fn cauchy_matrix_is_idempotent_with_formal_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, dom) in domains() {
        let disc = BoundaryDiscretization::new(&dom, 128).unwrap();
        let ks = kerzman_stein(&dom, &disc);
        assert!(linalg::max_abs(&(&ks.c * &ks.c - &ks.c)) < 1e-12, "{name}");
        assert!(ks.adjoint_defect < 1e-12 && ks.skew_defect < 1e-12, "{name}");
        assert!(ks.kernel_defect < 1e-10, "{name}: {}", ks.kernel_defect);
        let u = BoundaryData::from_functions(&random_data(&mut rng, dom.circles().len(), 8), 128).to_vector();
        let v = BoundaryData::from_functions(&random_data(&mut rng, dom.circles().len(), 8), 128).to_vector();
        let lhs = linalg::dot(&apply(&ks.c, &u), &v);
        let rhs = linalg::dot(&u, &apply(&ks.c_star, &v));
        assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()), "{name}");
    }
}

#[test]
fn annulus_projection_matches_gram_oracle() {
    let dom = PlanarDomain::annulus(re(0.5)).unwrap();
    let disc = BoundaryDiscretization::new(&dom, 128).unwrap();
    let hp = hardy_projection_numeric(&dom, &disc).unwrap();
    assert!(linalg::max_abs(&(&hp.q - common::gram::annulus_projection(0.5, 128))) < 1e-10);
}

#[test]
fn pants_projection_is_orthogonal() {
    let dom = pants();
    let disc = BoundaryDiscretization::new(&dom, 128).unwrap();
    let hp = hardy_projection_numeric(&dom, &disc).unwrap();
    assert!(hp.idempotence < 1e-10 && hp.self_adjointness < 1e-10);
    assert!(hp.condition < 10.0);
    let lhs = &hp.q * (linalg::identity(disc.total()) + &hp.ks.a);
    assert!(linalg::max_abs(&(lhs - &hp.ks.c)) < 1e-12);
}

#[test]
fn plemelj_limits_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, dom) in domains() {
        let disc = BoundaryDiscretization::new(&dom, 64).unwrap();
        let u = random_data(&mut rng, dom.circles().len(), 6);
        let err = plemelj_check(&u, &dom, &disc, DirectLimit::default()).unwrap();
        assert!(err < 1e-8, "{name}: {err}");
    }
}

#[test]
fn numeric_hardy_space_satisfies_perp_formula() {
    for (name, dom) in domains() {
        let disc = BoundaryDiscretization::new(&dom, 128).unwrap();
        let hp = hardy_projection_numeric(&dom, &disc).unwrap();
        let r = perp_formula_check(&dom, &disc, &hp.q, 6);
        assert!(r < 1e-9, "{name}: {r}");
    }
}

#[test]
fn spinor_spans_satisfy_perp_formula() {
    let a = AnnulusPoint::ns(re(0.5f64.sqrt())).unwrap();
    let x = ModuliPoint::from_roots(re(0.5), re(0.1f64.sqrt()), re(0.1f64.sqrt())).unwrap();
    for (g, order, tol) in [(Geometry::Annulus(a), 0, 1e-14), (Geometry::Pants(x), 64, 1e-12)] {
        let hs = hardy_basis(&g, -4..=4, order);
        let ps = perp_elements(&g, -4..=4, order);
        let worst = hs
            .iter()
            .flat_map(|h| ps.iter().map(move |p| h.inner(p).norm() / (h.norm() * p.norm())))
            .fold(0.0, f64::max);
        assert!(worst < tol, "{}: {worst}", g.name());
    }
}

#[test]
fn projection_difference_diagnostics() {
    let dom = PlanarDomain::disk();
    let disc = BoundaryDiscretization::new(&dom, 64).unwrap();
    let hp = hardy_projection_numeric(&dom, &disc).unwrap();
    let r = trace_class_diagnostic(&dom, &disc, &hp.q, 30).unwrap();
    assert!(r.singular_values.iter().all(|&s| s < 1e-10));

    // Annulus: the singular values are q^m/sqrt(1+q^{2m}) with multiplicity 4 (2 for m = 0).
    let q = 0.5f64;
    let dom = PlanarDomain::annulus(re(q)).unwrap();
    let disc = BoundaryDiscretization::new(&dom, 128).unwrap();
    let hp = hardy_projection_numeric(&dom, &disc).unwrap();
    let r = trace_class_diagnostic(&dom, &disc, &hp.q, 30).unwrap();
    let mut want = vec![1.0 / 2f64.sqrt(); 2];
    for m in 1..8 {
        want.extend([q.powi(m) / (1.0 + q.powi(2 * m)).sqrt(); 4]);
    }
    for (s, w) in r.singular_values.iter().zip(&want) {
        assert!((s - w).abs() < 1e-12);
    }
    assert!(r.decay_per_index < 1.0);

    let dom = pants();
    let mut sums = Vec::new();
    for n in [128, 256] {
        let disc = BoundaryDiscretization::new(&dom, n).unwrap();
        let hp = hardy_projection_numeric(&dom, &disc).unwrap();
        sums.push(*trace_class_diagnostic(&dom, &disc, &hp.q, 30).unwrap().partial_sums.last().unwrap());
    }
    assert!((sums[0] - sums[1]).abs() < 1e-6, "{sums:?}");
}

#[test]
fn rejects_bad_grids_and_data() {
    let dom = PlanarDomain::annulus(re(0.5)).unwrap();
    assert!(BoundaryDiscretization::new(&dom, 31).is_err());
    let disc = BoundaryDiscretization::new(&dom, 32).unwrap();
    let u = BoundaryData::from_functions(&[CircleFunction::monomial(0, re(1.0))], 32);
    assert!(cauchy_transform(&u, &dom, &disc).is_err());
}
