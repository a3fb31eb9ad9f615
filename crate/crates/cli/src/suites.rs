//! The `verify` suites: each runs a module's invariants at the configured
//! sizes and records one check per assertion.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use fermion_cft::car::{anticommutator_defect, mode_matrix, mode_weight, safe_window, smeared, CircleFunction};
use fermion_cft::cauchy::{self, BoundaryDiscretization, DirectLimit, PlanarDomain};
use fermion_cft::fock::{enumerate_basis, rotation_operator, FockTruncation};
use fermion_cft::graded::{Factor, GradedOperator, GradedSpace, Parity, WeightShift};
use fermion_cft::linalg::{self, C64};
use fermion_cft::supertrace::*;
use fermion_cft::surfaces::*;
use fermion_cft::vertex::{field_series, generalized_binomial, Generator, ModeEngine, StateWord};
use fermion_cft::{HalfInt, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::Checks;

pub const SUITES: [&str; 6] = ["fock", "car", "supertrace", "vertex", "surfaces", "cauchy"];

pub struct SuiteOutput {
    pub checks: Checks,
    pub record: Value,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn truncation(cutoff: HalfInt) -> Result<Arc<FockTruncation>> {
    enumerate_basis(cutoff)
}

pub fn run(suite: &str, cfg: &RunConfig) -> SuiteOutput {
    let mut checks = Checks::new(suite, cfg.tolerance);
    let start = Instant::now();
    let mut record = match suite {
        "fock" => fock(cfg, &mut checks),
        "car" => car(cfg, &mut checks),
        "supertrace" => supertrace(cfg, &mut checks),
        "vertex" => vertex(cfg, &mut checks),
        "surfaces" => surfaces(cfg, &mut checks),
        "cauchy" => cauchy_suite(cfg, &mut checks),
        _ => unreachable!("suite names are validated by the parser"),
    }
    .unwrap_or_else(|e| {
        checks.error("suite aborted", e);
        json!({})
    });
    if cfg.timing {
        record["runtime"] = json!(start.elapsed().as_secs_f64());
    }
    SuiteOutput { checks, record }
}

fn cutoff_or(cfg: &RunConfig, twice: i64) -> HalfInt {
    cfg.cutoff.unwrap_or(HalfInt::from_twice(twice))
}

/// Cumulative dimensions of the NS Fock space from the character `∏(1+q^{k-1/2})²`,
/// indexed by twice the energy.
fn character_dims(cutoff: HalfInt) -> Vec<usize> {
    let top = cutoff.twice().max(0) as usize;
    let mut series = vec![0usize; top + 1];
    series[0] = 1;
    for k in 1..=top.div_ceil(2) + 1 {
        let e = 2 * k - 1;
        for _ in 0..2 {
            for t in (e..=top).rev() {
                series[t] += series[t - e];
            }
        }
    }
    let mut acc = 0;
    series
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn fock(cfg: &RunConfig, ch: &mut Checks) -> Result<Value> {
    let cutoff = cutoff_or(cfg, 6);
    let dims = character_dims(cutoff);
    let mut mismatches = 0;
    for (twice, want) in dims.iter().enumerate() {
        if enumerate_basis(HalfInt::from_twice(twice as i64))?.dim() != *want {
            mismatches += 1;
        }
    }
    ch.holds("dimensions match the character at every cutoff", mismatches == 0);
    let t = truncation(cutoff)?;
    let energies = t.energies(fermion_cft::Sector::NS);
    ch.holds("basis sorted by energy", energies.windows(2).all(|w| w[0] <= w[1]));
    ch.holds("vacuum first", t.state(0).is_vacuum());
    ch.holds("index lookup inverts the basis", t.basis().iter().enumerate().all(|(i, s)| t.index_of(s) == Some(i)));
    ch.holds(
        "parity is particle number mod 2",
        t.basis().iter().all(|s| s.parity() == Parity::from_bit(s.particle_count() % 2)),
    );
    let rot = rotation_operator(1.0, fermion_cft::Sector::NS, &t);
    let d = GradedSpace::fock(&t, fermion_cft::Sector::NS).grading();
    ch.residual("full NS rotation equals the grading", linalg::max_abs(&(rot.matrix - d)), 0.0);
    let parsed: Value = serde_json::from_str(&t.to_json()).map_err(|e| fermion_cft::Error::Parse(e.to_string()))?;
    ch.holds("basis export lists every state", parsed.as_array().map(|a| a.len()) == Some(t.dim()));
    Ok(json!({ "cutoff": cutoff, "dim": t.dim(), "cumulative_dims": dims }))
}

fn car(cfg: &RunConfig, ch: &mut Checks) -> Result<Value> {
    let cutoff = cutoff_or(cfg, 6);
    let t = truncation(cutoff)?;
    let kmax = cutoff.ceil();
    let modes: Vec<(i64, bool)> = (-kmax..=kmax).flat_map(|k| [(k, false), (k, true)]).collect();
    let mats: BTreeMap<(i64, bool), GradedOperator> = modes.iter().map(|&m| (m, mode_matrix(m.0, m.1, &t))).collect();
    let mut worst: f64 = 0.0;
    let mut empty = 0;
    for &x in &modes {
        for &y in &modes {
            let raise = mode_weight(x.0, x.1).max(mode_weight(y.0, y.1)).max(HalfInt::ZERO);
            let win = safe_window(&t, raise);
            if win.is_empty() {
                empty += 1;
                continue;
            }
            let target = if x.0 == y.0 && x.1 != y.1 { c(1.0) } else { c(0.0) };
            worst = worst.max(anticommutator_defect(&mats[&x], &mats[&y], target, &win));
        }
    }
    ch.residual("mode anticommutators on the safe window", worst, 1e-12);
    let adjoint = (-kmax..=kmax)
        .map(|k| linalg::max_abs(&(linalg::adjoint(&mats[&(k, false)].matrix) - &mats[&(k, true)].matrix)))
        .fold(0.0, f64::max);
    ch.residual("a(z^k)* is the adjoint of a(z^k)", adjoint, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random_f = |rng: &mut ChaCha8Rng| {
        CircleFunction::from_terms((-2..=1).map(|n| (n, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
    };
    let mut worst_smeared: f64 = 0.0;
    for _ in 0..10 {
        let f = random_f(&mut rng);
        let g = random_f(&mut rng);
        let af = smeared(&f, false, &t);
        let ag = smeared(&g, false, &t);
        let ags = smeared(&g, true, &t);
        let raise = f.max_raise(false).max(g.max_raise(true)).max(g.max_raise(false)).max(HalfInt::ZERO);
        let win = safe_window(&t, raise);
        worst_smeared = worst_smeared
            .max(anticommutator_defect(&af, &ags, f.inner(&g), &win))
            .max(anticommutator_defect(&af, &ag, c(0.0), &win));
    }
    ch.residual("smeared anticommutators equal the inner product", worst_smeared, 1e-12);
    ch.holds("some mode pairs have a nonempty safe window", empty < modes.len() * modes.len());
    Ok(json!({ "cutoff": cutoff, "dim": t.dim(), "modes": modes.len(), "pairs_without_window": empty }))
}

fn random_space(rng: &mut ChaCha8Rng, factors: usize, max_dim: usize) -> GradedSpace {
    GradedSpace::new(
        (0..factors)
            .map(|_| {
                let dim = rng.gen_range(1..=max_dim);
                Factor::from_parities((0..dim).map(|_| Parity::from_bit(rng.gen_range(0..2))).collect())
            })
            .collect(),
    )
}

fn random_operator(rng: &mut ChaCha8Rng, dom: &GradedSpace, cod: &GradedSpace) -> GradedOperator {
    let p = Parity::from_bit(rng.gen_range(0..2));
    let mut m = linalg::zeros(cod.dim(), dom.dim());
    for i in 0..cod.dim() {
        for j in 0..dom.dim() {
            if cod.parities()[i].add(dom.parities()[j]) == p {
                m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    GradedOperator { matrix: m, domain: dom.clone(), codomain: cod.clone(), parity: Some(p), weight_shift: WeightShift::Mixed }
}

fn supertrace(cfg: &RunConfig, ch: &mut Checks) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let koszul = |a: &GradedOperator, b: &GradedOperator| c(a.parity.unwrap().koszul(b.parity.unwrap()));
    let (mut sign, mut trace, mut bimod, mut iter, mut braid, mut comp) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    let samples = 100;
    for _ in 0..samples {
        let sp = |rng: &mut ChaCha8Rng| random_space(rng, 1, 3);
        let (a, b, cc, d, e, f) = (sp(&mut rng), sp(&mut rng), sp(&mut rng), sp(&mut rng), sp(&mut rng), sp(&mut rng));
        let x1 = random_operator(&mut rng, &a, &b);
        let y1 = random_operator(&mut rng, &b, &cc);
        let x2 = random_operator(&mut rng, &d, &e);
        let y2 = random_operator(&mut rng, &e, &f);
        let lhs = graded_tensor(&y1, &y2).compose(&graded_tensor(&x1, &x2))?;
        let rhs = graded_tensor(&y1.compose(&x1)?, &y2.compose(&x2)?);
        sign = sign.max(max_difference(&lhs.matrix, &linalg::scale(&rhs.matrix, koszul(&y2, &x1))));

        let (h, k, l) = (sp(&mut rng), sp(&mut rng), sp(&mut rng));
        let x = random_operator(&mut rng, &h.tensor(&l), &k.tensor(&l));
        let z = random_operator(&mut rng, &l, &l);
        let left = partial_supertrace(&graded_tensor(&GradedOperator::identity(&k), &z).compose(&x)?, 1)?;
        let right = partial_supertrace(&x.compose(&graded_tensor(&GradedOperator::identity(&h), &z))?, 1)?;
        trace = trace.max(max_difference(&left.matrix, &linalg::scale(&right.matrix, koszul(&x, &z))));

        let (h0, k1) = (sp(&mut rng), sp(&mut rng));
        let u1 = random_operator(&mut rng, &h0, &h);
        let u2 = random_operator(&mut rng, &k, &k1);
        let id_l = GradedOperator::identity(&l);
        let tr = partial_supertrace(&x, 1)?;
        let ra = partial_supertrace(&x.compose(&graded_tensor(&u1, &id_l))?, 1)?;
        let rb = partial_supertrace(&graded_tensor(&u2, &id_l).compose(&x)?, 1)?;
        bimod = bimod
            .max(max_difference(&ra.matrix, &tr.compose(&u1)?.matrix))
            .max(max_difference(&rb.matrix, &u2.compose(&tr)?.matrix));

        let l2 = random_space(&mut rng, 2, 3);
        let xx = random_operator(&mut rng, &h.tensor(&l2), &k.tensor(&l2));
        let both = partial_supertrace(&xx, 2)?;
        let nested = partial_supertrace(&partial_supertrace(&xx, 1)?, 1)?;
        iter = iter.max(max_difference(&both.matrix, &nested.matrix));

        let n = rng.gen_range(1..=4);
        let s = random_space(&mut rng, n, 2);
        let mut tau: Vec<usize> = (0..n).collect();
        let mut sigma: Vec<usize> = (0..n).collect();
        tau.shuffle(&mut rng);
        sigma.shuffle(&mut rng);
        let bt = braiding(&s, &tau)?;
        let bs = braiding(&bt.codomain, &sigma)?;
        let composite: Vec<usize> = sigma.iter().map(|&i| tau[i]).collect();
        braid = braid.max(max_difference(&bs.compose(&bt)?.matrix, &braiding(&s, &composite)?.matrix));

        let nl = rng.gen_range(1..=2);
        let ls = random_space(&mut rng, nl, 2);
        let (m, nn, hh, kk) = (random_space(&mut rng, 1, 2), random_space(&mut rng, 1, 2), random_space(&mut rng, 1, 2), random_space(&mut rng, 1, 2));
        let w2 = random_operator(&mut rng, &ls.tensor(&m), &nn);
        let w1 = random_operator(&mut rng, &hh, &kk.tensor(&ls));
        comp = comp.max(max_difference(&compose_via_supertrace(&w2, &w1, nl)?.matrix, &compose_direct(&w2, &w1, nl)?.matrix));
    }
    ch.residual("graded tensor sign law", sign, 1e-12);
    ch.residual("supertracial property", trace, 1e-12);
    ch.residual("bimodularity of the partial supertrace", bimod, 1e-12);
    ch.residual("iterated partial supertrace", iter, 1e-12);
    ch.residual("braiding functoriality", braid, 1e-12);
    ch.residual("composition through the supertrace", comp, 1e-12);
    Ok(json!({ "samples": samples, "seed": cfg.seed }))
}

fn vertex(cfg: &RunConfig, ch: &mut Checks) -> Result<Value> {
    let cutoff = cutoff_or(cfg, 4);
    let small = truncation(cutoff)?;
    let big = truncation(cutoff + HalfInt::from_int(5))?;
    let engine = ModeEngine::new();
    let mut gen_field: f64 = 0.0;
    for n in -4..4 {
        let a = engine.mode(&StateWord::new(vec![Generator::new(-1, false)]), n, &small);
        let b = engine.mode(&StateWord::new(vec![Generator::new(0, true)]), n, &small);
        gen_field = gen_field
            .max(linalg::max_abs(&(a.matrix.clone() - &mode_matrix(n, false, &small).matrix)))
            .max(linalg::max_abs(&(b.matrix.clone() - &mode_matrix(-n - 1, true, &small).matrix)));
    }
    ch.residual("generating fields are the CAR modes", gen_field, 0.0);

    let vac = field_series(&engine, &StateWord::vacuum(), C64::new(0.3, -0.2), &small, -3, 3)?;
    ch.residual("vacuum field is the identity", linalg::max_abs(&(vac.operator.matrix - linalg::identity(small.dim()))), 1e-15);

    let keep: Vec<usize> = small.basis().iter().map(|s| big.index_of(s).expect("nested truncations")).collect();
    let words = [
        vec![Generator::new(-1, false)],
        vec![Generator::new(0, true), Generator::new(-2, false)],
        vec![Generator::new(1, true)],
    ];
    let mut borcherds: f64 = 0.0;
    let mut metadata = true;
    for w in &words {
        let xi = StateWord::new(w.clone());
        let p = w.len() as i64;
        for n in -2..=1i64 {
            let mut lifted = vec![Generator::new(n, false)];
            lifted.extend(w.iter().copied());
            for m in -2..=2 {
                let direct = engine.mode(&StateWord::new(lifted.clone()), m, &small);
                metadata &= direct.check_metadata().is_ok();
                let mut sum = linalg::zeros(big.dim(), big.dim());
                for j in 0..12u32 {
                    let coef = generalized_binomial(n, j) as f64 * if j % 2 == 0 { 1.0 } else { -1.0 };
                    if coef == 0.0 {
                        continue;
                    }
                    let ji = j as i64;
                    let first = &mode_matrix(n - ji, false, &big).matrix * &engine.mode(&xi, m + ji, &big).matrix;
                    let second = &engine.mode(&xi, m + n - ji, &big).matrix * &mode_matrix(ji, false, &big).matrix;
                    let s = if (p + n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    sum = sum + linalg::scale(&(first - linalg::scale(&second, c(s))), c(coef));
                }
                let compressed = linalg::select(&sum, &keep, &keep);
                borcherds = borcherds.max(linalg::max_abs(&(direct.matrix.clone() - compressed)));
            }
        }
    }
    ch.residual("recursion obeys the Borcherds product formula", borcherds, 1e-10);
    ch.holds("modes carry their weight and parity", metadata);
    Ok(json!({ "cutoff": cutoff, "dim": small.dim(), "cached_vectors": engine.cached_vectors() }))
}

fn is_monotone(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn surfaces(cfg: &RunConfig, ch: &mut Checks) -> Result<Value> {
    let cutoff = cutoff_or(cfg, 4);
    let t = truncation(cutoff)?;
    let engine = ModeEngine::new();
    let x = cfg.moduli;
    let mut records: Vec<SurfaceReport> = Vec::new();

    let omega = disk_operator(&t);
    let kmax = cutoff.ceil() + 1;
    let mut vac = 0.0f64;
    for m in 0..=kmax {
        vac = vac.max(linalg::max_abs(&(&mode_matrix(m, false, &t).matrix * &omega.matrix)));
    }
    for n in -kmax..0 {
        vac = vac.max(linalg::max_abs(&(&mode_matrix(n, true, &t).matrix * &omega.matrix)));
    }
    ch.residual("vacuum equations", vac, 0.0);
    let k = 2 * cutoff.ceil();
    let disk_rel = verify_commutation(&omega, &hardy_basis(&Geometry::Disk, 0..=k, 0), &perp_elements(&Geometry::Disk, 0..=k, 0))?;
    ch.residual("disk relations", disk_rel.max_residual, 0.0);

    let a = cfg.annulus;
    let ga = Geometry::Annulus(a);
    let ann = verify_commutation(&annulus_operator(&a, &t), &hardy_basis(&ga, -k..=k, 0), &perp_elements(&ga, -k..=k, 0))?;
    ch.residual(&format!("annulus ({}) relations for |n| <= {k}", a.sector), ann.max_residual, 1e-12);
    records.push(SurfaceReport {
        geometry: ga,
        cutoff,
        band: None,
        residuals: BTreeMap::from([("relations".into(), ann.max_residual)]),
        singular_values: vec![],
        runtime: None,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut group: f64 = 0.0;
    for _ in 0..5 {
        let mut root = || C64::from_polar(rng.gen_range(0.2..0.95), rng.gen_range(-3.1..3.1));
        let (a1, a2) = (AnnulusPoint::ns(root())?, AnnulusPoint::ns(root())?);
        let lhs = &annulus_operator(&a1, &t).matrix * &annulus_operator(&a2, &t).matrix;
        group = group.max(linalg::max_abs(&(lhs - annulus_operator(&a1.compose(&a2)?, &t).matrix)));
    }
    ch.residual("annulus group law on 5 random pairs", group, 1e-13);

    // Normalization: with only n = -1 in the band, T(Ω⊗η) = q2^{L0}η.
    let t1 = truncation(HalfInt::from_int(1))?;
    let p1 = pants_operator(&engine, &x, &t, &t, Band::new(-1, -1)?).operator;
    let q2l0 = annulus_operator(&AnnulusPoint::ns(x.q2_sqrt)?, &t);
    let cols: Vec<usize> = (0..t.dim()).collect();
    ch.residual("T(vacuum ⊗ η) = q2^L0 η", linalg::max_abs(&(linalg::select(&p1.matrix, &cols, &cols) - &q2l0.matrix)), 0.0);
    let p11 = pants_operator(&engine, &x, &t1, &t1, Band::radius(cfg.band)).operator;
    let a_minus = t1.index_of(&fermion_cft::fock::BasisState::new(vec![-1], vec![])?).expect("a(z^-1) state");
    let element = p11.matrix[(a_minus, a_minus * t1.dim())];
    ch.residual("<a(z^-1)Ω, T(a(z^-1)Ω ⊗ Ω)> = q1^(1/2)", (element - x.q1_sqrt).norm(), 1e-12);

    let bands: Vec<i64> = (4..=cfg.band.max(5)).collect();
    let tails: Vec<f64> = bands.iter().map(|&r| pants_tail_norm(&engine, &x, &t, r)).collect::<Result<_>>()?;
    let rate = fitted_rate(&bands.iter().map(|&r| r as f64).collect::<Vec<_>>(), &tails);
    ch.holds("pants band-tail norms decrease monotonically", is_monotone(&tails));
    ch.at_most("pants fitted geometric rate", rate, 1.0 - 1e-9);

    let tout = truncation(cutoff + cutoff)?;
    let pants = pants_operator(&engine, &x, &t, &tout, Band::radius(cfg.band));
    let gp = Geometry::Pants(x);
    let pr = verify_commutation(&pants.operator, &hardy_basis(&gp, -k..=k, cfg.fourier), &perp_elements(&gp, -k..=k, cfg.fourier))?;
    ch.residual(&format!("pants relations at band {}", cfg.band), pr.max_residual, 1e-6);
    records.push(SurfaceReport {
        geometry: gp,
        cutoff,
        band: Some(Band::radius(cfg.band)),
        residuals: BTreeMap::from([
            ("relations".into(), pr.max_residual),
            ("fourier_tail_bound".into(), pr.max_tail_bound),
            ("fitted_rate".into(), rate),
            ("predicted_rate".into(), x.rate()),
        ]),
        singular_values: tails,
        runtime: None,
    });

    // Nullspaces at the standard cutoffs.
    let f1 = GradedSpace::fock(&t1, fermion_cft::Sector::NS);
    let th = truncation(HalfInt::from_twice(3))?;
    let fh = GradedSpace::fock(&th, a.sector);
    let disk = solve_intertwiner(&GradedSpace::scalar(), &f1, &hardy_basis(&Geometry::Disk, 0..=4, 0), &perp_elements(&Geometry::Disk, 0..=4, 0))?;
    let annl = solve_intertwiner(&fh, &fh, &hardy_basis(&ga, -4..=4, 0), &perp_elements(&ga, -4..=4, 0))?;
    let order = 64;
    let pn = solve_intertwiner(&f1.tensor(&f1), &f1, &hardy_basis(&gp, -4..=4, order), &perp_elements(&gp, -4..=4, order))?;
    let pants_ref = pants_operator(&engine, &x, &t1, &t1, Band::radius(cfg.band)).operator;
    for (name, sol, reference, g, cut) in [
        ("disk", &disk, disk_operator(&t1), Geometry::Disk, HalfInt::from_int(1)),
        ("annulus", &annl, annulus_operator(&a, &th), ga, HalfInt::from_twice(3)),
        ("pants", &pn, pants_ref, gp, HalfInt::from_int(1)),
    ] {
        ch.at_least(&format!("{name} nullspace gap"), sol.gap, 1e3);
        ch.residual(&format!("{name} intertwiner matches the explicit operator"), linalg::phase_distance(&sol.operator.matrix, &reference.matrix), 1e-6);
        records.push(SurfaceReport {
            geometry: g,
            cutoff: cut,
            band: None,
            residuals: BTreeMap::from([("gap".into(), sol.gap)]),
            singular_values: sol.singular_values.iter().rev().take(4).copied().collect(),
            runtime: None,
        });
    }

    let sew_pants = pants_operator(&engine, &x, &t, &t, Band::radius(3)).operator;
    let sewn = sew(&sew_pants, &disk_operator(&t), 1)?;
    ch.residual("disk sewn into pants is q2^L0", linalg::max_abs(&(sewn.matrix - &q2l0.matrix)), 0.0);
    let (a1, a2) = (AnnulusPoint::ns(C64::new(0.3, 0.4))?, AnnulusPoint::ns(C64::new(-0.5, 0.2))?);
    let s = sew(&annulus_operator(&a1, &t), &annulus_operator(&a2, &t), 1)?;
    ch.residual("annulus sewn into annulus", linalg::max_abs(&(s.matrix - annulus_operator(&a1.compose(&a2)?, &t).matrix)), 1e-15);

    ch.residual("annulus adjoint is the conjugate annulus", conjugate_check_annulus(&a, &t), 0.0);
    let t2 = truncation(HalfInt::from_int(1))?;
    let conj = conjugate_check_pants(&engine, &x, &t2, Band::radius(cfg.band), -4..=4, order)?;
    ch.residual("pants adjoint matches the conjugate intertwiner", conj.distance, 1e-5);
    ch.at_least("conjugate pants nullspace gap", conj.gap, 1e3);

    Ok(json!({ "surfaces": records, "conjugate_pants": conj }))
}

fn band_limited(rng: &mut ChaCha8Rng, circles: usize, band: i64) -> Vec<CircleFunction> {
    (0..circles)
        .map(|_| CircleFunction::from_terms((-band..=band).map(|n| (n, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))))
        .collect()
}

fn cauchy_suite(cfg: &RunConfig, ch: &mut Checks) -> Result<Value> {
    let dom: PlanarDomain = crate::config::parse_domain(&cfg.domain).map_err(fermion_cft::Error::Domain)?;
    let disc = BoundaryDiscretization::new(&dom, cfg.grid)?;
    let hp = cauchy::hardy_projection_numeric(&dom, &disc)?;
    let ks = &hp.ks;
    let n = disc.total();
    ch.residual("C^2 = C", linalg::max_abs(&(&ks.c * &ks.c - &ks.c)), 1e-10);
    ch.residual("formal adjoint equals the matrix adjoint", ks.adjoint_defect, 1e-10);
    ch.residual("A is skew-adjoint", ks.skew_defect, 1e-10);
    ch.residual("A agrees with its kernel quadrature", ks.kernel_defect, 1e-8);
    ch.residual("q idempotent", hp.idempotence, 1e-8);
    ch.residual("q self-adjoint", hp.self_adjointness, 1e-8);

    // An independent projection onto the range of C, from its SVD.
    let svd = linalg::svd(&ks.c)?;
    let r = svd.s.iter().filter(|&&s| s > 0.5).count();
    let u = linalg::select(&svd.u, &(0..n).collect::<Vec<_>>(), &(0..r).collect::<Vec<_>>());
    let q_svd = &u * linalg::adjoint(&u);
    let ks_identity = linalg::op_norm(&(&q_svd * (linalg::identity(n) + &ks.a) - &ks.c))?;
    ch.residual("q(1 + A) = C with q the range projection of C", ks_identity, 1e-8);
    ch.residual("q from (1 + A)^-1 equals the range projection", linalg::max_abs(&(&hp.q - &q_svd)), 1e-8);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u = band_limited(&mut rng, dom.circles().len(), (cfg.grid / 16).min(8) as i64);
    let plemelj = cauchy::plemelj_check(&u, &dom, &disc, DirectLimit::default())?;
    ch.residual("direct boundary limit equals the Plemelj split", plemelj, 1e-8);
    let perp = cauchy::perp_formula_check(&dom, &disc, &hp.q, 6);
    ch.residual("numeric Hardy space satisfies the perp formula", perp, 1e-8);

    let tc = cauchy::trace_class_diagnostic(&dom, &disc, &hp.q, 30)?;
    ch.at_most("fitted decay of q - p per index", tc.decay_per_index, 1.0);
    let coarse_disc = BoundaryDiscretization::new(&dom, cfg.grid / 2)?;
    let coarse = cauchy::hardy_projection_numeric(&dom, &coarse_disc)?;
    let tc_coarse = cauchy::trace_class_diagnostic(&dom, &coarse_disc, &coarse.q, 30)?;
    let plateau_shift = (tc.partial_sums.last().unwrap_or(&0.0) - tc_coarse.partial_sums.last().unwrap_or(&0.0)).abs();
    ch.residual("partial sums stable under grid halving", plateau_shift, 1e-6);
    Ok(json!({
        "domain": cfg.domain,
        "grid": cfg.grid,
        "condition": hp.condition,
        "norm_a": linalg::op_norm(&ks.a)?,
        "decay": tc,
        "coarse_decay": tc_coarse,
    }))
}
