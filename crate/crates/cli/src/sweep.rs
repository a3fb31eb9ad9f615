//! Parameter sweeps. Points run on the rayon pool; rows come back in input order.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use fermion_cft::cauchy::{self, BoundaryDiscretization};
use fermion_cft::fock::enumerate_basis;
use fermion_cft::graded::GradedSpace;
use fermion_cft::linalg;
use fermion_cft::surfaces::*;
use fermion_cft::vertex::ModeEngine;
use fermion_cft::{HalfInt, Result, Sector};

use crate::config::{parse_domain, RunConfig, SweepRanges};
use crate::report::float;

#[derive(Clone, Debug, Serialize)]
pub struct PantsRow {
    pub w: f64,
    pub q1: f64,
    pub q2: f64,
    pub band: i64,
    #[serde(serialize_with = "float")]
    pub tail_norm: f64,
    #[serde(serialize_with = "float")]
    pub fitted_rate: f64,
    #[serde(serialize_with = "float")]
    pub predicted_rate: f64,
    pub monotone: bool,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub grid: usize,
    pub k: usize,
    #[serde(serialize_with = "float")]
    pub singular_value: f64,
    #[serde(serialize_with = "float")]
    pub partial_sum: f64,
    #[serde(serialize_with = "float")]
    pub fitted_decay: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub geometry: String,
    pub cutoff: HalfInt,
    pub unknowns: usize,
    #[serde(serialize_with = "float")]
    pub smallest: f64,
    #[serde(serialize_with = "float")]
    pub gap: f64,
    #[serde(serialize_with = "float")]
    pub distance: f64,
    pub status: String,
}

pub enum Rows {
    Pants(Vec<PantsRow>),
    Decay(Vec<DecayRow>),
    Gap(Vec<GapRow>),
}

pub fn run(target: &str, cfg: &RunConfig) -> Result<Rows> {
    let ranges = cfg.sweep.as_ref().expect("sweeps carry ranges");
    match target {
        "pants-convergence" => Ok(Rows::Pants(pants_convergence(cfg, ranges)?)),
        "ks-decay" => Ok(Rows::Decay(ks_decay(cfg, ranges)?)),
        "nullspace-gap" => Ok(Rows::Gap(nullspace_gap(cfg, ranges))),
        _ => unreachable!("targets are validated by the parser"),
    }
}

fn pants_convergence(cfg: &RunConfig, ranges: &SweepRanges) -> Result<Vec<PantsRow>> {
    let cutoff = cfg.cutoff.unwrap_or(HalfInt::from_int(2));
    let t = enumerate_basis(cutoff)?;
    let points: Vec<(f64, f64)> = ranges.ws.iter().flat_map(|&w| ranges.qs.iter().map(move |&q| (w, q))).collect();
    let bands: Vec<i64> = (ranges.bands.0..=ranges.bands.1).collect();
    let per_point: Vec<Vec<PantsRow>> = points
        .par_iter()
        .map(|&(w, q)| {
            let root = Complex64::new(q.sqrt(), 0.0);
            let x = match ModuliPoint::from_roots(Complex64::new(w, 0.0), root, root) {
                Ok(x) => x,
                Err(e) => {
                    return vec![PantsRow {
                        w,
                        q1: q,
                        q2: q,
                        band: 0,
                        tail_norm: f64::NAN,
                        fitted_rate: f64::NAN,
                        predicted_rate: f64::NAN,
                        monotone: false,
                        status: format!("skipped: {e}"),
                    }]
                }
            };
            let engine = ModeEngine::new();
            let tails: Vec<f64> = bands.iter().map(|&r| pants_tail_norm(&engine, &x, &t, r).unwrap_or(f64::NAN)).collect();
            let rate = fitted_rate(&bands.iter().map(|&r| r as f64).collect::<Vec<_>>(), &tails);
            let monotone = tails.windows(2).all(|p| p[1] < p[0]);
            bands
                .iter()
                .zip(&tails)
                .map(|(&band, &tail)| PantsRow {
                    w,
                    q1: q,
                    q2: q,
                    band,
                    tail_norm: tail,
                    fitted_rate: rate,
                    predicted_rate: x.rate(),
                    monotone,
                    status: "ok".into(),
                })
                .collect()
        })
        .collect();
    Ok(per_point.into_iter().flatten().collect())
}

fn ks_decay(cfg: &RunConfig, ranges: &SweepRanges) -> Result<Vec<DecayRow>> {
    let dom = parse_domain(&cfg.domain).map_err(fermion_cft::Error::Domain)?;
    let tables: Vec<Result<Vec<DecayRow>>> = ranges
        .grids
        .par_iter()
        .map(|&n| {
            let disc = BoundaryDiscretization::new(&dom, n)?;
            let hp = cauchy::hardy_projection_numeric(&dom, &disc)?;
            let r = cauchy::trace_class_diagnostic(&dom, &disc, &hp.q, 30)?;
            Ok(r.singular_values
                .iter()
                .zip(&r.partial_sums)
                .enumerate()
                .map(|(k, (&s, &p))| DecayRow { grid: n, k: k + 1, singular_value: s, partial_sum: p, fitted_decay: r.decay_per_index })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for t in tables {
        rows.extend(t?);
    }
    Ok(rows)
}

fn gap_row(cfg: &RunConfig, geometry: &str, cutoff: HalfInt) -> Result<GapRow> {
    let t = enumerate_basis(cutoff)?;
    let ns = GradedSpace::fock(&t, Sector::NS);
    let order = 8 * cfg.band.max(1) as usize;
    let (sol, reference) = match geometry {
        "disk" => {
            let g = Geometry::Disk;
            let k = 2 * cutoff.ceil() + 2;
            (solve_intertwiner(&GradedSpace::scalar(), &ns, &hardy_basis(&g, 0..=k, 0), &perp_elements(&g, 0..=k, 0))?, disk_operator(&t))
        }
        "annulus" => {
            let a = cfg.annulus;
            let g = Geometry::Annulus(a);
            let f = GradedSpace::fock(&t, a.sector);
            let k = 2 * cutoff.ceil() + 2;
            (solve_intertwiner(&f, &f, &hardy_basis(&g, -k..=k, 0), &perp_elements(&g, -k..=k, 0))?, annulus_operator(&a, &t))
        }
        _ => {
            let x = cfg.moduli;
            let g = Geometry::Pants(x);
            let k = 2 * cutoff.ceil() + 2;
            let sol = solve_intertwiner(&ns.tensor(&ns), &ns, &hardy_basis(&g, -k..=k, order), &perp_elements(&g, -k..=k, order))?;
            let p = pants_operator(&ModeEngine::new(), &x, &t, &t, Band::radius(cfg.band)).operator;
            (sol, p)
        }
    };
    Ok(GapRow {
        geometry: geometry.into(),
        cutoff,
        unknowns: sol.operator.matrix.nrows() * sol.operator.matrix.ncols(),
        smallest: *sol.singular_values.last().unwrap_or(&f64::NAN),
        gap: sol.gap,
        distance: linalg::phase_distance(&sol.operator.matrix, &reference.matrix),
        status: "ok".into(),
    })
}

fn nullspace_gap(cfg: &RunConfig, ranges: &SweepRanges) -> Vec<GapRow> {
    let points: Vec<(&str, HalfInt)> =
        ["disk", "annulus", "pants"].iter().flat_map(|&g| ranges.cutoffs.iter().map(move |&c| (g, c))).collect();
    points
        .par_iter()
        .map(|&(g, c)| {
            gap_row(cfg, g, c).unwrap_or_else(|e| GapRow {
                geometry: g.into(),
                cutoff: c,
                unknowns: 0,
                smallest: f64::NAN,
                gap: f64::NAN,
                distance: f64::NAN,
                status: format!("failed: {e}"),
            })
        })
        .collect()
}
