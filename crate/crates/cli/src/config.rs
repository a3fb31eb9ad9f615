//! Parsing of the numeric flag formats and the resolved run configuration.

use fermion_cft::cauchy::PlanarDomain;
use fermion_cft::surfaces::{AnnulusPoint, ModuliPoint};
use fermion_cft::{HalfInt, Sector};
use num_complex::Complex64;
use serde::Serialize;

/// Parses `re`, `imi`, `re+imi` or `re-imi` (also `j` for the unit).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("not a complex number: {s:?} (expected re+imi)");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // The split point is the last sign that does not start the string or an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(Complex64::new(body[..i].parse().map_err(|_| bad())?, imag(&body[i..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_cutoff(s: &str) -> Result<HalfInt, String> {
    let c: HalfInt = s.parse().map_err(|e: fermion_cft::Error| e.to_string())?;
    if c < HalfInt::ZERO {
        return Err(format!("cutoff must be nonnegative, got {s}"));
    }
    Ok(c)
}

/// `w,q1,q1s,q2,q2s`, or `w,q1,q2` with principal square roots.
pub fn parse_moduli(s: &str) -> Result<ModuliPoint, String> {
    let v = parse_list(s)?;
    let x = match v.as_slice() {
        [w, q1, q1s, q2, q2s] => ModuliPoint::new(*w, *q1, *q1s, *q2, *q2s),
        [w, q1, q2] => ModuliPoint::new(*w, *q1, q1.sqrt(), *q2, q2.sqrt()),
        _ => return Err(format!("--moduli takes w,q1,q1s,q2,q2s (or w,q1,q2), got {} values", v.len())),
    };
    x.map_err(|e| e.to_string())
}

/// `q[,qs]` in the given sector; an NS annulus without `qs` uses the principal root.
pub fn parse_annulus(s: &str, sector: Sector) -> Result<AnnulusPoint, String> {
    let v = parse_list(s)?;
    let (q, qs) = match v.as_slice() {
        [q] => (*q, None),
        [q, qs] => (*q, Some(*qs)),
        _ => return Err(format!("--annulus takes q or q,qs, got {} values", v.len())),
    };
    let qs = match (sector, qs) {
        (Sector::NS, None) => Some(q.sqrt()),
        (_, qs) => qs,
    };
    AnnulusPoint::new(q, qs, sector).map_err(|e| e.to_string())
}

/// `disk`, `annulus:q` or `pants:w,q1,q2`.
pub fn parse_domain(s: &str) -> Result<PlanarDomain, String> {
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let v = if args.is_empty() { Vec::new() } else { parse_list(args)? };
    let d = match (kind, v.as_slice()) {
        ("disk", []) => Ok(PlanarDomain::disk()),
        ("annulus", [q]) => PlanarDomain::annulus(*q),
        ("pants", [w, q1, q2]) => PlanarDomain::pants(*w, *q1, *q2),
        _ => return Err(format!("--domain takes disk, annulus:q or pants:w,q1,q2, got {s:?}")),
    };
    d.map_err(|e| e.to_string())
}

/// `lo..hi` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let bad = || format!("not a range: {s:?} (expected lo..hi)");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.parse().map_err(|_| bad())?, b.trim_start_matches('=').parse().map_err(|_| bad())?),
        None => {
            let x = s.parse().map_err(|_| bad())?;
            (x, x)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Everything a run depends on, embedded verbatim in its report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub target: String,
    pub cutoff: Option<HalfInt>,
    pub band: i64,
    pub fourier: usize,
    pub grid: usize,
    pub moduli: ModuliPoint,
    pub annulus: AnnulusPoint,
    pub domain: String,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub timing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRanges>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRanges {
    pub bands: (i64, i64),
    pub grids: Vec<usize>,
    pub cutoffs: Vec<HalfInt>,
    pub ws: Vec<f64>,
    pub qs: Vec<f64>,
}
