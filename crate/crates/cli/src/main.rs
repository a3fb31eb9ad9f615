mod config;
mod report;
mod suites;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fermion_cft::surfaces::{AnnulusPoint, ModuliPoint};
use fermion_cft::{HalfInt, Sector};
use num_complex::Complex64;
use serde::Serialize;

use config::{parse_annulus, parse_cutoff, parse_domain, parse_moduli, parse_range, RunConfig, SweepRanges};
use report::{to_json, SweepReport, VerifyReport, SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "fermion-cft", version, about = "Verification suites and convergence sweeps for the free-fermion CFT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Energy cutoff, a half-integer written as p/2 or as an integer.
    #[arg(long, global = true, value_parser = parse_cutoff)]
    cutoff: Option<HalfInt>,
    /// Band radius of the pants series.
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(i64).range(1..=64))]
    band: i64,
    /// Fourier order of the pants Hardy elements (default 8 * band).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=4096))]
    fourier: Option<u64>,
    /// Samples per boundary circle.
    #[arg(long, global = true, default_value_t = 256, value_parser = parse_grid)]
    grid: usize,
    /// Pants moduli w,q1,q1s,q2,q2s with complex numbers as re+imi.
    #[arg(long, global = true, value_parser = parse_moduli, allow_hyphen_values = true)]
    moduli: Option<ModuliPoint>,
    /// Annulus parameter q[,qs].
    #[arg(long, global = true, allow_hyphen_values = true)]
    annulus: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = SectorArg::Ns)]
    sector: SectorArg,
    /// Planar domain for the cauchy suite: disk, annulus:q or pants:w,q1,q2.
    #[arg(long, global = true, default_value = "annulus:0.5", allow_hyphen_values = true)]
    domain: String,
    /// Report path; `.csv` selects CSV for sweeps. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Replaces the tolerance of every residual check.
    #[arg(long, global = true, value_parser = parse_tolerance)]
    tolerance: Option<f64>,
    /// Include wall-clock runtimes in the report (which then differs between runs).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a module's verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Sweep a parameter family and tabulate the results.
    Sweep {
        #[arg(value_enum)]
        target: Target,
        /// Band radii for pants-convergence, as lo..hi.
        #[arg(long, default_value = "4..16", value_parser = parse_range)]
        bands: (i64, i64),
        /// Grid sizes for ks-decay.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256", value_parser = parse_grid)]
        grids: Vec<usize>,
        /// Cutoffs for nullspace-gap.
        #[arg(long, value_delimiter = ',', default_value = "1,3/2,2", value_parser = parse_cutoff)]
        cutoffs: Vec<HalfInt>,
        /// Values of w for pants-convergence.
        #[arg(long, value_delimiter = ',', default_value = "0.45,0.5,0.55")]
        ws: Vec<f64>,
        /// Values of q1 = q2 for pants-convergence.
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
        qs: Vec<f64>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SectorArg {
    Ns,
    R,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Fock,
    Car,
    Supertrace,
    Vertex,
    Surfaces,
    Cauchy,
    All,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Target {
    PantsConvergence,
    KsDecay,
    NullspaceGap,
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("not a grid size: {s:?}"))?;
    if n < 8 || n > 1024 || n % 2 != 0 {
        return Err(format!("grid size must be even and in 8..=1024, got {n}"));
    }
    Ok(n)
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

fn default_moduli() -> ModuliPoint {
    let r = Complex64::new(0.1f64.sqrt(), 0.0);
    ModuliPoint::from_roots(Complex64::new(0.5, 0.0), r, r).expect("default moduli are valid")
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let c = &cli.common;
    let sector = match c.sector {
        SectorArg::Ns => Sector::NS,
        SectorArg::R => Sector::R,
    };
    let annulus = match &c.annulus {
        Some(s) => parse_annulus(s, sector)?,
        None => match sector {
            Sector::NS => AnnulusPoint::ns(Complex64::new(0.5, 0.0)),
            Sector::R => AnnulusPoint::r(Complex64::new(0.25, 0.0)),
        }
        .map_err(|e| e.to_string())?,
    };
    parse_domain(&c.domain)?;
    let (command, target, sweep) = match &cli.command {
        Command::Verify { suite } => ("verify", format!("{suite:?}").to_lowercase(), None),
        Command::Sweep { target, bands, grids, cutoffs, ws, qs } => {
            if ws.is_empty() || qs.is_empty() || grids.is_empty() || cutoffs.is_empty() {
                return Err("sweep ranges must be nonempty".into());
            }
            if bands.0 < 1 {
                return Err("band radii start at 1".into());
            }
            let name = match target {
                Target::PantsConvergence => "pants-convergence",
                Target::KsDecay => "ks-decay",
                Target::NullspaceGap => "nullspace-gap",
            };
            (
                "sweep",
                name.to_string(),
                Some(SweepRanges { bands: *bands, grids: grids.clone(), cutoffs: cutoffs.clone(), ws: ws.clone(), qs: qs.clone() }),
            )
        }
    };
    Ok(RunConfig {
        command: command.into(),
        target,
        cutoff: c.cutoff,
        band: c.band,
        fourier: c.fourier.map_or(8 * c.band as usize, |f| f as usize),
        grid: c.grid,
        moduli: c.moduli.unwrap_or_else(default_moduli),
        annulus,
        domain: c.domain.clone(),
        seed: c.seed,
        tolerance: c.tolerance,
        timing: c.timing,
        sweep,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn csv_of<R: Serialize>(rows: &[R]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn sweep_output<R: Serialize>(cfg: &RunConfig, rows: &[R], csv: bool) -> Result<String, String> {
    if csv {
        csv_of(rows)
    } else {
        Ok(to_json(&SweepReport { schema: SCHEMA, config: cfg, rows }))
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    let cfg = resolve(cli)?;
    let out = cli.common.out.as_deref();
    match &cli.command {
        Command::Verify { suite } => {
            let names: Vec<&str> = match suite {
                Suite::All => suites::SUITES.to_vec(),
                _ => vec![suites::SUITES.iter().copied().find(|s| *s == cfg.target).expect("known suite")],
            };
            let mut checks = Vec::new();
            let mut records = serde_json::Map::new();
            for name in names {
                let r = suites::run(name, &cfg);
                checks.extend(r.checks.list);
                records.insert(name.into(), r.record);
            }
            let passed = checks.iter().all(|c| c.passed);
            for c in &checks {
                eprintln!("{} {}/{}: {:e} ({:?} {:e})", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.value, c.bound, c.tolerance);
            }
            emit(&to_json(&VerifyReport { schema: SCHEMA, config: &cfg, passed, checks, records }), out)?;
            Ok(passed)
        }
        Command::Sweep { .. } => {
            let csv = out.is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")));
            let text = match sweep::run(&cfg.target, &cfg).map_err(|e| e.to_string())? {
                sweep::Rows::Pants(r) => sweep_output(&cfg, &r, csv)?,
                sweep::Rows::Decay(r) => sweep_output(&cfg, &r, csv)?,
                sweep::Rows::Gap(r) => sweep_output(&cfg, &r, csv)?,
            };
            emit(&text, out)?;
            Ok(true)
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    use clap::CommandFactory;
    eprintln!("{}\n\n{}", msg.to_string().trim_end(), Cli::command().render_usage());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return usage_error(e),
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => usage_error(format!("error: {e}")),
    }
}
