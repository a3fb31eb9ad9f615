use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value <= tolerance`; `--tolerance` replaces the tolerance.
    Residual,
    /// Passes when `value <= tolerance`; fixed by the check.
    AtMost,
    /// Passes when `value >= tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    #[serde(serialize_with = "float")]
    pub value: f64,
    #[serde(serialize_with = "float")]
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Debug)]
pub struct Checks {
    suite: String,
    override_tol: Option<f64>,
    pub list: Vec<Check>,
}

impl Checks {
    pub fn new(suite: &str, override_tol: Option<f64>) -> Self {
        Checks { suite: suite.into(), override_tol, list: Vec::new() }
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64, bound: Bound) {
        let passed = match bound {
            Bound::Residual | Bound::AtMost => value <= tolerance,
            Bound::AtLeast => value >= tolerance,
        };
        self.list.push(Check { suite: self.suite.clone(), name: name.into(), value, tolerance, bound, passed });
    }

    pub fn residual(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, self.override_tol.unwrap_or(tolerance), Bound::Residual);
    }

    pub fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, limit, Bound::AtMost);
    }

    pub fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, limit, Bound::AtLeast);
    }

    /// A boolean condition, recorded as `0` (holds) or `1` against tolerance `0`.
    pub fn holds(&mut self, name: &str, ok: bool) {
        self.push(name, if ok { 0.0 } else { 1.0 }, 0.0, Bound::AtMost);
    }

    /// Records an error from the computation as a failed check.
    pub fn error(&mut self, name: &str, err: impl std::fmt::Display) {
        self.list.push(Check {
            suite: self.suite.clone(),
            name: format!("{name}: {err}"),
            value: f64::NAN,
            tolerance: 0.0,
            bound: Bound::AtMost,
            passed: false,
        });
    }
}

#[derive(Serialize)]
pub struct VerifyReport<'a> {
    pub schema: u32,
    pub config: &'a RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub records: serde_json::Map<String, Value>,
}

#[derive(Serialize)]
pub struct SweepReport<'a, R: Serialize> {
    pub schema: u32,
    pub config: &'a RunConfig,
    pub rows: &'a [R],
}

pub fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("report serializes")
}

/// Writes non-finite numbers as the strings `inf`, `-inf` and `nan` instead of `null`.
pub fn float<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&x.to_string().to_lowercase())
    }
}
