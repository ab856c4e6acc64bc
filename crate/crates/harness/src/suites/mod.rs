//! Verification suites behind `bco verify <suite>`.
//!
//! Each suite returns a list of [`Check`]s: a measured value, the bound it
//! was held to, and whether it passed. The `acceptance` suite runs the
//! scaling experiments and takes minutes; the others take seconds.

use std::fmt;

use bco_core::algorithms::{Algorithm, RunOptions, RunSpec};
use bco_core::environments::{solve_static_comparator, Environment};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::RunReport;

pub mod algorithms;
pub mod environments;
pub mod estimators;
pub mod geometry;
pub mod metrics;
pub mod predictors;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable bound, e.g. `<= 0.01`.
    pub bound: String,
    pub pass: bool,
    pub note: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound: format!("<= {bound:e}"), pass: measured <= bound, note: String::new() }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound: format!(">= {bound:e}"), pass: measured >= bound, note: String::new() }
    }

    pub fn within(name: impl Into<String>, measured: f64, low: f64, high: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: format!("in [{low}, {high}]"),
            pass: measured >= low && measured <= high,
            note: String::new(),
        }
    }

    /// A count that must be zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        Self { name: name.into(), measured: count as f64, bound: "== 0".into(), pass: count == 0, note: String::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Conjunction with an extra condition, recorded in the note.
    pub fn and(mut self, ok: bool, what: impl fmt::Display) -> Self {
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(&what.to_string());
        self.pass &= ok;
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}: measured {:.6e}, bound {}", self.name, self.measured, self.bound)?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

pub const SUITES: [&str; 8] =
    ["geometry", "environments", "predictors", "estimators", "algorithms", "metrics", "acceptance", "all"];

/// Run a named suite; `None` if the name is unknown.
pub fn run_suite(name: &str) -> Option<Vec<Check>> {
    Some(match name {
        "geometry" => geometry::checks(),
        "environments" => environments::checks(),
        "predictors" => predictors::checks(),
        "estimators" => estimators::checks(),
        "algorithms" => algorithms::checks(),
        "metrics" => metrics::checks(),
        "acceptance" => crate::acceptance::all(),
        "all" => SUITES[..7].iter().flat_map(|s| run_suite(s).expect("registered suite")).collect(),
        _ => return None,
    })
}

/// Run `alg` on `env` with the exact (or numeric) static comparator.
pub fn run_once(
    env: &dyn Environment,
    domain: &ConvexDomain,
    alg: Algorithm,
    horizon: usize,
    seed: u64,
    options: RunOptions,
) -> RunReport {
    let comparator = solve_static_comparator(env, domain, horizon);
    let spec = RunSpec { env, domain, comparator: &comparator, horizon, seed, options };
    alg.run(&spec).unwrap_or_else(|e| panic!("{} failed on {}: {e}", alg.name(), env.descriptor().kind))
}
