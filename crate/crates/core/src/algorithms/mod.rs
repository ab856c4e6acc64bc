//! The learners.
//!
//! Every learner plays on the shrunken set `X_α = (1−α)X` with `α = δ/r`, so
//! both queries `y_t ± δv_t` stay in `X`. Loss is charged at
//! `x_t = y_t + δv_t`; the mirrored query is never charged.
//!
//! Learners only see the environment through a [`Bandit`], which exposes loss
//! values and counts queries. Regret, prediction error and invariant checks
//! are accounted for by the run driver using the environment's diagnostics.

mod baselines;
mod coordinate;
mod doubling;
mod meta;
mod session;
mod tp_vr_opt;

pub use baselines::{run_baseline_single_point, run_baseline_two_point};
pub use coordinate::run_coordinate_variant;
pub use doubling::{run_tp_vr_opt_plus, DoublingEvent, DoublingSchedule};
pub use meta::{aggregation_weights, run_tp_vr_opt_pp, ExpertGrid};
pub use tp_vr_opt::{run_tp_vr_opt, step_tp_vr_opt, OptimisticStep};

use serde::Serialize;

use crate::environments::{ComparatorOracle, Environment, LossProcess};
use crate::error::{Error, Result};
use crate::geometry::ConvexDomain;
use crate::metrics::RunReport;
use crate::predictors::PredictorKind;
use crate::Vector;

/// Lower clamp on tuned perturbation radii.
pub const MIN_DELTA: f64 = 1e-12;

/// Fixed step size and perturbation radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticParams {
    pub eta: f64,
    pub delta: f64,
    /// `δ/r`.
    pub alpha: f64,
}

impl StaticParams {
    /// Requires `η ≥ 0` and `0 < δ < r`.
    pub fn new(eta: f64, delta: f64, in_radius: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("step size eta must be finite and nonnegative, got {eta}")));
        }
        if !(delta > 0.0 && delta < in_radius) {
            return Err(Error::InvalidConfig(format!(
                "perturbation radius delta = {delta} must satisfy 0 < delta < r = {in_radius}"
            )));
        }
        Ok(Self { eta, delta, alpha: delta / in_radius })
    }
}

/// `min{a/β, b/β, r/2}` with the `β`-branches dropped when `β = 0`.
fn perturbation_radius(beta: f64, smooth_terms: [f64; 2], in_radius: f64) -> f64 {
    let mut delta = in_radius / 2.0;
    if beta > 0.0 {
        for term in smooth_terms {
            delta = delta.min(term / beta);
        }
    }
    delta.max(MIN_DELTA)
}

fn check_tuning_inputs(diameter: f64, dim: usize, sensitivity: f64, horizon: usize, beta: f64, in_radius: f64) -> Result<()> {
    let ok = diameter > 0.0
        && dim > 0
        && sensitivity >= 0.0
        && horizon > 0
        && beta >= 0.0
        && in_radius > 0.0
        && [diameter, sensitivity, beta, in_radius].iter().all(|x| x.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "tuning needs D > 0, d > 0, S >= 0, T > 0, beta >= 0, r > 0; got D={diameter}, d={dim}, S={sensitivity}, T={horizon}, beta={beta}, r={in_radius}"
        )))
    }
}

/// Oracle tuning for static regret given a prediction-error level `S̄`.
///
/// `η = D/√(8d(S̄+1))`, `δ = min{√(S̄+1)/(dβT), 1/(β√T), r/2}`.
pub fn tune_static(
    diameter: f64,
    dim: usize,
    sensitivity: f64,
    horizon: usize,
    beta: f64,
    in_radius: f64,
) -> Result<StaticParams> {
    check_tuning_inputs(diameter, dim, sensitivity, horizon, beta, in_radius)?;
    let d = dim as f64;
    let t = horizon as f64;
    let eta = diameter / (8.0 * d * (sensitivity + 1.0)).sqrt();
    let delta = perturbation_radius(beta, [(sensitivity + 1.0).sqrt() / (d * t), 1.0 / t.sqrt()], in_radius);
    Ok(StaticParams { eta, delta, alpha: delta / in_radius })
}

/// Oracle tuning for dynamic regret against comparators of path length `P`.
///
/// `η = √((D² + 2DP)/(8d(S̄+1)))` and the same `δ` as [`tune_static`].
pub fn tune_dynamic(
    diameter: f64,
    dim: usize,
    sensitivity: f64,
    path_length: f64,
    horizon: usize,
    beta: f64,
    in_radius: f64,
) -> Result<StaticParams> {
    if !(path_length >= 0.0 && path_length.is_finite()) {
        return Err(Error::InvalidConfig(format!("path length must be nonnegative, got {path_length}")));
    }
    let base = tune_static(diameter, dim, sensitivity, horizon, beta, in_radius)?;
    let eta = (diameter * diameter + 2.0 * diameter * path_length).sqrt() / (8.0 * dim as f64 * (sensitivity + 1.0)).sqrt();
    Ok(StaticParams { eta, ..base })
}

/// Tuning of the coordinate variant from a gradient-variation level `D_T`.
///
/// `η = min{D/(4d²√(D_T+1)), 1/(16βd^{3/2}√(log T))}`,
/// `δ = min{√(D_T+1)/(βT), 1/(β√T), r/2}`.
pub fn tune_coordinate(
    diameter: f64,
    dim: usize,
    variation: f64,
    horizon: usize,
    beta: f64,
    in_radius: f64,
) -> Result<StaticParams> {
    check_tuning_inputs(diameter, dim, variation, horizon, beta, in_radius)?;
    let d = dim as f64;
    let t = horizon as f64;
    let mut eta = diameter / (4.0 * d * d * (variation + 1.0).sqrt());
    let log_t = t.ln();
    if beta > 0.0 && log_t > 0.0 {
        eta = eta.min(1.0 / (16.0 * beta * d.powf(1.5) * log_t.sqrt()));
    }
    let delta = perturbation_radius(beta, [(variation + 1.0).sqrt() / t, 1.0 / t.sqrt()], in_radius);
    Ok(StaticParams { eta, delta, alpha: delta / in_radius })
}

/// Query-counting bandit view of a loss sequence.
pub struct Bandit<'a> {
    process: &'a dyn LossProcess,
    queries: usize,
}

impl<'a> Bandit<'a> {
    pub fn new(process: &'a dyn LossProcess) -> Self {
        Self { process, queries: 0 }
    }

    pub fn dim(&self) -> usize {
        self.process.dim()
    }

    pub fn lipschitz(&self) -> f64 {
        self.process.lipschitz()
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.process.smoothness()
    }

    /// `f_t(x)`. Non-finite values abort the run.
    pub fn query(&mut self, x: &Vector, t: usize) -> Result<f64> {
        self.queries += 1;
        let value = self.process.eval(x, t);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation { round: t, reason: format!("loss evaluated to {value}") })
        }
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

/// What ran, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmDescriptor {
    pub kind: String,
    pub predictor: Option<PredictorKind>,
    pub params: serde_json::Value,
}

/// Per-round log entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub phase: Option<usize>,
    pub epoch: Option<usize>,
    pub y: Vec<f64>,
    /// The charged point `x_t`.
    pub x: Vec<f64>,
    pub direction: Option<Vec<f64>>,
    pub coordinate: Option<usize>,
    /// Loss values returned by the bandit, in query order.
    pub observations: Vec<f64>,
    pub hint: Vec<f64>,
    pub g_hat: Vec<f64>,
    pub residual_sq: f64,
    pub loss: f64,
    pub eta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Keep a [`RoundRecord`] for every round.
    pub trace: bool,
    /// Check the one-step inequality and the Hedge bound every round.
    pub debug_assert: bool,
}

/// Everything a run needs besides the learner.
#[derive(Clone, Copy)]
pub struct RunSpec<'a> {
    pub env: &'a dyn Environment,
    pub domain: &'a ConvexDomain,
    pub comparator: &'a ComparatorOracle,
    pub horizon: usize,
    pub seed: u64,
    pub options: RunOptions,
}

/// Algorithm choice with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    TpVrOpt { predictor: PredictorKind, params: StaticParams },
    TpVrOptPlus { predictor: PredictorKind },
    TpVrOptPlusPlus { predictor: PredictorKind },
    Coordinate { params: StaticParams },
    TwoPointBaseline { params: StaticParams },
    SinglePointBaseline { params: StaticParams },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::TpVrOpt { .. } => "tp_vr_opt",
            Algorithm::TpVrOptPlus { .. } => "tp_vr_opt_plus",
            Algorithm::TpVrOptPlusPlus { .. } => "tp_vr_opt_pp",
            Algorithm::Coordinate { .. } => "coordinate",
            Algorithm::TwoPointBaseline { .. } => "two_point_ogd",
            Algorithm::SinglePointBaseline { .. } => "single_point_fkm",
        }
    }

    pub fn run(&self, spec: &RunSpec<'_>) -> Result<RunReport> {
        match *self {
            Algorithm::TpVrOpt { predictor, params } => run_tp_vr_opt(spec, predictor, params),
            Algorithm::TpVrOptPlus { predictor } => run_tp_vr_opt_plus(spec, predictor),
            Algorithm::TpVrOptPlusPlus { predictor } => run_tp_vr_opt_pp(spec, predictor),
            Algorithm::Coordinate { params } => run_coordinate_variant(spec, params),
            Algorithm::TwoPointBaseline { params } => run_baseline_two_point(spec, params),
            Algorithm::SinglePointBaseline { params } => run_baseline_single_point(spec, params),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_tuning_examples() {
        let p = tune_static(2.0, 4, 31.0, 100, 1.0, 1.0).unwrap();
        assert!((p.eta - 0.0625).abs() < 1e-15);
        assert!((p.delta - 32f64.sqrt() / 400.0).abs() < 1e-15);
        assert!((p.delta - 0.014142).abs() < 1e-6);
        let p = tune_static(1.0, 4, 0.0, 4, 1.0, 0.01).unwrap();
        assert_eq!(p.delta, 0.005);
        assert_eq!(p.alpha, 0.5);
    }

    #[test]
    fn zero_smoothness_uses_half_radius() {
        let p = tune_static(2.0, 3, 10.0, 1000, 0.0, 0.8).unwrap();
        assert_eq!(p.delta, 0.4);
    }

    #[test]
    fn dynamic_tuning_examples() {
        let s = tune_static(1.5, 3, 7.0, 50, 2.0, 0.5).unwrap();
        let d0 = tune_dynamic(1.5, 3, 7.0, 0.0, 50, 2.0, 0.5).unwrap();
        assert_eq!(s, d0);
        let p = tune_dynamic(1.0, 2, 0.0, 3.0, 10, 1.0, 1.0).unwrap();
        assert!((p.eta - (7.0f64 / 16.0).sqrt()).abs() < 1e-15);
        assert!((p.eta - 0.6614).abs() < 1e-4);
        let p2 = tune_dynamic(1.0, 2, 0.0, 6.0, 10, 1.0, 1.0).unwrap();
        assert!(p2.eta > p.eta);
    }

    #[test]
    fn coordinate_tuning_caps() {
        let p = tune_coordinate(2.0, 2, 0.0, 100, 0.0, 1.0).unwrap();
        assert_eq!(p.eta, 2.0 / 16.0);
        assert_eq!(p.delta, 0.5);
        let p = tune_coordinate(2.0, 2, 0.0, 100, 10.0, 1.0).unwrap();
        let cap = 1.0 / (160.0 * 2f64.powf(1.5) * 100f64.ln().sqrt());
        assert_eq!(p.eta, cap);
        assert_eq!(p.delta, (1.0f64 / 1000.0).min(0.01));
    }

    #[test]
    fn params_validation() {
        assert!(StaticParams::new(0.1, 1.0, 1.0).is_err());
        assert!(StaticParams::new(0.1, 0.0, 1.0).is_err());
        assert!(StaticParams::new(-0.1, 0.5, 1.0).is_err());
        let p = StaticParams::new(0.0, 0.25, 1.0).unwrap();
        assert_eq!(p.alpha, 0.25);
    }
}
