//! Regret, prediction error, path length and scaling-exponent fits.

use rand::Rng;
use serde::Serialize;

use crate::algorithms::{AlgorithmDescriptor, RoundRecord};
use crate::environments::{DiagnosticGradient, EnvDescriptor, LossProcess};
use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, FEASIBILITY_TOL};
use crate::rng::{Purpose, Streams};
use crate::Vector;

/// Version of the [`RunReport`] JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Bootstrap resamples used by [`fit_scaling_exponent`].
pub const BOOTSTRAP_RESAMPLES: usize = 1_000;

/// `Σ_t f_t(x_t) − Σ_t f_t(x*)` on the realised sequence.
pub fn static_regret(env: &dyn LossProcess, played: &[Vector], comparator: &Vector) -> f64 {
    played
        .iter()
        .enumerate()
        .map(|(t, x)| env.eval(x, t) - env.eval(comparator, t))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicRegret {
    pub regret: f64,
    pub path_length: f64,
}

/// `Σ_t (f_t(x_t) − f_t(u_t))` together with `P_T(u)`.
pub fn dynamic_regret(
    env: &dyn LossProcess,
    domain: &ConvexDomain,
    played: &[Vector],
    comparators: &[Vector],
) -> Result<DynamicRegret> {
    if comparators.len() != played.len() {
        return Err(Error::InvalidInput(format!(
            "comparator sequence has {} entries for {} rounds",
            comparators.len(),
            played.len()
        )));
    }
    check_feasible_sequence(domain, comparators)?;
    let regret = played
        .iter()
        .zip(comparators)
        .enumerate()
        .map(|(t, (x, u))| env.eval(x, t) - env.eval(u, t))
        .sum();
    Ok(DynamicRegret { regret, path_length: path_length(comparators) })
}

pub(crate) fn check_feasible_sequence(domain: &ConvexDomain, seq: &[Vector]) -> Result<()> {
    match seq.iter().position(|u| !domain.contains(u, FEASIBILITY_TOL)) {
        Some(t) => Err(Error::InvalidInput(format!("comparator entry {t} lies outside the domain"))),
        None => Ok(()),
    }
}

/// `S_T = Σ_t ‖∇f_t(x_t) − m_t‖²`.
pub fn prediction_error(env: &dyn DiagnosticGradient, played: &[Vector], hints: &[Vector]) -> Result<f64> {
    if hints.len() != played.len() {
        return Err(Error::InvalidInput(format!("{} hints for {} rounds", hints.len(), played.len())));
    }
    Ok(played
        .iter()
        .zip(hints)
        .enumerate()
        .map(|(t, (x, m))| (env.gradient(x, t) - m).norm_squared())
        .sum())
}

/// `P_T = Σ_{t≥1} ‖u_t − u_{t−1}‖`. Zero for sequences of length below 2.
pub fn path_length(seq: &[Vector]) -> f64 {
    seq.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares fit of `log y = a + b log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% percentile bootstrap interval for the slope.
    pub ci_low: f64,
    pub ci_high: f64,
}

fn ols(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Log-log slope of `y` against `x` with a nonparametric bootstrap interval.
///
/// Needs at least three points with positive coordinates and two distinct `x`.
pub fn fit_scaling_exponent(points: &[(f64, f64)], seed: u64) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!("scaling fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::InvalidInput(format!("scaling fit needs positive values, got ({}, {})", p.0, p.1)));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
    let (slope, intercept) =
        ols(&logs).ok_or_else(|| Error::InvalidInput("scaling fit needs two distinct x values".into()))?;

    let mut rng = Streams::new(seed).rng(Purpose::Bootstrap, 0);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut sample = Vec::with_capacity(logs.len());
    while slopes.len() < BOOTSTRAP_RESAMPLES {
        sample.clear();
        sample.extend((0..logs.len()).map(|_| logs[rng.random_range(0..logs.len())]));
        // degenerate resamples with a single distinct x carry no slope information
        if let Some((s, _)) = ols(&sample) {
            slopes.push(s);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let at = |q: f64| slopes[((q * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
    Ok(ScalingFit { slope, intercept, ci_low: at(0.025), ci_high: at(0.975) })
}

/// Counts of checked per-round and per-epoch invariants.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantTally {
    /// Rounds where `‖ĝ_t − m_t‖ ≤ 2dL` was checked.
    pub estimator_bound_checked: usize,
    pub estimator_bound_violations: usize,
    /// Largest `‖ĝ_t − m_t‖ / (2dL)` seen.
    pub estimator_bound_max_ratio: f64,
    pub infeasible_queries: usize,
    pub one_step_checked: usize,
    pub one_step_violations: usize,
    /// Largest `lhs − rhs` of the one-step inequality (before tolerance).
    pub one_step_max_excess: f64,
    pub hedge_checked: usize,
    pub hedge_violations: usize,
    /// Largest `|Σ p_i − 1|` over all rounds.
    pub weight_sum_max_deviation: f64,
    /// Largest negative entry of any aggregation distribution (0 if none).
    pub weight_min: f64,
    pub epoch_budget_violations: usize,
    pub phase_budget_violations: usize,
}

impl InvariantTally {
    pub fn total_violations(&self) -> usize {
        self.estimator_bound_violations
            + self.infeasible_queries
            + self.one_step_violations
            + self.hedge_violations
            + self.epoch_budget_violations
            + self.phase_budget_violations
    }
}

/// One phase of a doubling schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub phase: usize,
    /// Time budget `H` of the phase.
    pub budget: usize,
    /// Rounds actually played (shorter than `budget` for a truncated last phase).
    pub rounds: usize,
    pub epochs: usize,
    /// `S_min`.
    pub initial_sensitivity: f64,
    pub final_sensitivity: f64,
    /// `Σ ‖ĝ_t − m_t‖²` over the phase.
    pub residual_observed: f64,
    /// Prediction error restricted to the phase.
    pub prediction_error: f64,
}

/// Result of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub env: EnvDescriptor,
    pub algorithm: AlgorithmDescriptor,
    pub seed: u64,
    pub horizon: usize,
    pub static_regret: f64,
    pub dynamic_regret: Option<f64>,
    pub path_length: Option<f64>,
    /// `Σ ‖∇f_t(x_t) − m_t‖²`.
    pub prediction_error: f64,
    /// `Σ ‖ĝ_t − m_t‖²`, the learner-observable proxy of `prediction_error`.
    pub residual_sum: f64,
    /// `Σ ‖∇f_t(x_t) − ∇f_{t−1}(x_t)‖²`, a gradient-variation proxy measured along the path.
    pub gradient_variation: f64,
    pub cumulative_loss: f64,
    pub comparator_loss: f64,
    pub queries: usize,
    /// False when the hints used exact gradients.
    pub admissible_predictor: bool,
    pub comparator_warning: Option<String>,
    pub phases: Vec<PhaseSummary>,
    pub invariants: InvariantTally,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<RoundRecord>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{make_dynamic_drift, Environment, FixedLinear, QuadraticDrift};
    use crate::environments::CustomProcess;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn static_regret_examples() {
        let env = FixedLinear::new(v(&[1.0]), 1);
        assert_eq!(static_regret(&env, &[v(&[0.0])], &v(&[-1.0])), 1.0);
        assert_eq!(static_regret(&env, &[v(&[-1.0])], &v(&[-1.0])), 0.0);
        let zero = CustomProcess::constant(2, 3, 0.0);
        assert_eq!(static_regret(&zero, &vec![v(&[0.3, 0.1]); 3], &v(&[0.0, 0.0])), 0.0);
    }

    #[test]
    fn dynamic_regret_examples() {
        let domain = ConvexDomain::ball(2, 2.0).unwrap();
        let centers = vec![v(&[1.0, 0.0]), v(&[0.0, 0.5])];
        let env = QuadraticDrift::from_centers(&domain, 1.0, centers.clone()).unwrap();
        let played = vec![Vector::zeros(2); 2];
        let dr = dynamic_regret(&env, &domain, &played, &centers).unwrap();
        assert!((dr.regret - (0.5 + 0.125)).abs() < 1e-15);
        assert!((dr.path_length - (1.25f64).sqrt()).abs() < 1e-15);

        let same = dynamic_regret(&env, &domain, &centers, &centers).unwrap();
        assert_eq!(same.regret, 0.0);

        let u = v(&[0.2, 0.2]);
        let constant = dynamic_regret(&env, &domain, &played, &[u.clone(), u.clone()]).unwrap();
        assert!((constant.regret - static_regret(&env, &played, &u)).abs() < 1e-15);

        let outside = vec![v(&[3.0, 0.0]), v(&[0.0, 0.0])];
        assert!(matches!(dynamic_regret(&env, &domain, &played, &outside), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn prediction_error_with_perfect_hints() {
        let g = v(&[0.3, -0.4]);
        let env = FixedLinear::new(g.clone(), 5);
        let played = vec![v(&[0.1, 0.2]); 5];
        assert_eq!(prediction_error(&env, &played, &vec![g.clone(); 5]).unwrap(), 0.0);
        assert!((prediction_error(&env, &played, &vec![Vector::zeros(2); 5]).unwrap() - 5.0 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn path_length_examples() {
        assert_eq!(path_length(&[v(&[1.0, 2.0])]), 0.0);
        assert_eq!(path_length(&vec![v(&[1.0]); 5]), 0.0);
        let a = v(&[0.0, 0.0]);
        let b = v(&[1.0, 0.0]);
        assert_eq!(path_length(&[a.clone(), b.clone(), a, b]), 3.0);
    }

    #[test]
    fn drift_environment_path_length_is_additive() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        let env = make_dynamic_drift(&domain, 50, 4.0, 1.0, 0.5, 3).unwrap();
        let seq = env.dynamic_comparator().unwrap();
        let split = path_length(&seq[..20]) + (&seq[20] - &seq[19]).norm() + path_length(&seq[20..]);
        assert!((split - path_length(seq)).abs() < 1e-12);
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = [1.0, 4.0, 16.0, 64.0].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
        let fit = fit_scaling_exponent(&pts, 1).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-9);
        let flat: Vec<(f64, f64)> = [1.0, 2.0, 5.0].iter().map(|&x| (x, 7.0)).collect();
        assert!(fit_scaling_exponent(&flat, 1).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = Streams::new(9).rng(Purpose::Other(1), 0);
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|k| {
                let x = 2f64.powi(k);
                (x, x.powf(0.7) * (1.0 + 0.05 * rng.random_range(-1.0..1.0)))
            })
            .collect();
        let fit = fit_scaling_exponent(&pts, 2).unwrap();
        assert!((0.6..=0.8).contains(&fit.slope), "{fit:?}");
        assert!(fit.ci_low <= fit.slope && fit.slope <= fit.ci_high);
    }

    #[test]
    fn fit_preconditions() {
        assert!(fit_scaling_exponent(&[(1.0, 1.0), (2.0, 2.0)], 0).is_err());
        assert!(fit_scaling_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)], 0).is_err());
        assert!(fit_scaling_exponent(&[(-1.0, 1.0), (2.0, 1.0), (3.0, 1.0)], 0).is_err());
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
