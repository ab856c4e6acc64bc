//! Loss sequences the learners are evaluated on.
//!
//! Every environment implements two traits. [`LossProcess`] is the bandit
//! view: loss values only. [`DiagnosticGradient`] exposes exact gradients and
//! is consumed by the metrics layer (and by explicitly non-admissible
//! diagnostic predictors); the learners in [`crate::algorithms`] only ever
//! receive a `&dyn LossProcess`.
//!
//! All per-round randomness (noise offsets, signs, centre paths) is drawn when
//! the environment is built, so the two queries of a two-point round at the
//! same round index see the same realisation.

mod barrier;
mod custom;
mod linear;
mod nonsmooth;
mod quadratic;
mod smooth;

pub use barrier::{make_single_point_barrier, SinglePointBarrier};
pub use custom::CustomProcess;
pub use linear::{make_linear_rademacher, FixedLinear, LinearRademacher};
pub use nonsmooth::{make_piecewise_nonsmooth, PiecewiseNonsmooth};
pub use quadratic::{make_dynamic_drift, make_quadratic_drift, QuadraticDrift};
pub use smooth::LogSumExp;

use serde::Serialize;

use crate::geometry::ConvexDomain;
use crate::rng::{Purpose, Streams};
use crate::Vector;

/// Bandit view of a loss sequence.
pub trait LossProcess: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of rounds the sequence is defined for.
    fn horizon(&self) -> usize;

    /// `f_t(x)`.
    fn eval(&self, x: &Vector, t: usize) -> f64;

    /// Declared Lipschitz constant `L` over the domain it was built for.
    fn lipschitz(&self) -> f64;

    /// Declared smoothness `β`; `None` when the losses are not smooth.
    fn smoothness(&self) -> Option<f64>;
}

/// Exact gradients. Diagnostic only.
pub trait DiagnosticGradient {
    fn gradient(&self, x: &Vector, t: usize) -> Vector;
}

/// A complete environment: bandit view, diagnostics and comparator knowledge.
pub trait Environment: LossProcess + DiagnosticGradient {
    fn descriptor(&self) -> EnvDescriptor;

    /// Closed-form minimiser of `Σ_{t<horizon} f_t` over `domain`, if known.
    fn analytic_minimizer(&self, _domain: &ConvexDomain, _horizon: usize) -> Option<Vector> {
        None
    }

    /// Per-round comparator sequence for dynamic regret, if the environment has one.
    fn dynamic_comparator(&self) -> Option<&[Vector]> {
        None
    }

    /// Zero-predictor prediction error `Σ‖∇f_t‖²` when it is a known constant.
    fn nominal_prediction_error(&self) -> Option<f64> {
        None
    }

    /// `f_t` does not depend on `t`.
    fn stationary(&self) -> bool {
        false
    }
}

/// What was run: kind, parameters, and the seed needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvDescriptor {
    pub kind: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

/// Best fixed point and (optionally) a comparator sequence.
#[derive(Debug, Clone)]
pub struct ComparatorOracle {
    pub static_opt: Vector,
    pub dynamic_seq: Option<Vec<Vector>>,
    /// Gradient-mapping norm of `static_opt` on the cumulative loss.
    pub residual: f64,
    pub analytic: bool,
    /// Set when the numeric solver did not reach the optimality threshold.
    pub warning: Option<String>,
}

/// Iterations of the numeric fallback in [`solve_static_comparator`].
pub const COMPARATOR_ITERS: usize = 10_000;

/// Minimiser of the cumulative loss over the first `horizon` rounds.
///
/// Uses the environment's closed form when available, otherwise projected
/// gradient descent on `Σ f_t` from `0` with step `1/(βT + 1)`. A final
/// gradient-mapping residual above `1e−5·L·T` attaches a warning instead of
/// failing.
pub fn solve_static_comparator(env: &dyn Environment, domain: &ConvexDomain, horizon: usize) -> ComparatorOracle {
    let dynamic_seq = env.dynamic_comparator().map(|s| s[..horizon.min(s.len())].to_vec());
    let threshold = 1e-5 * env.lipschitz().max(f64::MIN_POSITIVE) * horizon as f64;
    let beta = env.smoothness().unwrap_or_else(|| env.lipschitz());
    let step = 1.0 / (beta * horizon as f64 + 1.0);

    if let Some(x) = env.analytic_minimizer(domain, horizon) {
        let residual = gradient_mapping(env, domain, &x, horizon, step);
        return ComparatorOracle { static_opt: x, dynamic_seq, residual, analytic: true, warning: None };
    }

    let mut x = Vector::zeros(domain.dim());
    for _ in 0..COMPARATOR_ITERS {
        let g = cumulative_gradient(env, &x, horizon);
        x = domain.project_raw(&(&x - g * step));
    }
    let residual = gradient_mapping(env, domain, &x, horizon, step);
    let warning = (residual > threshold).then(|| {
        format!("static comparator did not converge: optimality residual {residual:.3e} > {threshold:.3e}")
    });
    ComparatorOracle { static_opt: x, dynamic_seq, residual, analytic: false, warning }
}

fn cumulative_gradient(env: &dyn Environment, x: &Vector, horizon: usize) -> Vector {
    if env.stationary() {
        env.gradient(x, 0) * horizon as f64
    } else {
        (0..horizon).fold(Vector::zeros(x.len()), |acc, t| acc + env.gradient(x, t))
    }
}

fn gradient_mapping(env: &dyn Environment, domain: &ConvexDomain, x: &Vector, horizon: usize, step: f64) -> f64 {
    let g = cumulative_gradient(env, x, horizon);
    (x - domain.project_raw(&(x - g * step))).norm() / step
}

/// Worst observed ratios when probing the declared constants of an environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantCertificate {
    pub probes: usize,
    /// `max |f(x) − f(y)| / (L‖x − y‖)`; must not exceed 1.
    pub lipschitz_ratio: f64,
    /// `max ‖∇f(x) − ∇f(y)‖ / (β‖x − y‖)`; must not exceed 1. Zero if not smooth.
    pub smoothness_ratio: f64,
    /// Largest deviation of the diagnostic gradient from central differences.
    pub finite_difference_error: f64,
}

impl ConstantCertificate {
    /// Relative slack allowed on the Lipschitz and smoothness ratios.
    pub const RELATIVE_TOL: f64 = 1e-7;
    pub const FD_STEP: f64 = 1e-5;
    pub const FD_TOL: f64 = 1e-5;

    pub fn holds(&self) -> bool {
        self.lipschitz_ratio <= 1.0 + Self::RELATIVE_TOL
            && self.smoothness_ratio <= 1.0 + Self::RELATIVE_TOL
            && self.finite_difference_error <= Self::FD_TOL
    }
}

/// Probe `(L, β)` and the diagnostic gradient on random feasible pairs.
pub fn certify_constants(env: &dyn Environment, domain: &ConvexDomain, probes: usize, seed: u64) -> ConstantCertificate {
    let streams = Streams::new(seed);
    let horizon = env.horizon().max(1);
    let lip = env.lipschitz();
    let mut cert = ConstantCertificate { probes, lipschitz_ratio: 0.0, smoothness_ratio: 0.0, finite_difference_error: 0.0 };
    let h = ConstantCertificate::FD_STEP;
    for k in 0..probes as u64 {
        let mut rng = streams.rng(Purpose::Probe, k);
        let t = (rand::Rng::random_range(&mut rng, 0..horizon as u64)) as usize;
        let x = domain.sample_point(&mut rng);
        let y = domain.sample_point(&mut rng);
        let dist = (&x - &y).norm();
        if dist == 0.0 {
            continue;
        }
        let df = (env.eval(&x, t) - env.eval(&y, t)).abs();
        let ratio = if lip > 0.0 { df / (lip * dist) } else if df == 0.0 { 0.0 } else { f64::INFINITY };
        cert.lipschitz_ratio = cert.lipschitz_ratio.max(ratio);
        if let Some(beta) = env.smoothness() {
            let dg = (env.gradient(&x, t) - env.gradient(&y, t)).norm();
            let ratio = if beta > 0.0 { dg / (beta * dist) } else if dg <= 1e-12 { 0.0 } else { f64::INFINITY };
            cert.smoothness_ratio = cert.smoothness_ratio.max(ratio);

            let g = env.gradient(&x, t);
            let scale = 1.0 + g.norm();
            for i in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (env.eval(&xp, t) - env.eval(&xm, t)) / (2.0 * h);
                cert.finite_difference_error = cert.finite_difference_error.max((fd - g[i]).abs() / scale);
            }
        }
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_comparator_matches_first_order_optimality() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        let env = LogSumExp::new(3, 2.0, 50);
        let c = solve_static_comparator(&env, &domain, 50);
        assert!(!c.analytic);
        assert!(c.warning.is_none(), "{:?}", c.warning);
        // ⟨∇F(x*), x − x*⟩ ≥ −1e−6 for feasible x
        let g = env.gradient(&c.static_opt, 0) * 50.0;
        let streams = Streams::new(3);
        for k in 0..100 {
            let x = domain.sample_point(&mut streams.rng(Purpose::Probe, k));
            assert!(g.dot(&(x - &c.static_opt)) >= -1e-6);
        }
    }

    #[test]
    fn zero_losses_give_origin_comparator() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let env = make_linear_rademacher(&domain, 10, 0.0, 1.0, 4).unwrap();
        let c = solve_static_comparator(&env, &domain, 10);
        assert_eq!(c.static_opt, Vector::zeros(2));
    }
}
