//! Construction of domains, environments and learners from configuration.

use bco_core::algorithms::{tune_coordinate, tune_dynamic, tune_static, Algorithm, StaticParams};
use bco_core::environments::{
    make_dynamic_drift, make_linear_rademacher, make_piecewise_nonsmooth, make_quadratic_drift,
    make_single_point_barrier, ComparatorOracle, CustomProcess, Environment, FixedLinear, LogSumExp,
};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::path_length;
use bco_core::Vector;

use crate::config::{AlgorithmConfig, AlgorithmKind, Amount, DomainConfig, EnvConfig, Tuning};
use crate::HarnessError;

pub fn build_domain(cfg: &DomainConfig) -> Result<ConvexDomain, HarnessError> {
    let domain = match cfg {
        DomainConfig::Ball { dim, radius } => ConvexDomain::ball(*dim, *radius),
        DomainConfig::Box { half_widths } => ConvexDomain::boxed(half_widths.clone()),
    };
    domain.map_err(config_error)
}

pub fn build_env(
    cfg: &EnvConfig,
    domain: &ConvexDomain,
    horizon: usize,
    seed: u64,
) -> Result<Box<dyn Environment>, HarnessError> {
    let dim = domain.dim();
    let env: Box<dyn Environment> = match cfg {
        EnvConfig::Constant { value } => Box::new(CustomProcess::constant(dim, horizon, *value)),
        EnvConfig::FixedLinear { gradient } => {
            if gradient.len() != dim {
                return Err(HarnessError::Config(format!(
                    "fixed_linear gradient has {} entries, domain dimension is {dim}",
                    gradient.len()
                )));
            }
            Box::new(FixedLinear::new(Vector::from_column_slice(gradient), horizon))
        }
        EnvConfig::LinearRademacher { s_target, lipschitz_cap } => {
            Box::new(make_linear_rademacher(domain, horizon, *s_target, *lipschitz_cap, seed).map_err(config_error)?)
        }
        EnvConfig::QuadraticDrift { curvature, drift_rate, center_radius } => Box::new(
            make_quadratic_drift(domain, horizon, *drift_rate, *curvature, *center_radius, seed)
                .map_err(config_error)?,
        ),
        EnvConfig::DynamicDrift { curvature, path_budget, center_radius } => Box::new(
            make_dynamic_drift(domain, horizon, *path_budget, *curvature, *center_radius, seed)
                .map_err(config_error)?,
        ),
        EnvConfig::SinglePointBarrier { sigma, lipschitz_cap } => {
            Box::new(make_single_point_barrier(domain, horizon, *sigma, *lipschitz_cap, seed).map_err(config_error)?)
        }
        EnvConfig::LogSumExp { sharpness } => {
            if !(*sharpness > 0.0) {
                return Err(HarnessError::Config(format!("sharpness must be positive, got {sharpness}")));
            }
            Box::new(LogSumExp::new(dim, *sharpness, horizon))
        }
        EnvConfig::PiecewiseNonsmooth { lipschitz, delta } => {
            if dim != 1 {
                return Err(HarnessError::Config("piecewise_nonsmooth needs a 1-dimensional domain".into()));
            }
            Box::new(make_piecewise_nonsmooth(*lipschitz, *delta).map_err(config_error)?.with_horizon(horizon))
        }
    };
    Ok(env)
}

/// Resolve tuning inputs and hyperparameters into a runnable learner.
pub fn build_algorithm(
    cfg: &AlgorithmConfig,
    env: &dyn Environment,
    domain: &ConvexDomain,
    comparator: &ComparatorOracle,
    horizon: usize,
) -> Result<Algorithm, HarnessError> {
    let predictor = cfg.predictor_kind();
    let params = match cfg.tuning {
        Tuning::Auto => None,
        tuning => Some(resolve_params(tuning, cfg.kind, env, domain, comparator, horizon)?),
    };
    let need = |p: Option<StaticParams>| {
        p.ok_or_else(|| HarnessError::Config(format!("`{}` needs explicit tuning", cfg.kind.name())))
    };
    Ok(match cfg.kind {
        AlgorithmKind::TpVrOpt => Algorithm::TpVrOpt { predictor, params: need(params)? },
        AlgorithmKind::TpVrOptPlus => Algorithm::TpVrOptPlus { predictor },
        AlgorithmKind::TpVrOptPp => Algorithm::TpVrOptPlusPlus { predictor },
        AlgorithmKind::Coordinate => Algorithm::Coordinate { params: need(params)? },
        AlgorithmKind::TwoPointOgd => Algorithm::TwoPointBaseline { params: need(params)? },
        AlgorithmKind::SinglePointFkm => Algorithm::SinglePointBaseline { params: need(params)? },
    })
}

fn resolve_params(
    tuning: Tuning,
    kind: AlgorithmKind,
    env: &dyn Environment,
    domain: &ConvexDomain,
    comparator: &ComparatorOracle,
    horizon: usize,
) -> Result<StaticParams, HarnessError> {
    let (dia, dim, r) = (domain.diameter(), domain.dim(), domain.in_radius());
    let beta = env.smoothness().unwrap_or(0.0);
    let params = match tuning {
        Tuning::Auto => unreachable!("auto tuning has no static parameters"),
        Tuning::Manual { eta, delta } => StaticParams::new(eta, delta, r),
        Tuning::Static { sensitivity } => {
            tune_static(dia, dim, amount(sensitivity, || oracle_sensitivity(env, horizon)), horizon, beta, r)
        }
        Tuning::Dynamic { sensitivity, path_length: p } => tune_dynamic(
            dia,
            dim,
            amount(sensitivity, || oracle_sensitivity(env, horizon)),
            amount(p, || oracle_path_length(comparator)),
            horizon,
            beta,
            r,
        ),
        Tuning::Coordinate { variation } => {
            tune_coordinate(dia, dim, amount(variation, || oracle_variation(env, domain, horizon)), horizon, beta, r)
        }
    };
    params.map_err(|e| HarnessError::Config(format!("{}: {e}", kind.name())))
}

fn amount(a: Amount, oracle: impl FnOnce() -> f64) -> f64 {
    match a {
        Amount::Value(v) => v,
        Amount::Named(_) => oracle(),
    }
}

/// Zero-hint prediction error when known, otherwise its worst case `T·L²`.
pub fn oracle_sensitivity(env: &dyn Environment, horizon: usize) -> f64 {
    env.nominal_prediction_error()
        .unwrap_or_else(|| horizon as f64 * env.lipschitz() * env.lipschitz())
}

pub fn oracle_path_length(comparator: &ComparatorOracle) -> f64 {
    comparator.dynamic_seq.as_deref().map_or(0.0, path_length)
}

/// `Σ_{t≥1} ‖∇f_t(c) − ∇f_{t−1}(c)‖²` at the projection `c` of the origin.
pub fn oracle_variation(env: &dyn Environment, domain: &ConvexDomain, horizon: usize) -> f64 {
    let c = domain.project(&Vector::zeros(domain.dim())).expect("origin has the domain dimension");
    (1..horizon).map(|t| (env.gradient(&c, t) - env.gradient(&c, t - 1)).norm_squared()).sum()
}

fn config_error(e: bco_core::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}
