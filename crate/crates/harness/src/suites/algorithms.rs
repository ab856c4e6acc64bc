use bco_core::algorithms::{tune_coordinate, tune_static, Algorithm, RunOptions};
use bco_core::environments::{
    make_dynamic_drift, make_linear_rademacher, make_quadratic_drift, make_single_point_barrier, Environment, LogSumExp,
};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::RunReport;
use bco_core::predictors::PredictorKind;
use rayon::prelude::*;

use super::{run_once, Check};
use crate::setup::oracle_sensitivity;

const DIM: usize = 3;
const HORIZON: usize = 1_500;

fn instance(k: usize, domain: &ConvexDomain, seed: u64) -> Box<dyn Environment> {
    match k {
        0 => Box::new(make_quadratic_drift(domain, HORIZON, 1e-3, 1.0, 0.5, seed).expect("env")),
        1 => Box::new(make_dynamic_drift(domain, HORIZON, 30.0, 2.0, 0.5, seed).expect("env")),
        2 => Box::new(make_linear_rademacher(domain, HORIZON, 200.0, 1.0, seed).expect("env")),
        3 => Box::new(LogSumExp::new(DIM, 3.0, HORIZON)),
        _ => Box::new(make_single_point_barrier(domain, HORIZON, 1.0, 1.0, seed).expect("env")),
    }
}

fn learners(env: &dyn Environment, domain: &ConvexDomain) -> Vec<Algorithm> {
    let beta = env.smoothness().unwrap_or(0.0);
    let (dia, r) = (domain.diameter(), domain.in_radius());
    let params = tune_static(dia, DIM, oracle_sensitivity(env, HORIZON), HORIZON, beta, r).expect("tuning");
    let coord = tune_coordinate(dia, DIM, 1.0, HORIZON, beta, r).expect("tuning");
    let mut out: Vec<Algorithm> = [PredictorKind::Zero, PredictorKind::LastEstimate, PredictorKind::OraclePrevGrad]
        .into_iter()
        .map(|predictor| Algorithm::TpVrOpt { predictor, params })
        .collect();
    out.push(Algorithm::TpVrOptPlus { predictor: PredictorKind::LastEstimate });
    out.push(Algorithm::TpVrOptPlusPlus { predictor: PredictorKind::LastEstimate });
    out.push(Algorithm::Coordinate { params: coord });
    out.push(Algorithm::TwoPointBaseline { params });
    out
}

/// Every learner on every instance for three seeds, with debug checks on.
fn all_runs() -> Vec<(Algorithm, RunReport)> {
    let domain = ConvexDomain::ball(DIM, 1.0).expect("ball");
    let cells: Vec<(usize, u64)> = (0..5).flat_map(|k| (0..3).map(move |s| (k, s))).collect();
    cells
        .par_iter()
        .flat_map_iter(|&(k, seed)| {
            let env = instance(k, &domain, seed);
            learners(env.as_ref(), &domain)
                .into_iter()
                .map(|alg| {
                    let opts = RunOptions { trace: false, debug_assert: true };
                    (alg, run_once(env.as_ref(), &domain, alg, HORIZON, seed + 100, opts))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `(violations, rounds checked, max ‖ĝ−m‖/(2dL))` of the per-round estimator bound.
pub fn estimator_bound_sweep() -> (usize, usize, f64) {
    all_runs().iter().fold((0, 0, 0.0f64), |(v, c, m), (_, r)| {
        let t = &r.invariants;
        (v + t.estimator_bound_violations, c + t.estimator_bound_checked, m.max(t.estimator_bound_max_ratio))
    })
}

pub fn checks() -> Vec<Check> {
    let runs = all_runs();
    let sum = |f: &dyn Fn(&RunReport) -> usize| runs.iter().map(|(_, r)| f(r)).sum::<usize>();
    let mut out = vec![
        Check::none("algorithms/estimator bound ‖ĝ−m‖ ≤ 2dL", sum(&|r| r.invariants.estimator_bound_violations))
            .with_note(format!("{} rounds", sum(&|r| r.invariants.estimator_bound_checked))),
        Check::none("algorithms/infeasible queries", sum(&|r| r.invariants.infeasible_queries)),
        Check::none("algorithms/one-step inequality (debug)", sum(&|r| r.invariants.one_step_violations))
            .with_note(format!("{} rounds", sum(&|r| r.invariants.one_step_checked))),
        Check::none("algorithms/doubling epoch budgets", sum(&|r| r.invariants.epoch_budget_violations)),
        Check::none("algorithms/final sensitivity per phase", sum(&|r| r.invariants.phase_budget_violations)),
        Check::none("algorithms/Hedge ∞-norm bound (debug)", sum(&|r| r.invariants.hedge_violations))
            .with_note(format!("{} rounds", sum(&|r| r.invariants.hedge_checked))),
    ];
    let max_dev = runs.iter().map(|(_, r)| r.invariants.weight_sum_max_deviation).fold(0.0, f64::max);
    out.push(Check::at_most("algorithms/aggregation weights sum to 1", max_dev, 1e-12));
    let miscounted = runs
        .iter()
        .filter(|(alg, r)| {
            let per_round = if matches!(alg, Algorithm::SinglePointBaseline { .. }) { 1 } else { 2 };
            r.queries != per_round * HORIZON
        })
        .count();
    let domain = ConvexDomain::ball(DIM, 1.0).expect("ball");
    let env = instance(0, &domain, 1);
    let fkm = Algorithm::SinglePointBaseline { params: crate::acceptance::fkm_params(&domain, HORIZON) };
    let single = run_once(env.as_ref(), &domain, fkm, HORIZON, 3, RunOptions::default());
    out.push(
        Check::none("algorithms/query accounting (2T two-point, T single-point)", miscounted + usize::from(single.queries != HORIZON)),
    );
    for id in [4, 5, 12, 13] {
        out.push(crate::acceptance::criterion(id));
    }
    out
}
