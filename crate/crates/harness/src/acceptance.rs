//! Acceptance experiments.
//!
//! Thirteen criteria: distributional facts about the sampler and the
//! estimators, per-round invariants of the learners, exact identities of the
//! hard instances, and regret-scaling fits over seed-averaged sweeps. The
//! sweeps at `T = 2·10⁴` are the slow part; the linear sweep is computed once
//! per process and shared by the criteria that read it.

use std::sync::OnceLock;
use std::time::Instant;

use bco_core::algorithms::{tune_coordinate, tune_static, Algorithm, RunOptions, StaticParams};
use bco_core::algorithms::{ExpertGrid, RunSpec};
use bco_core::environments::{
    make_dynamic_drift, make_linear_rademacher, make_piecewise_nonsmooth, make_quadratic_drift,
    make_single_point_barrier, solve_static_comparator, FixedLinear, LossProcess,
};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::{fit_scaling_exponent, mean_stderr, ScalingFit};
use bco_core::predictors::PredictorKind;
use bco_core::Vector;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::setup::oracle_variation;
use crate::suites::{estimators, run_once, Check};

pub const CRITERIA: [&str; 13] = [
    "sphere covariance",
    "estimator bias",
    "estimator second moment",
    "per-round estimator bound",
    "one-step inequality",
    "non-smooth counterexample",
    "prediction-error scaling",
    "adaptivity overhead",
    "single-point barrier",
    "lower-bound instance identity",
    "dynamic-regret scaling",
    "meta-layer sanity",
    "coordinate-variant recovery",
];

/// Horizon of the scaling sweeps.
pub const SWEEP_HORIZON: usize = 20_000;
pub const SWEEP_SEEDS: u64 = 30;
const DIM: usize = 4;

pub fn all() -> Vec<Check> {
    (1..=CRITERIA.len()).map(criterion).collect()
}

/// Run criterion `id` (1-based).
pub fn criterion(id: usize) -> Check {
    let check = match id {
        1 => sphere_covariance(),
        2 => estimator_bias(),
        3 => second_moment(),
        4 => per_round_bound(),
        5 => one_step_inequality(),
        6 => nonsmooth_counterexample(),
        7 => prediction_error_scaling(),
        8 => adaptivity_overhead(),
        9 => single_point_barrier(),
        10 => lower_bound_identity(),
        11 => dynamic_regret_scaling(),
        12 => meta_layer(),
        13 => coordinate_recovery(),
        _ => panic!("no acceptance criterion {id}"),
    };
    Check { name: format!("criterion {id:>2} {}", CRITERIA[id - 1]), ..check }
}

fn ball() -> ConvexDomain {
    ConvexDomain::ball(DIM, 1.0).expect("unit ball")
}

fn sphere_covariance() -> Check {
    let start = Instant::now();
    let worst = [2usize, 5, 8]
        .par_iter()
        .map(|&d| crate::suites::geometry::sphere_covariance_error(d, 200_000, 11))
        .reduce(|| 0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Check::at_most("", worst, 0.01).and(secs < 5.0, format!("runtime {secs:.2}s < 5s"))
}

const BIAS_GRID: [(usize, f64); 4] = [(2, 0.01), (2, 0.1), (8, 0.01), (8, 0.1)];
const BIAS_SAMPLES: usize = 100_000;

fn estimator_bias() -> Check {
    let start = Instant::now();
    let worst = BIAS_GRID
        .par_iter()
        .map(|&(d, delta)| estimators::bias_ratio(d, delta, BIAS_SAMPLES, 21))
        .reduce(|| 0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Check::at_most("", worst, 1.0)
        .with_note("max over (d, δ) of ‖mean ĝ − ∇f‖ / ((d/2)βδ + 4·stderr)")
        .and(secs < 30.0, format!("runtime {secs:.2}s < 30s"))
}

fn second_moment() -> Check {
    let (general, collapsed) = BIAS_GRID
        .par_iter()
        .map(|&(d, delta)| estimators::second_moment_ratios(d, delta, BIAS_SAMPLES, 31))
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Check::at_most("", general, 1.0)
        .with_note("max ratio to 2d‖∇f−m‖² + (d²/2)β²δ² + 4·stderr over m ∈ {0, ∇f, ∇f/2}")
        .and(collapsed <= 1.0, format!("m = ∇f ratio to (d²/2)β²δ² + 4·stderr = {collapsed:.3e}"))
}

fn per_round_bound() -> Check {
    let (violations, checked, ratio) = crate::suites::algorithms::estimator_bound_sweep();
    Check::none("", violations).with_note(format!("{checked} rounds checked, max ‖ĝ−m‖/(2dL) = {ratio:.4}"))
}

fn one_step_inequality() -> Check {
    let horizon = 10_000;
    let domain = ball();
    let env = make_quadratic_drift(&domain, horizon, 1e-3, 1.0, 0.5, 5).expect("drift instance");
    let s = horizon as f64 * env.lipschitz().powi(2);
    let params = tune_static(domain.diameter(), DIM, s, horizon, 1.0, domain.in_radius()).expect("tuning");
    let alg = Algorithm::TpVrOpt { predictor: PredictorKind::LastEstimate, params };
    let r = run_once(&env, &domain, alg, horizon, 6, RunOptions { trace: false, debug_assert: true });
    let t = &r.invariants;
    Check::none("", t.one_step_violations)
        .and(t.one_step_checked == horizon, format!("{} of {horizon} rounds checked", t.one_step_checked))
        .and(true, format!("max lhs − rhs = {:.3e}", t.one_step_max_excess))
}

fn nonsmooth_counterexample() -> Check {
    let lipschitz = 3.0;
    let worst = [0.5, 0.25, 0.1]
        .iter()
        .map(|&delta| {
            let f = make_piecewise_nonsmooth(lipschitz, delta).expect("kink instance");
            (f.secant_gap(delta) - lipschitz / 3.0).abs()
        })
        .fold(0.0, f64::max);
    Check::at_most("", worst, 1e-12).with_note("|secant − f′(0)| − L/3 for δ ∈ {0.5, 0.25, 0.1}")
}

/// Seed-averaged results of the linear Rademacher sweep.
pub struct LinearSweep {
    pub s_targets: Vec<f64>,
    /// Per grid point and seed: (tuned regret, doubling regret, measured S_T).
    pub cells: Vec<Vec<(f64, f64, f64)>>,
}

impl LinearSweep {
    pub fn mean(&self, k: usize, pick: impl Fn(&(f64, f64, f64)) -> f64) -> (f64, f64) {
        mean_stderr(&self.cells[k].iter().map(pick).collect::<Vec<_>>())
    }
}

/// `S_target ∈ {T^0.3, T^0.5, T^0.75, T}` with the zero predictor.
pub fn linear_sweep() -> &'static LinearSweep {
    static SWEEP: OnceLock<LinearSweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let t = SWEEP_HORIZON;
        let domain = ball();
        let s_targets: Vec<f64> = [0.3, 0.5, 0.75, 1.0].iter().map(|e| (t as f64).powf(*e)).collect();
        let cells = s_targets
            .iter()
            .map(|&s| {
                (0..SWEEP_SEEDS)
                    .into_par_iter()
                    .map(|seed| {
                        let env = make_linear_rademacher(&domain, t, s, 1.0, seed).expect("linear instance");
                        let params = tune_static(domain.diameter(), DIM, s, t, 0.0, domain.in_radius()).expect("tuning");
                        let tuned = Algorithm::TpVrOpt { predictor: PredictorKind::Zero, params };
                        let doubling = Algorithm::TpVrOptPlus { predictor: PredictorKind::Zero };
                        let a = run_once(&env, &domain, tuned, t, seed + 1000, RunOptions::default());
                        let b = run_once(&env, &domain, doubling, t, seed + 1000, RunOptions::default());
                        (a.static_regret, b.static_regret, a.prediction_error)
                    })
                    .collect()
            })
            .collect();
        LinearSweep { s_targets, cells }
    })
}

fn fit(points: &[(f64, f64)]) -> Option<ScalingFit> {
    fit_scaling_exponent(points, 0).ok()
}

fn slope_check(points: &[(f64, f64)], low: f64, high: f64) -> Check {
    let table: Vec<String> = points.iter().map(|(x, y)| format!("{x:.4}→{y:.3}")).collect();
    match fit(points) {
        Some(f) => Check::within("", f.slope, low, high)
            .with_note(format!("CI [{:.3}, {:.3}]; points {}", f.ci_low, f.ci_high, table.join(", "))),
        None => Check { name: String::new(), measured: f64::NAN, bound: format!("in [{low}, {high}]"), pass: false, note: format!("no fit; points {}", table.join(", ")) },
    }
}

fn prediction_error_scaling() -> Check {
    let sweep = linear_sweep();
    let points: Vec<(f64, f64)> =
        sweep.s_targets.iter().enumerate().map(|(k, &s)| (s, sweep.mean(k, |c| c.0).0)).collect();
    slope_check(&points, 0.35, 0.65)
}

fn adaptivity_overhead() -> Check {
    let sweep = linear_sweep();
    let cap = 25.0 * (SWEEP_HORIZON as f64).log2();
    let ratios: Vec<f64> = (0..sweep.s_targets.len())
        .map(|k| sweep.mean(k, |c| c.1).0 / sweep.mean(k, |c| c.0).0)
        .collect();
    let worst = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let listed: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Check::at_most("", worst, cap).with_note(format!("doubling / tuned mean regret per point: {}", listed.join(", ")))
}

fn single_point_barrier() -> Check {
    let domain = ball();
    let sigma = 1.0;
    let target = sigma * sigma / (4.0 * domain.diameter().powi(2));
    let horizons = [1_000usize, 4_000, 16_000];
    let identity = horizons
        .iter()
        .map(|&t| {
            let env = make_single_point_barrier(&domain, t, sigma, 1.0, 3).expect("barrier instance");
            let params = tune_static(domain.diameter(), DIM, target, t, 0.0, domain.in_radius()).expect("tuning");
            let r = run_once(&env, &domain, Algorithm::TpVrOpt { predictor: PredictorKind::Zero, params }, t, 4, RunOptions::default());
            (r.prediction_error - target).abs()
        })
        .fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = horizons
        .iter()
        .map(|&t| {
            let regrets: Vec<f64> = (0..40u64)
                .into_par_iter()
                .map(|seed| {
                    let env = make_single_point_barrier(&domain, t, sigma, 1.0, seed).expect("barrier instance");
                    let alg = Algorithm::SinglePointBaseline { params: fkm_params(&domain, t) };
                    run_once(&env, &domain, alg, t, seed + 1000, RunOptions::default()).static_regret
                })
                .collect();
            (t as f64, mean_stderr(&regrets).0)
        })
        .collect();
    let slope = slope_check(&points, 0.4, f64::INFINITY);
    Check { bound: ">= 0.4".into(), ..slope }.and(identity <= 1e-9, format!("zero-hint S_T − σ²/(4D²) = {identity:.2e}"))
}

/// Flaxman-style tuning: `δ = (r/2)T^{−1/4}`, `η = Dδ/(3d√T)` (3 bounds `|f_t|/σ` w.h.p.).
pub fn fkm_params(domain: &ConvexDomain, horizon: usize) -> StaticParams {
    let t = horizon as f64;
    let delta = 0.5 * domain.in_radius() * t.powf(-0.25);
    let eta = domain.diameter() * delta / (3.0 * domain.dim() as f64 * t.sqrt());
    StaticParams::new(eta, delta, domain.in_radius()).expect("valid FKM parameters")
}

fn lower_bound_identity() -> Check {
    let sweep = linear_sweep();
    let worst = sweep
        .s_targets
        .iter()
        .zip(&sweep.cells)
        .flat_map(|(s, cells)| cells.iter().map(move |c| (c.2 - s).abs()))
        .fold(0.0, f64::max);
    Check::at_most("", worst, 1e-9).with_note(format!("{} runs, zero predictor", SWEEP_SEEDS as usize * sweep.s_targets.len()))
}

pub const PATH_BUDGETS: [f64; 4] = [4.0, 16.0, 64.0, 256.0];

/// Mean dynamic regret of TP-VR-OPT++ (last-estimate hints) per path budget.
pub fn dynamic_sweep() -> Vec<(f64, f64)> {
    let t = SWEEP_HORIZON;
    let domain = ball();
    PATH_BUDGETS
        .iter()
        .map(|&p| {
            let runs: Vec<(f64, f64)> = (0..SWEEP_SEEDS)
                .into_par_iter()
                .map(|seed| {
                    let env = make_dynamic_drift(&domain, t, p, 1.0, 0.5, seed).expect("dynamic instance");
                    let alg = Algorithm::TpVrOptPlusPlus { predictor: PredictorKind::LastEstimate };
                    let r = run_once(&env, &domain, alg, t, seed + 1000, RunOptions::default());
                    (r.dynamic_regret.expect("dynamic comparator"), r.path_length.expect("dynamic comparator"))
                })
                .collect();
            let path = runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
            (path, mean_stderr(&runs.iter().map(|r| r.0).collect::<Vec<_>>()).0)
        })
        .collect()
}

fn dynamic_regret_scaling() -> Check {
    slope_check(&dynamic_sweep(), 0.3, 0.7)
}

fn meta_layer() -> Check {
    let mut cells = 0;
    let mut inexact = 0;
    let mut float_dev: f64 = 0.0;
    for diameter in [0.5, 2.0] {
        for dim in [1usize, 8] {
            for s in [1.0, 100.0] {
                for h in [1usize, 1024] {
                    let grid = ExpertGrid::new(diameter, dim, s, h);
                    let n = grid.experts as i64;
                    let total: Ratio<i64> = (1..=n).map(|i| Ratio::new(n + 1, n) * Ratio::new(1, i * (i + 1))).sum();
                    cells += 1;
                    inexact += usize::from(total != Ratio::from_integer(1));
                    float_dev = float_dev.max((grid.prior().iter().sum::<f64>() - 1.0).abs());
                }
            }
        }
    }
    let horizon = 10_000;
    let domain = ball();
    let env = make_quadratic_drift(&domain, horizon, 1e-3, 1.0, 0.5, 8).expect("drift instance");
    let alg = Algorithm::TpVrOptPlusPlus { predictor: PredictorKind::LastEstimate };
    let r = run_once(&env, &domain, alg, horizon, 9, RunOptions::default());
    let t = &r.invariants;
    Check::at_most("", t.weight_sum_max_deviation, 1e-12)
        .with_note(format!("max |Σp − 1| over {horizon} rounds"))
        .and(t.weight_min >= 0.0, format!("most negative weight {:.1e}", t.weight_min))
        .and(t.infeasible_queries == 0, format!("{} infeasible queries", t.infeasible_queries))
        .and(inexact == 0, format!("prior sums exactly 1 in {}/{cells} cells (float deviation {float_dev:.1e})", cells - inexact))
}

/// Largest `|ĝ_t − m_t|` once every coordinate of a fixed linear loss has been sampled.
pub fn coordinate_residual_after_cover(seed: u64) -> (f64, usize) {
    let domain = ball();
    let horizon = 400;
    let env = FixedLinear::new(Vector::from_column_slice(&[0.3, -0.2, 0.5, 0.1]), horizon);
    let params = tune_coordinate(domain.diameter(), DIM, 0.0, horizon, 0.0, domain.in_radius()).expect("tuning");
    let r = run_once(&env, &domain, Algorithm::Coordinate { params }, horizon, seed, RunOptions { trace: true, debug_assert: false });
    let trace = r.trace.expect("trace requested");
    let mut seen = [false; DIM];
    let mut covered_at = horizon;
    for rec in &trace {
        if seen.iter().all(|s| *s) {
            covered_at = rec.t;
            break;
        }
        seen[rec.coordinate.expect("coordinate query")] = true;
    }
    let worst = trace[covered_at..].iter().map(|rec| rec.residual_sq.sqrt()).fold(0.0, f64::max);
    (worst, covered_at)
}

fn coordinate_recovery() -> Check {
    let (residual, covered_at) = coordinate_residual_after_cover(12);
    let horizon = 10_000;
    let domain = ball();
    let outcomes: Vec<(f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let env = make_quadratic_drift(&domain, horizon, 1e-3, 1.0, 0.5, seed).expect("drift instance");
            let (dia, r) = (domain.diameter(), domain.in_radius());
            let variation = oracle_variation(&env, &domain, horizon);
            let coord = tune_coordinate(dia, DIM, variation, horizon, 1.0, r).expect("tuning");
            let s = horizon as f64 * env.lipschitz().powi(2);
            let base = tune_static(dia, DIM, s, horizon, 1.0, r).expect("tuning");
            let comparator = solve_static_comparator(&env, &domain, horizon);
            let run = |alg: Algorithm| {
                let spec = RunSpec { env: &env, domain: &domain, comparator: &comparator, horizon, seed: seed + 1000, options: RunOptions::default() };
                alg.run(&spec).expect("run").static_regret
            };
            (run(Algorithm::Coordinate { params: coord }), run(Algorithm::TwoPointBaseline { params: base }))
        })
        .collect();
    let wins = outcomes.iter().filter(|(c, b)| c <= b).count();
    let rate = wins as f64 / outcomes.len() as f64;
    Check::at_least("", rate, 0.8)
        .with_note(format!("coordinate variant beat two-point OGD on {wins}/20 seeds"))
        .and(residual <= COORDINATE_ZERO_TOL, format!("max |ĝ−m| after all coordinates seen (round {covered_at}) = {residual:.1e}"))
}

/// Floating-point slack for "exactly zero" residuals of the coordinate variant.
pub const COORDINATE_ZERO_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fkm_parameters_keep_queries_feasible() {
        let p = fkm_params(&ball(), 1_000);
        assert!(p.delta < 1.0 && p.eta > 0.0);
        assert!((p.delta - 0.5 * 1000f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn criteria_names_are_numbered() {
        assert_eq!(criterion(6).name, "criterion  6 non-smooth counterexample");
    }
}
