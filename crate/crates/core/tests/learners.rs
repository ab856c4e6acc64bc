use bco_core::algorithms::{tune_static, Algorithm, RunOptions, RunSpec};
use bco_core::environments::{make_linear_rademacher, make_quadratic_drift, solve_static_comparator, Environment, FixedLinear, LossProcess};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::RunReport;
use bco_core::predictors::PredictorKind;
use bco_core::Vector;

fn run(env: &dyn Environment, domain: &ConvexDomain, alg: Algorithm, horizon: usize, seed: u64) -> RunReport {
    let comparator = solve_static_comparator(env, domain, horizon);
    let spec = RunSpec { env, domain, comparator: &comparator, horizon, seed, options: RunOptions::default() };
    alg.run(&spec).unwrap()
}

const HINT_SENSITIVITY: f64 = 1.0;

#[test]
fn exact_hints_beat_classical_ogd_on_a_stationary_quadratic() {
    let (dim, horizon) = (3, 10_000);
    let domain = ConvexDomain::ball(dim, 1.0).unwrap();
    let mut wins = 0;
    let (mut ours, mut theirs) = (0.0, 0.0);
    for seed in 0..20 {
        let env = make_quadratic_drift(&domain, horizon, 0.0, 1.0, 0.5, seed).unwrap();
        let worst_case = horizon as f64 * env.lipschitz().powi(2);
        let base = tune_static(domain.diameter(), dim, worst_case, horizon, 1.0, domain.in_radius()).unwrap();
        // exact previous gradients leave only the O(β·step) drift of x_t as prediction error
        let params = tune_static(domain.diameter(), dim, HINT_SENSITIVITY, horizon, 1.0, domain.in_radius()).unwrap();
        let a = run(&env, &domain, Algorithm::TpVrOpt { predictor: PredictorKind::OraclePrevGrad, params }, horizon, seed + 50);
        assert!(a.prediction_error <= HINT_SENSITIVITY, "S_T = {}", a.prediction_error);
        let b = run(&env, &domain, Algorithm::TwoPointBaseline { params: base }, horizon, seed + 50);
        wins += usize::from(a.static_regret <= b.static_regret);
        ours += a.static_regret;
        theirs += b.static_regret;
    }
    assert!(ours <= theirs, "mean regret {} vs {}", ours / 20.0, theirs / 20.0);
    assert_eq!(wins, 20, "paired seeds won");
}

#[test]
fn zero_losses_give_zero_regret() {
    let domain = ConvexDomain::ball(2, 1.0).unwrap();
    let env = FixedLinear::new(Vector::zeros(2), 50);
    let params = tune_static(domain.diameter(), 2, 1.0, 50, 0.0, domain.in_radius()).unwrap();
    for alg in [
        Algorithm::TpVrOpt { predictor: PredictorKind::Zero, params },
        Algorithm::TpVrOptPlus { predictor: PredictorKind::LastEstimate },
        Algorithm::TpVrOptPlusPlus { predictor: PredictorKind::LastEstimate },
        Algorithm::Coordinate { params },
        Algorithm::TwoPointBaseline { params },
        Algorithm::SinglePointBaseline { params },
    ] {
        let r = run(&env, &domain, alg, 50, 3);
        assert_eq!(r.static_regret, 0.0, "{}", alg.name());
    }
}

#[test]
fn runs_replay_bit_for_bit() {
    let domain = ConvexDomain::ball(3, 1.0).unwrap();
    let env = make_quadratic_drift(&domain, 500, 1e-3, 1.0, 0.5, 9).unwrap();
    let alg = Algorithm::TpVrOptPlusPlus { predictor: PredictorKind::LastEstimate };
    let a = serde_json::to_string(&run(&env, &domain, alg, 500, 4)).unwrap();
    let b = serde_json::to_string(&run(&env, &domain, alg, 500, 4)).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&run(&env, &domain, alg, 500, 5)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn worst_case_rademacher_regret_is_of_order_d_sqrt_dt() {
    let (dim, horizon) = (4, 4_000);
    let domain = ConvexDomain::ball(dim, 1.0).unwrap();
    let mean = (0..20)
        .map(|seed| {
            let env = make_linear_rademacher(&domain, horizon, horizon as f64, 1.0, seed).unwrap();
            let params = tune_static(domain.diameter(), dim, horizon as f64, horizon, 0.0, domain.in_radius()).unwrap();
            run(&env, &domain, Algorithm::TpVrOpt { predictor: PredictorKind::Zero, params }, horizon, seed + 7).static_regret
        })
        .sum::<f64>()
        / 20.0;
    let scale = domain.diameter() * ((dim * horizon) as f64).sqrt();
    assert!((0.1..=10.0).contains(&(mean / scale)), "ratio {}", mean / scale);
}
