use bco_core::algorithms::{tune_static, Algorithm, RunOptions};
use bco_core::environments::make_quadratic_drift;
use bco_core::geometry::{clip_to_ball, sample_sphere, ConvexDomain};
use bco_core::predictors::PredictorKind;
use bco_core::rng::{Purpose, Streams};
use rand::Rng;

use super::{run_once, Check};

pub fn checks() -> Vec<Check> {
    let mut out = Vec::new();
    let domain = ConvexDomain::ball(3, 1.0).expect("ball");
    let horizon = 500;
    let env = make_quadratic_drift(&domain, horizon, 1e-3, 1.0, 0.5, 4).expect("env");
    let params = tune_static(domain.diameter(), 3, 100.0, horizon, 1.0, domain.in_radius()).expect("tuning");
    let opts = RunOptions { trace: true, debug_assert: false };
    for kind in [PredictorKind::LastEstimate, PredictorKind::OraclePrevGrad] {
        let alg = Algorithm::TpVrOpt { predictor: kind, params };
        let hints = |seed| {
            run_once(&env, &domain, alg, horizon, seed, opts)
                .trace
                .expect("trace")
                .into_iter()
                .map(|r| r.hint)
                .collect::<Vec<_>>()
        };
        let differing = hints(9).iter().zip(hints(9)).filter(|(a, b)| **a != *b).count();
        out.push(Check::none(format!("predictors/{kind:?} replay determinism (differing hints)"), differing));
    }

    let l = 1.3;
    let streams = Streams::new(5);
    let mut worst: f64 = f64::NEG_INFINITY;
    for k in 0..1_000 {
        let mut rng = streams.rng(Purpose::Probe, k);
        let v = sample_sphere(4, &mut rng).into_inner() * rng.random_range(0.0..5.0);
        let u = sample_sphere(4, &mut rng).into_inner() * rng.random_range(0.0..l);
        worst = worst.max((clip_to_ball(&v, l) - &u).norm() - (v - u).norm());
    }
    out.push(Check::at_most("predictors/clipping never increases distance to the L-ball", worst, 1e-12));
    out
}
