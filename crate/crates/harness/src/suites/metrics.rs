use bco_core::algorithms::{tune_static, Algorithm, RunOptions};
use bco_core::environments::{make_quadratic_drift, Environment, FixedLinear, LogSumExp, LossProcess};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::fit_scaling_exponent;
use bco_core::predictors::PredictorKind;
use bco_core::Vector;

use super::{run_once, Check};

pub fn checks() -> Vec<Check> {
    let mut out = Vec::new();
    let domain = ConvexDomain::ball(3, 1.0).expect("ball");
    let horizon = 2_000;
    let exact: Vec<(&str, Box<dyn Environment>)> = vec![
        ("fixed_linear", Box::new(FixedLinear::new(Vector::from_column_slice(&[0.2, -0.4, 0.1]), horizon))),
        ("stationary quadratic", Box::new(make_quadratic_drift(&domain, horizon, 0.0, 1.0, 0.5, 3).expect("env"))),
    ];
    for (name, env) in &exact {
        let params = tune_static(domain.diameter(), 3, 10.0, horizon, 1.0, domain.in_radius()).expect("tuning");
        let worst = (0..5)
            .map(|seed| {
                let alg = Algorithm::TpVrOpt { predictor: PredictorKind::OraclePrevGrad, params };
                run_once(env.as_ref(), &domain, alg, horizon, seed, RunOptions::default()).static_regret
            })
            .fold(f64::INFINITY, f64::min);
        out.push(Check::at_least(format!("metrics/{name} static regret with exact comparator"), worst, -1e-9));
    }

    let env = LogSumExp::new(3, 2.0, horizon);
    let alg = Algorithm::TpVrOptPlus { predictor: PredictorKind::LastEstimate };
    let r = run_once(&env, &domain, alg, horizon, 1, RunOptions::default());
    let floor = -1e-6 * horizon as f64 * env.lipschitz() * domain.diameter();
    out.push(
        Check::at_least("metrics/numeric comparator regret floor −1e−6·TLD", r.static_regret, floor)
            .and(r.comparator_warning.is_none(), "comparator converged"),
    );

    let drift = make_quadratic_drift(&domain, horizon, 1e-3, 1.0, 0.5, 4).expect("env");
    let r = run_once(&drift, &domain, Algorithm::TpVrOptPlusPlus { predictor: PredictorKind::LastEstimate }, horizon, 2, RunOptions::default());
    let parts: f64 = r.phases.iter().map(|p| p.prediction_error).sum();
    out.push(
        Check::at_most("metrics/S_T additive over phases (relative gap)", (parts - r.prediction_error).abs() / r.prediction_error, 1e-12)
            .with_note(format!("{} phases", r.phases.len())),
    );

    let pts: Vec<(f64, f64)> = [1.0, 4.0, 9.0, 100.0].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
    let fit = fit_scaling_exponent(&pts, 1).expect("fit");
    out.push(Check::at_most("metrics/fit of y = 3√x (|slope − 0.5|)", (fit.slope - 0.5).abs(), 1e-9));
    let flat: Vec<(f64, f64)> = [1.0, 2.0, 5.0].iter().map(|&x| (x, 7.0)).collect();
    let fit = fit_scaling_exponent(&flat, 1).expect("fit");
    out.push(Check::at_most("metrics/fit of a constant (|slope|)", fit.slope.abs(), 1e-9));
    out
}
