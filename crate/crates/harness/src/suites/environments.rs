use bco_core::environments::{
    certify_constants, make_dynamic_drift, make_linear_rademacher, make_piecewise_nonsmooth, make_quadratic_drift,
    make_single_point_barrier, Environment, FixedLinear, LogSumExp, LossProcess,
};
use bco_core::geometry::ConvexDomain;
use bco_core::metrics::path_length;
use bco_core::Vector;

use super::Check;

const PROBES: usize = 1_000;

pub fn checks() -> Vec<Check> {
    let mut out = Vec::new();
    let ball = ConvexDomain::ball(3, 1.0).expect("ball");
    let line = ConvexDomain::ball(1, 1.0).expect("interval");
    let horizon = 2_000;

    let instances: Vec<(&str, Box<dyn Environment>, &ConvexDomain)> = vec![
        ("quadratic_drift", Box::new(make_quadratic_drift(&ball, horizon, 1e-3, 2.0, 0.5, 1).expect("env")), &ball),
        ("dynamic_drift", Box::new(make_dynamic_drift(&ball, horizon, 20.0, 1.0, 0.5, 1).expect("env")), &ball),
        ("linear_rademacher", Box::new(make_linear_rademacher(&ball, horizon, 300.0, 1.0, 1).expect("env")), &ball),
        ("single_point_barrier", Box::new(make_single_point_barrier(&ball, horizon, 1.0, 1.0, 1).expect("env")), &ball),
        ("log_sum_exp", Box::new(LogSumExp::new(3, 2.0, horizon)), &ball),
        ("fixed_linear", Box::new(FixedLinear::new(Vector::from_column_slice(&[0.5, -1.0, 0.25]), horizon)), &ball),
        ("piecewise_nonsmooth", Box::new(make_piecewise_nonsmooth(1.5, 0.3).expect("env").with_horizon(horizon)), &line),
    ];
    for (name, env, domain) in &instances {
        let cert = certify_constants(env.as_ref(), domain, PROBES, 3);
        let worst = cert.lipschitz_ratio.max(cert.smoothness_ratio);
        out.push(
            Check::at_most(format!("environments/{name} declared (L, β) certify"), worst, 1.0 + 1e-7)
                .and(cert.holds(), format!("finite-difference error {:.1e}", cert.finite_difference_error)),
        );
    }

    let mut worst_mean: f64 = 0.0;
    for seed in 0..20 {
        let env = make_linear_rademacher(&ball, horizon, 300.0, 1.0, seed).expect("env");
        let mean = env.signs().iter().sum::<f64>() / horizon as f64;
        worst_mean = worst_mean.max(mean.abs() * (horizon as f64).sqrt());
    }
    out.push(Check::at_most("environments/linear_rademacher zero mean (‖mean g‖·√T/μ)", worst_mean, 4.0));

    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..20 {
        let sigma = 0.7;
        let env = make_single_point_barrier(&ball, 1_000, sigma, 1.0, seed).expect("env");
        let xs: Vec<f64> = (0..1_000).map(|t| env.eval(env.midpoint(), t)).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64 / (sigma * sigma);
        lo = lo.min(var);
        hi = hi.max(var);
    }
    out.push(Check::at_least("environments/single_point_barrier offset variance / σ² (min)", lo, 0.8));
    out.push(Check::at_most("environments/single_point_barrier offset variance / σ² (max)", hi, 1.25));

    let (l, delta) = (1.5, 0.3);
    let kink = make_piecewise_nonsmooth(l, delta).expect("env");
    let worst = [delta, delta / 2.0, delta / 10.0, delta / 1000.0]
        .iter()
        .map(|&h| (kink.remainder(h) + 2.0 * l * h * h / (3.0 * delta)).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most("environments/piecewise_nonsmooth remainder = −2Lh²/(3δ)", worst, 1e-12));

    let mut worst_path: f64 = 0.0;
    for budget in [0.0, 4.0, 64.0, 256.0] {
        let env = make_dynamic_drift(&ball, horizon, budget, 1.0, 0.5, 2).expect("env");
        let p = path_length(env.dynamic_comparator().expect("comparator"));
        worst_path = worst_path.max(if budget == 0.0 { p } else { (p / budget - 1.0).abs() });
    }
    out.push(Check::at_most("environments/dynamic_drift path length within 1% of budget", worst_path, 0.01));

    out.push(crate::acceptance::criterion(6));
    out
}
