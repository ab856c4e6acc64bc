use bco_core::environments::{make_quadratic_drift, DiagnosticGradient, Environment, LogSumExp, LossProcess};
use bco_core::estimators::{vr_two_point, TwoPointObservation};
use bco_core::geometry::{sample_sphere, ConvexDomain};
use bco_core::rng::{Purpose, Streams};
use bco_core::Vector;

use super::Check;

/// Smoothness of the soft-max test loss.
pub const BETA: f64 = 2.0;

fn test_point(dim: usize) -> Vector {
    Vector::from_fn(dim, |i, _| 0.4 * (1.3 * i as f64 + 0.2).sin() / (dim as f64).sqrt())
}

/// `n` draws of `ĝ` at the test point with hint `m`.
fn draws(dim: usize, delta: f64, m: &Vector, n: usize, seed: u64) -> Vec<Vector> {
    let f = LogSumExp::new(dim, BETA, 1);
    let y = test_point(dim);
    let mut rng = Streams::new(seed).rng(Purpose::Probe, dim as u64 ^ delta.to_bits());
    (0..n)
        .map(|_| {
            let v = sample_sphere(dim, &mut rng);
            let off = v.as_vector() * delta;
            let obs = TwoPointObservation { f_plus: f.eval(&(&y + &off), 0), f_minus: f.eval(&(&y - &off), 0), delta, direction: &v };
            vr_two_point(&obs, m, dim).expect("valid observation").g_hat
        })
        .collect()
}

/// `‖mean ĝ − ∇f(y)‖ / ((d/2)βδ + 4·stderr)` with the zero hint.
pub fn bias_ratio(dim: usize, delta: f64, n: usize, seed: u64) -> f64 {
    let g = LogSumExp::new(dim, BETA, 1).gradient(&test_point(dim), 0);
    let xs = draws(dim, delta, &Vector::zeros(dim), n, seed);
    let mean = xs.iter().fold(Vector::zeros(dim), |a, x| a + x) / n as f64;
    let var = xs.iter().fold(Vector::zeros(dim), |a, x| a + (x - &mean).map(|e| e * e)) / (n - 1) as f64;
    let stderr = (var / n as f64).map(f64::sqrt).norm();
    (mean - g).norm() / (dim as f64 / 2.0 * BETA * delta + 4.0 * stderr)
}

/// Ratios of `E‖ĝ − m‖²` to its bound, maximised over `m ∈ {0, ∇f, ∇f/2}`, and for `m = ∇f`
/// alone against the collapsed bound.
pub fn second_moment_ratios(dim: usize, delta: f64, n: usize, seed: u64) -> (f64, f64) {
    let g = LogSumExp::new(dim, BETA, 1).gradient(&test_point(dim), 0);
    let d = dim as f64;
    let floor = d * d / 2.0 * BETA * BETA * delta * delta;
    let mut general: f64 = 0.0;
    let mut collapsed = 0.0;
    for (k, m) in [Vector::zeros(dim), g.clone(), &g * 0.5].iter().enumerate() {
        let sq: Vec<f64> = draws(dim, delta, m, n, seed + k as u64).iter().map(|x| (x - m).norm_squared()).collect();
        let (mean, stderr) = bco_core::metrics::mean_stderr(&sq);
        general = general.max(mean / (2.0 * d * (&g - m).norm_squared() + floor + 4.0 * stderr));
        if k == 1 {
            collapsed = mean / (floor + 4.0 * stderr);
        }
    }
    (general, collapsed)
}

/// Largest `|f(y+δv) − f(y−δv) − 2δ⟨∇f(y), v⟩| − βδ²` over random probes.
fn remainder_excess(env: &dyn Environment, domain: &ConvexDomain, beta: f64, probes: u64) -> f64 {
    let streams = Streams::new(13);
    let dim = domain.dim();
    let shrunk = bco_core::geometry::ShrunkenDomain::for_perturbation(domain, 0.25 * domain.in_radius()).expect("δ < r");
    let mut worst = f64::NEG_INFINITY;
    for k in 0..probes {
        let mut rng = streams.rng(Purpose::Probe, k);
        let delta = 0.25 * domain.in_radius() * rand::Rng::random_range(&mut rng, 0.001..1.0);
        let y = shrunk.project(&domain.sample_point(&mut rng)).expect("dimension");
        let v = sample_sphere(dim, &mut rng);
        let t = (k as usize) % env.horizon();
        let off = v.as_vector() * delta;
        let r = env.eval(&(&y + &off), t) - env.eval(&(&y - &off), t) - 2.0 * delta * env.gradient(&y, t).dot(v.as_vector());
        worst = worst.max(r.abs() - beta * delta * delta);
    }
    worst
}

pub fn checks() -> Vec<Check> {
    let mut out = vec![crate::acceptance::criterion(2), crate::acceptance::criterion(3)];
    let ball = ConvexDomain::ball(4, 1.0).expect("ball");
    let smooth: Vec<(&str, Box<dyn Environment>)> = vec![
        ("log_sum_exp", Box::new(LogSumExp::new(4, BETA, 50))),
        ("quadratic_drift", Box::new(make_quadratic_drift(&ball, 50, 1e-2, 1.5, 0.5, 2).expect("env"))),
    ];
    for (name, env) in &smooth {
        let beta = env.smoothness().expect("smooth");
        out.push(Check::at_most(format!("estimators/{name} remainder ≤ βδ² (excess)"), remainder_excess(env.as_ref(), &ball, beta, 1_000), 1e-12));
    }
    out.push(crate::acceptance::criterion(6));
    out
}
