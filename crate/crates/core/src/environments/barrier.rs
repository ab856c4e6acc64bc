use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use super::{DiagnosticGradient, EnvDescriptor, Environment, LossProcess};
use crate::error::{Error, Result};
use crate::geometry::ConvexDomain;
use crate::rng::{Purpose, Streams};
use crate::Vector;

/// The single-point feedback hard instance.
///
/// `f_t(x) = −M ε ⟨v, x − x₀⟩ + ξ_t` with a hidden sign `M` drawn once,
/// `ε = σ/(2D√T)`, Gaussian offsets `ξ_t ~ N(0, σ²)`, and `(x₀, v)` the
/// midpoint and direction of a diameter of the domain. Two-point differences
/// cancel `ξ_t`; a single query cannot.
#[derive(Debug, Clone)]
pub struct SinglePointBarrier {
    epsilon: f64,
    sign: f64,
    direction: Vector,
    midpoint: Vector,
    diameter: f64,
    noise: Vec<f64>,
    sigma: f64,
    descriptor: EnvDescriptor,
}

/// Build the barrier instance. Requires `σ > 0` and `σ ≤ 2LD√T` (so `ε ≤ L`).
pub fn make_single_point_barrier(
    domain: &ConvexDomain,
    horizon: usize,
    sigma: f64,
    lipschitz_cap: f64,
    seed: u64,
) -> Result<SinglePointBarrier> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("sigma must be positive, got {sigma}")));
    }
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let diameter = domain.diameter();
    let root_t = (horizon as f64).sqrt();
    if sigma > 2.0 * lipschitz_cap * diameter * root_t {
        return Err(Error::InvalidConfig(format!(
            "sigma {sigma} exceeds 2LD√T = {}",
            2.0 * lipschitz_cap * diameter * root_t
        )));
    }
    let streams = Streams::new(seed);
    let mut rng = streams.rng(Purpose::EnvSetup, 0);
    let (midpoint, direction) = domain
        .diameter_segment(&mut rng)
        .ok_or_else(|| Error::InvalidConfig("barrier instance needs a ball or box domain".into()))?;
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let normal = Normal::new(0.0, sigma).expect("sigma checked positive");
    let noise = (0..horizon)
        .map(|t| normal.sample(&mut streams.rng(Purpose::EnvRound, t as u64)))
        .collect();
    Ok(SinglePointBarrier {
        epsilon: sigma / (2.0 * diameter * root_t),
        sign,
        direction: direction.into_inner(),
        midpoint,
        diameter,
        noise,
        sigma,
        descriptor: EnvDescriptor {
            kind: "single_point_barrier".into(),
            params: json!({
                "dim": domain.dim(), "horizon": horizon, "sigma": sigma, "lipschitz_cap": lipschitz_cap,
            }),
            seed: Some(seed),
        },
    })
}

impl SinglePointBarrier {
    /// `ε = σ/(2D√T)`, the gradient norm of every loss.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The hidden sign `M ∈ {−1, +1}`.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// Force the hidden sign (per-world reporting).
    pub fn with_sign(mut self, sign: f64) -> Self {
        self.sign = sign.signum();
        self
    }

    pub fn midpoint(&self) -> &Vector {
        &self.midpoint
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Realised offsets `ξ_t`.
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }
}

impl LossProcess for SinglePointBarrier {
    fn dim(&self) -> usize {
        self.direction.len()
    }

    fn horizon(&self) -> usize {
        self.noise.len()
    }

    fn eval(&self, x: &Vector, t: usize) -> f64 {
        -self.sign * self.epsilon * self.direction.dot(&(x - &self.midpoint)) + self.noise[t]
    }

    fn lipschitz(&self) -> f64 {
        self.epsilon
    }

    fn smoothness(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl DiagnosticGradient for SinglePointBarrier {
    fn gradient(&self, _x: &Vector, _t: usize) -> Vector {
        &self.direction * (-self.sign * self.epsilon)
    }
}

impl Environment for SinglePointBarrier {
    fn descriptor(&self) -> EnvDescriptor {
        self.descriptor.clone()
    }

    fn analytic_minimizer(&self, _domain: &ConvexDomain, _horizon: usize) -> Option<Vector> {
        Some(&self.midpoint + &self.direction * (self.sign * self.diameter / 2.0))
    }

    fn nominal_prediction_error(&self) -> Option<f64> {
        Some(self.horizon() as f64 * self.epsilon * self.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_value_is_the_offset() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        let env = make_single_point_barrier(&domain, 100, 0.5, 1.0, 2).unwrap();
        for t in 0..100 {
            assert_eq!(env.eval(env.midpoint(), t), env.noise()[t]);
        }
    }

    #[test]
    fn gradient_norm_is_epsilon() {
        let domain = ConvexDomain::ball(2, 1.5).unwrap();
        let (t, sigma) = (400, 2.0);
        let env = make_single_point_barrier(&domain, t, sigma, 1.0, 2).unwrap();
        let expect = sigma / (2.0 * 3.0 * 20.0);
        assert!((env.epsilon() - expect).abs() < 1e-15);
        assert!((env.gradient(&Vector::zeros(2), 7).norm() - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_predictor_error_is_horizon_free() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let sigma = 1.3;
        for t in [10, 1_000, 100_000] {
            let env = make_single_point_barrier(&domain, t, sigma, 1.0, 4).unwrap();
            let s = env.nominal_prediction_error().unwrap();
            assert!((s - sigma * sigma / 4.0 / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn offset_variance_matches_sigma() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let sigma = 0.7;
        let env = make_single_point_barrier(&domain, 5_000, sigma, 1.0, 6).unwrap();
        let vals: Vec<f64> = (0..5_000).map(|t| env.eval(env.midpoint(), t)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        assert!(var >= 0.8 * sigma * sigma && var <= 1.25 * sigma * sigma, "{var}");
    }

    #[test]
    fn invalid_sigma_is_rejected() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        assert!(make_single_point_barrier(&domain, 100, 0.0, 1.0, 1).is_err());
        assert!(make_single_point_barrier(&domain, 100, 41.0, 1.0, 1).is_err());
    }
}
