use rand::Rng;
use serde_json::json;

use super::{DiagnosticGradient, EnvDescriptor, Environment, LossProcess};
use crate::error::{Error, Result};
use crate::geometry::{sample_sphere, ConvexDomain};
use crate::rng::{Purpose, Streams};
use crate::Vector;

/// Linear losses `f_t(x) = ⟨μ ζ_t v, x⟩` with i.i.d. Rademacher signs `ζ_t`.
///
/// The lower-bound instance for prediction error: no history-measurable
/// hint beats `m_t = 0`, whose prediction error is exactly `T μ²`.
#[derive(Debug, Clone)]
pub struct LinearRademacher {
    scale: f64,
    direction: Vector,
    signs: Vec<f64>,
    s_target: f64,
    descriptor: EnvDescriptor,
}

/// Build the instance with `μ = √(S_target / T)`.
///
/// `v` is the diameter direction of the domain (random for balls). Fails when
/// `S_target > L²T`, i.e. when `μ` would exceed the Lipschitz cap.
pub fn make_linear_rademacher(
    domain: &ConvexDomain,
    horizon: usize,
    s_target: f64,
    lipschitz_cap: f64,
    seed: u64,
) -> Result<LinearRademacher> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    if !(s_target >= 0.0) {
        return Err(Error::InvalidConfig(format!("S_target must be non-negative, got {s_target}")));
    }
    let cap = lipschitz_cap * lipschitz_cap * horizon as f64;
    if s_target > cap {
        return Err(Error::InvalidConfig(format!(
            "S_target {s_target} exceeds L²T = {cap}: the scale μ would exceed L"
        )));
    }
    let streams = Streams::new(seed);
    let mut rng = streams.rng(Purpose::EnvSetup, 0);
    let direction = match domain.diameter_segment(&mut rng) {
        Some((_, v)) => v.into_inner(),
        None => sample_sphere(domain.dim(), &mut rng).into_inner(),
    };
    let signs = (0..horizon)
        .map(|t| if streams.rng(Purpose::EnvRound, t as u64).random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    Ok(LinearRademacher {
        scale: (s_target / horizon as f64).sqrt(),
        direction,
        signs,
        s_target,
        descriptor: EnvDescriptor {
            kind: "linear_rademacher".into(),
            params: json!({
                "dim": domain.dim(), "horizon": horizon, "s_target": s_target, "lipschitz_cap": lipschitz_cap,
            }),
            seed: Some(seed),
        },
    })
}

impl LinearRademacher {
    /// `μ`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    /// Realised signs `ζ_t`.
    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Replace the realised signs (hand-built instances in tests and examples).
    pub fn with_signs(mut self, signs: Vec<f64>) -> Result<Self> {
        if signs.len() != self.signs.len() || signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::InvalidInput("signs must be ±1 and match the horizon".into()));
        }
        self.signs = signs;
        Ok(self)
    }
}

impl LossProcess for LinearRademacher {
    fn dim(&self) -> usize {
        self.direction.len()
    }

    fn horizon(&self) -> usize {
        self.signs.len()
    }

    fn eval(&self, x: &Vector, t: usize) -> f64 {
        self.scale * self.signs[t] * self.direction.dot(x)
    }

    fn lipschitz(&self) -> f64 {
        self.scale
    }

    fn smoothness(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl DiagnosticGradient for LinearRademacher {
    fn gradient(&self, _x: &Vector, t: usize) -> Vector {
        &self.direction * (self.scale * self.signs[t])
    }
}

impl Environment for LinearRademacher {
    fn descriptor(&self) -> EnvDescriptor {
        self.descriptor.clone()
    }

    fn analytic_minimizer(&self, domain: &ConvexDomain, horizon: usize) -> Option<Vector> {
        let n = horizon.min(self.signs.len());
        let total: f64 = self.signs[..n].iter().sum();
        domain.minimize_linear(&(&self.direction * (self.scale * total)))
    }

    fn nominal_prediction_error(&self) -> Option<f64> {
        Some(self.s_target)
    }
}

/// A fixed linear loss `⟨g, x⟩` repeated for `horizon` rounds.
#[derive(Debug, Clone)]
pub struct FixedLinear {
    gradient: Vector,
    horizon: usize,
}

impl FixedLinear {
    pub fn new(gradient: Vector, horizon: usize) -> Self {
        Self { gradient, horizon }
    }
}

impl LossProcess for FixedLinear {
    fn dim(&self) -> usize {
        self.gradient.len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn eval(&self, x: &Vector, _t: usize) -> f64 {
        self.gradient.dot(x)
    }

    fn lipschitz(&self) -> f64 {
        self.gradient.norm()
    }

    fn smoothness(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl DiagnosticGradient for FixedLinear {
    fn gradient(&self, _x: &Vector, _t: usize) -> Vector {
        self.gradient.clone()
    }
}

impl Environment for FixedLinear {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            kind: "fixed_linear".into(),
            params: json!({ "gradient": self.gradient.as_slice(), "horizon": self.horizon }),
            seed: None,
        }
    }

    fn analytic_minimizer(&self, domain: &ConvexDomain, _horizon: usize) -> Option<Vector> {
        domain.minimize_linear(&self.gradient)
    }

    fn nominal_prediction_error(&self) -> Option<f64> {
        Some(self.gradient.norm_squared() * self.horizon as f64)
    }

    fn stationary(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::solve_static_comparator;

    #[test]
    fn zero_target_gives_zero_losses() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        let env = make_linear_rademacher(&domain, 20, 0.0, 1.0, 1).unwrap();
        let x = Vector::from_column_slice(&[0.3, 0.1, -0.2]);
        assert!((0..20).all(|t| env.eval(&x, t) == 0.0));
    }

    #[test]
    fn unit_target_per_round_gives_unit_scale() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let env = make_linear_rademacher(&domain, 64, 64.0, 1.0, 1).unwrap();
        assert_eq!(env.scale(), 1.0);
        let s: f64 = (0..64).map(|t| env.gradient(&Vector::zeros(2), t).norm_squared()).sum();
        assert!((s - 64.0).abs() < 1e-9);
    }

    #[test]
    fn excess_target_is_rejected() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        assert!(matches!(make_linear_rademacher(&domain, 10, 10.5, 1.0, 1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn balanced_four_round_instance() {
        // ζ = (+,−,−,+): Σζ = 0, so the best fixed loss is −(μD/2)|Σζ| = 0
        let domain = ConvexDomain::ball(1, 1.0).unwrap();
        let env = make_linear_rademacher(&domain, 4, 4.0, 1.0, 5)
            .unwrap()
            .with_signs(vec![1.0, -1.0, -1.0, 1.0])
            .unwrap();
        let c = solve_static_comparator(&env, &domain, 4);
        let best: f64 = (0..4).map(|t| env.eval(&c.static_opt, t)).sum();
        assert_eq!(best, 0.0);
    }

    #[test]
    fn comparator_on_ball_is_opposite_boundary_point() {
        let domain = ConvexDomain::ball(3, 2.0).unwrap();
        let env = make_linear_rademacher(&domain, 101, 50.0, 1.0, 8).unwrap();
        let w: f64 = env.signs().iter().sum();
        let c = solve_static_comparator(&env, &domain, 101);
        let expect = env.direction() * (-2.0 * w.signum());
        assert!((c.static_opt - expect).norm() < 1e-12);
    }
}
