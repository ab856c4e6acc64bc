use std::f64::consts::PI;

use rand::Rng;
use serde_json::json;

use super::{DiagnosticGradient, EnvDescriptor, Environment, LossProcess};
use crate::error::{Error, Result};
use crate::geometry::{sample_sphere, ConvexDomain, FEASIBILITY_TOL};
use crate::rng::{Purpose, Streams};
use crate::Vector;

/// `f_t(x) = (κ/2)‖x − c_t‖²` with a moving centre `c_t`.
///
/// Used both as the benign slowly drifting environment and, with the centres
/// exposed as comparators, for dynamic regret.
#[derive(Debug, Clone)]
pub struct QuadraticDrift {
    curvature: f64,
    centers: Vec<Vector>,
    lipschitz: f64,
    dynamic: bool,
    descriptor: EnvDescriptor,
}

impl QuadraticDrift {
    /// Explicit centre sequence; the horizon is `centers.len()`.
    ///
    /// `L = κ(D + max‖c_t‖)` where `D` is the domain diameter.
    pub fn from_centers(domain: &ConvexDomain, curvature: f64, centers: Vec<Vector>) -> Result<Self> {
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::InvalidConfig(format!("curvature must be positive, got {curvature}")));
        }
        if centers.is_empty() {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != domain.dim()) {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: c.len() });
        }
        let envelope = centers.iter().map(|c| c.norm()).fold(0.0, f64::max);
        Ok(Self {
            curvature,
            lipschitz: curvature * (domain.diameter() + envelope),
            dynamic: false,
            descriptor: EnvDescriptor {
                kind: "quadratic_explicit".into(),
                params: json!({ "curvature": curvature, "horizon": centers.len() }),
                seed: None,
            },
            centers,
        })
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }
}

/// Centres moving by exactly `step` per round inside the ball of radius `radius`.
///
/// In `d ≥ 2` the centres walk a circle of that radius in a random plane,
/// with chord length `step`; in `d = 1` they take `±step` moves, reversing at
/// the boundary.
fn drifting_centers(dim: usize, horizon: usize, step: f64, radius: f64, streams: &Streams) -> Result<Vec<Vector>> {
    if step > 2.0 * radius + 1e-15 {
        return Err(Error::InvalidConfig(format!(
            "per-round centre step {step} exceeds the centre envelope diameter {}",
            2.0 * radius
        )));
    }
    let mut rng = streams.rng(Purpose::EnvSetup, 0);
    if dim == 1 {
        let mut c: f64 = rng.random_range(-radius..=radius);
        let mut out = Vec::with_capacity(horizon);
        for t in 0..horizon {
            if t > 0 {
                let s = if streams.rng(Purpose::EnvRound, t as u64).random::<bool>() { 1.0 } else { -1.0 };
                let next = c + s * step;
                c = if next.abs() <= radius { next } else { c - s * step };
            }
            out.push(Vector::from_element(1, c));
        }
        return Ok(out);
    }
    // orthonormal pair spanning the plane of motion
    let e1 = sample_sphere(dim, &mut rng).into_inner();
    let e2 = loop {
        let u = sample_sphere(dim, &mut rng).into_inner();
        let w = &u - &e1 * e1.dot(&u);
        let n = w.norm();
        if n > 1e-6 {
            break w / n;
        }
    };
    let phase: f64 = rng.random_range(0.0..2.0 * PI);
    let omega = if radius > 0.0 { 2.0 * (step / (2.0 * radius)).min(1.0).asin() } else { 0.0 };
    Ok((0..horizon)
        .map(|t| {
            let a = phase + omega * t as f64;
            &e1 * (radius * a.cos()) + &e2 * (radius * a.sin())
        })
        .collect())
}

/// Slowly drifting quadratic: each centre moves by exactly `drift_rate`.
///
/// The centres live on a sphere of radius `center_radius` (which must keep
/// them feasible). At any fixed `x` consecutive gradients differ by exactly
/// `curvature·drift_rate`.
pub fn make_quadratic_drift(
    domain: &ConvexDomain,
    horizon: usize,
    drift_rate: f64,
    curvature: f64,
    center_radius: f64,
    seed: u64,
) -> Result<QuadraticDrift> {
    if !(drift_rate >= 0.0) {
        return Err(Error::InvalidConfig(format!("drift_rate must be non-negative, got {drift_rate}")));
    }
    check_center_radius(domain, center_radius)?;
    let streams = Streams::new(seed);
    let centers = drifting_centers(domain.dim(), horizon, drift_rate, center_radius, &streams)?;
    let mut env = QuadraticDrift::from_centers(domain, curvature, centers)?;
    env.descriptor = EnvDescriptor {
        kind: "quadratic_drift".into(),
        params: json!({
            "dim": domain.dim(), "horizon": horizon, "drift_rate": drift_rate,
            "curvature": curvature, "center_radius": center_radius,
        }),
        seed: Some(seed),
    };
    Ok(env)
}

/// Quadratic losses whose minimisers `c_t` have total path length `path_budget`.
///
/// The centres are exposed as the dynamic comparator. The circle radius is
/// `max(center_radius, step/2)` so that any budget up to `2·radius·(T−1)` is
/// met exactly; the resulting centres must be feasible.
pub fn make_dynamic_drift(
    domain: &ConvexDomain,
    horizon: usize,
    path_budget: f64,
    curvature: f64,
    center_radius: f64,
    seed: u64,
) -> Result<QuadraticDrift> {
    if !(path_budget >= 0.0) {
        return Err(Error::InvalidConfig(format!("path_budget must be non-negative, got {path_budget}")));
    }
    if path_budget > domain.diameter() * horizon as f64 {
        return Err(Error::InvalidConfig(format!(
            "path_budget {path_budget} exceeds D·T = {}",
            domain.diameter() * horizon as f64
        )));
    }
    if horizon < 2 && path_budget > 0.0 {
        return Err(Error::InvalidConfig("a positive path budget needs at least two rounds".into()));
    }
    let step = if horizon > 1 { path_budget / (horizon - 1) as f64 } else { 0.0 };
    let radius = center_radius.max(step / 2.0);
    let streams = Streams::new(seed);
    let centers = drifting_centers(domain.dim(), horizon, step, radius, &streams)?;
    if let Some(c) = centers.iter().find(|c| !domain.contains(c, FEASIBILITY_TOL)) {
        return Err(Error::InvalidConfig(format!(
            "path_budget {path_budget} forces infeasible comparator centres (e.g. norm {:.4})",
            c.norm()
        )));
    }
    let mut env = QuadraticDrift::from_centers(domain, curvature, centers)?;
    env.dynamic = true;
    env.descriptor = EnvDescriptor {
        kind: "dynamic_drift".into(),
        params: json!({
            "dim": domain.dim(), "horizon": horizon, "path_budget": path_budget,
            "curvature": curvature, "center_radius": center_radius,
        }),
        seed: Some(seed),
    };
    Ok(env)
}

fn check_center_radius(domain: &ConvexDomain, radius: f64) -> Result<()> {
    if !(radius >= 0.0 && radius <= domain.in_radius()) {
        return Err(Error::InvalidConfig(format!(
            "center_radius must lie in [0, r = {}], got {radius}",
            domain.in_radius()
        )));
    }
    Ok(())
}

impl LossProcess for QuadraticDrift {
    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn horizon(&self) -> usize {
        self.centers.len()
    }

    fn eval(&self, x: &Vector, t: usize) -> f64 {
        0.5 * self.curvature * (x - &self.centers[t]).norm_squared()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.curvature)
    }
}

impl DiagnosticGradient for QuadraticDrift {
    fn gradient(&self, x: &Vector, t: usize) -> Vector {
        (x - &self.centers[t]) * self.curvature
    }
}

impl Environment for QuadraticDrift {
    fn descriptor(&self) -> EnvDescriptor {
        self.descriptor.clone()
    }

    fn analytic_minimizer(&self, domain: &ConvexDomain, horizon: usize) -> Option<Vector> {
        // isotropic Hessian: the constrained minimiser is the projected mean centre
        let n = horizon.min(self.centers.len());
        let mean = self.centers[..n].iter().fold(Vector::zeros(self.dim()), |a, c| a + c) / n as f64;
        Some(domain.project_raw(&mean))
    }

    fn dynamic_comparator(&self) -> Option<&[Vector]> {
        self.dynamic.then_some(self.centers.as_slice())
    }

    fn stationary(&self) -> bool {
        self.centers.windows(2).all(|w| w[0] == w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::path_length;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn stationary_environment_has_constant_gradients() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        let env = make_quadratic_drift(&domain, 50, 0.0, 1.5, 0.5, 9).unwrap();
        let x = v(&[0.1, -0.2, 0.3]);
        let g0 = env.gradient(&x, 0);
        for t in 1..50 {
            assert_eq!(env.gradient(&x, t), g0);
        }
        assert!(env.stationary());
    }

    #[test]
    fn alternating_centres_change_gradient_by_h() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let h = 0.3;
        let centers = (0..6).map(|t| if t % 2 == 0 { v(&[0.0, 0.0]) } else { v(&[h, 0.0]) }).collect();
        let env = QuadraticDrift::from_centers(&domain, 1.0, centers).unwrap();
        let x = v(&[0.2, 0.7]);
        for t in 1..6 {
            let diff = (env.gradient(&x, t) - env.gradient(&x, t - 1)).norm();
            assert!((diff - h).abs() < 1e-15);
        }
    }

    #[test]
    fn drift_step_is_exact() {
        for d in [1, 2, 5] {
            let domain = ConvexDomain::ball(d, 1.0).unwrap();
            let env = make_quadratic_drift(&domain, 200, 0.01, 1.0, 0.5, 3).unwrap();
            for w in env.centers().windows(2) {
                assert!(((&w[1] - &w[0]).norm() - 0.01).abs() < 1e-12);
            }
            assert!(env.centers().iter().all(|c| c.norm() <= 0.5 + 1e-12));
        }
    }

    #[test]
    fn declared_lipschitz_uses_diameter_and_envelope() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let env = make_quadratic_drift(&domain, 10, 0.01, 2.0, 0.5, 3).unwrap();
        assert!((env.lipschitz() - 2.0 * (2.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn dynamic_drift_meets_path_budget() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        for budget in [0.0, 4.0, 16.0, 256.0] {
            let env = make_dynamic_drift(&domain, 2_000, budget, 1.0, 0.5, 1).unwrap();
            let p = path_length(env.dynamic_comparator().unwrap());
            assert!((p - budget).abs() <= 0.01 * budget + 1e-12, "{p} vs {budget}");
        }
    }

    #[test]
    fn dynamic_drift_rejects_excess_budget() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        assert!(matches!(make_dynamic_drift(&domain, 10, 21.0, 1.0, 0.5, 1), Err(Error::InvalidConfig(_))));
    }
}
