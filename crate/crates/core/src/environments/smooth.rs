use serde_json::json;

use super::{DiagnosticGradient, EnvDescriptor, Environment, LossProcess};
use crate::Vector;

/// Stationary soft-max loss `f(x) = (1/κ) log Σ_i exp(κ x_i)`.
///
/// The gradient is the soft-max vector (norm at most 1, so `L = 1`) and the
/// Hessian `κ(diag(p) − ppᵀ)` has spectral norm below `κ`, so `β = κ`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    dim: usize,
    sharpness: f64,
    horizon: usize,
}

impl LogSumExp {
    pub fn new(dim: usize, sharpness: f64, horizon: usize) -> Self {
        assert!(sharpness > 0.0, "sharpness must be positive");
        Self { dim, sharpness, horizon }
    }

    fn softmax(&self, x: &Vector) -> Vector {
        let k = self.sharpness;
        let top = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e = x.map(|xi| (k * (xi - top)).exp());
        let z = e.sum();
        e / z
    }
}

impl LossProcess for LogSumExp {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn eval(&self, x: &Vector, _t: usize) -> f64 {
        let k = self.sharpness;
        let top = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + x.iter().map(|xi| (k * (xi - top)).exp()).sum::<f64>().ln() / k
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.sharpness)
    }
}

impl DiagnosticGradient for LogSumExp {
    fn gradient(&self, x: &Vector, _t: usize) -> Vector {
        self.softmax(x)
    }
}

impl Environment for LogSumExp {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            kind: "log_sum_exp".into(),
            params: json!({ "dim": self.dim, "sharpness": self.sharpness, "horizon": self.horizon }),
            seed: None,
        }
    }

    fn stationary(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::certify_constants;
    use crate::geometry::ConvexDomain;

    #[test]
    fn declared_constants_certify() {
        let domain = ConvexDomain::ball(4, 1.0).unwrap();
        for k in [0.5, 1.0, 4.0] {
            let env = LogSumExp::new(4, k, 1);
            let cert = certify_constants(&env, &domain, 1_000, 11);
            assert!(cert.holds(), "{cert:?}");
        }
    }
}
