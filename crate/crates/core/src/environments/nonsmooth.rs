use serde_json::json;

use super::{DiagnosticGradient, EnvDescriptor, Environment, LossProcess};
use crate::error::{Error, Result};
use crate::geometry::ConvexDomain;
use crate::Vector;

/// A convex, `L`-Lipschitz function on `[−1, 1]` that is not smooth at scale `δ`.
///
/// `f(x) = ∫_{−δ}^{x} g(s) ds` with the continuous nondecreasing slope
///
/// ```text
/// g(x) = −L                    on [−1, −δ]
///        L/3 + (4L/3)(x/δ)     on [−δ, 0]
///        L/3                   on [0, 1]
/// ```
///
/// The symmetric secant at radius `δ` is zero while `f′(0) = L/3`, so the
/// normalised remainder stays at `L/3` however small `δ` is.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseNonsmooth {
    lipschitz: f64,
    delta: f64,
    horizon: usize,
}

pub fn make_piecewise_nonsmooth(lipschitz: f64, delta: f64) -> Result<PiecewiseNonsmooth> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidConfig(format!("L must be positive, got {lipschitz}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(PiecewiseNonsmooth { lipschitz, delta, horizon: 1 })
}

impl PiecewiseNonsmooth {
    /// Repeat the same loss for `horizon` rounds.
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon.max(1);
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `g(x) = f′(x)`.
    pub fn slope(&self, x: f64) -> f64 {
        let (l, d) = (self.lipschitz, self.delta);
        if x <= -d {
            -l
        } else if x <= 0.0 {
            l / 3.0 + 4.0 * l / 3.0 * (x / d)
        } else {
            l / 3.0
        }
    }

    /// `f(x)`, integrated in closed form.
    pub fn value(&self, x: f64) -> f64 {
        let (l, d) = (self.lipschitz, self.delta);
        if x <= -d {
            -l * (x + d)
        } else if x <= 0.0 {
            l / 3.0 * (x + d) + 2.0 * l / (3.0 * d) * (x * x - d * d)
        } else {
            -l * d / 3.0 + l / 3.0 * x
        }
    }

    /// `f(y + h) − f(y − h) − 2h f′(y)` at `y = 0`.
    pub fn remainder(&self, h: f64) -> f64 {
        self.value(h) - self.value(-h) - 2.0 * h * self.slope(0.0)
    }

    /// `|(f(h) − f(−h))/(2h) − f′(0)|`.
    pub fn secant_gap(&self, h: f64) -> f64 {
        ((self.value(h) - self.value(-h)) / (2.0 * h) - self.slope(0.0)).abs()
    }
}

impl LossProcess for PiecewiseNonsmooth {
    fn dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn eval(&self, x: &Vector, _t: usize) -> f64 {
        self.value(x[0])
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn smoothness(&self) -> Option<f64> {
        None
    }
}

impl DiagnosticGradient for PiecewiseNonsmooth {
    fn gradient(&self, x: &Vector, _t: usize) -> Vector {
        Vector::from_element(1, self.slope(x[0]))
    }
}

impl Environment for PiecewiseNonsmooth {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            kind: "piecewise_nonsmooth".into(),
            params: json!({ "lipschitz": self.lipschitz, "delta": self.delta, "horizon": self.horizon }),
            seed: None,
        }
    }

    fn analytic_minimizer(&self, domain: &ConvexDomain, _horizon: usize) -> Option<Vector> {
        // g vanishes at x = −δ/4
        Some(domain.project_raw(&Vector::from_element(1, -self.delta / 4.0)))
    }

    fn stationary(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid-rule integral of the slope, independent of `value`.
    fn integrate(f: &PiecewiseNonsmooth, a: f64, b: f64) -> f64 {
        let n = 200_000;
        let h = (b - a) / n as f64;
        (0..n).map(|k| 0.5 * h * (f.slope(a + k as f64 * h) + f.slope(a + (k + 1) as f64 * h))).sum()
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let f = make_piecewise_nonsmooth(1.7, 0.3).unwrap();
        for x in [-1.0, -0.5, -0.3, -0.1, 0.0, 0.2, 1.0] {
            assert!((f.value(x) - integrate(&f, -0.3, x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn symmetric_values_and_kink_slope() {
        for l in [0.5, 1.0, 3.0] {
            for d in [0.5, 0.25, 0.1] {
                let f = make_piecewise_nonsmooth(l, d).unwrap();
                assert!((f.value(d) - f.value(-d)).abs() <= 1e-15 * l);
                assert_eq!(f.slope(0.0), l / 3.0);
                assert!((f.secant_gap(d) - l / 3.0).abs() <= 1e-12);
                assert!((f.remainder(d).abs() - 2.0 / 3.0 * l * d).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn remainder_for_smaller_probes() {
        // for h ≤ δ: r(h) = −(2L/(3δ)) h²
        let (l, d) = (2.0, 0.4);
        let f = make_piecewise_nonsmooth(l, d).unwrap();
        for h in [0.4, 0.3, 0.1, 0.01] {
            assert!((f.remainder(h) + 2.0 * l / (3.0 * d) * h * h).abs() <= 1e-12);
        }
    }

    #[test]
    fn convex_and_lipschitz() {
        let f = make_piecewise_nonsmooth(1.0, 0.2).unwrap();
        let xs: Vec<f64> = (0..=400).map(|k| -1.0 + k as f64 / 200.0).collect();
        for w in xs.windows(2) {
            assert!(f.slope(w[0]) <= f.slope(w[1]));
            assert!((f.value(w[1]) - f.value(w[0])).abs() <= (w[1] - w[0]) + 1e-15);
        }
    }

    #[test]
    fn delta_out_of_range_is_rejected() {
        assert!(make_piecewise_nonsmooth(1.0, 0.0).is_err());
        assert!(make_piecewise_nonsmooth(1.0, 1.0).is_err());
        assert!(make_piecewise_nonsmooth(-1.0, 0.5).is_err());
    }
}
