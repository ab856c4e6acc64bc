//! Zeroth-order gradient estimators.
//!
//! All functions here are pure: issuing the queries is the learner's job.

use crate::error::{Error, Result};
use crate::geometry::UnitDirection;
use crate::Vector;

/// The two loss values observed in a two-point round.
#[derive(Debug, Clone, Copy)]
pub struct TwoPointObservation<'a> {
    /// `f_t(y + δv)`.
    pub f_plus: f64,
    /// `f_t(y − δv)`.
    pub f_minus: f64,
    pub delta: f64,
    pub direction: &'a UnitDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub g_hat: Vector,
    /// `Δ_t`, the observed difference net of the predicted directional change.
    pub residual: f64,
    /// `‖ĝ_t − m_t‖²`.
    pub residual_sq: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("perturbation radius must be positive, got {delta}")))
    }
}

/// Prediction-centred two-point estimator.
///
/// `ĝ = m + (d/2δ)·Δ·v` with `Δ = f₊ − f₋ − 2δ⟨m, v⟩`. Its deviation from `m`
/// reconstructs the residual `∇f − m` along `v`, so its second moment scales
/// with the prediction error.
pub fn vr_two_point(obs: &TwoPointObservation<'_>, m: &Vector, dim: usize) -> Result<EstimateRecord> {
    check_delta(obs.delta)?;
    let v = obs.direction.as_vector();
    let residual = obs.f_plus - obs.f_minus - 2.0 * obs.delta * m.dot(v);
    let coeff = dim as f64 / (2.0 * obs.delta) * residual;
    let g_hat = m + v * coeff;
    // ‖ĝ − m‖ = |coeff| because ‖v‖ = 1
    Ok(EstimateRecord { g_hat, residual, residual_sq: coeff * coeff * v.norm_squared() })
}

/// Classical two-point estimator `(d/2δ)(f₊ − f₋)·v`.
pub fn classical_two_point(obs: &TwoPointObservation<'_>, dim: usize) -> Result<Vector> {
    check_delta(obs.delta)?;
    Ok(obs.direction.as_vector() * (dim as f64 / (2.0 * obs.delta) * (obs.f_plus - obs.f_minus)))
}

/// Coordinate-sampling estimator.
///
/// With slope `v̂ = (f₊ − f₋)/(2δ)` along `e_i`, returns
/// `ĝ = m + d(v̂ − m_i)e_i` and `v̂` itself (for the coordinate predictor).
pub fn coordinate_estimate(
    f_plus: f64,
    f_minus: f64,
    delta: f64,
    coordinate: usize,
    m: &Vector,
    dim: usize,
) -> Result<(EstimateRecord, f64)> {
    check_delta(delta)?;
    if coordinate >= dim || m.len() != dim {
        return Err(Error::InvalidInput(format!("coordinate {coordinate} out of range for dimension {dim}")));
    }
    let slope = (f_plus - f_minus) / (2.0 * delta);
    let gap = slope - m[coordinate];
    let mut g_hat = m.clone();
    g_hat[coordinate] += dim as f64 * gap;
    let scaled = dim as f64 * gap;
    Ok((EstimateRecord { g_hat, residual: 2.0 * delta * gap, residual_sq: scaled * scaled }, slope))
}

/// Single-point estimator `(d/δ)·f(y + δv)·v`.
pub fn single_point_fkm(f_at_query: f64, delta: f64, direction: &UnitDirection, dim: usize) -> Result<Vector> {
    check_delta(delta)?;
    Ok(direction.as_vector() * (dim as f64 / delta * f_at_query))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn dir(xs: &[f64]) -> UnitDirection {
        UnitDirection::normalize(v(xs)).unwrap()
    }

    fn lin(g: &Vector, x: &Vector) -> f64 {
        g.dot(x)
    }

    fn observe<'a>(f: impl Fn(&Vector) -> f64, y: &Vector, delta: f64, d: &'a UnitDirection) -> TwoPointObservation<'a> {
        TwoPointObservation {
            f_plus: f(&(y + d.as_vector() * delta)),
            f_minus: f(&(y - d.as_vector() * delta)),
            delta,
            direction: d,
        }
    }

    /// The four axis directions and four diagonals in 2-D.
    fn symmetric_directions() -> Vec<UnitDirection> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [s, s], [-s, -s], [s, -s], [-s, s]]
            .iter()
            .map(|p| dir(p))
            .collect()
    }

    #[test]
    fn perfect_hint_cancels() {
        let g = v(&[0.3, -1.2, 0.5]);
        let d = dir(&[1.0, 2.0, -0.5]);
        let y = v(&[0.1, 0.1, 0.1]);
        let obs = observe(|x| lin(&g, x), &y, 0.05, &d);
        let est = vr_two_point(&obs, &g, 3).unwrap();
        assert!(est.residual.abs() < 1e-15);
        assert!((est.g_hat - &g).norm() < 1e-12);
    }

    #[test]
    fn symmetric_quadratic_at_minimiser() {
        let delta = 0.1;
        for d in symmetric_directions() {
            let obs = observe(|x| 0.5 * x.norm_squared(), &Vector::zeros(2), delta, &d);
            assert!((obs.f_plus - delta * delta / 2.0).abs() < 1e-15);
            let est = vr_two_point(&obs, &Vector::zeros(2), 2).unwrap();
            assert_eq!(est.residual, 0.0);
            assert_eq!(est.g_hat, Vector::zeros(2));
        }
    }

    #[test]
    fn diagonal_direction_hand_trace() {
        let g = v(&[1.0, 0.0]);
        let delta = 0.2;
        let d = dir(&[1.0, 1.0]);
        let obs = observe(|x| lin(&g, x), &Vector::zeros(2), delta, &d);
        let est = vr_two_point(&obs, &Vector::zeros(2), 2).unwrap();
        assert!((est.residual - 2.0 * delta / 2f64.sqrt()).abs() < 1e-15);
        assert!((est.g_hat - v(&[1.0, 1.0])).norm() < 1e-12);
        // averaging over the symmetric direction set recovers g
        let dirs = symmetric_directions();
        let mean = dirs.iter().fold(Vector::zeros(2), |acc, d| {
            acc + vr_two_point(&observe(|x| lin(&g, x), &Vector::zeros(2), delta, d), &Vector::zeros(2), 2)
                .unwrap()
                .g_hat
        }) / dirs.len() as f64;
        assert!((mean - g).norm() < 1e-12);
    }

    #[test]
    fn residual_sq_matches_definition() {
        let g = v(&[0.7, -0.1]);
        let m = v(&[0.2, 0.4]);
        let d = dir(&[0.3, 0.9]);
        let est = vr_two_point(&observe(|x| lin(&g, x), &v(&[0.1, 0.0]), 0.01, &d), &m, 2).unwrap();
        let direct = (&est.g_hat - &m).norm_squared();
        assert!((est.residual_sq - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn classical_is_vr_with_zero_hint() {
        let f = |x: &Vector| (x[0] - 0.3).powi(2) + x[1].sin();
        let d = dir(&[0.4, -0.7]);
        let obs = observe(f, &v(&[0.2, 0.1]), 0.05, &d);
        let vr = vr_two_point(&obs, &Vector::zeros(2), 2).unwrap();
        assert_eq!(classical_two_point(&obs, 2).unwrap(), vr.g_hat);
    }

    #[test]
    fn classical_examples() {
        let d = dir(&[0.6, 0.8]);
        let obs = observe(|_| 4.2, &v(&[0.0, 0.0]), 0.1, &d);
        assert_eq!(classical_two_point(&obs, 2).unwrap(), Vector::zeros(2));

        let g = v(&[2.0, 0.0]);
        let delta = 0.5;
        let e1 = dir(&[1.0, 0.0]);
        let obs = observe(|x| lin(&g, x), &Vector::zeros(2), delta, &e1);
        assert_eq!(obs.f_plus - obs.f_minus, 2.0);
        assert_eq!(classical_two_point(&obs, 2).unwrap(), v(&[4.0, 0.0]));
        let axes: Vec<UnitDirection> = symmetric_directions().into_iter().take(4).collect();
        let mean = axes.iter().fold(Vector::zeros(2), |acc, d| {
            acc + classical_two_point(&observe(|x| lin(&g, x), &Vector::zeros(2), delta, d), 2).unwrap()
        }) / 4.0;
        assert_eq!(mean, g);
    }

    #[test]
    fn coordinate_examples() {
        let g = v(&[3.0, 4.0]);
        let delta = 0.25;
        let y = Vector::zeros(2);
        let run = |i: usize, m: &Vector| {
            let mut e = Vector::zeros(2);
            e[i] = 1.0;
            coordinate_estimate(lin(&g, &(&y + &e * delta)), lin(&g, &(&y - &e * delta)), delta, i, m, 2).unwrap()
        };
        let (est, slope) = run(0, &Vector::zeros(2));
        assert_eq!(slope, 3.0);
        assert_eq!(est.g_hat, v(&[6.0, 0.0]));
        let mean = (est.g_hat + run(1, &Vector::zeros(2)).0.g_hat) / 2.0;
        assert_eq!(mean, g);
        for i in 0..2 {
            let (est, _) = run(i, &g);
            assert_eq!(est.g_hat, g);
            assert_eq!(est.residual_sq, 0.0);
        }
    }

    #[test]
    fn coordinate_index_out_of_range() {
        assert!(coordinate_estimate(1.0, 0.0, 0.1, 2, &Vector::zeros(2), 2).is_err());
    }

    #[test]
    fn single_point_examples() {
        let d = dir(&[0.0, 1.0]);
        assert_eq!(single_point_fkm(0.0, 0.1, &d, 2).unwrap(), Vector::zeros(2));
        assert_eq!(single_point_fkm(1.5, 1.0, &d, 2).unwrap(), v(&[0.0, 3.0]));

        let g = v(&[0.5, -2.0]);
        let delta = 0.1;
        let axes: Vec<UnitDirection> = symmetric_directions().into_iter().take(4).collect();
        let mean = axes.iter().fold(Vector::zeros(2), |acc, d| {
            acc + single_point_fkm(lin(&g, &(d.as_vector() * delta)), delta, d, 2).unwrap()
        }) / 4.0;
        assert!((mean - g).norm() < 1e-12);
    }

    #[test]
    fn zero_delta_is_rejected() {
        let d = dir(&[1.0]);
        let obs = TwoPointObservation { f_plus: 1.0, f_minus: 0.0, delta: 0.0, direction: &d };
        assert!(vr_two_point(&obs, &Vector::zeros(1), 1).is_err());
        assert!(classical_two_point(&obs, 1).is_err());
        assert!(coordinate_estimate(1.0, 0.0, 0.0, 0, &Vector::zeros(1), 1).is_err());
        assert!(single_point_fkm(1.0, 0.0, &d, 1).is_err());
    }
}
