use serde_json::json;

use super::session::{drive, Learner, Query, RoundCtx, RoundOutcome};
use super::{AlgorithmDescriptor, Bandit, RunSpec, StaticParams};
use crate::error::Result;
use crate::estimators::{vr_two_point, EstimateRecord, TwoPointObservation};
use crate::geometry::{sample_sphere, ConvexDomain, ShrunkenDomain, UnitDirection};
use crate::metrics::RunReport;
use crate::predictors::PredictorKind;
use crate::rng::Purpose;
use crate::Vector;

/// One round of the two-sequence optimistic update.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticStep {
    /// Centre `y_t = Π(y′_t − ηm_t)`.
    pub y: Vector,
    /// Charged point `y_t + δv_t`.
    pub x: Vector,
    /// Mirrored query `y_t − δv_t`.
    pub x_mirror: Vector,
    pub f_plus: f64,
    pub f_minus: f64,
    pub estimate: EstimateRecord,
    /// `y′_{t+1} = Π(y′_t − ηĝ_t)`.
    pub y_prime_next: Vector,
}

/// Play one round of TP-VR-OPT from state `y′_t` along a given direction.
///
/// `shrunk` must be `X_α` for `params.alpha`.
pub fn step_tp_vr_opt(
    shrunk: &ShrunkenDomain<'_>,
    y_prime: &Vector,
    params: &StaticParams,
    hint: &Vector,
    direction: &UnitDirection,
    bandit: &mut Bandit<'_>,
    t: usize,
) -> Result<OptimisticStep> {
    let y = shrunk.project(&(y_prime - hint * params.eta))?;
    two_point_from_center(shrunk, y_prime, y, params, hint, direction, bandit, t)
}

/// Queries around a given centre `y` and the `y′` update.
#[allow(clippy::too_many_arguments)]
pub(crate) fn two_point_from_center(
    shrunk: &ShrunkenDomain<'_>,
    y_prime: &Vector,
    y: Vector,
    params: &StaticParams,
    hint: &Vector,
    direction: &UnitDirection,
    bandit: &mut Bandit<'_>,
    t: usize,
) -> Result<OptimisticStep> {
    let offset = direction.as_vector() * params.delta;
    let x = &y + &offset;
    let x_mirror = &y - &offset;
    let f_plus = bandit.query(&x, t)?;
    let f_minus = bandit.query(&x_mirror, t)?;
    let obs = TwoPointObservation { f_plus, f_minus, delta: params.delta, direction };
    let estimate = vr_two_point(&obs, hint, y.len())?;
    let y_prime_next = shrunk.project_raw(&(y_prime - &estimate.g_hat * params.eta));
    Ok(OptimisticStep { y, x, x_mirror, f_plus, f_minus, estimate, y_prime_next })
}

/// `(lhs, rhs)` of `⟨ĝ, y − y*⟩ ≤ (‖y*−y′‖² − ‖y*−y′₊‖²)/(2η) + η‖ĝ−m‖²`.
pub(crate) fn one_step_terms(
    step_g: &Vector,
    y: &Vector,
    y_prime: &Vector,
    y_prime_next: &Vector,
    y_star: &Vector,
    eta: f64,
    residual_sq: f64,
) -> Option<(f64, f64)> {
    (eta > 0.0).then(|| {
        let lhs = step_g.dot(&(y - y_star));
        let rhs = ((y_star - y_prime).norm_squared() - (y_star - y_prime_next).norm_squared()) / (2.0 * eta)
            + eta * residual_sq;
        (lhs, rhs)
    })
}

pub(crate) fn initial_point(domain: &ConvexDomain) -> Vector {
    domain.project_raw(&Vector::zeros(domain.dim()))
}

struct TpVrOpt<'d> {
    shrunk: ShrunkenDomain<'d>,
    params: StaticParams,
    predictor: PredictorKind,
    y_prime: Vector,
}

impl Learner for TpVrOpt<'_> {
    fn descriptor(&self) -> AlgorithmDescriptor {
        AlgorithmDescriptor {
            kind: "tp_vr_opt".into(),
            predictor: Some(self.predictor),
            params: json!({ "eta": self.params.eta, "delta": self.params.delta, "alpha": self.params.alpha }),
        }
    }

    fn round(&mut self, ctx: RoundCtx<'_, '_>) -> Result<RoundOutcome> {
        let dim = self.y_prime.len();
        let v = sample_sphere(dim, &mut ctx.streams.rng(Purpose::Direction, ctx.t as u64));
        let step = step_tp_vr_opt(&self.shrunk, &self.y_prime, &self.params, ctx.hint, &v, ctx.bandit, ctx.t)?;
        let one_step = ctx.comparator.and_then(|x_star| {
            let y_star = self.shrunk.project_raw(x_star);
            one_step_terms(
                &step.estimate.g_hat,
                &step.y,
                &self.y_prime,
                &step.y_prime_next,
                &y_star,
                self.params.eta,
                step.estimate.residual_sq,
            )
        });
        self.y_prime = step.y_prime_next;
        Ok(RoundOutcome {
            y: step.y,
            x: step.x,
            x_aux: Some(step.x_mirror),
            query: Query::Sphere(v),
            observations: vec![step.f_plus, step.f_minus],
            loss: step.f_plus,
            g_hat: step.estimate.g_hat,
            residual_sq: step.estimate.residual_sq,
            bounded: true,
            eta: self.params.eta,
            delta: self.params.delta,
            doubling: None,
            one_step,
            hedge: None,
        })
    }
}

/// TP-VR-OPT with fixed `(η, δ)`.
pub fn run_tp_vr_opt(spec: &RunSpec<'_>, predictor: PredictorKind, params: StaticParams) -> Result<RunReport> {
    let params = StaticParams::new(params.eta, params.delta, spec.domain.in_radius())?;
    let shrunk = ShrunkenDomain::new(spec.domain, params.alpha)?;
    let y_prime = shrunk.project_raw(&initial_point(spec.domain));
    let mut learner = TpVrOpt { shrunk, params, predictor, y_prime };
    drive(spec, &mut learner, predictor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::FixedLinear;

    #[test]
    fn one_dimensional_hand_trace() {
        let domain = ConvexDomain::boxed(vec![1.0]).unwrap();
        let params = StaticParams::new(0.5, 0.1, 1.0).unwrap();
        assert!((params.alpha - 0.1).abs() < 1e-15);
        let shrunk = ShrunkenDomain::new(&domain, params.alpha).unwrap();
        let env = FixedLinear::new(Vector::from_element(1, 1.0), 1);
        let mut bandit = Bandit::new(&env);
        let v = UnitDirection::basis(1, 0).unwrap();
        let m = Vector::from_element(1, 1.0);
        let step = step_tp_vr_opt(&shrunk, &Vector::zeros(1), &params, &m, &v, &mut bandit, 0).unwrap();
        assert_eq!(step.y[0], -0.5);
        assert!(step.estimate.residual.abs() < 1e-15);
        assert!((step.estimate.g_hat[0] - 1.0).abs() < 1e-15);
        assert!((step.y_prime_next[0] + 0.5).abs() < 1e-15);
        assert_eq!(bandit.queries(), 2);
    }

    #[test]
    fn frozen_learner() {
        let domain = ConvexDomain::ball(2, 1.0).unwrap();
        let params = StaticParams::new(0.0, 0.2, 1.0).unwrap();
        let shrunk = ShrunkenDomain::new(&domain, params.alpha).unwrap();
        let env = FixedLinear::new(Vector::from_column_slice(&[0.3, -0.2]), 1);
        let mut bandit = Bandit::new(&env);
        let y0 = Vector::from_column_slice(&[0.1, 0.2]);
        let v = UnitDirection::normalize(Vector::from_column_slice(&[1.0, 1.0])).unwrap();
        let m = Vector::from_column_slice(&[0.7, 0.7]);
        let step = step_tp_vr_opt(&shrunk, &y0, &params, &m, &v, &mut bandit, 0).unwrap();
        assert_eq!(step.y, y0);
        assert_eq!(step.y_prime_next, y0);
    }

    #[test]
    fn perfect_hint_makes_sequences_coincide() {
        let domain = ConvexDomain::ball(3, 1.0).unwrap();
        let params = StaticParams::new(0.3, 0.1, 1.0).unwrap();
        let shrunk = ShrunkenDomain::new(&domain, params.alpha).unwrap();
        let g = Vector::from_column_slice(&[0.5, -1.0, 2.0]);
        let env = FixedLinear::new(g.clone(), 1);
        let mut bandit = Bandit::new(&env);
        let v = UnitDirection::normalize(Vector::from_column_slice(&[0.2, 0.4, -1.0])).unwrap();
        let y0 = Vector::from_column_slice(&[0.1, 0.0, -0.2]);
        let step = step_tp_vr_opt(&shrunk, &y0, &params, &g, &v, &mut bandit, 0).unwrap();
        assert!((step.y_prime_next - step.y).norm() < 1e-12);
    }
}
