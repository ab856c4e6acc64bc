use serde_json::json;

use super::session::{drive, Learner, Query, RoundCtx, RoundOutcome};
use super::tp_vr_opt::initial_point;
use super::{AlgorithmDescriptor, RunSpec, StaticParams};
use crate::error::Result;
use crate::estimators::{classical_two_point, single_point_fkm, TwoPointObservation};
use crate::geometry::{sample_sphere, ShrunkenDomain};
use crate::metrics::RunReport;
use crate::predictors::PredictorKind;
use crate::rng::Purpose;
use crate::Vector;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Feedback {
    TwoPoint,
    SinglePoint,
}

/// Projected OGD on `X_α` driven by a hint-free estimator.
struct Baseline<'d> {
    feedback: Feedback,
    shrunk: ShrunkenDomain<'d>,
    params: StaticParams,
    y: Vector,
}

impl Learner for Baseline<'_> {
    fn descriptor(&self) -> AlgorithmDescriptor {
        let kind = match self.feedback {
            Feedback::TwoPoint => "two_point_ogd",
            Feedback::SinglePoint => "single_point_fkm",
        };
        AlgorithmDescriptor {
            kind: kind.into(),
            predictor: None,
            params: json!({ "eta": self.params.eta, "delta": self.params.delta, "alpha": self.params.alpha }),
        }
    }

    fn round(&mut self, ctx: RoundCtx<'_, '_>) -> Result<RoundOutcome> {
        let dim = self.y.len();
        let v = sample_sphere(dim, &mut ctx.streams.rng(Purpose::Direction, ctx.t as u64));
        let delta = self.params.delta;
        let offset = v.as_vector() * delta;
        let x = &self.y + &offset;
        let f_plus = ctx.bandit.query(&x, ctx.t)?;
        let (g_hat, x_aux, observations) = match self.feedback {
            Feedback::TwoPoint => {
                let mirror = &self.y - &offset;
                let f_minus = ctx.bandit.query(&mirror, ctx.t)?;
                let g = classical_two_point(&TwoPointObservation { f_plus, f_minus, delta, direction: &v }, dim)?;
                (g, Some(mirror), vec![f_plus, f_minus])
            }
            Feedback::SinglePoint => (single_point_fkm(f_plus, delta, &v, dim)?, None, vec![f_plus]),
        };
        let next = self.shrunk.project_raw(&(&self.y - &g_hat * self.params.eta));
        let y = std::mem::replace(&mut self.y, next);
        Ok(RoundOutcome {
            y,
            x,
            x_aux,
            query: Query::Sphere(v),
            observations,
            loss: f_plus,
            residual_sq: g_hat.norm_squared(),
            g_hat,
            bounded: self.feedback == Feedback::TwoPoint,
            eta: self.params.eta,
            delta,
            doubling: None,
            one_step: None,
            hedge: None,
        })
    }
}

fn run_baseline(spec: &RunSpec<'_>, params: StaticParams, feedback: Feedback) -> Result<RunReport> {
    let params = StaticParams::new(params.eta, params.delta, spec.domain.in_radius())?;
    let shrunk = ShrunkenDomain::new(spec.domain, params.alpha)?;
    let y = shrunk.project_raw(&initial_point(spec.domain));
    let mut learner = Baseline { feedback, shrunk, params, y };
    drive(spec, &mut learner, PredictorKind::Zero)
}

/// Projected OGD with the classical two-point estimator (hint `m_t = 0`).
pub fn run_baseline_two_point(spec: &RunSpec<'_>, params: StaticParams) -> Result<RunReport> {
    run_baseline(spec, params, Feedback::TwoPoint)
}

/// Projected OGD with the single-point spherical estimator.
pub fn run_baseline_single_point(spec: &RunSpec<'_>, params: StaticParams) -> Result<RunReport> {
    run_baseline(spec, params, Feedback::SinglePoint)
}
