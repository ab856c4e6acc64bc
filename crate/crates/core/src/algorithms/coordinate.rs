use serde_json::json;

use super::session::{drive, Learner, Query, RoundCtx, RoundOutcome};
use super::tp_vr_opt::initial_point;
use super::{AlgorithmDescriptor, RunSpec, StaticParams};
use crate::error::Result;
use crate::estimators::coordinate_estimate;
use crate::geometry::{sample_basis_direction, ShrunkenDomain};
use crate::metrics::RunReport;
use crate::predictors::PredictorKind;
use crate::rng::Purpose;
use crate::Vector;

struct CoordinateVariant<'d> {
    shrunk: ShrunkenDomain<'d>,
    params: StaticParams,
    y_prime: Vector,
}

impl Learner for CoordinateVariant<'_> {
    fn descriptor(&self) -> AlgorithmDescriptor {
        AlgorithmDescriptor {
            kind: "coordinate".into(),
            predictor: Some(PredictorKind::CoordinatePersistent),
            params: json!({ "eta": self.params.eta, "delta": self.params.delta, "alpha": self.params.alpha }),
        }
    }

    fn round(&mut self, ctx: RoundCtx<'_, '_>) -> Result<RoundOutcome> {
        let dim = self.y_prime.len();
        let (i, e) = sample_basis_direction(dim, &mut ctx.streams.rng(Purpose::Direction, ctx.t as u64));
        let m = ctx.hint;
        let y = self.shrunk.project_raw(&(&self.y_prime - m * self.params.eta));
        let offset = e.as_vector() * self.params.delta;
        let x = &y + &offset;
        let x_mirror = &y - &offset;
        let f_plus = ctx.bandit.query(&x, ctx.t)?;
        let f_minus = ctx.bandit.query(&x_mirror, ctx.t)?;
        let (est, slope) = coordinate_estimate(f_plus, f_minus, self.params.delta, i, m, dim)?;
        self.y_prime = self.shrunk.project_raw(&(&self.y_prime - &est.g_hat * self.params.eta));
        ctx.predictor.update_coordinate(i, slope)?;
        Ok(RoundOutcome {
            y,
            x,
            x_aux: Some(x_mirror),
            query: Query::Coordinate(i),
            observations: vec![f_plus, f_minus],
            loss: f_plus,
            g_hat: est.g_hat,
            residual_sq: est.residual_sq,
            bounded: true,
            eta: self.params.eta,
            delta: self.params.delta,
            doubling: None,
            one_step: None,
            hedge: None,
        })
    }
}

/// TP-VR-OPT with basis-direction sampling and the coordinate-persistent predictor.
pub fn run_coordinate_variant(spec: &RunSpec<'_>, params: StaticParams) -> Result<RunReport> {
    let params = StaticParams::new(params.eta, params.delta, spec.domain.in_radius())?;
    let shrunk = ShrunkenDomain::new(spec.domain, params.alpha)?;
    let y_prime = shrunk.project_raw(&initial_point(spec.domain));
    let mut learner = CoordinateVariant { shrunk, params, y_prime };
    drive(spec, &mut learner, PredictorKind::CoordinatePersistent)
}
