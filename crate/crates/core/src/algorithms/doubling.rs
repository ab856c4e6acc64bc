use serde_json::json;

use super::session::{drive, DoublingInfo, Learner, Query, RoundCtx, RoundOutcome};
use super::tp_vr_opt::{initial_point, one_step_terms, step_tp_vr_opt};
use super::{perturbation_radius, AlgorithmDescriptor, RunSpec, StaticParams};
use crate::error::Result;
use crate::geometry::{sample_sphere, ConvexDomain, ShrunkenDomain};
use crate::metrics::RunReport;
use crate::predictors::PredictorKind;
use crate::rng::Purpose;
use crate::Vector;

/// What changed at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoublingEvent {
    /// Same epoch as the previous round.
    Continue,
    /// A new phase: `H` doubled (or the first round), `S` reset to `S_min`.
    NewPhase,
    /// `S` doubled after the residual budget was exceeded.
    NewEpoch,
}

/// Time and sensitivity budgets of the doubling schedule.
///
/// Phases have time budget `H = 1, 2, 4, …`. Within a phase, `S` starts at
/// `S_min = max{1, L²}` and doubles (resetting `R`) whenever the accumulated
/// residual `R` exceeds `8dS`. A doubling triggered by the last round of a
/// phase is superseded by the phase reset.
#[derive(Debug, Clone)]
pub struct DoublingSchedule {
    dim: usize,
    s_min: f64,
    budget: usize,
    counter: usize,
    sensitivity: f64,
    residual: f64,
    phase: usize,
    epoch: usize,
    pending: bool,
    started: bool,
}

impl DoublingSchedule {
    pub fn new(dim: usize, lipschitz: f64) -> Self {
        let s_min = (lipschitz * lipschitz).max(1.0);
        Self {
            dim,
            s_min,
            budget: 1,
            counter: 0,
            sensitivity: s_min,
            residual: 0.0,
            phase: 0,
            epoch: 0,
            pending: false,
            started: false,
        }
    }

    /// Advance to the next round.
    pub fn begin_round(&mut self) -> DoublingEvent {
        if !self.started {
            self.started = true;
            return DoublingEvent::NewPhase;
        }
        if self.counter == self.budget {
            self.budget *= 2;
            self.counter = 0;
            self.phase += 1;
            self.epoch += 1;
            self.sensitivity = self.s_min;
            self.residual = 0.0;
            self.pending = false;
            return DoublingEvent::NewPhase;
        }
        if self.pending {
            self.pending = false;
            self.epoch += 1;
            return DoublingEvent::NewEpoch;
        }
        DoublingEvent::Continue
    }

    /// Account for `‖ĝ_t − m_t‖²`. Returns `R` before and after the addition.
    pub fn end_round(&mut self, residual_sq: f64) -> (f64, f64) {
        self.counter += 1;
        let before = self.residual;
        self.residual += residual_sq;
        let after = self.residual;
        if self.residual > self.threshold() {
            self.sensitivity *= 2.0;
            self.residual = 0.0;
            self.pending = true;
        }
        (before, after)
    }

    /// `8dS`.
    pub fn threshold(&self) -> f64 {
        8.0 * self.dim as f64 * self.sensitivity
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn counter(&self) -> usize {
        self.counter
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    /// Global epoch index (counts across phases).
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub(crate) fn info(&self, r_before: f64, r_after: f64, sensitivity: f64) -> DoublingInfo {
        DoublingInfo {
            phase: self.phase,
            epoch: self.epoch,
            budget: self.budget,
            sensitivity,
            s_min: self.s_min,
            r_before,
            r_after,
            threshold: 8.0 * self.dim as f64 * sensitivity,
        }
    }
}

/// `δ = min{√S/(dβH), 1/(β√H), r/2}` for the current epoch.
pub(crate) fn epoch_delta(dim: usize, sensitivity: f64, budget: usize, beta: f64, in_radius: f64) -> f64 {
    let h = budget as f64;
    perturbation_radius(beta, [sensitivity.sqrt() / (dim as f64 * h), 1.0 / h.sqrt()], in_radius)
}

/// Smoothness used for tuning; non-smooth losses take the `r/2` branch.
pub(crate) fn tuning_beta(beta: Option<f64>) -> f64 {
    beta.unwrap_or(0.0)
}

struct TpVrOptPlus<'d> {
    domain: &'d ConvexDomain,
    schedule: DoublingSchedule,
    params: StaticParams,
    beta: f64,
    predictor: PredictorKind,
    y_prime: Vector,
}

impl TpVrOptPlus<'_> {
    fn retune(&mut self) {
        let dim = self.domain.dim();
        let s = self.schedule.sensitivity();
        let r = self.domain.in_radius();
        let eta = self.domain.diameter() / (8.0 * dim as f64 * s).sqrt();
        let delta = epoch_delta(dim, s, self.schedule.budget(), self.beta, r);
        self.params = StaticParams { eta, delta, alpha: delta / r };
        let shrunk = ShrunkenDomain::unchecked(self.domain, self.params.alpha);
        self.y_prime = shrunk.project_raw(&self.y_prime);
    }
}

impl Learner for TpVrOptPlus<'_> {
    fn descriptor(&self) -> AlgorithmDescriptor {
        AlgorithmDescriptor {
            kind: "tp_vr_opt_plus".into(),
            predictor: Some(self.predictor),
            params: json!({ "s_min": self.schedule.s_min() }),
        }
    }

    fn round(&mut self, ctx: RoundCtx<'_, '_>) -> Result<RoundOutcome> {
        if self.schedule.begin_round() != DoublingEvent::Continue {
            self.retune();
        }
        let shrunk = ShrunkenDomain::unchecked(self.domain, self.params.alpha);
        let v = sample_sphere(self.domain.dim(), &mut ctx.streams.rng(Purpose::Direction, ctx.t as u64));
        let step = step_tp_vr_opt(&shrunk, &self.y_prime, &self.params, ctx.hint, &v, ctx.bandit, ctx.t)?;
        let one_step = ctx.comparator.and_then(|x_star| {
            one_step_terms(
                &step.estimate.g_hat,
                &step.y,
                &self.y_prime,
                &step.y_prime_next,
                &shrunk.project_raw(x_star),
                self.params.eta,
                step.estimate.residual_sq,
            )
        });
        let sensitivity = self.schedule.sensitivity();
        let (r_before, r_after) = self.schedule.end_round(step.estimate.residual_sq);
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
            doubling: Some(self.schedule.info(r_before, r_after, sensitivity)),
            one_step,
            hedge: None,
        })
    }
}

/// Parameter-free TP-VR-OPT with time and sensitivity doubling.
pub fn run_tp_vr_opt_plus(spec: &RunSpec<'_>, predictor: PredictorKind) -> Result<RunReport> {
    let mut learner = TpVrOptPlus {
        domain: spec.domain,
        schedule: DoublingSchedule::new(spec.domain.dim(), spec.env.lipschitz()),
        params: StaticParams { eta: 0.0, delta: 0.0, alpha: 0.0 },
        beta: tuning_beta(spec.env.smoothness()),
        predictor,
        y_prime: initial_point(spec.domain),
    };
    drive(spec, &mut learner, predictor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_lengths_for_thirteen_rounds() {
        let mut s = DoublingSchedule::new(2, 0.0);
        let mut lengths = Vec::new();
        let mut budgets = Vec::new();
        for _ in 0..13 {
            if s.begin_round() == DoublingEvent::NewPhase {
                lengths.push(0);
                budgets.push(s.budget());
            }
            *lengths.last_mut().unwrap() += 1;
            s.end_round(0.0);
        }
        assert_eq!(lengths, vec![1, 2, 4, 6]);
        assert_eq!(budgets, vec![1, 2, 4, 8]);
    }

    #[test]
    fn sensitivity_doubles_after_threshold() {
        let mut s = DoublingSchedule::new(2, 1.0);
        // skip the short phases so that one phase spans the trace
        for _ in 0..7 {
            s.begin_round();
            s.end_round(0.0);
        }
        assert_eq!(s.begin_round(), DoublingEvent::NewPhase);
        assert_eq!(s.budget(), 8);
        assert_eq!(s.threshold(), 16.0);
        for k in 1..=4 {
            if k > 1 {
                assert_eq!(s.begin_round(), DoublingEvent::Continue);
            }
            let (before, after) = s.end_round(5.0);
            assert_eq!(before, 5.0 * (k - 1) as f64);
            assert_eq!(after, 5.0 * k as f64);
        }
        assert_eq!(s.sensitivity(), 2.0);
        assert_eq!(s.residual(), 0.0);
        assert_eq!(s.begin_round(), DoublingEvent::NewEpoch);
    }

    #[test]
    fn zero_residuals_never_double() {
        let mut s = DoublingSchedule::new(3, 0.5);
        for _ in 0..100 {
            assert_ne!(s.begin_round(), DoublingEvent::NewEpoch);
            s.end_round(0.0);
            assert_eq!(s.sensitivity(), 1.0);
        }
    }

    #[test]
    fn s_min_is_max_of_one_and_l_squared() {
        assert_eq!(DoublingSchedule::new(1, 0.3).s_min(), 1.0);
        assert_eq!(DoublingSchedule::new(1, 3.0).s_min(), 9.0);
    }
}
