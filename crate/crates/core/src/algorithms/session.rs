//! Run driver: hints, accounting and invariant checks around a learner.

use super::{AlgorithmDescriptor, Bandit, RoundRecord, RunSpec};
use crate::environments::LossProcess;
use crate::error::{Error, Result};
use crate::geometry::{UnitDirection, FEASIBILITY_TOL};
use crate::metrics::{check_feasible_sequence, InvariantTally, PhaseSummary, RunReport, SCHEMA_VERSION};
use crate::predictors::{HistoryView, Predictor, PredictorKind};
use crate::rng::Streams;
use crate::Vector;

/// Relative slack on the deterministic `2dL` estimator bound.
const BOUND_RTOL: f64 = 1e-9;
/// Absolute slack on the one-step inequality.
pub(crate) const ONE_STEP_TOL: f64 = 1e-9;

pub(crate) enum Query {
    Sphere(UnitDirection),
    Coordinate(usize),
}

/// Doubling-schedule state attached to a round.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DoublingInfo {
    pub phase: usize,
    pub epoch: usize,
    pub budget: usize,
    /// `S` used for this round.
    pub sensitivity: f64,
    pub s_min: f64,
    /// `R` before this round's residual was added.
    pub r_before: f64,
    /// `R` after adding it, before any reset.
    pub r_after: f64,
    /// `8dS`.
    pub threshold: f64,
}

pub(crate) struct HedgeCheck {
    pub weight_sum_deviation: f64,
    pub min_weight: f64,
    /// `‖ℓ_t − M_t‖²_∞` and `D²‖ĝ_t − m_t‖²`, when checked.
    pub loss_gap: Option<(f64, f64)>,
}

pub(crate) struct RoundOutcome {
    pub y: Vector,
    pub x: Vector,
    pub x_aux: Option<Vector>,
    pub query: Query,
    pub observations: Vec<f64>,
    /// Loss charged at `x`.
    pub loss: f64,
    pub g_hat: Vector,
    pub residual_sq: f64,
    /// Whether `‖ĝ − m‖ ≤ 2dL` applies to this estimator.
    pub bounded: bool,
    pub eta: f64,
    pub delta: f64,
    pub doubling: Option<DoublingInfo>,
    /// `(lhs, rhs)` of the one-step inequality.
    pub one_step: Option<(f64, f64)>,
    pub hedge: Option<HedgeCheck>,
}

pub(crate) struct RoundCtx<'a, 'b> {
    pub t: usize,
    pub hint: &'a Vector,
    pub predictor: &'a mut Predictor,
    pub bandit: &'a mut Bandit<'b>,
    pub streams: &'a Streams,
    /// Static comparator, present when debug checks are enabled.
    pub comparator: Option<&'a Vector>,
    pub diameter: f64,
}

pub(crate) trait Learner {
    fn descriptor(&self) -> AlgorithmDescriptor;
    fn round(&mut self, ctx: RoundCtx<'_, '_>) -> Result<RoundOutcome>;
}

#[derive(Default)]
struct PhaseAcc {
    phase: usize,
    budget: usize,
    rounds: usize,
    last_epoch: Option<usize>,
    epochs: usize,
    final_sensitivity: f64,
    s_min: f64,
    residual: f64,
    prediction_error: f64,
}

impl PhaseAcc {
    fn summary(&self) -> PhaseSummary {
        PhaseSummary {
            phase: self.phase,
            budget: self.budget,
            rounds: self.rounds,
            epochs: self.epochs,
            initial_sensitivity: self.s_min,
            final_sensitivity: self.final_sensitivity,
            residual_observed: self.residual,
            prediction_error: self.prediction_error,
        }
    }
}

pub(crate) fn drive(spec: &RunSpec<'_>, learner: &mut dyn Learner, predictor_kind: PredictorKind) -> Result<RunReport> {
    let env = spec.env;
    let domain = spec.domain;
    let dim = domain.dim();
    if env.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: env.dim() });
    }
    if spec.horizon == 0 || spec.horizon > env.horizon() {
        return Err(Error::InvalidConfig(format!(
            "horizon {} must lie in 1..={} for this environment",
            spec.horizon,
            env.horizon()
        )));
    }
    let x_star = &spec.comparator.static_opt;
    if !domain.contains(x_star, FEASIBILITY_TOL) {
        return Err(Error::InvalidInput("static comparator lies outside the domain".into()));
    }
    let dynamic = match &spec.comparator.dynamic_seq {
        Some(seq) if seq.len() >= spec.horizon => {
            check_feasible_sequence(domain, &seq[..spec.horizon])?;
            Some(&seq[..spec.horizon])
        }
        Some(seq) => {
            return Err(Error::InvalidInput(format!(
                "comparator sequence has {} entries for {} rounds",
                seq.len(),
                spec.horizon
            )))
        }
        None => None,
    };

    let lipschitz = env.lipschitz();
    let bound = 2.0 * dim as f64 * lipschitz;
    let mut predictor = Predictor::new(predictor_kind, dim, lipschitz);
    let process: &dyn LossProcess = env;
    let mut bandit = Bandit::new(process);
    let streams = Streams::new(spec.seed);
    let debug = spec.options.debug_assert;

    let mut tally = InvariantTally::default();
    let mut trace = spec.options.trace.then(Vec::new);
    let mut phases: Vec<PhaseSummary> = Vec::new();
    let mut phase_acc: Option<PhaseAcc> = None;

    let mut last_estimate: Option<Vector> = None;
    let mut prev_grad: Option<Vector> = None;
    let (mut cum_loss, mut cmp_loss, mut dyn_loss) = (0.0, 0.0, 0.0);
    let (mut s_t, mut residual_sum, mut variation) = (0.0, 0.0, 0.0);

    for t in 0..spec.horizon {
        let diag = predictor_kind == PredictorKind::OraclePrevGrad;
        let view = HistoryView {
            round: t,
            last_estimate: last_estimate.as_ref(),
            diagnostic_prev_grad: if diag { prev_grad.as_ref() } else { None },
        };
        let hint = predictor.predict(&view);
        let out = learner.round(RoundCtx {
            t,
            hint: &hint,
            predictor: &mut predictor,
            bandit: &mut bandit,
            streams: &streams,
            comparator: debug.then_some(x_star),
            diameter: domain.diameter(),
        })?;

        cum_loss += out.loss;
        cmp_loss += env.eval(x_star, t);
        if let Some(seq) = dynamic {
            dyn_loss += env.eval(&seq[t], t);
        }
        let grad = env.gradient(&out.x, t);
        let pred_err = (&grad - &hint).norm_squared();
        s_t += pred_err;
        if t > 0 {
            variation += (&grad - env.gradient(&out.x, t - 1)).norm_squared();
        }
        residual_sum += out.residual_sq;

        if !domain.contains(&out.x, FEASIBILITY_TOL)
            || out.x_aux.as_ref().is_some_and(|a| !domain.contains(a, FEASIBILITY_TOL))
        {
            tally.infeasible_queries += 1;
        }
        if out.bounded {
            let norm = out.residual_sq.sqrt();
            tally.estimator_bound_checked += 1;
            if bound > 0.0 {
                tally.estimator_bound_max_ratio = tally.estimator_bound_max_ratio.max(norm / bound);
            }
            if norm > bound * (1.0 + BOUND_RTOL) + f64::EPSILON {
                tally.estimator_bound_violations += 1;
            }
        }
        if let Some((lhs, rhs)) = out.one_step {
            tally.one_step_checked += 1;
            let excess = lhs - rhs;
            tally.one_step_max_excess = if tally.one_step_checked == 1 { excess } else { tally.one_step_max_excess.max(excess) };
            if excess > ONE_STEP_TOL {
                tally.one_step_violations += 1;
            }
        }
        if let Some(h) = &out.hedge {
            tally.weight_sum_max_deviation = tally.weight_sum_max_deviation.max(h.weight_sum_deviation);
            tally.weight_min = tally.weight_min.min(h.min_weight);
            if let Some((gap, cap)) = h.loss_gap {
                tally.hedge_checked += 1;
                if gap > cap * (1.0 + BOUND_RTOL) + 1e-15 {
                    tally.hedge_violations += 1;
                }
            }
        }
        if let Some(info) = out.doubling {
            let full_epoch_cap = info.threshold + 4.0 * (dim * dim) as f64 * lipschitz * lipschitz;
            if info.r_before > info.threshold || info.r_after > full_epoch_cap * (1.0 + BOUND_RTOL) {
                tally.epoch_budget_violations += 1;
            }
            let acc = phase_acc.get_or_insert_with(PhaseAcc::default);
            if acc.rounds > 0 && acc.phase != info.phase {
                phases.push(acc.summary());
                *acc = PhaseAcc::default();
            }
            acc.phase = info.phase;
            acc.budget = info.budget;
            acc.s_min = info.s_min;
            acc.rounds += 1;
            if acc.last_epoch != Some(info.epoch) {
                acc.epochs += 1;
                acc.last_epoch = Some(info.epoch);
            }
            acc.final_sensitivity = info.sensitivity;
            acc.residual += out.residual_sq;
            acc.prediction_error += pred_err;
        }

        if let Some(tr) = trace.as_mut() {
            let (direction, coordinate) = match &out.query {
                Query::Sphere(v) => (Some(v.as_vector().as_slice().to_vec()), None),
                Query::Coordinate(i) => (None, Some(*i)),
            };
            tr.push(RoundRecord {
                t,
                phase: out.doubling.map(|d| d.phase),
                epoch: out.doubling.map(|d| d.epoch),
                y: out.y.as_slice().to_vec(),
                x: out.x.as_slice().to_vec(),
                direction,
                coordinate,
                observations: out.observations.clone(),
                hint: hint.as_slice().to_vec(),
                g_hat: out.g_hat.as_slice().to_vec(),
                residual_sq: out.residual_sq,
                loss: out.loss,
                eta: out.eta,
                delta: out.delta,
            });
        }

        prev_grad = Some(grad);
        last_estimate = Some(out.g_hat);
    }
    if let Some(acc) = phase_acc {
        phases.push(acc.summary());
    }
    for p in &phases {
        let cap = p.initial_sensitivity + p.residual_observed / (8.0 * dim as f64);
        if p.final_sensitivity > cap * (1.0 + BOUND_RTOL) {
            tally.phase_budget_violations += 1;
        }
    }

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        env: env.descriptor(),
        algorithm: learner.descriptor(),
        seed: spec.seed,
        horizon: spec.horizon,
        static_regret: cum_loss - cmp_loss,
        dynamic_regret: dynamic.map(|_| cum_loss - dyn_loss),
        path_length: dynamic.map(crate::metrics::path_length),
        prediction_error: s_t,
        residual_sum,
        gradient_variation: variation,
        cumulative_loss: cum_loss,
        comparator_loss: cmp_loss,
        queries: bandit.queries(),
        admissible_predictor: predictor_kind.admissible(),
        comparator_warning: spec.comparator.warning.clone(),
        phases,
        invariants: tally,
        trace,
    })
}

