use serde_json::json;

use super::doubling::{epoch_delta, tuning_beta, DoublingEvent, DoublingSchedule};
use super::session::{drive, HedgeCheck, Learner, Query, RoundCtx, RoundOutcome};
use super::tp_vr_opt::initial_point;
use super::{AlgorithmDescriptor, RunSpec};
use crate::error::Result;
use crate::estimators::{vr_two_point, TwoPointObservation};
use crate::geometry::{sample_sphere, ConvexDomain, ShrunkenDomain};
use crate::metrics::RunReport;
use crate::predictors::PredictorKind;
use crate::rng::Purpose;
use crate::Vector;

/// Step-size grid and Hedge parameters of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertGrid {
    /// `η₀ = D/√(16dS)`.
    pub eta0: f64,
    /// `N = max{2, ⌈log₂(DH/η₀)⌉ + 1}`.
    pub experts: usize,
    /// `ε = √(ln N)/(D√(8dS))`.
    pub meta_step: f64,
    /// `η_i = 2^{i−1}η₀`.
    pub step_sizes: Vec<f64>,
}

impl ExpertGrid {
    pub fn new(diameter: f64, dim: usize, sensitivity: f64, budget: usize) -> Self {
        let ds = dim as f64 * sensitivity;
        let eta0 = diameter / (16.0 * ds).sqrt();
        // absorb rounding so exact powers of two are not pushed up a level
        let levels = ((diameter * budget as f64 / eta0).log2() - 1e-12).ceil();
        let experts = (levels.max(0.0) as usize + 1).max(2);
        let meta_step = (experts as f64).ln().sqrt() / (diameter * (8.0 * ds).sqrt());
        let step_sizes = (0..experts).map(|i| eta0 * 2f64.powi(i as i32)).collect();
        Self { eta0, experts, meta_step, step_sizes }
    }

    /// `w_i = ((N+1)/N)·1/(i(i+1))` for `i = 1..N`.
    pub fn prior(&self) -> Vec<f64> {
        let n = self.experts as f64;
        (1..=self.experts).map(|i| (n + 1.0) / n / (i * (i + 1)) as f64).collect()
    }
}

/// `p_i ∝ exp(log w_i − ε ℓ̂_i)`, evaluated with the maximum exponent subtracted.
pub fn aggregation_weights(log_weights: &[f64], meta_step: f64, optimistic_losses: &[f64]) -> Vec<f64> {
    let exponents: Vec<f64> =
        log_weights.iter().zip(optimistic_losses).map(|(lw, l)| lw - meta_step * l).collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = exponents.iter().map(|e| (e - top).exp()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / z).collect()
}

struct Epoch<'d> {
    grid: ExpertGrid,
    shrunk: ShrunkenDomain<'d>,
    delta: f64,
    log_weights: Vec<f64>,
    states: Vec<Vector>,
}

struct TpVrOptPlusPlus<'d> {
    domain: &'d ConvexDomain,
    schedule: DoublingSchedule,
    beta: f64,
    predictor: PredictorKind,
    /// Last played aggregate; seeds every expert at an epoch start.
    carry: Vector,
    epoch: Option<Epoch<'d>>,
}

impl<'d> TpVrOptPlusPlus<'d> {
    fn start_epoch(&mut self) -> Epoch<'d> {
        let dim = self.domain.dim();
        let s = self.schedule.sensitivity();
        let r = self.domain.in_radius();
        let delta = epoch_delta(dim, s, self.schedule.budget(), self.beta, r);
        let shrunk = ShrunkenDomain::unchecked(self.domain, delta / r);
        let grid = ExpertGrid::new(self.domain.diameter(), dim, s, self.schedule.budget());
        let start = shrunk.project_raw(&self.carry);
        let log_weights = grid.prior().iter().map(|w| w.ln()).collect();
        let states = vec![start; grid.experts];
        Epoch { grid, shrunk, delta, log_weights, states }
    }
}

impl Learner for TpVrOptPlusPlus<'_> {
    fn descriptor(&self) -> AlgorithmDescriptor {
        AlgorithmDescriptor {
            kind: "tp_vr_opt_pp".into(),
            predictor: Some(self.predictor),
            params: json!({ "s_min": self.schedule.s_min() }),
        }
    }

    fn round(&mut self, ctx: RoundCtx<'_, '_>) -> Result<RoundOutcome> {
        if self.schedule.begin_round() != DoublingEvent::Continue || self.epoch.is_none() {
            self.epoch = Some(self.start_epoch());
        }
        let dim = self.domain.dim();
        let ep = self.epoch.as_mut().expect("epoch initialised above");
        let m = ctx.hint;

        let proposals: Vec<Vector> = ep
            .states
            .iter()
            .zip(&ep.grid.step_sizes)
            .map(|(s, eta)| ep.shrunk.project_raw(&(s - m * *eta)))
            .collect();
        let optimistic: Vec<f64> = proposals.iter().map(|y| m.dot(y)).collect();
        let p = aggregation_weights(&ep.log_weights, ep.grid.meta_step, &optimistic);
        let y = proposals.iter().zip(&p).fold(Vector::zeros(dim), |acc, (yi, pi)| acc + yi * *pi);

        let v = sample_sphere(dim, &mut ctx.streams.rng(Purpose::Direction, ctx.t as u64));
        let offset = v.as_vector() * ep.delta;
        let x = &y + &offset;
        let x_mirror = &y - &offset;
        let f_plus = ctx.bandit.query(&x, ctx.t)?;
        let f_minus = ctx.bandit.query(&x_mirror, ctx.t)?;
        let est = vr_two_point(&TwoPointObservation { f_plus, f_minus, delta: ep.delta, direction: &v }, m, dim)?;

        for (state, eta) in ep.states.iter_mut().zip(&ep.grid.step_sizes) {
            *state = ep.shrunk.project_raw(&(&*state - &est.g_hat * *eta));
        }
        for (lw, yi) in ep.log_weights.iter_mut().zip(&proposals) {
            *lw -= ep.grid.meta_step * est.g_hat.dot(yi);
        }
        let top = ep.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ep.log_weights.iter_mut().for_each(|lw| *lw -= top);

        let loss_gap = ctx.comparator.is_some().then(|| {
            let diff = &est.g_hat - m;
            let gap = proposals.iter().map(|yi| diff.dot(yi).powi(2)).fold(0.0, f64::max);
            (gap, ctx.diameter * ctx.diameter * est.residual_sq)
        });
        let hedge = HedgeCheck {
            weight_sum_deviation: (p.iter().sum::<f64>() - 1.0).abs(),
            min_weight: p.iter().copied().fold(0.0, f64::min),
            loss_gap,
        };

        let sensitivity = self.schedule.sensitivity();
        let (r_before, r_after) = self.schedule.end_round(est.residual_sq);
        self.carry = y.clone();
        Ok(RoundOutcome {
            y,
            x,
            x_aux: Some(x_mirror),
            query: Query::Sphere(v),
            observations: vec![f_plus, f_minus],
            loss: f_plus,
            g_hat: est.g_hat,
            residual_sq: est.residual_sq,
            bounded: true,
            eta: ep.grid.eta0,
            delta: ep.delta,
            doubling: Some(self.schedule.info(r_before, r_after, sensitivity)),
            one_step: None,
            hedge: Some(hedge),
        })
    }
}

/// Parameter-free TP-VR-OPT with an optimistic Hedge layer over a step-size grid.
pub fn run_tp_vr_opt_pp(spec: &RunSpec<'_>, predictor: PredictorKind) -> Result<RunReport> {
    let mut learner = TpVrOptPlusPlus {
        domain: spec.domain,
        schedule: DoublingSchedule::new(spec.domain.dim(), spec.env.lipschitz()),
        beta: tuning_beta(spec.env.smoothness()),
        predictor,
        carry: initial_point(spec.domain),
        epoch: None,
    };
    drive(spec, &mut learner, predictor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn grid_example() {
        let g = ExpertGrid::new(1.0, 1, 1.0, 4);
        assert_eq!(g.eta0, 0.25);
        assert_eq!(g.experts, 5);
        assert_eq!(g.step_sizes, vec![0.25, 0.5, 1.0, 2.0, 4.0]);
        let prior = g.prior();
        let expected = [0.6, 0.2, 0.1, 0.06, 0.04];
        for (a, b) in prior.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((g.meta_step - 5f64.ln().sqrt() / 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn at_least_two_experts() {
        assert_eq!(ExpertGrid::new(1.0, 1, 1e-6, 1).experts, 2);
    }

    #[test]
    fn prior_telescopes_exactly() {
        for n in 2..=40i64 {
            let total: Ratio<i64> = (1..=n).map(|i| Ratio::new(n + 1, n) * Ratio::new(1, i * (i + 1))).sum();
            assert_eq!(total, Ratio::from_integer(1));
        }
    }

    #[test]
    fn equal_optimistic_losses_return_the_prior() {
        let g = ExpertGrid::new(2.0, 3, 4.0, 64);
        let prior = g.prior();
        let lw: Vec<f64> = prior.iter().map(|w| w.ln()).collect();
        let p = aggregation_weights(&lw, g.meta_step, &vec![0.37; g.experts]);
        let z: f64 = prior.iter().sum();
        for (a, b) in p.iter().zip(&prior) {
            assert!((a - b / z).abs() < 1e-14);
        }
    }

    #[test]
    fn dominant_expert_takes_over_monotonically() {
        let g = ExpertGrid::new(1.0, 2, 1.0, 16);
        let eps = g.meta_step;
        let mut lw: Vec<f64> = g.prior().iter().map(|w| w.ln()).collect();
        let best = 2;
        let mut last = 0.0;
        for _ in 0..20 {
            let losses: Vec<f64> = (0..g.experts).map(|i| if i == best { 0.0 } else { 10.0 / eps }).collect();
            let p = aggregation_weights(&lw, eps, &losses);
            assert!(p[best] >= last);
            last = p[best];
            for (w, l) in lw.iter_mut().zip(&losses) {
                *w -= eps * l;
            }
        }
        assert!(last > 1.0 - 1e-12);
    }

    #[test]
    fn huge_losses_do_not_overflow() {
        let p = aggregation_weights(&[0.0, 0.0], 1.0, &[-1e6, -1e6 + 1.0]);
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
