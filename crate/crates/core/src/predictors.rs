//! Gradient hints `m_t`.
//!
//! A predictor sees only what the learner has observed before round `t` and
//! its output is always clipped to the ball of radius `L`. The first hint of
//! a run is `0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::clip_to_ball;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    /// `m_t = 0`.
    Zero,
    /// The previous round's estimate `ĝ_{t−1}`.
    LastEstimate,
    /// Most recent finite-difference slope per coordinate.
    CoordinatePersistent,
    /// `∇f_{t−1}(x_{t−1})`. Uses exact gradients, so it is not a bandit predictor.
    OraclePrevGrad,
}

impl PredictorKind {
    /// Whether the predictor only uses information a bandit learner observes.
    pub fn admissible(self) -> bool {
        !matches!(self, PredictorKind::OraclePrevGrad)
    }
}

/// What a predictor may look at when forming `m_t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HistoryView<'a> {
    /// Current round (0-based).
    pub round: usize,
    /// `ĝ_{t−1}`, absent at the first round.
    pub last_estimate: Option<&'a Vector>,
    /// `∇f_{t−1}(x_{t−1})`, only supplied to diagnostic predictors.
    pub diagnostic_prev_grad: Option<&'a Vector>,
}

#[derive(Debug, Clone)]
pub struct Predictor {
    kind: PredictorKind,
    clip_radius: f64,
    stored: Vector,
}

impl Predictor {
    pub fn new(kind: PredictorKind, dim: usize, clip_radius: f64) -> Self {
        Self { kind, clip_radius: clip_radius.max(0.0), stored: Vector::zeros(dim) }
    }

    pub fn kind(&self) -> PredictorKind {
        self.kind
    }

    pub fn clip_radius(&self) -> f64 {
        self.clip_radius
    }

    pub fn dim(&self) -> usize {
        self.stored.len()
    }

    /// `m_t`, clipped to the `L`-ball.
    pub fn predict(&self, view: &HistoryView<'_>) -> Vector {
        let raw = match self.kind {
            PredictorKind::Zero => return Vector::zeros(self.dim()),
            PredictorKind::CoordinatePersistent => return self.stored.clone(),
            PredictorKind::LastEstimate => view.last_estimate,
            PredictorKind::OraclePrevGrad => view.diagnostic_prev_grad,
        };
        match raw {
            Some(g) if view.round > 0 => clip_to_ball(g, self.clip_radius),
            _ => Vector::zeros(self.dim()),
        }
    }

    /// Write `v_hat` into coordinate `i` (0-based) and re-clip.
    pub fn update_coordinate(&mut self, i: usize, v_hat: f64) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::InvalidInput(format!("coordinate {i} out of range for dimension {}", self.dim())));
        }
        self.stored[i] = v_hat;
        self.stored = clip_to_ball(&self.stored, self.clip_radius);
        Ok(())
    }

    /// The stored coordinate vector (coordinate-persistent state).
    pub fn stored(&self) -> &Vector {
        &self.stored
    }
}
