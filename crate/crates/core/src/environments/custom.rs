use std::fmt;
use std::sync::Arc;

use serde_json::json;

use super::{DiagnosticGradient, EnvDescriptor, Environment, LossProcess};
use crate::Vector;

type EvalFn = Arc<dyn Fn(&Vector, usize) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vector, usize) -> Vector + Send + Sync>;

/// Loss sequence given by closures, with caller-declared constants.
///
/// Declarations are not checked on construction; run
/// [`certify_constants`](super::certify_constants) before relying on them.
#[derive(Clone)]
pub struct CustomProcess {
    name: String,
    dim: usize,
    horizon: usize,
    lipschitz: f64,
    smoothness: Option<f64>,
    eval: EvalFn,
    grad: GradFn,
}

impl fmt::Debug for CustomProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProcess")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl CustomProcess {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        horizon: usize,
        lipschitz: f64,
        smoothness: Option<f64>,
        eval: impl Fn(&Vector, usize) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vector, usize) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            horizon,
            lipschitz,
            smoothness,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
        }
    }

    /// `f_t ≡ c`.
    pub fn constant(dim: usize, horizon: usize, value: f64) -> Self {
        Self::new("constant", dim, horizon, 0.0, Some(0.0), move |_, _| value, move |_, _| Vector::zeros(dim))
    }
}

impl LossProcess for CustomProcess {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn eval(&self, x: &Vector, t: usize) -> f64 {
        (self.eval)(x, t)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }
}

impl DiagnosticGradient for CustomProcess {
    fn gradient(&self, x: &Vector, t: usize) -> Vector {
        (self.grad)(x, t)
    }
}

impl Environment for CustomProcess {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            kind: "custom".into(),
            params: json!({ "name": self.name, "dim": self.dim, "horizon": self.horizon }),
            seed: None,
        }
    }
}
