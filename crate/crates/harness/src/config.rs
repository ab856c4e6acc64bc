//! Experiment configuration files.
//!
//! A configuration is a single TOML document. Unknown keys are rejected.
//! The schema is documented in the repository README; the `sweep` command
//! additionally requires a `[sweep]` table, which `run` refuses.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bco_core::predictors::PredictorKind;
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub horizon: usize,
    pub seeds: Seeds,
    /// First seed when `seeds` is a count. Overridden by `BCO_SEED`.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub debug_assert: bool,
    #[serde(default)]
    pub trace: bool,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub domain: DomainConfig,
    pub environment: EnvConfig,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmConfig>,
    pub sweep: Option<SweepAxis>,
}

/// Either an explicit list or a count of consecutive seeds from `base_seed`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Seeds {
    Count(usize),
    List(Vec<u64>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Ball { dim: usize, radius: f64 },
    Box { half_widths: Vec<f64> },
}

impl DomainConfig {
    pub fn dim(&self) -> usize {
        match self {
            DomainConfig::Ball { dim, .. } => *dim,
            DomainConfig::Box { half_widths } => half_widths.len(),
        }
    }
}

fn default_cap() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    /// `f_t ≡ value`.
    Constant {
        #[serde(default)]
        value: f64,
    },
    FixedLinear { gradient: Vec<f64> },
    LinearRademacher {
        s_target: f64,
        #[serde(default = "default_cap")]
        lipschitz_cap: f64,
    },
    QuadraticDrift { curvature: f64, drift_rate: f64, center_radius: f64 },
    DynamicDrift { curvature: f64, path_budget: f64, center_radius: f64 },
    SinglePointBarrier {
        sigma: f64,
        #[serde(default = "default_cap")]
        lipschitz_cap: f64,
    },
    LogSumExp { sharpness: f64 },
    PiecewiseNonsmooth { lipschitz: f64, delta: f64 },
}

impl EnvConfig {
    /// Overwrite the named numeric parameter (used by sweeps).
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), HarnessError> {
        let slot = match (self, name) {
            (EnvConfig::Constant { value: v }, "value") => v,
            (EnvConfig::LinearRademacher { s_target, .. }, "s_target") => s_target,
            (EnvConfig::LinearRademacher { lipschitz_cap, .. }, "lipschitz_cap") => lipschitz_cap,
            (EnvConfig::QuadraticDrift { curvature, .. }, "curvature") => curvature,
            (EnvConfig::QuadraticDrift { drift_rate, .. }, "drift_rate") => drift_rate,
            (EnvConfig::QuadraticDrift { center_radius, .. }, "center_radius") => center_radius,
            (EnvConfig::DynamicDrift { curvature, .. }, "curvature") => curvature,
            (EnvConfig::DynamicDrift { path_budget, .. }, "path_budget") => path_budget,
            (EnvConfig::DynamicDrift { center_radius, .. }, "center_radius") => center_radius,
            (EnvConfig::SinglePointBarrier { sigma, .. }, "sigma") => sigma,
            (EnvConfig::SinglePointBarrier { lipschitz_cap, .. }, "lipschitz_cap") => lipschitz_cap,
            (EnvConfig::LogSumExp { sharpness }, "sharpness") => sharpness,
            (EnvConfig::PiecewiseNonsmooth { lipschitz, .. }, "lipschitz") => lipschitz,
            (EnvConfig::PiecewiseNonsmooth { delta, .. }, "delta") => delta,
            (env, _) => {
                return Err(HarnessError::Config(format!(
                    "environment `{}` has no sweepable parameter `{name}`",
                    env.kind()
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EnvConfig::Constant { .. } => "constant",
            EnvConfig::FixedLinear { .. } => "fixed_linear",
            EnvConfig::LinearRademacher { .. } => "linear_rademacher",
            EnvConfig::QuadraticDrift { .. } => "quadratic_drift",
            EnvConfig::DynamicDrift { .. } => "dynamic_drift",
            EnvConfig::SinglePointBarrier { .. } => "single_point_barrier",
            EnvConfig::LogSumExp { .. } => "log_sum_exp",
            EnvConfig::PiecewiseNonsmooth { .. } => "piecewise_nonsmooth",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    TpVrOpt,
    TpVrOptPlus,
    TpVrOptPp,
    Coordinate,
    TwoPointOgd,
    SinglePointFkm,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::TpVrOpt => "tp_vr_opt",
            AlgorithmKind::TpVrOptPlus => "tp_vr_opt_plus",
            AlgorithmKind::TpVrOptPp => "tp_vr_opt_pp",
            AlgorithmKind::Coordinate => "coordinate",
            AlgorithmKind::TwoPointOgd => "two_point_ogd",
            AlgorithmKind::SinglePointFkm => "single_point_fkm",
        }
    }

    fn takes_predictor(self) -> bool {
        matches!(self, AlgorithmKind::TpVrOpt | AlgorithmKind::TpVrOptPlus | AlgorithmKind::TpVrOptPp)
    }

    fn self_tuning(self) -> bool {
        matches!(self, AlgorithmKind::TpVrOptPlus | AlgorithmKind::TpVrOptPp)
    }
}

/// A tuning input: a number, or `"oracle"` for the value derived from the environment.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Amount {
    Value(f64),
    Named(Oracle),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Oracle,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tuning {
    /// Self-tuning learners only.
    Auto,
    Manual { eta: f64, delta: f64 },
    Static { sensitivity: Amount },
    Dynamic { sensitivity: Amount, path_length: Amount },
    Coordinate { variation: Amount },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub predictor: Option<PredictorKind>,
    #[serde(default = "default_tuning")]
    pub tuning: Tuning,
    /// Column and file label; defaults to `kind` or `kind-predictor`.
    pub label: Option<String>,
}

fn default_tuning() -> Tuning {
    Tuning::Auto
}

impl AlgorithmConfig {
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match self.predictor {
            Some(p) => format!("{}-{}", self.kind.name(), predictor_name(p)),
            None => self.kind.name().to_string(),
        }
    }

    pub fn predictor_kind(&self) -> PredictorKind {
        self.predictor.unwrap_or(PredictorKind::Zero)
    }
}

pub fn predictor_name(p: PredictorKind) -> &'static str {
    match p {
        PredictorKind::Zero => "zero",
        PredictorKind::LastEstimate => "last_estimate",
        PredictorKind::CoordinatePersistent => "coordinate_persistent",
        PredictorKind::OraclePrevGrad => "oracle_prev_grad",
    }
}

/// Swept axis of a `sweep` configuration.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// `horizon` or a numeric environment parameter.
    pub axis: String,
    pub values: Vec<f64>,
    pub expected_slope: Option<SlopeAssertion>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SlopeAssertion {
    pub low: f64,
    pub high: f64,
    /// Restrict the assertion to one algorithm label.
    pub algorithm: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks that do not need an environment instance.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one [[algorithm]] table is required".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        let seeds = self.seed_list(None);
        if seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
            return bad("seeds must be distinct".into());
        }
        let mut labels = BTreeSet::new();
        for a in &self.algorithms {
            let label = a.label();
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate algorithm label `{label}`"));
            }
            if a.predictor.is_some() && !a.kind.takes_predictor() {
                return bad(format!("`{}` does not take a predictor", a.kind.name()));
            }
            match (a.kind.self_tuning(), a.tuning) {
                (true, Tuning::Auto) | (false, Tuning::Manual { .. } | Tuning::Static { .. }) => {}
                (false, Tuning::Dynamic { .. }) if a.kind == AlgorithmKind::TpVrOpt => {}
                (false, Tuning::Coordinate { .. }) if a.kind == AlgorithmKind::Coordinate => {}
                (_, t) => {
                    return bad(format!("tuning {:?} is not available for `{}`", t, a.kind.name()));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.len() < 3 {
                return bad(format!(
                    "a slope fit needs at least 3 grid points; sweep over `{}` has {}",
                    sweep.axis,
                    sweep.values.len()
                ));
            }
            if sweep.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad("swept values must be positive".into());
            }
            if sweep.values.windows(2).any(|w| w[1] <= w[0]) {
                return bad("swept values must be strictly increasing".into());
            }
            if let Some(a) = &sweep.expected_slope {
                if a.low > a.high {
                    return bad("expected_slope.low exceeds expected_slope.high".into());
                }
                if let Some(l) = &a.algorithm {
                    if !labels.contains(l) {
                        return bad(format!("expected_slope refers to unknown algorithm `{l}`"));
                    }
                }
            }
            self.at(&sweep.axis, sweep.values[0])?;
        }
        Ok(())
    }

    /// Seeds in run order. `base_override` replaces `base_seed` (and turns a list into a count).
    pub fn seed_list(&self, base_override: Option<u64>) -> Vec<u64> {
        match (&self.seeds, base_override) {
            (Seeds::List(list), None) => list.clone(),
            (Seeds::List(list), Some(b)) => (0..list.len() as u64).map(|k| b.wrapping_add(k)).collect(),
            (Seeds::Count(n), b) => {
                let base = b.unwrap_or(self.base_seed);
                (0..*n as u64).map(|k| base.wrapping_add(k)).collect()
            }
        }
    }

    /// This configuration with the swept axis set to `value`.
    pub fn at(&self, axis: &str, value: f64) -> Result<ConfigFile, HarnessError> {
        let mut cfg = self.clone();
        if axis == "horizon" {
            if value.fract() != 0.0 {
                return Err(HarnessError::Config(format!("horizon must be an integer, got {value}")));
            }
            cfg.horizon = value as usize;
        } else {
            cfg.environment.set_param(axis, value)?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        horizon = 10
        seeds = 3
        [domain]
        shape = "ball"
        dim = 2
        radius = 1.0
        [environment]
        kind = "constant"
        [[algorithm]]
        kind = "tp_vr_opt"
        predictor = "zero"
        tuning = { mode = "manual", eta = 0.1, delta = 0.1 }
    "#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ConfigFile::parse(MINIMAL).unwrap();
        assert_eq!(cfg.seed_list(None), vec![0, 1, 2]);
        assert_eq!(cfg.seed_list(Some(7)), vec![7, 8, 9]);
        assert_eq!(cfg.algorithms[0].label(), "tp_vr_opt-zero");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("horizon = 10", "horizon = 10\ncolour = 3");
        assert!(matches!(ConfigFile::parse(&text), Err(HarnessError::Config(_))));
        let text = MINIMAL.replace("kind = \"constant\"", "kind = \"constant\"\nslope = 1");
        assert!(ConfigFile::parse(&text).is_err());
    }

    #[test]
    fn repeated_seeds_are_rejected() {
        let text = MINIMAL.replace("seeds = 3", "seeds = [4, 5, 4]");
        let err = ConfigFile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("distinct"));
    }

    #[test]
    fn sweep_needs_three_increasing_points() {
        let one = format!("{MINIMAL}\n[sweep]\naxis = \"horizon\"\nvalues = [10]\n");
        assert!(ConfigFile::parse(&one).unwrap_err().to_string().contains("at least 3"));
        let unsorted = format!("{MINIMAL}\n[sweep]\naxis = \"horizon\"\nvalues = [10, 30, 20]\n");
        assert!(ConfigFile::parse(&unsorted).is_err());
        let ok = format!("{MINIMAL}\n[sweep]\naxis = \"horizon\"\nvalues = [10, 20, 40]\n");
        assert_eq!(ConfigFile::parse(&ok).unwrap().at("horizon", 20.0).unwrap().horizon, 20);
    }

    #[test]
    fn sweep_axis_must_exist_on_the_environment() {
        let text = format!("{MINIMAL}\n[sweep]\naxis = \"s_target\"\nvalues = [1, 2, 3]\n");
        assert!(ConfigFile::parse(&text).unwrap_err().to_string().contains("s_target"));
    }

    #[test]
    fn tuning_must_suit_the_algorithm() {
        let text = MINIMAL.replace("tuning = { mode = \"manual\", eta = 0.1, delta = 0.1 }", "");
        assert!(ConfigFile::parse(&text).is_err());
        let text = MINIMAL.replace("kind = \"tp_vr_opt\"", "kind = \"tp_vr_opt_pp\"");
        assert!(ConfigFile::parse(&text).is_err());
        let text = MINIMAL.replace(
            "tuning = { mode = \"manual\", eta = 0.1, delta = 0.1 }",
            "tuning = { mode = \"static\", sensitivity = \"oracle\" }",
        );
        assert!(ConfigFile::parse(&text).is_ok());
    }
}
