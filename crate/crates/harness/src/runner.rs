//! `run` and `sweep`: execute (seed × algorithm) cells and emit reports.
//!
//! Each seed builds its own environment and comparator; every algorithm is
//! then run on that environment with a learner seed derived from the seed.
//! Cells are collected in (seed, algorithm) order, so outputs do not depend
//! on the worker count.

use std::path::PathBuf;

use bco_core::algorithms::{RunOptions, RunSpec};
use bco_core::environments::solve_static_comparator;
use bco_core::metrics::{fit_scaling_exponent, mean_stderr, RunReport};
use bco_core::rng::derive;
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::ArtifactSink;
use crate::config::{predictor_name, ConfigFile};
use crate::plot::{loglog_svg, Series};
use crate::setup::{build_algorithm, build_domain, build_env};
use crate::HarnessError;

/// Tag mixed into a replicate seed to key the learner's streams.
const LEARNER_TAG: u64 = 0x6c65_6172_6e65_72;

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub trace: bool,
    pub debug_assert: bool,
    pub out: Option<PathBuf>,
    pub base_seed: Option<u64>,
}

pub struct Cell {
    pub label: String,
    pub seed: u64,
    pub report: RunReport,
}

impl Cell {
    /// Dynamic regret when the environment has a comparator sequence, static otherwise.
    pub fn regret(&self) -> f64 {
        self.report.dynamic_regret.unwrap_or(self.report.static_regret)
    }
}

/// Run every (seed, algorithm) cell of `cfg`.
pub fn execute(cfg: &ConfigFile, ov: &Overrides) -> Result<Vec<Cell>, HarnessError> {
    let domain = build_domain(&cfg.domain)?;
    let seeds = cfg.seed_list(ov.base_seed);
    let options = RunOptions { trace: cfg.trace || ov.trace, debug_assert: cfg.debug_assert || ov.debug_assert };
    let horizon = cfg.horizon;
    let per_seed = |seed: u64| -> Result<Vec<Cell>, HarnessError> {
        let env = build_env(&cfg.environment, &domain, horizon, seed)?;
        let comparator = solve_static_comparator(env.as_ref(), &domain, horizon);
        cfg.algorithms
            .iter()
            .map(|a| {
                let alg = build_algorithm(a, env.as_ref(), &domain, &comparator, horizon)?;
                let spec = RunSpec {
                    env: env.as_ref(),
                    domain: &domain,
                    comparator: &comparator,
                    horizon,
                    seed: derive(seed, &[LEARNER_TAG]),
                    options,
                };
                let report = alg.run(&spec).map_err(|e| match e {
                    bco_core::Error::InvalidConfig(m) => HarnessError::Config(m),
                    e => HarnessError::Runtime(format!("{} seed {seed}: {e}", a.label())),
                })?;
                Ok(Cell { label: a.label(), seed, report })
            })
            .collect()
    };
    let workers = ov.workers.or(cfg.workers);
    let results: Vec<Result<Vec<Cell>, HarnessError>> = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?
            .install(|| seeds.par_iter().map(|&s| per_seed(s)).collect()),
        None => seeds.par_iter().map(|&s| per_seed(s)).collect(),
    };
    let mut cells = Vec::new();
    for r in results {
        cells.extend(r?);
    }
    // algorithm-major order
    let order: Vec<String> = cfg.algorithms.iter().map(|a| a.label()).collect();
    cells.sort_by_key(|c| (order.iter().position(|l| *l == c.label), seeds.iter().position(|s| *s == c.seed)));
    Ok(cells)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    env_param: Option<f64>,
    algorithm: &'a str,
    predictor: Option<&'static str>,
    seed: u64,
    static_regret: f64,
    dynamic_regret: Option<f64>,
    path_length: Option<f64>,
    prediction_error: f64,
    residual_sum: f64,
    gradient_variation: f64,
    queries: usize,
    invariant_violations: usize,
    comparator_warning: bool,
}

fn summary_rows<'a>(param: Option<f64>, cells: &'a [Cell], out: &mut Vec<SummaryRow<'a>>) {
    for c in cells {
        let r = &c.report;
        out.push(SummaryRow {
            env_param: param,
            algorithm: &c.label,
            predictor: r.algorithm.predictor.map(predictor_name),
            seed: c.seed,
            static_regret: r.static_regret,
            dynamic_regret: r.dynamic_regret,
            path_length: r.path_length,
            prediction_error: r.prediction_error,
            residual_sum: r.residual_sum,
            gradient_variation: r.gradient_variation,
            queries: r.queries,
            invariant_violations: r.invariants.total_violations(),
            comparator_warning: r.comparator_warning.is_some(),
        });
    }
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    w.into_inner().map_err(|e| HarnessError::Runtime(e.to_string()))
}

fn out_dir(cfg: &ConfigFile, ov: &Overrides) -> PathBuf {
    ov.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("bco-out"))
}

fn write_reports(sink: &mut ArtifactSink, prefix: &str, cells: &[Cell]) -> Result<(), HarnessError> {
    for c in cells {
        sink.write_json(&format!("{prefix}runs/{}/seed-{}.json", c.label, c.seed), &c.report)?;
    }
    Ok(())
}

/// `run`: per-run JSON reports plus `summary.csv`.
pub fn run_command(cfg: &ConfigFile, ov: &Overrides) -> Result<(), HarnessError> {
    if cfg.sweep.is_some() {
        return Err(HarnessError::Config("configuration has a [sweep] table; use `sweep`".into()));
    }
    let mut sink = ArtifactSink::create(&out_dir(cfg, ov))?;
    let result = (|| {
        let cells = execute(cfg, ov)?;
        write_reports(&mut sink, "", &cells)?;
        let mut rows = Vec::new();
        summary_rows(None, &cells, &mut rows);
        sink.write("summary.csv", &csv_bytes(&rows)?)?;
        for label in cfg.algorithms.iter().map(|a| a.label()) {
            let regrets: Vec<f64> = cells.iter().filter(|c| c.label == label).map(Cell::regret).collect();
            let (m, se) = mean_stderr(&regrets);
            println!("{label}: mean regret {m:.6} ± {se:.6} over {} seeds", regrets.len());
        }
        Ok(())
    })();
    sink.finish("run", result.as_ref().err())?;
    result
}

/// One row of a sweep summary.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub env_param: f64,
    pub seeds: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    #[serde(rename = "mean_S_T")]
    pub mean_s_t: f64,
    #[serde(rename = "mean_P_T")]
    pub mean_p_t: f64,
}

pub fn sweep_row(param: f64, cells: &[&Cell]) -> SweepRow {
    let regrets: Vec<f64> = cells.iter().map(|c| c.regret()).collect();
    let (mean_regret, stderr) = mean_stderr(&regrets);
    let n = cells.len() as f64;
    SweepRow {
        env_param: param,
        seeds: cells.len(),
        mean_regret,
        stderr,
        mean_s_t: cells.iter().map(|c| c.report.prediction_error).sum::<f64>() / n,
        mean_p_t: cells.iter().map(|c| c.report.path_length.unwrap_or(0.0)).sum::<f64>() / n,
    }
}

/// `sweep`: one summary CSV per algorithm, an SVG plot and slope checks.
pub fn sweep_command(cfg: &ConfigFile, ov: &Overrides) -> Result<(), HarnessError> {
    let axis = cfg
        .sweep
        .clone()
        .ok_or_else(|| HarnessError::Config("`sweep` needs a [sweep] table".into()))?;
    let labels: Vec<String> = cfg.algorithms.iter().map(|a| a.label()).collect();
    let mut sink = ArtifactSink::create(&out_dir(cfg, ov))?;
    let result = (|| {
        let mut rows: Vec<Vec<SweepRow>> = vec![Vec::new(); labels.len()];
        let mut summary = Vec::new();
        let mut all_cells = Vec::new();
        for &value in &axis.values {
            let point = cfg.at(&axis.axis, value)?;
            let cells = execute(&point, ov)?;
            write_reports(&mut sink, &format!("{}={value}/", axis.axis), &cells)?;
            for (i, label) in labels.iter().enumerate() {
                let mine: Vec<&Cell> = cells.iter().filter(|c| &c.label == label).collect();
                rows[i].push(sweep_row(value, &mine));
            }
            all_cells.push((value, cells));
        }
        for (value, cells) in &all_cells {
            summary_rows(Some(*value), cells, &mut summary);
        }
        sink.write("summary.csv", &csv_bytes(&summary)?)?;

        let mut series = Vec::new();
        let mut failures = Vec::new();
        for (label, rs) in labels.iter().zip(&rows) {
            sink.write(&format!("sweep-{label}.csv"), &csv_bytes(rs)?)?;
            let points: Vec<(f64, f64)> = rs.iter().map(|r| (r.env_param, r.mean_regret)).collect();
            let fit = fit_scaling_exponent(&points, 0).ok();
            match &fit {
                Some(f) => println!(
                    "{label}: slope {:.4} (95% CI [{:.4}, {:.4}])",
                    f.slope, f.ci_low, f.ci_high
                ),
                None => println!("{label}: no slope fit (non-positive mean regret)"),
            }
            if let Some(a) = &axis.expected_slope {
                if a.algorithm.as_ref().is_none_or(|l| l == label) {
                    match &fit {
                        Some(f) if f.slope >= a.low && f.slope <= a.high => {}
                        Some(f) => failures.push(format!("{label}: slope {:.4} outside [{}, {}]", f.slope, a.low, a.high)),
                        None => failures.push(format!("{label}: slope could not be fitted")),
                    }
                }
            }
            series.push(Series { label: label.clone(), points, slope: fit.map(|f| f.slope) });
        }
        let svg = loglog_svg(&format!("regret vs {}", axis.axis), &axis.axis, "mean regret", &series);
        sink.write("sweep.svg", svg.as_bytes())?;
        if failures.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Slope(failures.join("; ")))
        }
    })();
    // a failed slope assertion still leaves a complete artifact set
    let err = result.as_ref().err().filter(|e| !matches!(e, HarnessError::Slope(_)));
    sink.finish("sweep", err)?;
    result
}
