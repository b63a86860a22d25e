//! Experiment orchestration: ε sweeps over strategies and environments,
//! aggregation, slope fits and report files.

mod fit;
mod report;
pub mod seed;
mod spec;

pub use fit::{fit_loglog_slope, LogLogFit};
pub use report::{CellFailure, ReportRow, SlopeRecord, SweepReport, CSV_HEADER};
pub use spec::{EpsGrid, MetricMode, SweepSpec, CONFIG_KEYS};

use std::path::{Path, PathBuf};

use crate::engine::{run_batch, EpisodeConfig};
use crate::environments::{EnvironmentKind, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::model::{Horizon, LossSummary};
use crate::scalar::Scalar;
use crate::strategies::{LossMetric, StrategyId, StrategyParams};

/// Mean and standard error of a sample. The standard error is `None` for a
/// single observation.
pub fn mean_stderr(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

pub fn metric_value<S: Scalar>(summary: &LossSummary<S>, metric: LossMetric) -> f64 {
    match metric {
        LossMetric::Symmetric => summary.avg_symmetric_loss.as_f64(),
        LossMetric::Revenue => summary.avg_revenue_loss.as_f64(),
    }
}

fn environment_spec<S: Scalar>(spec: &SweepSpec, name: &str, eps: f64) -> Result<EnvironmentSpec<S>> {
    let kind = if name.trim() == "scripted" {
        let path = spec.script.clone().ok_or_else(|| Error::Param("scripted environment needs `script`".into()))?;
        EnvironmentKind::Scripted { path: Some(path), values: Vec::new() }
    } else {
        EnvironmentKind::parse_simple(name)?
    };
    Ok(EnvironmentSpec::new(kind, spec.schedule_for(eps).parse()?, S::of(spec.v1)))
}

struct Cell {
    strategy: StrategyId,
    environment: String,
    eps: f64,
    eps_bar: f64,
    horizon: usize,
    first: usize,
}

/// Episode configs of one cell, one per repetition.
pub fn cell_configs<S: Scalar>(
    spec: &SweepSpec,
    strategy: StrategyId,
    environment: &str,
    eps_index: usize,
    eps: f64,
) -> Result<Vec<EpisodeConfig<S>>> {
    let env = environment_spec::<S>(spec, environment, eps)?;
    let horizon = Horizon::new(spec.horizon_for(eps))?;
    let params = StrategyParams { offset_rule: spec.offset_rule, ..StrategyParams::default() };
    Ok((0..spec.reps)
        .map(|rep| EpisodeConfig {
            horizon,
            environment: env.clone(),
            strategy,
            knowledge: None,
            params,
            env_seed: seed::env_seed(spec.base_seed, environment, eps_index, rep),
            strat_seed: seed::strategy_seed(spec.base_seed, strategy.name(), environment, eps_index, rep),
            record_intervals: false,
        })
        .collect())
}

/// Runs every (strategy, environment, ε) cell `reps` times and aggregates.
/// A failing cell is recorded and skipped; the sweep carries on.
pub fn run_sweep<S: Scalar>(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let grid = spec.eps.values();
    let mut report = SweepReport::default();
    let mut cells = Vec::new();
    let mut configs = Vec::new();
    for &strategy in &spec.strategies {
        for environment in &spec.environments {
            for (i, &eps) in grid.iter().enumerate() {
                let fail = |message: String| CellFailure {
                    strategy: strategy.name().to_string(),
                    environment: environment.clone(),
                    eps,
                    message,
                };
                let built = cell_configs::<S>(spec, strategy, environment, i, eps).and_then(|c| {
                    let sched = c[0].environment.schedule.materialize(c[0].horizon)?;
                    Ok((c, sched.avg().as_f64()))
                });
                match built {
                    Ok((c, eps_bar)) => {
                        cells.push(Cell {
                            strategy,
                            environment: environment.clone(),
                            eps,
                            eps_bar,
                            horizon: c[0].horizon.get(),
                            first: configs.len(),
                        });
                        configs.extend(c);
                    }
                    Err(e) => report.failures.push(fail(e.to_string())),
                }
            }
        }
    }
    let results = run_batch(&configs, spec.parallelism);
    for cell in &cells {
        let metric = spec.metric.for_strategy(cell.strategy);
        let slice = &results[cell.first..cell.first + spec.reps];
        let losses: std::result::Result<Vec<f64>, String> =
            slice.iter().map(|r| r.as_ref().map(|s| metric_value(s, metric)).map_err(ToString::to_string)).collect();
        match losses {
            Ok(losses) => {
                let (mean_loss, stderr_loss) = mean_stderr(&losses);
                report.rows.push(ReportRow {
                    strategy: cell.strategy.name().to_string(),
                    environment: cell.environment.clone(),
                    eps_bar: cell.eps_bar,
                    horizon: cell.horizon,
                    reps: spec.reps,
                    mean_loss,
                    stderr_loss,
                });
            }
            Err(e) => report.failures.push(CellFailure {
                strategy: cell.strategy.name().to_string(),
                environment: cell.environment.clone(),
                eps: cell.eps,
                message: e,
            }),
        }
    }
    add_slopes(&mut report);
    Ok(report)
}

/// Fits a slope for every (strategy, environment) pair with at least three rows.
pub fn add_slopes(report: &mut SweepReport) {
    report.slopes.clear();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for r in &report.rows {
        let key = (r.strategy.clone(), r.environment.clone());
        if !pairs.contains(&key) {
            pairs.push(key);
        }
    }
    for (strategy, environment) in pairs {
        let points = report.points(&strategy, &environment);
        if points.len() < 3 {
            continue;
        }
        match fit_loglog_slope(&points) {
            Ok(fit) => report.slopes.push(SlopeRecord { strategy, environment, fit }),
            Err(e) => report.failures.push(CellFailure { strategy, environment, eps: 0.0, message: format!("slope: {e}") }),
        }
    }
}

/// Sibling path for the slope JSON: `report.csv` becomes `report.slopes.json`.
pub fn slopes_path(csv: &Path) -> PathBuf {
    csv.with_extension("slopes.json")
}

/// Writes the CSV and the slope JSON.
pub fn write_report(report: &SweepReport, csv: &Path, json: Option<&Path>) -> Result<()> {
    std::fs::write(csv, report.to_csv_string()?)?;
    let json = json.map(Path::to_path_buf).unwrap_or_else(|| slopes_path(csv));
    std::fs::write(json, report.slopes_json()?)?;
    Ok(())
}

pub fn read_report(csv: &Path) -> Result<SweepReport> {
    let file = std::fs::File::open(csv)?;
    SweepReport::read_csv(std::io::BufReader::new(file))
}
