//! Scenario execution, parameter sweeps and result files.

mod config;
mod output;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::evolve;
use crate::lattice::SpinorField;
use crate::observables::{
    classical_trajectory, two_tallest, Peak, SplitClass, SplitKind, TrajectoryRecord,
};

pub use config::{
    parse_config, parse_number, parse_sweep, Document, PhysicalUnits, ScenarioConfig, SweepConfig,
    SweptParameter,
};
pub use output::{write_observables_csv, write_snapshots_csv, Summary};

/// Result of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub record: TrajectoryRecord,
    pub summary: Summary,
}

/// Runs a scenario in memory without touching the filesystem.
pub fn simulate(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let start = Instant::now();
    let grid = Arc::new(config.grid()?);
    let p = &config.params;
    let field = SpinorField::gaussian(grid, p.epsilon, p.theta)?;
    let record = evolve(field, p, &mut |_, _| {})?;
    let summary = Summary::new(config, &record, start.elapsed().as_secs_f64());
    Ok(ScenarioOutcome { record, summary })
}

/// Runs a scenario and writes `observables.csv`, `snapshots.csv` and
/// `summary.json` into [`ScenarioConfig::run_dir`].
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let outcome = simulate(config)?;
    let dir = config.run_dir();
    std::fs::create_dir_all(&dir)?;
    write_observables_csv(&dir.join("observables.csv"), &outcome.record)?;
    if outcome.record.snapshots.is_some() {
        write_snapshots_csv(&dir.join("snapshots.csv"), &outcome.record)?;
    }
    outcome.summary.write(&dir.join("summary.json"))?;
    if let Some(reason) = &outcome.record.failed {
        log::warn!("scenario `{}` failed: {reason}", config.label);
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub value: f64,
    pub label: String,
    pub classification: Option<SplitClass>,
    /// Two tallest peaks of the final density, ordered by position.
    pub final_peaks: Vec<Peak>,
    pub final_z_expect: Option<f64>,
    pub classical_final_z: f64,
    pub max_classical_deviation: Option<f64>,
    pub max_peak_deviation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub label: String,
    pub parameter: SweptParameter,
    pub entries: Vec<SweepEntry>,
    /// Smallest swept value classified SINGLE.
    pub smallest_single: Option<f64>,
    /// Largest swept value classified SPLIT.
    pub largest_split: Option<f64>,
}

impl SweepReport {
    pub fn kinds(&self) -> Vec<Option<SplitKind>> {
        self.entries
            .iter()
            .map(|e| e.classification.map(|c| c.kind))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: SweepReport,
    /// Per value; `None` where the run could not start.
    pub records: Vec<Option<TrajectoryRecord>>,
}

/// Runs every swept value, at most `concurrency` at a time. When
/// `write_outputs` is set each run writes its own directory and the report
/// goes to `<out>/<label>_sweep.json`.
pub fn sweep(config: &SweepConfig, write_outputs: bool) -> Result<SweepOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.concurrency)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;

    let results: Vec<(ScenarioConfig, Result<ScenarioOutcome>)> = pool.install(|| {
        (0..config.values.len())
            .into_par_iter()
            .map(|i| {
                let scenario = config.scenario(i);
                let outcome = if write_outputs {
                    run_scenario(&scenario)
                } else {
                    simulate(&scenario)
                };
                (scenario, outcome)
            })
            .collect()
    });

    let mut entries = Vec::with_capacity(results.len());
    let mut records = Vec::with_capacity(results.len());
    for ((scenario, result), &value) in results.into_iter().zip(&config.values) {
        let p = &scenario.params;
        let classical_final_z =
            classical_trajectory(p.gamma_tilde, p.m_tilde, p.theta, p.n_steps() as f64 * p.dt);
        let entry = match &result {
            Ok(outcome) => {
                let rec = &outcome.record;
                SweepEntry {
                    value,
                    label: scenario.label.clone(),
                    classification: Some(rec.classification),
                    final_peaks: rec.peaks.last().map(|p| two_tallest(p)).unwrap_or_default(),
                    final_z_expect: rec.z_expect.last().copied(),
                    classical_final_z,
                    max_classical_deviation: Some(rec.max_classical_deviation()),
                    max_peak_deviation: rec.max_peak_deviation(),
                    error: rec.failed.clone(),
                }
            }
            Err(err) => SweepEntry {
                value,
                label: scenario.label.clone(),
                classification: None,
                final_peaks: Vec::new(),
                final_z_expect: None,
                classical_final_z,
                max_classical_deviation: None,
                max_peak_deviation: None,
                error: Some(err.to_string()),
            },
        };
        entries.push(entry);
        records.push(result.ok().map(|o| o.record));
    }

    let with_kind = |kind: SplitKind| {
        entries
            .iter()
            .filter(move |e| e.error.is_none() && e.classification.map(|c| c.kind) == Some(kind))
            .map(|e| e.value)
    };
    let smallest_single = with_kind(SplitKind::Single).reduce(f64::min);
    let largest_split = with_kind(SplitKind::Split).reduce(f64::max);

    let report = SweepReport {
        label: config.base.label.clone(),
        parameter: config.parameter,
        entries,
        smallest_single,
        largest_split,
    };
    if write_outputs {
        std::fs::create_dir_all(&config.base.out_dir)?;
        let path = config
            .base
            .out_dir
            .join(format!("{}_sweep.json", config.base.label));
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(SweepOutcome { report, records })
}
