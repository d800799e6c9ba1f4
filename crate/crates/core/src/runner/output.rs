//! CSV and JSON result files.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::lattice::SimParams;
use crate::observables::{classical_trajectory, two_tallest, SplitClass, TrajectoryRecord};

use super::config::{PhysicalUnits, ScenarioConfig};

/// 17 significant digits; enough to round-trip any f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_observables_csv(path: &Path, record: &TrajectoryRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "time",
        "norm",
        "pop_plus",
        "pop_minus",
        "z_expect",
        "energy",
        "peak1_z",
        "peak1_h",
        "peak2_z",
        "peak2_h",
    ])?;
    for i in 0..record.len() {
        let mut row = vec![
            fmt(record.times[i]),
            fmt(record.norms[i]),
            fmt(record.populations[i].0),
            fmt(record.populations[i].1),
            fmt(record.z_expect[i]),
            fmt(record.energies[i]),
        ];
        let peaks = two_tallest(&record.peaks[i]);
        for k in 0..2 {
            match peaks.get(k) {
                Some(p) => {
                    row.push(fmt(p.z));
                    row.push(fmt(p.height));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// First column `z`, then one density column per snapshot headed by its time.
pub fn write_snapshots_csv(path: &Path, record: &TrajectoryRecord) -> Result<()> {
    let Some(snapshots) = &record.snapshots else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["z".to_string()];
    header.extend(record.times.iter().map(|t| t.to_string()));
    w.write_record(&header)?;
    for (j, z) in record.grid.z_values().iter().enumerate() {
        let mut row = Vec::with_capacity(snapshots.len() + 1);
        row.push(fmt(*z));
        row.extend(snapshots.iter().map(|s| fmt(s[j])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedParams {
    pub label: String,
    pub z_max: f64,
    pub dz: f64,
    pub n_points: usize,
    pub n_steps: usize,
    #[serde(flatten)]
    pub sim: SimParams,
    pub separation_threshold_resolved: f64,
    pub physical: Option<PhysicalUnits>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub params: ResolvedParams,
    pub classification: SplitClass,
    pub final_z_expect: f64,
    pub classical_final_z: f64,
    pub max_classical_deviation: f64,
    pub max_peak_deviation: Option<f64>,
    pub runtime_seconds: f64,
    pub failed: bool,
    pub failure: Option<String>,
}

impl Summary {
    pub fn new(config: &ScenarioConfig, record: &TrajectoryRecord, runtime_seconds: f64) -> Self {
        let p = &config.params;
        let final_time = record.times.last().copied().unwrap_or(0.0);
        Summary {
            params: ResolvedParams {
                label: config.label.clone(),
                z_max: config.z_max,
                dz: record.grid.dz(),
                n_points: record.grid.len(),
                n_steps: p.n_steps(),
                sim: p.clone(),
                separation_threshold_resolved: p.separation_threshold(),
                physical: config.physical,
            },
            classification: record.classification,
            final_z_expect: record.z_expect.last().copied().unwrap_or(0.0),
            classical_final_z: classical_trajectory(p.gamma_tilde, p.m_tilde, p.theta, final_time),
            max_classical_deviation: record.max_classical_deviation(),
            max_peak_deviation: record.max_peak_deviation(),
            runtime_seconds,
            failed: record.failed.is_some(),
            failure: record.failed.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
