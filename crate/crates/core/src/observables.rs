//! Diagnostics of the evolving spinor: norm, spin populations, position
//! expectation, energy, density peaks and the split/single verdict.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{Grid, SimParams, SpinorField};
use crate::potentials::GravityKernel;

/// A local maximum of the density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Sub-grid position from a three-point parabolic fit.
    pub z: f64,
    pub height: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SplitKind {
    Split,
    Single,
    Ambiguous,
}

impl std::fmt::Display for SplitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitKind::Split => "SPLIT",
            SplitKind::Single => "SINGLE",
            SplitKind::Ambiguous => "AMBIGUOUS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitClass {
    pub kind: SplitKind,
    pub n_peaks: usize,
    pub peak_separation: f64,
}

/// Time series of diagnostics collected during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub populations: Vec<(f64, f64)>,
    pub z_expect: Vec<f64>,
    pub energies: Vec<f64>,
    /// `|E_kin| + |E_mag| + |E_grav|` at the first record.
    pub energy_scale: f64,
    pub peaks: Vec<Vec<Peak>>,
    pub snapshots: Option<Vec<Vec<f64>>>,
    /// Verdict on the final density.
    pub classification: SplitClass,
    pub params_echo: SimParams,
    pub grid: Arc<Grid>,
    /// Set when the run aborted; the series stop at the last good step.
    pub failed: Option<String>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `z_cl(t)` at every recorded time.
    pub fn classical_path(&self) -> Vec<f64> {
        let p = &self.params_echo;
        self.times
            .iter()
            .map(|&t| classical_trajectory(p.gamma_tilde, p.m_tilde, p.theta, t))
            .collect()
    }

    /// Largest `|⟨z⟩ - z_cl|` over the recorded times.
    pub fn max_classical_deviation(&self) -> f64 {
        self.z_expect
            .iter()
            .zip(self.classical_path())
            .map(|(z, c)| (z - c).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|z_peak - z_cl|` of the tallest peak over the recorded times.
    /// `None` if some snapshot has no peak at all.
    pub fn max_peak_deviation(&self) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for (peaks, c) in self.peaks.iter().zip(self.classical_path()) {
            let top = tallest(peaks)?;
            worst = worst.max((top.z - c).abs());
        }
        Some(worst)
    }

    /// Largest `|E(t) - E(0)|` relative to the energy scale at `t = 0`.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
            / self.energy_scale
    }

    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.norms.first().copied().unwrap_or(0.0);
        self.norms
            .iter()
            .map(|n| (n - n0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_population_drift(&self) -> f64 {
        let (p0, m0) = self.populations.first().copied().unwrap_or((0.0, 0.0));
        self.populations
            .iter()
            .map(|(p, m)| (p - p0).abs().max((m - m0).abs()))
            .fold(0.0, f64::max)
    }
}

/// Highest peak of a list.
pub fn tallest(peaks: &[Peak]) -> Option<&Peak> {
    peaks.iter().max_by(|a, b| a.height.total_cmp(&b.height))
}

/// The two tallest peaks, ordered by position.
pub fn two_tallest(peaks: &[Peak]) -> Vec<Peak> {
    let mut sorted = peaks.to_vec();
    sorted.sort_by(|a, b| b.height.total_cmp(&a.height));
    sorted.truncate(2);
    sorted.sort_by(|a, b| a.z.total_cmp(&b.z));
    sorted
}

/// `⟨z⟩ = ∫ z (|χ₊|² + |χ₋|²) dz`.
pub fn expectation_z(field: &SpinorField) -> f64 {
    let grid = field.grid();
    let integrand: Vec<f64> = field
        .density()
        .iter()
        .zip(grid.z_values())
        .map(|(r, z)| r * z)
        .collect();
    grid.integrate(&integrand)
}

/// `(∫|χ₊|², ∫|χ₋|²)`.
pub fn populations(field: &SpinorField) -> (f64, f64) {
    let grid = field.grid();
    let up: Vec<f64> = field.chi_plus.iter().map(|c| c.norm_sqr()).collect();
    let down: Vec<f64> = field.chi_minus.iter().map(|c| c.norm_sqr()).collect();
    (grid.integrate(&up), grid.integrate(&down))
}

/// Energy split into its three contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub kinetic: f64,
    pub magnetic: f64,
    pub gravity: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.magnetic + self.gravity
    }

    /// Sum of magnitudes; the denominator for relative drift.
    pub fn scale(&self) -> f64 {
        self.kinetic.abs() + self.magnetic.abs() + self.gravity.abs()
    }
}

/// `E = Σ± ∫[(1/2m̃)|∂χ±|² ∓ γ̃ z |χ±|²] + ½ ∫ ρ V_G`.
///
/// Gradients are differences centred on the half-grid points, which makes
/// the kinetic term equal to `⟨χ, -(1/2m̃)∂²χ⟩` for the three-point Laplacian.
pub fn total_energy(field: &SpinorField, params: &SimParams) -> Result<f64> {
    let kernel = GravityKernel::new(field.grid(), params.delta, params.convolution)?;
    Ok(energy_parts(field, params, &kernel)?.total())
}

pub fn energy_parts(
    field: &SpinorField,
    params: &SimParams,
    kernel: &GravityKernel,
) -> Result<Energy> {
    let grid = field.grid();
    let dz = grid.dz();
    let gradient_sq = |chi: &[num_complex::Complex64]| -> f64 {
        chi.windows(2)
            .map(|w| (w[1] - w[0]).norm_sqr())
            .sum::<f64>()
            / dz
    };
    let kinetic =
        (gradient_sq(&field.chi_plus) + gradient_sq(&field.chi_minus)) / (2.0 * params.m_tilde);

    let (up, down): (Vec<f64>, Vec<f64>) = field
        .chi_plus
        .iter()
        .zip(&field.chi_minus)
        .zip(grid.z_values())
        .map(|((p, m), z)| (z * p.norm_sqr(), z * m.norm_sqr()))
        .unzip();
    let magnetic =
        -params.gamma_tilde * grid.integrate(&up) + params.gamma_tilde * grid.integrate(&down);

    let gravity = if params.self_gravity {
        let rho = field.density();
        let v = kernel.potential(&rho, params.m_tilde)?;
        let integrand: Vec<f64> = rho.iter().zip(&v).map(|(r, v)| r * v).collect();
        0.5 * grid.integrate(&integrand)
    } else {
        0.0
    };
    Ok(Energy {
        kinetic,
        magnetic,
        gravity,
    })
}

/// Interior local maxima whose prominence is at least
/// `min_prominence · max(density)`, sorted by position.
pub fn find_peaks(density: &[f64], grid: &Grid, min_prominence: f64) -> Vec<Peak> {
    let n = density.len();
    let top = density.iter().copied().fold(0.0, f64::max);
    if n < 3 || top <= 0.0 {
        return Vec::new();
    }
    let floor = min_prominence * top;
    let z = grid.z_values();
    let dz = grid.dz();

    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if density[i - 1] < density[i] {
            // Walk over a plateau.
            let mut ahead = i + 1;
            while ahead < n - 1 && density[ahead] == density[i] {
                ahead += 1;
            }
            if density[ahead] < density[i] {
                let j = (i + ahead - 1) / 2;
                let prominence = prominence(density, j);
                if prominence >= floor && prominence > 0.0 {
                    let (offset, height) = parabolic_refine(density, j);
                    peaks.push(Peak {
                        z: z[j] + offset * dz,
                        height,
                        prominence,
                    });
                }
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

fn prominence(density: &[f64], j: usize) -> f64 {
    let h = density[j];
    let mut left_min = h;
    for &d in density[..j].iter().rev() {
        if d > h {
            break;
        }
        left_min = left_min.min(d);
    }
    let mut right_min = h;
    for &d in &density[j + 1..] {
        if d > h {
            break;
        }
        right_min = right_min.min(d);
    }
    h - left_min.max(right_min)
}

fn parabolic_refine(density: &[f64], j: usize) -> (f64, f64) {
    let (a, b, c) = (density[j - 1], density[j], density[j + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return (0.0, b);
    }
    let offset = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
    (offset, b - 0.25 * (a - c) * offset)
}

/// SPLIT for two or more peaks spread wider than `separation_threshold`,
/// SINGLE for exactly one peak, AMBIGUOUS otherwise.
pub fn classify_split(peaks: &[Peak], separation_threshold: f64) -> SplitClass {
    let n_peaks = peaks.len();
    let peak_separation = if n_peaks >= 2 {
        let lo = peaks.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        let hi = peaks.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    } else {
        0.0
    };
    let kind = match n_peaks {
        1 => SplitKind::Single,
        n if n >= 2 && peak_separation > separation_threshold => SplitKind::Split,
        _ => SplitKind::Ambiguous,
    };
    SplitClass {
        kind,
        n_peaks,
        peak_separation,
    }
}

/// Path of a classical moment at angle θ starting at rest from the origin:
/// `z(t) = γ̃ cosθ t² / (2 m̃)`.
pub fn classical_trajectory(gamma_tilde: f64, m_tilde: f64, theta: f64, t: f64) -> f64 {
    gamma_tilde * theta.cos() / (2.0 * m_tilde) * t * t
}

/// Accumulates a [`TrajectoryRecord`] during [`crate::evolve::evolve`].
#[derive(Debug)]
pub(crate) struct Recorder {
    params: SimParams,
    grid: Arc<Grid>,
    times: Vec<f64>,
    norms: Vec<f64>,
    populations: Vec<(f64, f64)>,
    z_expect: Vec<f64>,
    energies: Vec<f64>,
    energy_scale: f64,
    peaks: Vec<Vec<Peak>>,
    snapshots: Vec<Vec<f64>>,
    failed: Option<String>,
}

impl Recorder {
    pub(crate) fn new(params: SimParams, grid: Arc<Grid>) -> Self {
        Recorder {
            params,
            grid,
            times: Vec::new(),
            norms: Vec::new(),
            populations: Vec::new(),
            z_expect: Vec::new(),
            energies: Vec::new(),
            energy_scale: 0.0,
            peaks: Vec::new(),
            snapshots: Vec::new(),
            failed: None,
        }
    }

    pub(crate) fn observe(
        &mut self,
        time: f64,
        field: &SpinorField,
        kernel: &GravityKernel,
    ) -> Result<()> {
        let density = field.density();
        let energy = energy_parts(field, &self.params, kernel)?;
        if self.times.is_empty() {
            self.energy_scale = energy.scale();
        }
        self.times.push(time);
        self.norms.push(self.grid.integrate(&density));
        self.populations.push(populations(field));
        self.z_expect.push(expectation_z(field));
        self.energies.push(energy.total());
        self.peaks
            .push(find_peaks(&density, &self.grid, self.params.min_prominence));
        if self.params.keep_snapshots {
            self.snapshots.push(density);
        }
        Ok(())
    }

    pub(crate) fn fail(&mut self, reason: String) {
        self.failed = Some(reason);
    }

    pub(crate) fn finish(self, final_field: &SpinorField) -> TrajectoryRecord {
        let density = final_field.density();
        let peaks = find_peaks(&density, &self.grid, self.params.min_prominence);
        let classification = classify_split(&peaks, self.params.separation_threshold());
        TrajectoryRecord {
            times: self.times,
            norms: self.norms,
            populations: self.populations,
            z_expect: self.z_expect,
            energies: self.energies,
            energy_scale: if self.energy_scale > 0.0 {
                self.energy_scale
            } else {
                1.0
            },
            peaks: self.peaks,
            snapshots: self.params.keep_snapshots.then_some(self.snapshots),
            classification,
            params_echo: self.params,
            grid: self.grid,
            failed: self.failed,
        }
    }
}
