//! Spatial lattice, spinor state and simulation parameters.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform one-dimensional lattice on `[-z_max, z_max]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    z_max: f64,
    dz: f64,
    z: Vec<f64>,
}

impl Grid {
    /// Builds the grid with spacing `dz`. The point count is
    /// `round(2 z_max / dz) + 1`; the spacing must divide the extent.
    pub fn new(z_max: f64, dz: f64) -> Result<Self> {
        if !z_max.is_finite() || z_max <= 0.0 {
            return Err(Error::param(
                "z_max",
                format!("must be positive and finite, got {z_max}"),
            ));
        }
        if !dz.is_finite() || dz <= 0.0 || dz > z_max {
            return Err(Error::param(
                "dz",
                format!("must satisfy 0 < dz <= z_max, got {dz}"),
            ));
        }
        let intervals = (2.0 * z_max / dz).round();
        if ((intervals * dz - 2.0 * z_max) / (2.0 * z_max)).abs() > 1e-9 {
            return Err(Error::param(
                "dz",
                format!("spacing {dz} does not divide the extent 2*{z_max}"),
            ));
        }
        Self::with_points(z_max, intervals as usize + 1)
    }

    /// Builds the grid with exactly `n` points (`n >= 3`).
    pub fn with_points(z_max: f64, n: usize) -> Result<Self> {
        if !z_max.is_finite() || z_max <= 0.0 {
            return Err(Error::param(
                "z_max",
                format!("must be positive and finite, got {z_max}"),
            ));
        }
        if n < 3 {
            return Err(Error::param(
                "n",
                format!("need at least 3 points, got {n}"),
            ));
        }
        let last = (n - 1) as f64;
        // Integer-symmetric construction keeps z[j] == -z[n-1-j] bit for bit.
        let mut z: Vec<f64> = (0..n)
            .map(|j| (2.0 * j as f64 - last) * z_max / last)
            .collect();
        z[0] = -z_max;
        z[n - 1] = z_max;
        Ok(Grid {
            z_max,
            dz: 2.0 * z_max / last,
            z,
        })
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z_values(&self) -> &[f64] {
        &self.z
    }

    /// Trapezoidal quadrature weight of point `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.z.len() {
            0.5 * self.dz
        } else {
            self.dz
        }
    }

    /// Trapezoidal rule over the whole grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let n = values.len();
        let interior: f64 = values[1..n - 1].iter().sum();
        self.dz * (interior + 0.5 * (values[0] + values[n - 1]))
    }
}

/// Two-component wavefunction `(χ₊, χ₋)` sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub chi_plus: Vec<Complex64>,
    pub chi_minus: Vec<Complex64>,
    grid: Arc<Grid>,
}

impl SpinorField {
    pub fn new(
        grid: Arc<Grid>,
        chi_plus: Vec<Complex64>,
        chi_minus: Vec<Complex64>,
    ) -> Result<Self> {
        if chi_plus.len() != grid.len() || chi_minus.len() != grid.len() {
            return Err(Error::param(
                "field",
                format!(
                    "component lengths ({}, {}) do not match grid size {}",
                    chi_plus.len(),
                    chi_minus.len(),
                    grid.len()
                ),
            ));
        }
        Ok(SpinorField {
            chi_plus,
            chi_minus,
            grid,
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        SpinorField {
            chi_plus: vec![Complex64::new(0.0, 0.0); n],
            chi_minus: vec![Complex64::new(0.0, 0.0); n],
            grid,
        }
    }

    /// Gaussian packet centred at the origin in the spin state
    /// `cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩`, with spatial amplitude `exp(-z²/2ε²)`.
    ///
    /// The sampled packet is rescaled so the trapezoidal norm is exactly one.
    pub fn gaussian(grid: Arc<Grid>, epsilon: f64, theta: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_theta(theta)?;
        let resolved = grid
            .z_values()
            .iter()
            .filter(|z| z.abs() <= 2.0 * epsilon)
            .count();
        if resolved < 8 {
            return Err(Error::UnderResolved { points: resolved });
        }

        let profile: Vec<f64> = grid
            .z_values()
            .iter()
            .map(|z| (-z * z / (2.0 * epsilon * epsilon)).exp())
            .collect();
        let sq: Vec<f64> = profile.iter().map(|g| g * g).collect();
        let scale = 1.0 / grid.integrate(&sq).sqrt();

        let (up, down) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let chi_plus = profile
            .iter()
            .map(|g| Complex64::new(up * scale * g, 0.0))
            .collect();
        let chi_minus = profile
            .iter()
            .map(|g| Complex64::new(down * scale * g, 0.0))
            .collect();

        let edge = scale * profile[0];
        if edge >= 1e-12 {
            log::warn!(
                "initial packet has amplitude {edge:.3e} at the boundary ±{}; the evolution clamps it to zero",
                grid.z_max()
            );
        }
        Ok(SpinorField {
            chi_plus,
            chi_minus,
            grid,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Total probability `∫(|χ₊|² + |χ₋|²) dz`.
    pub fn norm(&self) -> f64 {
        self.grid.integrate(&self.density())
    }

    /// Elementwise `|χ₊|² + |χ₋|²`.
    pub fn density(&self) -> Vec<f64> {
        self.chi_plus
            .iter()
            .zip(&self.chi_minus)
            .map(|(p, m)| p.norm_sqr() + m.norm_sqr())
            .collect()
    }

    /// Multiplies both components by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for c in self.chi_plus.iter_mut().chain(self.chi_minus.iter_mut()) {
            *c *= factor;
        }
    }

    /// Reflects `z → -z` and swaps the spin components.
    pub fn mirrored(&self) -> Self {
        let mut chi_plus = self.chi_minus.clone();
        let mut chi_minus = self.chi_plus.clone();
        chi_plus.reverse();
        chi_minus.reverse();
        SpinorField {
            chi_plus,
            chi_minus,
            grid: Arc::clone(&self.grid),
        }
    }
}

/// How the self-gravity convolution is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convolution {
    /// O(N²) sum; reference semantics.
    #[default]
    Direct,
    /// Zero-padded FFT convolution.
    Fft,
}

/// Default dimensionless magnetic force, derived from a 28 mT/m gradient
/// at σ_r = 0.371 nm (see [`crate::units`]).
pub const DEFAULT_GAMMA: f64 = 0.092;
pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_DZ: f64 = 0.05;
pub const DEFAULT_Z_MAX: f64 = 100.0;
pub const DEFAULT_T_MAX: f64 = 10.0;

/// Dimensionless physical and numerical parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub m_tilde: f64,
    pub gamma_tilde: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Corrector passes per step after the predictor.
    pub nonlinear_iters: usize,
    /// Early exit from the corrector once the potential moves less than this.
    pub corrector_tol: f64,
    pub snapshot_stride: usize,
    /// `false` removes the m̃² self-gravity coupling entirely.
    pub self_gravity: bool,
    pub convolution: Convolution,
    /// Relative prominence (fraction of the global maximum) for peak detection.
    pub min_prominence: f64,
    /// Peak separation above which a density counts as split; `None` means 2ε.
    pub separation_threshold: Option<f64>,
    pub keep_snapshots: bool,
}

impl SimParams {
    /// Parameters with the reference numerics (δ = 0.01, Δt = 0.01, t_max = 10).
    pub fn new(m_tilde: f64, theta: f64, epsilon: f64) -> Self {
        SimParams {
            m_tilde,
            gamma_tilde: DEFAULT_GAMMA,
            theta,
            epsilon,
            delta: DEFAULT_DELTA,
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            nonlinear_iters: 2,
            corrector_tol: 1e-10,
            snapshot_stride: 100,
            self_gravity: true,
            convolution: Convolution::Direct,
            min_prominence: 0.05,
            separation_threshold: None,
            keep_snapshots: true,
        }
    }

    pub fn separation_threshold(&self) -> f64 {
        self.separation_threshold.unwrap_or(2.0 * self.epsilon)
    }

    /// Number of steps to reach `t_max`.
    pub fn n_steps(&self) -> usize {
        if self.t_max <= 0.0 {
            0
        } else {
            // Guard against 10.0 / 0.01 = 1000.0000000000001.
            let ratio = self.t_max / self.dt;
            let rounded = ratio.round();
            if (ratio - rounded).abs() < 1e-9 * rounded.max(1.0) {
                rounded as usize
            } else {
                ratio.ceil() as usize
            }
        }
    }

    /// Checks the parameter ranges and the stability condition `dt/dz < 1`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.m_tilde.is_finite() && self.m_tilde > 0.0) {
            return Err(Error::param(
                "m_tilde",
                format!("must be positive, got {}", self.m_tilde),
            ));
        }
        if !self.gamma_tilde.is_finite() {
            return Err(Error::param("gamma_tilde", "must be finite"));
        }
        check_epsilon(self.epsilon)?;
        check_theta(self.theta)?;
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::param(
                "t_max",
                format!("must be non-negative, got {}", self.t_max),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::param("snapshot_stride", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.min_prominence) {
            return Err(Error::param("min_prominence", "must lie in [0, 1)"));
        }
        let ratio = self.dt / grid.dz();
        if ratio >= 1.0 {
            return Err(Error::param(
                "dt",
                format!(
                    "CFL ratio dt/dz = {ratio} must be below 1 (dt = {}, dz = {})",
                    self.dt,
                    grid.dz()
                ),
            ));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    // Allow a few ulps past π so that `PI` computed expressions pass.
    if (0.0..=PI * (1.0 + 1e-15)).contains(&theta) {
        Ok(())
    } else {
        Err(Error::param(
            "theta",
            format!("must lie in [0, π], got {theta}"),
        ))
    }
}
