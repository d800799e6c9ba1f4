//! Conversion between SI quantities and the dimensionless simulation variables.
//!
//! A length scale `σ_r` fixes the mass and time scales
//! `m_r = (ħ²/(G σ_r))^(1/3)` and `t_r = (σ_r⁵/(G ħ))^(1/3)`, in which the
//! evolution equation carries no physical constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values used throughout.
pub mod constants {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Newtonian constant of gravitation, m³ kg⁻¹ s⁻².
    pub const G: f64 = 6.674_30e-11;
    /// Bohr magneton, J T⁻¹.
    pub const MU_B: f64 = 9.274_010_078_3e-24;
    /// Atomic mass constant, kg.
    pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
}

use constants::{ATOMIC_MASS, G, HBAR, MU_B};

/// Length, mass and time scales of the dimensionless system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    /// Metres.
    pub sigma_r: f64,
    /// Kilograms.
    pub m_r: f64,
    /// Seconds.
    pub t_r: f64,
    /// `m_r σ_r / t_r²`, newtons.
    pub force_scale: f64,
}

impl ScaleSet {
    pub fn from_sigma(sigma_r: f64) -> Result<Self> {
        if !(sigma_r.is_finite() && sigma_r > 0.0) {
            return Err(Error::param(
                "sigma_r",
                format!("must be positive, got {sigma_r}"),
            ));
        }
        let m_r = (HBAR * HBAR / (G * sigma_r)).cbrt();
        let t_r = (sigma_r.powi(5) / (G * HBAR)).cbrt();
        Ok(ScaleSet {
            sigma_r,
            m_r,
            t_r,
            force_scale: m_r * sigma_r / (t_r * t_r),
        })
    }

    pub fn m_r_in_u(&self) -> f64 {
        self.m_r / ATOMIC_MASS
    }

    pub fn mass_to_dimensionless(&self, mass_u: f64) -> f64 {
        mass_u * ATOMIC_MASS / self.m_r
    }

    pub fn mass_to_physical_u(&self, m_tilde: f64) -> f64 {
        m_tilde * self.m_r / ATOMIC_MASS
    }

    pub fn time_to_dimensionless(&self, seconds: f64) -> f64 {
        seconds / self.t_r
    }

    pub fn time_to_physical(&self, t_tilde: f64) -> f64 {
        t_tilde * self.t_r
    }

    pub fn length_to_dimensionless(&self, metres: f64) -> f64 {
        metres / self.sigma_r
    }

    pub fn length_to_physical(&self, z_tilde: f64) -> f64 {
        z_tilde * self.sigma_r
    }

    /// `γ̃ = μ_B B₀ / (m_r σ_r / t_r²)` for a gradient in T/m.
    pub fn gamma_dimensionless(&self, gradient: f64) -> f64 {
        MU_B * gradient / self.force_scale
    }

    /// Gradient in T/m producing a given `γ̃`.
    pub fn gradient_for_gamma(&self, gamma_tilde: f64) -> f64 {
        gamma_tilde * self.force_scale / MU_B
    }
}

pub fn scales_from_sigma(sigma_r: f64) -> Result<ScaleSet> {
    ScaleSet::from_sigma(sigma_r)
}

pub fn gamma_dimensionless(gradient: f64, scales: &ScaleSet) -> f64 {
    scales.gamma_dimensionless(gradient)
}

pub fn mass_to_dimensionless(mass_u: f64, scales: &ScaleSet) -> Result<f64> {
    if !(mass_u.is_finite() && mass_u > 0.0) {
        return Err(Error::param(
            "mass_u",
            format!("must be positive, got {mass_u}"),
        ));
    }
    Ok(scales.mass_to_dimensionless(mass_u))
}
