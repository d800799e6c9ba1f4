//! Spin-diagonal potentials: the magnetic gradient term and the regularized
//! nonlocal self-gravity of the total density.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{Convolution, Grid, SimParams, SpinorField};

/// Potentials felt by the two spin components.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub v_gravity: Vec<f64>,
    /// `V_G - γ̃ z̃`, felt by χ₊.
    pub v_plus: Vec<f64>,
    /// `V_G + γ̃ z̃`, felt by χ₋.
    pub v_minus: Vec<f64>,
}

impl PotentialField {
    pub fn from_gravity(v_gravity: Vec<f64>, grid: &Grid, gamma_tilde: f64) -> Self {
        let (v_plus, v_minus) = v_gravity
            .iter()
            .zip(grid.z_values())
            .map(|(vg, z)| (vg - gamma_tilde * z, vg + gamma_tilde * z))
            .unzip();
        PotentialField {
            v_gravity,
            v_plus,
            v_minus,
        }
    }

    /// Largest pointwise change of the gravity part.
    pub fn max_change(&self, other: &PotentialField) -> f64 {
        self.v_gravity
            .iter()
            .zip(&other.v_gravity)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `|χ₊|² + |χ₋|²` at every grid point.
pub fn total_density(field: &SpinorField) -> Vec<f64> {
    field.density()
}

/// Regularized kernel `1/sqrt((z - z')² + δ²)` tabulated on a grid, with an
/// optional FFT convolution path.
pub struct GravityKernel {
    n: usize,
    dz: f64,
    /// `full[i] = K(|i - (n-1)|·dz)`, length `2n - 1`.
    full: Vec<f64>,
    fft: Option<FftConvolver>,
}

struct FftConvolver {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
}

impl std::fmt::Debug for GravityKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GravityKernel")
            .field("n", &self.n)
            .field("dz", &self.dz)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

impl GravityKernel {
    pub fn new(grid: &Grid, delta: f64, method: Convolution) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {delta}"),
            ));
        }
        let n = grid.len();
        let dz = grid.dz();
        let half: Vec<f64> = (0..n)
            .map(|d| {
                let s = d as f64 * dz;
                1.0 / (s * s + delta * delta).sqrt()
            })
            .collect();
        let full: Vec<f64> = (0..2 * n - 1).map(|i| half[i.abs_diff(n - 1)]).collect();

        let fft = match method {
            Convolution::Direct => None,
            Convolution::Fft => {
                let len = (2 * n - 1).next_power_of_two();
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(len);
                let inverse = planner.plan_fft_inverse(len);
                // Circular layout: kc[d mod len] = K(|d|) for |d| < n.
                let mut kernel_hat = vec![Complex64::new(0.0, 0.0); len];
                for (d, &k) in half.iter().enumerate() {
                    kernel_hat[d] = Complex64::new(k, 0.0);
                    if d > 0 {
                        kernel_hat[len - d] = Complex64::new(k, 0.0);
                    }
                }
                forward.process(&mut kernel_hat);
                Some(FftConvolver {
                    forward,
                    inverse,
                    kernel_hat,
                })
            }
        };
        Ok(GravityKernel { n, dz, full, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `V_G(z_j) = -m̃² Σ_k w_k ρ_k K(z_j - z_k)` with trapezoidal weights.
    pub fn potential(&self, density: &[f64], m_tilde: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.potential_into(density, m_tilde, &mut out)?;
        Ok(out)
    }

    pub fn potential_into(&self, density: &[f64], m_tilde: f64, out: &mut [f64]) -> Result<()> {
        let n = self.n;
        if density.len() != n || out.len() != n {
            return Err(Error::param(
                "density",
                format!("expected {n} samples, got {}", density.len()),
            ));
        }
        if let Some(bad) = density.iter().find(|r| r.is_nan()) {
            return Err(Error::Numeric(format!("density contains {bad}")));
        }
        if density.iter().any(|&r| r < 0.0) {
            return Err(Error::param("density", "must be non-negative"));
        }

        let coupling = -m_tilde * m_tilde;
        let weighted: Vec<f64> = density
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let w = if k == 0 || k + 1 == n {
                    0.5 * self.dz
                } else {
                    self.dz
                };
                w * r
            })
            .collect();

        match &self.fft {
            None => {
                out.par_iter_mut().enumerate().for_each(|(j, v)| {
                    let window = &self.full[n - 1 - j..2 * n - 1 - j];
                    *v = coupling * dot(&weighted, window);
                });
            }
            Some(conv) => {
                let len = conv.kernel_hat.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); len];
                for (b, q) in buf.iter_mut().zip(&weighted) {
                    b.re = *q;
                }
                conv.forward.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(&conv.kernel_hat) {
                    *b *= k;
                }
                conv.inverse.process(&mut buf);
                let scale = coupling / len as f64;
                for (v, b) in out.iter_mut().zip(&buf) {
                    *v = (scale * b.re).min(0.0);
                }
            }
        }
        Ok(())
    }
}

/// Fixed-order dot product; four lanes so the loop vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Direct-sum self-gravity potential for a density on `grid`.
pub fn gravity_potential(
    density: &[f64],
    grid: &Grid,
    m_tilde: f64,
    delta: f64,
) -> Result<Vec<f64>> {
    GravityKernel::new(grid, delta, Convolution::Direct)?.potential(density, m_tilde)
}

/// Potentials for the current field. `kernel` must have been built for the
/// field's grid and `params.delta`.
pub fn assemble_potentials(
    field: &SpinorField,
    params: &SimParams,
    kernel: &GravityKernel,
) -> Result<PotentialField> {
    let grid = field.grid();
    let v_gravity = if params.self_gravity {
        kernel.potential(&field.density(), params.m_tilde)?
    } else {
        vec![0.0; grid.len()]
    };
    Ok(PotentialField::from_gravity(
        v_gravity,
        grid,
        params.gamma_tilde,
    ))
}
