//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use num_complex::Complex64;
use sgn_core::{Grid, SimParams, SpinorField, TridiagonalSystem};

/// Grid of `n` points on ±100.
pub fn grid(n: usize) -> Arc<Grid> {
    Arc::new(Grid::with_points(100.0, n).expect("valid bench grid"))
}

/// The θ = π/3, ε = 2 packet used by most scenarios.
pub fn packet(grid: &Arc<Grid>) -> SpinorField {
    SpinorField::gaussian(Arc::clone(grid), 2.0, std::f64::consts::FRAC_PI_3)
        .expect("resolved packet")
}

pub fn params(m_tilde: f64) -> SimParams {
    SimParams::new(m_tilde, std::f64::consts::FRAC_PI_3, 2.0)
}

/// A diagonally dominant complex system shaped like one Crank-Nicolson solve.
pub fn cn_like_system(n: usize) -> TridiagonalSystem {
    let off = Complex64::new(0.0, -2.0);
    let diag: Vec<_> = (0..n)
        .map(|j| Complex64::new(1.0, 4.0 + 1e-3 * j as f64))
        .collect();
    let rhs: Vec<_> = (0..n)
        .map(|j| Complex64::new((j as f64 * 0.01).sin(), 0.0))
        .collect();
    TridiagonalSystem::new(vec![off; n - 1], diag, vec![off; n - 1], rhs)
        .expect("consistent lengths")
}
