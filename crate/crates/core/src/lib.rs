//! One-dimensional Stern-Gerlach dynamics of a spin-1/2 particle with
//! Schrödinger-Newton self-gravity.
//!
//! In dimensionless variables each spin component obeys
//!
//! ```text
//! i ∂χ±/∂t = -(1/2m̃) ∂²χ±/∂z² ∓ γ̃ z χ± - m̃² χ± ∫ ρ(z') / sqrt((z-z')² + δ²) dz'
//! ```
//!
//! with `ρ = |χ₊|² + |χ₋|²`. Small masses split into two spin-polarized
//! packets; heavy ones stay together and follow the classical path of a
//! moment tilted at angle θ.

pub mod error;
pub mod evolve;
pub mod lattice;
pub mod observables;
pub mod potentials;
pub mod runner;
pub mod tridiag;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
pub use evolve::{cn_step, evolve, Stepper, StepperState};
pub use lattice::{Convolution, Grid, SimParams, SpinorField};
pub use observables::{
    classical_trajectory, classify_split, expectation_z, find_peaks, populations, total_energy,
    Peak, SplitClass, SplitKind, TrajectoryRecord,
};
pub use potentials::{
    assemble_potentials, gravity_potential, total_density, GravityKernel, PotentialField,
};
pub use tridiag::{thomas_solve, TridiagonalSystem};
pub use units::ScaleSet;
