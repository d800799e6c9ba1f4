//! Crank-Nicolson time stepping of the coupled spinor equations.
//!
//! Each component obeys `i ∂χ± = [-(1/2m̃)∂² + V_G ∓ γ̃z] χ±`. The nonlinear
//! potential is handled with a predictor using `V(ρⁿ)` followed by corrector
//! passes using the time-centred potential `V((ρⁿ + ρ*)/2)`. When the
//! corrector converges the scheme conserves both the norm and the discrete
//! energy of [`crate::observables::total_energy`].

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Grid, SimParams, SpinorField};
use crate::observables::{Recorder, TrajectoryRecord};
use crate::potentials::{assemble_potentials, GravityKernel, PotentialField};
use crate::tridiag::solve_into;

/// Norm drift in a single step that aborts the run.
pub const INSTABILITY_THRESHOLD: f64 = 1e-6;

/// Field plus bookkeeping carried between steps.
#[derive(Debug, Clone)]
pub struct StepperState {
    pub field: SpinorField,
    pub time: f64,
    pub step_index: usize,
    /// Potential used for the last accepted step (time-centred).
    pub last_potential: PotentialField,
}

/// Reusable buffers for one component's CN solve.
#[derive(Debug, Clone)]
struct Workspace {
    diag: Vec<Complex64>,
    off: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
    x: Vec<Complex64>,
}

impl Workspace {
    fn new(interior: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Workspace {
            diag: vec![zero; interior],
            off: vec![zero; interior.saturating_sub(1)],
            rhs: vec![zero; interior],
            scratch: vec![zero; interior],
            x: vec![zero; interior],
        }
    }

    /// Solves `(1 + i dt/2 H) out = (1 - i dt/2 H) psi` with
    /// `H = -(1/2m)∂² + v` and homogeneous Dirichlet ends.
    fn cn_solve(
        &mut self,
        psi: &[Complex64],
        v: &[f64],
        kinetic: f64,
        half_dt: f64,
        out: &mut [Complex64],
    ) -> Result<()> {
        let n = psi.len();
        let m = n - 2;
        let i = Complex64::new(0.0, 1.0);
        // (1 + i dt/2 H) has off-diagonal i dt/2 (-kinetic).
        let off = Complex64::new(0.0, -half_dt * kinetic);
        self.off.iter_mut().for_each(|o| *o = off);
        for k in 0..m {
            let j = k + 1;
            let h_diag = 2.0 * kinetic + v[j];
            self.diag[k] = Complex64::new(1.0, half_dt * h_diag);
            let left = if j > 1 {
                psi[j - 1]
            } else {
                Complex64::new(0.0, 0.0)
            };
            let right = if j + 2 < n {
                psi[j + 1]
            } else {
                Complex64::new(0.0, 0.0)
            };
            // (1 - i dt/2 H) psi; off-diagonal of H is -kinetic.
            self.rhs[k] = Complex64::new(1.0, -half_dt * h_diag) * psi[j]
                + i * (half_dt * kinetic) * (left + right);
        }
        solve_into(
            &self.off,
            &self.diag,
            &self.off,
            &self.rhs,
            &mut self.scratch,
            &mut self.x,
        )?;
        out[0] = Complex64::new(0.0, 0.0);
        out[n - 1] = Complex64::new(0.0, 0.0);
        out[1..n - 1].copy_from_slice(&self.x);
        Ok(())
    }
}

/// Crank-Nicolson integrator bound to one grid and parameter set.
#[derive(Debug)]
pub struct Stepper {
    grid: Arc<Grid>,
    params: SimParams,
    kernel: GravityKernel,
    work_plus: Workspace,
    work_minus: Workspace,
}

impl Stepper {
    pub fn new(grid: Arc<Grid>, params: SimParams) -> Result<Self> {
        params.validate(&grid)?;
        let kernel = GravityKernel::new(&grid, params.delta, params.convolution)?;
        let interior = grid.len() - 2;
        Ok(Stepper {
            grid,
            params,
            kernel,
            work_plus: Workspace::new(interior),
            work_minus: Workspace::new(interior),
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kernel(&self) -> &GravityKernel {
        &self.kernel
    }

    /// Initial state at `t = 0`.
    pub fn start(&self, field: SpinorField) -> Result<StepperState> {
        self.check_field(&field)?;
        let last_potential = assemble_potentials(&field, &self.params, &self.kernel)?;
        Ok(StepperState {
            field,
            time: 0.0,
            step_index: 0,
            last_potential,
        })
    }

    fn check_field(&self, field: &SpinorField) -> Result<()> {
        if field.grid() != &*self.grid {
            return Err(Error::param(
                "field",
                "field lives on a different grid than the stepper",
            ));
        }
        Ok(())
    }

    /// One linear CN step of both components with a frozen potential.
    pub fn step_frozen(
        &mut self,
        field: &SpinorField,
        potential: &PotentialField,
    ) -> Result<SpinorField> {
        self.check_field(field)?;
        let mut out = field.clone();
        self.solve_components(field, potential, &mut out)?;
        Ok(out)
    }

    fn solve_components(
        &mut self,
        field: &SpinorField,
        potential: &PotentialField,
        out: &mut SpinorField,
    ) -> Result<()> {
        let dz = self.grid.dz();
        let kinetic = 1.0 / (2.0 * self.params.m_tilde * dz * dz);
        let half_dt = 0.5 * self.params.dt;
        let (wp, wm) = (&mut self.work_plus, &mut self.work_minus);
        let (out_plus, out_minus) = (&mut out.chi_plus, &mut out.chi_minus);
        let (rp, rm) = rayon::join(
            || {
                wp.cn_solve(
                    &field.chi_plus,
                    &potential.v_plus,
                    kinetic,
                    half_dt,
                    out_plus,
                )
            },
            || {
                wm.cn_solve(
                    &field.chi_minus,
                    &potential.v_minus,
                    kinetic,
                    half_dt,
                    out_minus,
                )
            },
        );
        rp.and(rm)
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: StepperState) -> Result<StepperState> {
        self.check_field(&state.field)?;
        let current = state.field;
        let step_index = state.step_index + 1;
        let norm_before = current.norm();

        // Predictor with the potential of the current density.
        let mut potential = assemble_potentials(&current, &self.params, &self.kernel)?;
        let mut next = current.clone();
        self.solve_components(&current, &potential, &mut next)?;

        if self.params.self_gravity {
            let rho_now = current.density();
            let mut mid = vec![0.0; rho_now.len()];
            for _ in 0..self.params.nonlinear_iters {
                for ((m, a), b) in mid.iter_mut().zip(&rho_now).zip(next.density()) {
                    *m = 0.5 * (a + b);
                }
                let centred = PotentialField::from_gravity(
                    self.kernel.potential(&mid, self.params.m_tilde)?,
                    &self.grid,
                    self.params.gamma_tilde,
                );
                let change = centred.max_change(&potential);
                potential = centred;
                if change < self.params.corrector_tol {
                    break;
                }
                self.solve_components(&current, &potential, &mut next)?;
            }
        }

        let drift = (next.norm() - norm_before).abs();
        if !drift.is_finite() || drift > INSTABILITY_THRESHOLD {
            return Err(Error::Instability {
                step: step_index,
                drift,
            });
        }

        Ok(StepperState {
            field: next,
            time: step_index as f64 * self.params.dt,
            step_index,
            last_potential: potential,
        })
    }
}

/// Convenience single step; builds a fresh [`Stepper`].
pub fn cn_step(state: StepperState, params: &SimParams) -> Result<StepperState> {
    let mut stepper = Stepper::new(Arc::clone(state.field.grid_arc()), params.clone())?;
    stepper.step(state)
}

/// Runs `ceil(t_max/dt)` steps, calling `observer` at `t = 0`, every
/// `snapshot_stride` steps and at the final step.
///
/// A numerical failure does not return an error: the partial record comes
/// back with `failed` set.
pub fn evolve(
    field: SpinorField,
    params: &SimParams,
    observer: &mut dyn FnMut(f64, &SpinorField),
) -> Result<TrajectoryRecord> {
    let grid = Arc::clone(field.grid_arc());
    let mut stepper = Stepper::new(Arc::clone(&grid), params.clone())?;
    let mut recorder = Recorder::new(params.clone(), grid);
    let n_steps = params.n_steps();

    let mut state = stepper.start(field)?;
    recorder.observe(state.time, &state.field, stepper.kernel())?;
    observer(state.time, &state.field);

    for step in 1..=n_steps {
        state = match stepper.step(state.clone()) {
            Ok(next) => next,
            Err(err) => {
                log::error!("run aborted at step {step}: {err}");
                recorder.fail(err.to_string());
                break;
            }
        };
        if step % params.snapshot_stride == 0 || step == n_steps {
            recorder.observe(state.time, &state.field, stepper.kernel())?;
            observer(state.time, &state.field);
        }
    }
    Ok(recorder.finish(&state.field))
}
