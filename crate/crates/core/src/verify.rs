//! Independent oracles: closed-form linear solutions and a dense
//! reference propagator. Nothing here shares discretization code with the
//! stepper beyond the grid type.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::Stepper;
use crate::lattice::{Grid, SimParams, SpinorField};
use crate::observables::{expectation_z, populations};
use crate::potentials::{assemble_potentials, GravityKernel, PotentialField};
use crate::tridiag::{thomas_solve, TridiagonalSystem};

/// Largest grid the dense oracle accepts.
pub const DENSE_MAX_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub passed: bool,
    pub details: String,
}

impl OracleReport {
    fn new(name: &str, abs: f64, rel: f64, abs_tol: f64, rel_tol: f64, details: String) -> Self {
        OracleReport {
            name: name.to_string(),
            max_abs_error: abs,
            max_rel_error: rel,
            passed: abs <= abs_tol && rel <= rel_tol,
            details,
        }
    }
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {}: abs {:.3e}, rel {:.3e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_abs_error,
            self.max_rel_error,
            self.details
        )
    }
}

/// Half-width of a free packet that starts as `exp(-z²/2ε²)`:
/// `ε sqrt(1 + (t/(m̃ε²))²)`.
pub fn free_gaussian_width(t: f64, m_tilde: f64, epsilon: f64) -> f64 {
    let s = t / (m_tilde * epsilon * epsilon);
    epsilon * (1.0 + s * s).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Up,
    Down,
}

/// Centre of a spin-polarized packet under the constant force `±γ̃`:
/// `±γ̃ t² / (2 m̃)`.
pub fn linear_sg_expectation(t: f64, gamma_tilde: f64, m_tilde: f64, branch: Branch) -> f64 {
    let z = gamma_tilde * t * t / (2.0 * m_tilde);
    match branch {
        Branch::Up => z,
        Branch::Down => -z,
    }
}

/// Half-width `sqrt(2 Var z)` of a density; equals ε for `|exp(-z²/2ε²)|²`.
pub fn density_half_width(density: &[f64], grid: &Grid) -> f64 {
    let z = grid.z_values();
    let mass = grid.integrate(density);
    let m1: Vec<f64> = density.iter().zip(z).map(|(r, z)| r * z).collect();
    let mean = grid.integrate(&m1) / mass;
    let m2: Vec<f64> = density
        .iter()
        .zip(z)
        .map(|(r, z)| r * (z - mean).powi(2))
        .collect();
    (2.0 * grid.integrate(&m2) / mass).sqrt()
}

/// Dense `n×n` complex matrix in row-major order.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_tridiagonal(sys: &TridiagonalSystem) -> Self {
        let n = sys.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = sys.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = sys.upper[i];
                m[(i + 1, i)] = sys.lower[i];
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap();
            if a[pivot * n + col].norm() == 0.0 {
                return Err(Error::Singular { row: col });
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                x.swap(col, pivot);
            }
            let p = a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] / p;
                if factor.norm() == 0.0 {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[row * n + k] -= factor * v;
                }
                let v = x[col];
                x[row] -= factor * v;
            }
        }
        for row in (0..n).rev() {
            let mut s = x[row];
            for k in row + 1..n {
                s -= a[row * n + k] * x[k];
            }
            x[row] = s / a[row * n + row];
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Dense Hamiltonian `-(1/2m̃)∂² + v` on the interior points with zero
/// Dirichlet values outside.
fn dense_hamiltonian(v: &[f64], m_tilde: f64, dz: f64) -> DenseMatrix {
    let interior = v.len() - 2;
    let mut h = DenseMatrix::zeros(interior);
    let hop = 1.0 / (2.0 * m_tilde * dz * dz);
    for r in 0..interior {
        h[(r, r)] = Complex64::new(2.0 * hop + v[r + 1], 0.0);
        if r > 0 {
            h[(r, r - 1)] = Complex64::new(-hop, 0.0);
        }
        if r + 1 < interior {
            h[(r, r + 1)] = Complex64::new(-hop, 0.0);
        }
    }
    h
}

fn dense_cn_component(
    psi: &[Complex64],
    v: &[f64],
    params: &SimParams,
    dz: f64,
) -> Result<Vec<Complex64>> {
    let h = dense_hamiltonian(v, params.m_tilde, dz);
    let n = h.n;
    let half = Complex64::new(0.0, 0.5 * params.dt);
    let mut forward = DenseMatrix::identity(n);
    let mut backward = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            forward[(i, j)] += half * h[(i, j)];
            backward[(i, j)] -= half * h[(i, j)];
        }
    }
    let rhs = backward.mul_vec(&psi[1..psi.len() - 1]);
    let inner = forward.solve(&rhs)?;
    let mut out = Vec::with_capacity(psi.len());
    out.push(Complex64::new(0.0, 0.0));
    out.extend(inner);
    out.push(Complex64::new(0.0, 0.0));
    Ok(out)
}

/// One Crank-Nicolson step with a frozen potential, built from dense
/// matrices and solved by pivoted elimination.
pub fn dense_reference_step(
    field: &SpinorField,
    potential: &PotentialField,
    params: &SimParams,
) -> Result<SpinorField> {
    let grid = field.grid();
    if grid.len() > DENSE_MAX_POINTS {
        return Err(Error::OracleTooLarge {
            max: DENSE_MAX_POINTS,
            got: grid.len(),
        });
    }
    let dz = grid.dz();
    let chi_plus = dense_cn_component(&field.chi_plus, &potential.v_plus, params, dz)?;
    let chi_minus = dense_cn_component(&field.chi_minus, &potential.v_minus, params, dz)?;
    SpinorField::new(Arc::clone(field.grid_arc()), chi_plus, chi_minus)
}

fn max_abs_diff(a: &SpinorField, b: &SpinorField) -> f64 {
    a.chi_plus
        .iter()
        .zip(&b.chi_plus)
        .chain(a.chi_minus.iter().zip(&b.chi_minus))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Random strictly diagonally dominant complex system.
pub fn random_dominant_system(n: usize, seed: u64) -> TridiagonalSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c =
        |scale: f64| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
    let lower: Vec<Complex64> = (0..n - 1).map(|_| c(1.0)).collect();
    let upper: Vec<Complex64> = (0..n - 1).map(|_| c(1.0)).collect();
    let rhs: Vec<Complex64> = (0..n).map(|_| c(1.0)).collect();
    let mut diag: Vec<Complex64> = (0..n).map(|_| c(1.0)).collect();
    for i in 0..n {
        let off = if i > 0 { lower[i - 1].norm() } else { 0.0 }
            + if i + 1 < n { upper[i].norm() } else { 0.0 };
        let d = diag[i];
        diag[i] = d / d.norm() * (off + 0.5 + d.norm());
    }
    TridiagonalSystem::new(lower, diag, upper, rhs).expect("consistent lengths")
}

/// Thomas solve against the dense elimination on random systems.
pub fn check_thomas(trials: usize, n: usize, seed: u64) -> Result<OracleReport> {
    let mut worst_residual: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for t in 0..trials {
        let sys = random_dominant_system(n, seed + t as u64);
        let x = thomas_solve(&sys)?;
        let dense = DenseMatrix::from_tridiagonal(&sys).solve(&sys.rhs)?;
        worst_residual = worst_residual.max(sys.relative_residual(&x));
        let diff = x
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
        worst_rel = worst_rel.max(diff / scale);
    }
    Ok(OracleReport::new(
        "thomas vs dense elimination",
        worst_residual,
        worst_rel,
        1e-12,
        1e-12,
        format!("{trials} random diagonally dominant systems of size {n}; abs = relative residual"),
    ))
}

/// Frozen-potential stepper step against [`dense_reference_step`].
pub fn check_dense_step(points: usize) -> Result<OracleReport> {
    let grid = Arc::new(Grid::with_points(8.0, points)?);
    let mut params = SimParams::new(0.6, PI / 3.0, 1.2);
    params.dt = 0.5 * grid.dz();
    params.gamma_tilde = 0.4;
    let packet = SpinorField::gaussian(Arc::clone(&grid), params.epsilon, params.theta)?;
    // Give the packet a phase gradient so the test is not purely real.
    let field = {
        let z = grid.z_values().to_vec();
        let mut f = packet;
        for (j, c) in f.chi_plus.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, 0.8 * z[j]);
        }
        for (j, c) in f.chi_minus.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -0.3 * z[j]);
        }
        f
    };
    let kernel = GravityKernel::new(&grid, params.delta, params.convolution)?;
    let potential = assemble_potentials(&field, &params, &kernel)?;
    let mut stepper = Stepper::new(Arc::clone(&grid), params.clone())?;
    let fast = stepper.step_frozen(&field, &potential)?;
    let dense = dense_reference_step(&field, &potential, &params)?;
    let abs = max_abs_diff(&fast, &dense);
    let scale = dense
        .chi_plus
        .iter()
        .chain(&dense.chi_minus)
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(OracleReport::new(
        "frozen-potential step vs dense propagator",
        abs,
        abs / scale,
        1e-10,
        1e-9,
        format!("{points}-point grid, dt = {:.4}", params.dt),
    ))
}

/// Free packet (no field, no gravity) against the analytic width.
pub fn check_free_dispersion(
    grid: Arc<Grid>,
    m_tilde: f64,
    epsilon: f64,
    t: f64,
) -> Result<OracleReport> {
    let mut params = SimParams::new(m_tilde, 0.0, epsilon);
    params.gamma_tilde = 0.0;
    params.self_gravity = false;
    params.t_max = t;
    let field = SpinorField::gaussian(Arc::clone(&grid), epsilon, 0.0)?;
    let mut stepper = Stepper::new(Arc::clone(&grid), params.clone())?;
    let mut state = stepper.start(field)?;
    for _ in 0..params.n_steps() {
        state = stepper.step(state)?;
    }
    let width = density_half_width(&state.field.density(), &grid);
    let expect = free_gaussian_width(state.time, m_tilde, epsilon);
    let abs = (width - expect).abs();
    Ok(OracleReport::new(
        "free dispersion width",
        abs,
        abs / expect,
        f64::INFINITY,
        1e-3,
        format!(
            "m = {m_tilde}, eps = {epsilon}, t = {:.3}: width {width:.6} vs {expect:.6}",
            state.time
        ),
    ))
}

/// Gravity-off spin-polarized packets against `±γ̃t²/2m̃`.
pub fn check_linear_stern_gerlach(
    grid: Arc<Grid>,
    gamma_tilde: f64,
    m_tilde: f64,
    epsilon: f64,
    dt: f64,
    t: f64,
) -> Result<OracleReport> {
    let mut worst: f64 = 0.0;
    let mut path: f64 = 0.0;
    for (theta, branch) in [(0.0, Branch::Up), (PI, Branch::Down)] {
        let mut params = SimParams::new(m_tilde, theta, epsilon);
        params.gamma_tilde = gamma_tilde;
        params.self_gravity = false;
        params.t_max = t;
        params.dt = dt;
        let field = SpinorField::gaussian(Arc::clone(&grid), epsilon, theta)?;
        let mut stepper = Stepper::new(Arc::clone(&grid), params.clone())?;
        let mut state = stepper.start(field)?;
        for _ in 0..params.n_steps() {
            state = stepper.step(state)?;
        }
        let expect = linear_sg_expectation(state.time, gamma_tilde, m_tilde, branch);
        worst = worst.max((expectation_z(&state.field) - expect).abs());
        path = path.max(expect.abs());
        let (up, down) = populations(&state.field);
        worst = worst.max(match branch {
            Branch::Up => down,
            Branch::Down => up,
        });
    }
    Ok(OracleReport::new(
        "gravity-off Stern-Gerlach centre",
        worst,
        worst / path.max(1.0),
        f64::INFINITY,
        1e-6,
        format!("gamma = {gamma_tilde}, m = {m_tilde}, eps = {epsilon}, dz = {}, dt = {dt}, t = {t}; rel = abs per unit path length", grid.dz()),
    ))
}

/// The oracle battery printed by the `verify` command.
pub fn run_all() -> Result<Vec<OracleReport>> {
    let reference = Arc::new(Grid::new(
        crate::lattice::DEFAULT_Z_MAX,
        crate::lattice::DEFAULT_DZ,
    )?);
    // The centre error is O(dz²) + O(dt²), about 2e-5 at the reference resolution.
    let fine = Arc::new(Grid::new(40.0, 0.01)?);
    Ok(vec![
        check_thomas(20, 100, 7)?,
        check_dense_step(64)?,
        check_free_dispersion(Arc::clone(&reference), 1.0, 1.0, 1.0)?,
        check_linear_stern_gerlach(fine, 0.092, 0.5, 4.0, 0.002, 2.0)?,
    ])
}
