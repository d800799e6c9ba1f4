//! Complex tridiagonal systems and the Thomas algorithm.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `A x = rhs` with `A` tridiagonal. `lower[i]` is `A[i+1][i]`, `upper[i]` is `A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl TridiagonalSystem {
    pub fn new(
        lower: Vec<Complex64>,
        diag: Vec<Complex64>,
        upper: Vec<Complex64>,
        rhs: Vec<Complex64>,
    ) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::param("diag", "empty system"));
        }
        if lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
            return Err(Error::param(
                "system",
                format!(
                    "inconsistent lengths: lower {}, diag {n}, upper {}, rhs {}",
                    lower.len(),
                    upper.len(),
                    rhs.len()
                ),
            ));
        }
        Ok(TridiagonalSystem {
            lower,
            diag,
            upper,
            rhs,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `|a_ii| > Σ_{j≠i} |a_ij|` on every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let mut off = 0.0;
            if i > 0 {
                off += self.lower[i - 1].norm();
            }
            if i + 1 < n {
                off += self.upper[i].norm();
            }
            self.diag[i].norm() > off
        })
    }

    /// `A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `‖A x - rhs‖₂ / ‖rhs‖₂` (absolute when the right-hand side vanishes).
    pub fn relative_residual(&self, x: &[Complex64]) -> f64 {
        let ax = self.apply(x);
        let res: f64 = ax
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = self.rhs.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        if scale > 0.0 {
            res / scale
        } else {
            res
        }
    }
}

/// Solves the system by forward elimination and back substitution.
pub fn thomas_solve(system: &TridiagonalSystem) -> Result<Vec<Complex64>> {
    let mut x = vec![Complex64::new(0.0, 0.0); system.len()];
    let mut scratch = vec![Complex64::new(0.0, 0.0); system.len()];
    solve_into(
        &system.lower,
        &system.diag,
        &system.upper,
        &system.rhs,
        &mut scratch,
        &mut x,
    )?;
    Ok(x)
}

/// Allocation-free Thomas sweep. `scratch` and `x` must have the length of `diag`.
pub(crate) fn solve_into(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
    scratch: &mut [Complex64],
    x: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    let zero = Complex64::new(0.0, 0.0);

    let mut pivot = diag[0];
    if pivot == zero {
        return Err(Error::Singular { row: 0 });
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * scratch[i];
        if pivot == zero || !pivot.is_finite() {
            return Err(Error::Singular { row: i });
        }
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= scratch[i + 1] * next;
    }
    Ok(())
}
