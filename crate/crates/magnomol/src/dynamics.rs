//! Stability analysis of the drift matrix and the steady-state covariance
//! matrix from the Lyapunov equation `A V + V A^T = -D`.
//!
//! Everything here works for a general 2n-dimensional quadrature space;
//! the rest of the crate uses n = 3 modes. Vacuum variance is 1/2 and the
//! symplectic form is the block-diagonal stack of `[[0, 1], [-1, 0]]`.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Spectral abscissa below which a drift matrix counts as stable.
pub const STABILITY_MARGIN: f64 = 1e-12;
/// Relative Frobenius residual the Lyapunov solution must satisfy.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;
/// Condition-number estimate above which the solve is flagged.
pub const CONDITION_WARN_THRESHOLD: f64 = 1e12;
const SYMMETRY_REL_TOL: f64 = 1e-10;
const DIVERGENCE_LIMIT: f64 = 1e12;
const EIGEN_MAX_ITERS: usize = 100_000;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error(
        "matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds relative tolerance {tol:.1e}"
    )]
    NotSymmetric { asymmetry: f64, tol: f64 },
    #[error("{labels} mode labels do not match dimension {dim}")]
    LabelMismatch { labels: usize, dim: usize },
    #[error("drift matrix is unstable (spectral abscissa {spectral_abscissa:.6e})")]
    Unstable { spectral_abscissa: f64 },
    #[error("eigenvalue iteration failed to converge for matrix:\n{matrix}")]
    EigenFailure { matrix: String },
    #[error("Lyapunov system is singular")]
    SingularSystem,
    #[error("Lyapunov residual {residual:.3e} exceeds {tol:.1e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("covariance evolution diverged at t = {t:.3e} (entry magnitude {magnitude:.3e})")]
    Diverged { t: f64, magnitude: f64 },
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

/// The standard symplectic form for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn check_square(m: &DMatrix<f64>) -> Result<usize, DynamicsError> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(DynamicsError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite);
    }
    Ok(m.nrows())
}

/// Real symmetric covariance matrix over quadratures `(X_1, Y_1, ...)`,
/// symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
    mode_labels: Vec<String>,
}

impl CovarianceMatrix {
    /// Wraps a 2n x 2n matrix, rejecting asymmetry beyond a relative
    /// tolerance of 1e-10 and symmetrizing what remains.
    pub fn new(data: DMatrix<f64>, mode_labels: Vec<String>) -> Result<Self, DynamicsError> {
        let dim = check_square(&data)?;
        if dim % 2 != 0 || mode_labels.len() * 2 != dim {
            return Err(DynamicsError::LabelMismatch {
                labels: mode_labels.len(),
                dim,
            });
        }
        let scale = data.amax().max(1.0);
        let asymmetry = (&data - data.transpose()).amax();
        if asymmetry > SYMMETRY_REL_TOL * scale {
            return Err(DynamicsError::NotSymmetric {
                asymmetry,
                tol: SYMMETRY_REL_TOL,
            });
        }
        let data = (&data + data.transpose()) * 0.5;
        Ok(Self { data, mode_labels })
    }

    /// n-mode vacuum state `I/2` with generic labels.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            data: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
            mode_labels: generic_labels(n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mode_labels.len()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn mode_labels(&self) -> &[String] {
        &self.mode_labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, DynamicsError> {
        if labels.len() != self.n_modes() {
            return Err(DynamicsError::LabelMismatch {
                labels: labels.len(),
                dim: self.dim(),
            });
        }
        self.mode_labels = labels;
        Ok(self)
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + i Omega / 2`;
    /// non-negative (up to numerical tolerance) for physical states.
    pub fn physicality_min_eig(&self) -> Result<f64, DynamicsError> {
        let omega = symplectic_form(self.n_modes());
        let dim = self.dim();
        let h = DMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(self.data[(i, j)], 0.5 * omega[(i, j)])
        });
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, EIGEN_MAX_ITERS).ok_or_else(|| {
            DynamicsError::EigenFailure {
                matrix: format!("{:.6e}", self.data),
            }
        })?;
        Ok(eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }

    pub fn is_physical(&self, tol: f64) -> Result<bool, DynamicsError> {
        Ok(self.physicality_min_eig()? >= -tol)
    }
}

fn generic_labels(n_modes: usize) -> Vec<String> {
    (0..n_modes).map(|k| format!("q{k}")).collect()
}

/// Stability verdict for a drift matrix.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Largest real part over the eigenvalue spectrum.
    pub spectral_abscissa: f64,
    /// Full spectrum, sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
}

/// Eigenvalue stability test: stable iff every eigenvalue of the drift
/// matrix sits left of `-STABILITY_MARGIN`.
pub fn is_stable(drift: &DMatrix<f64>) -> Result<StabilityReport, DynamicsError> {
    check_square(drift)?;
    let schur = Schur::try_new(drift.clone(), f64::EPSILON, EIGEN_MAX_ITERS).ok_or_else(|| {
        DynamicsError::EigenFailure {
            matrix: format!("{:.6e}", drift),
        }
    })?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let spectral_abscissa = eigenvalues[0].re;
    Ok(StabilityReport {
        stable: spectral_abscissa < -STABILITY_MARGIN,
        spectral_abscissa,
        eigenvalues,
    })
}

/// Lyapunov solution plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    pub cm: CovarianceMatrix,
    /// `||A V + V A^T + D||_F / ||D||_F`.
    pub residual: f64,
    /// Condition estimate of the vectorized system.
    pub condition: f64,
    /// Set when the condition estimate exceeds 1e12; the residual bound is
    /// not enforced in that case.
    pub ill_conditioned: bool,
}

/// Solves `A V + V A^T = -D` for the unique steady-state covariance of a
/// stable drift matrix.
///
/// The equation is vectorized through the Kronecker identity
/// `(I (x) A + A (x) I) vec(V) = -vec(D)` and solved as a dense linear
/// system; at these dimensions that is both fast and simple.
pub fn solve_lyapunov(
    drift: &DMatrix<f64>,
    diffusion: &DMatrix<f64>,
) -> Result<LyapunovSolution, DynamicsError> {
    let n = check_square(drift)?;
    let nd = check_square(diffusion)?;
    if n != nd {
        return Err(DynamicsError::DimensionMismatch { left: n, right: nd });
    }
    let scale = diffusion.amax().max(1.0);
    let asymmetry = (diffusion - diffusion.transpose()).amax();
    if asymmetry > SYMMETRY_REL_TOL * scale {
        return Err(DynamicsError::NotSymmetric {
            asymmetry,
            tol: SYMMETRY_REL_TOL,
        });
    }
    let report = is_stable(drift)?;
    if !report.stable {
        return Err(DynamicsError::Unstable {
            spectral_abscissa: report.spectral_abscissa,
        });
    }

    let eye = DMatrix::<f64>::identity(n, n);
    let system = eye.kronecker(drift) + drift.kronecker(&eye);
    let svd = system.clone().svd(false, false);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0_f64, f64::INFINITY), |(mx, mn), &s| {
            (mx.max(s), mn.min(s))
        });
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let ill_conditioned = condition > CONDITION_WARN_THRESHOLD;

    let rhs = -DVector::from_column_slice(diffusion.as_slice());
    let lu = system.clone().lu();
    let mut vec_v = lu.solve(&rhs).ok_or(DynamicsError::SingularSystem)?;
    // iterative refinement recovers the digits the LU loses when the
    // drift is close to marginal stability
    for _ in 0..2 {
        let defect = &rhs - &system * &vec_v;
        match lu.solve(&defect) {
            Some(correction) => vec_v += correction,
            None => break,
        }
    }
    let v = DMatrix::from_column_slice(n, n, vec_v.as_slice());
    let v = (&v + v.transpose()) * 0.5;

    let diffusion_norm = diffusion.norm();
    let residual_abs = (drift * &v + &v * drift.transpose() + diffusion).norm();
    let residual = if diffusion_norm > 0.0 {
        residual_abs / diffusion_norm
    } else {
        residual_abs
    };
    // the residual of an exact solution still evaluates to roughly
    // eps * ||A|| ||V|| / ||D|| in f64; only excesses beyond that floor
    // indicate a bad solve
    let eval_floor = 32.0 * f64::EPSILON * drift.norm() * v.norm()
        / if diffusion_norm > 0.0 {
            diffusion_norm
        } else {
            1.0
        };
    if !ill_conditioned && residual > LYAPUNOV_RESIDUAL_TOL.max(eval_floor) {
        return Err(DynamicsError::ResidualTooLarge {
            residual,
            tol: LYAPUNOV_RESIDUAL_TOL,
        });
    }
    let cm = CovarianceMatrix::new(v, generic_labels(n / 2))?;
    Ok(LyapunovSolution {
        cm,
        residual,
        condition,
        ill_conditioned,
    })
}

/// Integrates `dV/dt = A V + V A^T + D` with classical RK4 from `v0`,
/// symmetrizing after every step.
///
/// This is deliberately independent of [`solve_lyapunov`] so the two can
/// cross-check each other: for stable drift the integration converges to
/// the Lyapunov fixed point, which the RK4 map preserves exactly.
pub fn evolve_covariance(
    drift: &DMatrix<f64>,
    diffusion: &DMatrix<f64>,
    v0: &CovarianceMatrix,
    t_final: f64,
    dt: f64,
) -> Result<CovarianceMatrix, DynamicsError> {
    let n = check_square(drift)?;
    let nd = check_square(diffusion)?;
    if n != nd {
        return Err(DynamicsError::DimensionMismatch { left: n, right: nd });
    }
    if v0.dim() != n {
        return Err(DynamicsError::DimensionMismatch {
            left: v0.dim(),
            right: n,
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DynamicsError::InvalidArgument {
            name: "dt",
            reason: format!("must be positive and finite, got {dt}"),
        });
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(DynamicsError::InvalidArgument {
            name: "t_final",
            reason: format!("must be positive and finite, got {t_final}"),
        });
    }

    let mut v = v0.data().clone();
    let mut w = DMatrix::zeros(n, n);
    let mut k1 = DMatrix::zeros(n, n);
    let mut k2 = DMatrix::zeros(n, n);
    let mut k3 = DMatrix::zeros(n, n);
    let mut k4 = DMatrix::zeros(n, n);
    let mut stage = DMatrix::zeros(n, n);

    // rhs(V) = A V + (A V)^T + D; valid because every stage argument stays
    // symmetric
    let rhs_into = |v: &DMatrix<f64>, w: &mut DMatrix<f64>, out: &mut DMatrix<f64>| {
        w.gemm(1.0, drift, v, 0.0);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = w[(i, j)] + w[(j, i)] + diffusion[(i, j)];
            }
        }
    };

    let full_steps = (t_final / dt).floor() as usize;
    let remainder = t_final - full_steps as f64 * dt;
    let mut t = 0.0_f64;
    for step_index in 0..=full_steps {
        let h = if step_index < full_steps {
            dt
        } else {
            remainder
        };
        if h <= 0.0 {
            break;
        }
        rhs_into(&v, &mut w, &mut k1);
        for i in 0..n {
            for j in 0..n {
                stage[(i, j)] = v[(i, j)] + 0.5 * h * k1[(i, j)];
            }
        }
        rhs_into(&stage, &mut w, &mut k2);
        for i in 0..n {
            for j in 0..n {
                stage[(i, j)] = v[(i, j)] + 0.5 * h * k2[(i, j)];
            }
        }
        rhs_into(&stage, &mut w, &mut k3);
        for i in 0..n {
            for j in 0..n {
                stage[(i, j)] = v[(i, j)] + h * k3[(i, j)];
            }
        }
        rhs_into(&stage, &mut w, &mut k4);
        let sixth = h / 6.0;
        for i in 0..n {
            for j in 0..n {
                v[(i, j)] +=
                    sixth * (k1[(i, j)] + 2.0 * k2[(i, j)] + 2.0 * k3[(i, j)] + k4[(i, j)]);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (v[(i, j)] + v[(j, i)]);
                v[(i, j)] = avg;
                v[(j, i)] = avg;
            }
        }
        t += h;
        let magnitude = v.amax();
        if !magnitude.is_finite() || magnitude > DIVERGENCE_LIMIT {
            return Err(DynamicsError::Diverged { t, magnitude });
        }
    }
    CovarianceMatrix::new(v, v0.mode_labels().to_vec())
}
