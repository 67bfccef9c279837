//! Physical parameters, the classical steady state, and the linearized
//! drift/diffusion matrices of the driven photon–magnon–vibration system.
//!
//! All rates and detunings are stored normalized to the vibrational
//! frequency `omega_nu`; `omega_nu` itself is kept in SI units because it
//! sets the thermal occupation of the vibrational bath. The quadrature
//! ordering is `(X_a, Y_a, X_m, Y_m, X_B, Y_B)` everywhere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Electron gyromagnetic ratio (rad s^-1 T^-1), CODATA 2018.
pub const GYROMAGNETIC_RATIO: f64 = 1.760_859_630_52e11;
/// Spin density of the YIG sphere (m^-3).
pub const SPIN_DENSITY: f64 = 4.22e27;

/// Residual tolerance for the steady-state fixed point.
pub const STEADY_STATE_TOL: f64 = 1e-12;
const STEADY_STATE_MAX_ITERS: usize = 10_000;
const STEADY_STATE_RELAXATION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error(
        "steady state did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NotConverged { iterations: usize, residual: f64 },
    #[error("non-finite value while assembling the linearized model ({context})")]
    NonFinite { context: &'static str },
}

/// How the configured detunings are interpreted when solving the steady
/// state and assembling the drift matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningMode {
    /// `delta_a`/`delta_m` are the effective detunings, i.e. the static
    /// vibrational displacement is already absorbed into them. This is the
    /// default; sweeps are plotted directly against the effective detuning.
    Effective,
    /// `delta_a`/`delta_m` are bare detunings; the displacement feedback
    /// `2 G Re[beta]` is resolved by damped fixed-point iteration.
    Bare,
}

/// Whether the effective couplings entering the drift matrix carry the
/// collective sqrt(N) enhancement.
///
/// The collective form `G_a |alpha|` with `G_a = g_a sqrt(N)` is what the
/// linearization of the collective Hamiltonian yields and is the default;
/// the single-molecule form `g_a |alpha|` is kept selectable for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingConvention {
    Collective,
    SingleMolecule,
}

/// Bare physical parameters of the model.
///
/// All rates are in units of `omega_nu` except `omega_nu` itself (rad/s)
/// and `temperature` (K).
#[derive(Debug, Clone, Serialize)]
pub struct SystemParams {
    /// Vibrational angular frequency (rad/s, positive).
    pub omega_nu: f64,
    /// Cavity detuning.
    pub delta_a: f64,
    /// Magnon detuning (Barnett shift excluded).
    pub delta_m: f64,
    /// Barnett frequency shift; its sign is the nonreciprocity knob.
    pub delta_b: f64,
    /// Photon–magnon coupling rate J.
    pub j_coupling: f64,
    /// Single-molecule photon–vibration coupling rate.
    pub g_a: f64,
    /// Single-molecule magnon–vibration coupling rate.
    pub g_m: f64,
    /// Number of molecules in the ensemble.
    pub n_molecules: u64,
    /// Cavity decay rate.
    pub kappa_a: f64,
    /// Magnon decay rate.
    pub kappa_m: f64,
    /// Vibrational decay rate.
    pub gamma_nu: f64,
    /// Drive strength E_l.
    pub drive: f64,
    /// Bath temperature (K).
    pub temperature: f64,
    pub detuning_mode: DetuningMode,
}

impl Default for SystemParams {
    /// Canonical operating point used throughout the sweep presets:
    /// omega_nu/2pi = 30 THz, E_l = 3.8, gamma_nu = 0.005, g = 3.3e-6,
    /// N = 1e7, kappa_a = kappa_m = 0.0166, J = 0.2, |delta_b| = 0.3,
    /// delta_a = -1, delta_m = 1, T = 210 K.
    fn default() -> Self {
        Self {
            omega_nu: 2.0 * PI * 30.0e12,
            delta_a: -1.0,
            delta_m: 1.0,
            delta_b: 0.3,
            j_coupling: 0.2,
            g_a: 3.3e-6,
            g_m: 3.3e-6,
            n_molecules: 10_000_000,
            kappa_a: 0.0166,
            kappa_m: 0.0166,
            gamma_nu: 0.005,
            drive: 3.8,
            temperature: 210.0,
            detuning_mode: DetuningMode::Effective,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        fn finite(field: &'static str, v: f64) -> Result<(), ModelError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {v}"),
                })
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<(), ModelError> {
            finite(field, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("must be positive, got {v}"),
                })
            }
        }
        positive("omega_nu", self.omega_nu)?;
        finite("delta_a", self.delta_a)?;
        finite("delta_m", self.delta_m)?;
        finite("delta_b", self.delta_b)?;
        finite("j_coupling", self.j_coupling)?;
        finite("g_a", self.g_a)?;
        finite("g_m", self.g_m)?;
        if self.n_molecules < 1 {
            return Err(ModelError::InvalidParameter {
                field: "n_molecules",
                reason: "must be at least 1".into(),
            });
        }
        positive("kappa_a", self.kappa_a)?;
        positive("kappa_m", self.kappa_m)?;
        positive("gamma_nu", self.gamma_nu)?;
        finite("drive", self.drive)?;
        finite("temperature", self.temperature)?;
        if self.temperature < 0.0 {
            return Err(ModelError::InvalidParameter {
                field: "temperature",
                reason: format!("must be non-negative, got {}", self.temperature),
            });
        }
        Ok(())
    }

    /// Collective photon–vibration coupling `G_a = g_a sqrt(N)`.
    pub fn collective_g_a(&self) -> f64 {
        self.g_a * (self.n_molecules as f64).sqrt()
    }

    /// Collective magnon–vibration coupling `G_m = g_m sqrt(N)`.
    pub fn collective_g_m(&self) -> f64 {
        self.g_m * (self.n_molecules as f64).sqrt()
    }
}

/// Bose–Einstein occupation `[exp(hbar omega / k_B T) - 1]^(-1)`.
///
/// Returns exactly 0 at zero temperature.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64, ModelError> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(ModelError::InvalidParameter {
            field: "omega",
            reason: format!("must be finite and positive, got {omega}"),
        });
    }
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(ModelError::InvalidParameter {
            field: "temperature",
            reason: format!("must be finite and non-negative, got {temperature}"),
        });
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (BOLTZMANN * temperature)).exp_m1())
}

/// Drive strength `E_l = gamma sqrt(5 rho V) B_0 / 4` (rad/s) for a drive
/// field of amplitude `field_amplitude` (T) applied to a YIG sphere of
/// volume `sphere_volume` (m^3).
pub fn drive_amplitude(field_amplitude: f64, sphere_volume: f64) -> Result<f64, ModelError> {
    if !field_amplitude.is_finite() || field_amplitude < 0.0 {
        return Err(ModelError::InvalidParameter {
            field: "field_amplitude",
            reason: format!("must be finite and non-negative, got {field_amplitude}"),
        });
    }
    if !sphere_volume.is_finite() || sphere_volume <= 0.0 {
        return Err(ModelError::InvalidParameter {
            field: "sphere_volume",
            reason: format!("must be finite and positive, got {sphere_volume}"),
        });
    }
    let total_spins = SPIN_DENSITY * sphere_volume;
    Ok(GYROMAGNETIC_RATIO * (5.0 * total_spins).sqrt() * field_amplitude / 4.0)
}

/// Classical fixed point of the mean-field equations.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Cavity amplitude.
    pub alpha: Complex64,
    /// Magnon amplitude.
    pub m_s: Complex64,
    /// Collective vibrational amplitude.
    pub beta: Complex64,
    /// Fixed-point iterations used (0 for the closed-form effective mode).
    pub iterations: usize,
    /// Max-norm mismatch of the three defining equations.
    pub residual: f64,
}

/// Closed-form solution of the linear (alpha, m_s) pair for fixed
/// effective detunings.
fn linear_pair(
    params: &SystemParams,
    delta_a_eff: f64,
    delta_m_eff: f64,
) -> (Complex64, Complex64) {
    let den_a = Complex64::new(params.kappa_a, delta_a_eff);
    let den_m = Complex64::new(params.kappa_m, delta_m_eff + params.delta_b);
    let j = params.j_coupling;
    let m_s = params.drive / (den_m + j * j / den_a);
    let alpha = -Complex64::i() * j * m_s / den_a;
    (alpha, m_s)
}

/// Vibrational amplitude sourced by the intracavity populations
/// (omega_nu = 1 in normalized units).
fn beta_target(params: &SystemParams, alpha: Complex64, m_s: Complex64) -> Complex64 {
    let pops =
        params.collective_g_a() * alpha.norm_sqr() + params.collective_g_m() * m_s.norm_sqr();
    -Complex64::i() * pops / Complex64::new(params.gamma_nu, 1.0)
}

fn steady_residual(
    params: &SystemParams,
    delta_a_eff: f64,
    delta_m_eff: f64,
    alpha: Complex64,
    m_s: Complex64,
    beta: Complex64,
) -> f64 {
    let den_a = Complex64::new(params.kappa_a, delta_a_eff);
    let den_m = Complex64::new(params.kappa_m, delta_m_eff + params.delta_b);
    let j = params.j_coupling;
    let e1 = (alpha - (-Complex64::i() * j * m_s) / den_a).norm();
    let e2 = (m_s - (params.drive - Complex64::i() * j * alpha) / den_m).norm();
    let e3 = (beta - beta_target(params, alpha, m_s)).norm();
    e1.max(e2).max(e3)
}

/// Solves the classical steady state `(alpha, m_s, beta)`.
///
/// In [`DetuningMode::Effective`] the pair equations are linear and solved
/// in closed form; in [`DetuningMode::Bare`] the displacement feedback on
/// the detunings is resolved by damped fixed-point iteration on `beta`.
pub fn solve_steady_state(params: &SystemParams) -> Result<SteadyState, ModelError> {
    params.validate()?;
    match params.detuning_mode {
        DetuningMode::Effective => {
            let (alpha, m_s) = linear_pair(params, params.delta_a, params.delta_m);
            let beta = beta_target(params, alpha, m_s);
            let residual =
                steady_residual(params, params.delta_a, params.delta_m, alpha, m_s, beta);
            Ok(SteadyState {
                alpha,
                m_s,
                beta,
                iterations: 0,
                residual,
            })
        }
        DetuningMode::Bare => {
            let g_a = params.collective_g_a();
            let g_m = params.collective_g_m();
            let mut beta = Complex64::new(0.0, 0.0);
            let mut residual = f64::INFINITY;
            for iterations in 1..=STEADY_STATE_MAX_ITERS {
                let da = params.delta_a + 2.0 * g_a * beta.re;
                let dm = params.delta_m + 2.0 * g_m * beta.re;
                let (alpha, m_s) = linear_pair(params, da, dm);
                let target = beta_target(params, alpha, m_s);
                residual = (target - beta).norm();
                if residual < STEADY_STATE_TOL {
                    let residual = steady_residual(params, da, dm, alpha, m_s, beta);
                    return Ok(SteadyState {
                        alpha,
                        m_s,
                        beta,
                        iterations,
                        residual,
                    });
                }
                beta += STEADY_STATE_RELAXATION * (target - beta);
            }
            Err(ModelError::NotConverged {
                iterations: STEADY_STATE_MAX_ITERS,
                residual,
            })
        }
    }
}

/// Linearized fluctuation dynamics around the steady state: effective
/// detunings and couplings, the 6x6 drift matrix and the diagonal
/// diffusion matrix, in the quadrature order `(X_a, Y_a, X_m, Y_m, X_B, Y_B)`.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// Effective cavity detuning.
    pub delta_a_eff: f64,
    /// Effective magnon detuning including the Barnett shift.
    pub delta_tilde: f64,
    /// Effective photon–vibration coupling entering the drift matrix.
    pub g_a_eff: f64,
    /// Effective magnon–vibration coupling entering the drift matrix.
    pub g_m_eff: f64,
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    /// Thermal phonon occupation of the vibrational bath.
    pub n_th: f64,
}

/// Assembles the linearized model with the default collective coupling
/// convention.
pub fn effective_system(
    params: &SystemParams,
    steady: &SteadyState,
) -> Result<LinearModel, ModelError> {
    effective_system_with(params, steady, CouplingConvention::Collective)
}

pub fn effective_system_with(
    params: &SystemParams,
    steady: &SteadyState,
    convention: CouplingConvention,
) -> Result<LinearModel, ModelError> {
    params.validate()?;
    let (delta_a_eff, delta_m_eff) = match params.detuning_mode {
        DetuningMode::Effective => (params.delta_a, params.delta_m),
        DetuningMode::Bare => (
            params.delta_a + 2.0 * params.collective_g_a() * steady.beta.re,
            params.delta_m + 2.0 * params.collective_g_m() * steady.beta.re,
        ),
    };
    let delta_tilde = delta_m_eff + params.delta_b;
    let (base_a, base_m) = match convention {
        CouplingConvention::Collective => (params.collective_g_a(), params.collective_g_m()),
        CouplingConvention::SingleMolecule => (params.g_a, params.g_m),
    };
    let g_a_eff = base_a * steady.alpha.norm();
    let g_m_eff = base_m * steady.m_s.norm();
    let n_th = thermal_occupation(params.omega_nu, params.temperature)?;

    let j = params.j_coupling;
    let (k_a, k_m, g_nu) = (params.kappa_a, params.kappa_m, params.gamma_nu);
    #[rustfmt::skip]
    let drift = DMatrix::from_row_slice(6, 6, &[
        -k_a,          delta_a_eff,  0.0,          j,     0.0,            0.0,
        -delta_a_eff, -k_a,         -j,            0.0,  -2.0 * g_a_eff,  0.0,
         0.0,          j,           -k_m,          delta_tilde, 0.0,      0.0,
        -j,            0.0,         -delta_tilde, -k_m,  -2.0 * g_m_eff,  0.0,
         0.0,          0.0,          0.0,          0.0,  -g_nu,           1.0,
        -2.0 * g_a_eff, 0.0,        -2.0 * g_m_eff, 0.0, -1.0,           -g_nu,
    ]);
    if drift.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite {
            context: "drift matrix",
        });
    }
    let vibrational = g_nu * (2.0 * n_th + 1.0);
    let diffusion = DMatrix::from_diagonal(&DVector::from_row_slice(&[
        k_a,
        k_a,
        k_m,
        k_m,
        vibrational,
        vibrational,
    ]));
    if !vibrational.is_finite() {
        return Err(ModelError::NonFinite {
            context: "diffusion matrix",
        });
    }
    Ok(LinearModel {
        delta_a_eff,
        delta_tilde,
        g_a_eff,
        g_m_eff,
        drift,
        diffusion,
        n_th,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_occupation_zero_temperature() {
        assert_eq!(thermal_occupation(2.0 * PI * 30e12, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn thermal_occupation_ln2_point() {
        // hbar*omega/kB*T = ln 2 makes the Bose factor exactly 1
        let omega = 1.0e12;
        let t = HBAR * omega / (BOLTZMANN * std::f64::consts::LN_2);
        assert_relative_eq!(
            thermal_occupation(omega, t).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn thermal_occupation_canonical_point() {
        // frozen from a 50-digit evaluation of the Bose factor with CODATA
        // hbar and k_B at omega/2pi = 30 THz, T = 210 K
        let expected = 1.0541632853930637e-3;
        let got = thermal_occupation(2.0 * PI * 30.0e12, 210.0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-9);
    }

    #[test]
    fn thermal_occupation_rejects_bad_inputs() {
        assert!(thermal_occupation(f64::NAN, 10.0).is_err());
        assert!(thermal_occupation(-1.0, 10.0).is_err());
        assert!(thermal_occupation(1.0, f64::INFINITY).is_err());
        assert!(thermal_occupation(1.0, -0.5).is_err());
    }

    #[test]
    fn drive_amplitude_linear_in_field() {
        let v = 1e-12;
        assert_eq!(drive_amplitude(0.0, v).unwrap(), 0.0);
        let one = drive_amplitude(1e-4, v).unwrap();
        let two = drive_amplitude(2e-4, v).unwrap();
        assert_relative_eq!(two / one, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn drive_amplitude_sqrt_volume_scaling() {
        let b0 = 3.1e-5;
        let v = 2.7e-13;
        let ratio = drive_amplitude(b0, 4.0 * v).unwrap() / drive_amplitude(b0, v).unwrap();
        assert_relative_eq!(ratio, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn drive_amplitude_canonical_sphere() {
        // 250 um diameter sphere in a 1 G field; frozen from a 50-digit
        // evaluation of gamma*sqrt(5*rho*V)*B0/4
        let radius = 125e-6_f64;
        let volume = 4.0 / 3.0 * PI * radius.powi(3);
        let got = drive_amplitude(1e-4, volume).unwrap();
        assert_relative_eq!(got, 1.8290067043540618e15, max_relative = 1e-12);
    }

    #[test]
    fn drive_amplitude_rejects_nonpositive_volume() {
        assert!(drive_amplitude(1e-4, 0.0).is_err());
        assert!(drive_amplitude(1e-4, -1.0).is_err());
    }

    #[test]
    fn undriven_steady_state_is_trivial() {
        let params = SystemParams {
            drive: 0.0,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&params).unwrap();
        assert_eq!(ss.alpha, Complex64::new(0.0, 0.0));
        assert_eq!(ss.m_s, Complex64::new(0.0, 0.0));
        assert_eq!(ss.beta, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn decoupled_cavity_steady_state() {
        let params = SystemParams {
            j_coupling: 0.0,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&params).unwrap();
        assert_eq!(ss.alpha, Complex64::new(0.0, 0.0));
        let expected_m =
            params.drive / Complex64::new(params.kappa_m, params.delta_m + params.delta_b);
        assert_relative_eq!((ss.m_s - expected_m).norm(), 0.0, epsilon = 1e-14);
        let expected_beta = -Complex64::i() * params.collective_g_m() * ss.m_s.norm_sqr()
            / Complex64::new(params.gamma_nu, 1.0);
        assert_relative_eq!((ss.beta - expected_beta).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn steady_state_satisfies_fixed_point_equations() {
        // substitute the solution back into the three defining equations
        let params = SystemParams::default();
        let ss = solve_steady_state(&params).unwrap();
        let res = steady_residual(
            &params,
            params.delta_a,
            params.delta_m,
            ss.alpha,
            ss.m_s,
            ss.beta,
        );
        assert!(res < 1e-12, "residual {res:.3e}");
        assert!(ss.residual < 1e-12);
    }

    #[test]
    fn bare_mode_converges_and_shifts_detunings() {
        let params = SystemParams {
            detuning_mode: DetuningMode::Bare,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&params).unwrap();
        assert!(ss.residual < 1e-12, "residual {:.3e}", ss.residual);
        assert!(ss.iterations > 0);
        let model = effective_system(&params, &ss).unwrap();
        let expected = params.delta_a + 2.0 * params.collective_g_a() * ss.beta.re;
        assert_relative_eq!(model.delta_a_eff, expected, max_relative = 1e-12);
        assert!(model.delta_a_eff != params.delta_a);
    }

    #[test]
    fn decoupled_drift_is_block_diagonal() {
        let params = SystemParams {
            j_coupling: 0.0,
            g_a: 0.0,
            g_m: 0.0,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&params).unwrap();
        let model = effective_system(&params, &ss).unwrap();
        let a = &model.drift;
        for i in 0..6 {
            for j in 0..6 {
                if i / 2 != j / 2 {
                    assert_eq!(a[(i, j)], 0.0, "off-block entry ({i},{j})");
                }
            }
        }
        // each mode block is a damped rotation
        assert_eq!(a[(0, 0)], -params.kappa_a);
        assert_eq!(a[(0, 1)], params.delta_a);
        assert_eq!(a[(4, 4)], -params.gamma_nu);
        assert_eq!(a[(4, 5)], 1.0);
    }

    #[test]
    fn drift_coupling_entries_match_layout() {
        let params = SystemParams::default();
        let ss = solve_steady_state(&params).unwrap();
        let model = effective_system(&params, &ss).unwrap();
        let a = &model.drift;
        assert_eq!(a[(1, 4)], -2.0 * model.g_a_eff);
        assert_eq!(a[(5, 0)], -2.0 * model.g_a_eff);
        assert_eq!(a[(5, 2)], -2.0 * model.g_m_eff);
        assert_eq!(a[(2, 3)], model.delta_tilde);
        assert_eq!(a[(3, 2)], -model.delta_tilde);
        assert!(model.g_a_eff > 0.0 && model.g_m_eff > 0.0);
    }

    #[test]
    fn diffusion_is_diagonal_and_drive_independent() {
        let params = SystemParams::default();
        let ss = solve_steady_state(&params).unwrap();
        let model = effective_system(&params, &ss).unwrap();
        let quiet = SystemParams {
            drive: 0.11,
            j_coupling: 0.0,
            ..SystemParams::default()
        };
        let ss2 = solve_steady_state(&quiet).unwrap();
        let model2 = effective_system(&quiet, &ss2).unwrap();
        assert_eq!(model.diffusion, model2.diffusion);
        let d = &model.diffusion;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(d[(i, j)], 0.0);
                } else {
                    assert!(d[(i, i)] > 0.0);
                }
            }
        }
        assert_eq!(d[(0, 0)], params.kappa_a);
        assert_eq!(d[(2, 2)], params.kappa_m);
        let vib = params.gamma_nu * (2.0 * model.n_th + 1.0);
        assert_eq!(d[(4, 4)], vib);
    }

    #[test]
    fn barnett_flip_only_touches_delta_tilde() {
        let pos = SystemParams {
            delta_b: 0.3,
            ..SystemParams::default()
        };
        let neg = SystemParams {
            delta_b: -0.3,
            ..SystemParams::default()
        };
        let mp = effective_system(&pos, &solve_steady_state(&pos).unwrap()).unwrap();
        let mn = effective_system(&neg, &solve_steady_state(&neg).unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if (i, j) == (2, 3) || (i, j) == (3, 2) {
                    continue;
                }
                // the steady state changes with the flip, so the coupling
                // entries shift; only structural zeros must stay put
                if mp.drift[(i, j)] == 0.0 {
                    assert_eq!(mn.drift[(i, j)], 0.0, "entry ({i},{j})");
                }
            }
        }
        assert_relative_eq!(mp.delta_tilde - mn.delta_tilde, 0.6, max_relative = 1e-12);

        // with J = 0 the cavity block is exactly invariant under the flip
        let pos = SystemParams {
            j_coupling: 0.0,
            delta_b: 0.3,
            ..SystemParams::default()
        };
        let neg = SystemParams {
            j_coupling: 0.0,
            delta_b: -0.3,
            ..SystemParams::default()
        };
        let mp = effective_system(&pos, &solve_steady_state(&pos).unwrap()).unwrap();
        let mn = effective_system(&neg, &solve_steady_state(&neg).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(mp.drift[(i, j)], mn.drift[(i, j)]);
            }
        }
    }

    #[test]
    fn effective_system_is_deterministic() {
        let params = SystemParams::default();
        let ss = solve_steady_state(&params).unwrap();
        let m1 = effective_system(&params, &ss).unwrap();
        let m2 = effective_system(&params, &solve_steady_state(&params).unwrap()).unwrap();
        assert_eq!(m1.drift, m2.drift);
        assert_eq!(m1.diffusion, m2.diffusion);
    }

    #[test]
    fn single_molecule_convention_shrinks_couplings() {
        let params = SystemParams::default();
        let ss = solve_steady_state(&params).unwrap();
        let collective = effective_system(&params, &ss).unwrap();
        let single =
            effective_system_with(&params, &ss, CouplingConvention::SingleMolecule).unwrap();
        let scale = (params.n_molecules as f64).sqrt();
        assert_relative_eq!(
            collective.g_a_eff,
            single.g_a_eff * scale,
            max_relative = 1e-12
        );
    }

    /// Quadrature-space deterministic flow of the nonlinear amplitude
    /// equations, written against bare detunings. Central finite
    /// differences of this flow give an independent oracle for the drift
    /// matrix.
    fn amplitude_flow(
        params: &SystemParams,
        delta_a_bare: f64,
        delta_m_bare: f64,
        u: &[f64; 6],
    ) -> [f64; 6] {
        let sqrt2 = std::f64::consts::SQRT_2;
        let a = Complex64::new(u[0], u[1]) / sqrt2;
        let m = Complex64::new(u[2], u[3]) / sqrt2;
        let b = Complex64::new(u[4], u[5]) / sqrt2;
        let g_a = params.collective_g_a();
        let g_m = params.collective_g_m();
        let i = Complex64::i();
        let two_re_b = b + b.conj();
        let fa = -(i * delta_a_bare + params.kappa_a) * a
            - i * g_a * a * two_re_b
            - i * params.j_coupling * m;
        let fm = -(i * (delta_m_bare + params.delta_b) + params.kappa_m) * m
            - i * g_m * m * two_re_b
            - i * params.j_coupling * a
            + params.drive;
        let fb = -(i * 1.0 + params.gamma_nu) * b - i * g_a * a.conj() * a - i * g_m * m.conj() * m;
        [
            sqrt2 * fa.re,
            sqrt2 * fa.im,
            sqrt2 * fm.re,
            sqrt2 * fm.im,
            sqrt2 * fb.re,
            sqrt2 * fb.im,
        ]
    }

    #[test]
    fn drift_matches_finite_difference_jacobian() {
        let params = SystemParams::default();
        let ss = solve_steady_state(&params).unwrap();
        let model = effective_system(&params, &ss).unwrap();
        // Map the effective detunings back to bare ones so the flow
        // linearized at the modulus point reproduces the drift matrix.
        let delta_a_bare = model.delta_a_eff - 2.0 * params.collective_g_a() * ss.beta.re;
        let delta_m_bare =
            (model.delta_tilde - params.delta_b) - 2.0 * params.collective_g_m() * ss.beta.re;
        let sqrt2 = std::f64::consts::SQRT_2;
        let u0 = [
            sqrt2 * ss.alpha.norm(),
            0.0,
            sqrt2 * ss.m_s.norm(),
            0.0,
            sqrt2 * ss.beta.re,
            sqrt2 * ss.beta.im,
        ];
        let h = 1e-6;
        for col in 0..6 {
            let mut up = u0;
            let mut dn = u0;
            up[col] += h;
            dn[col] -= h;
            let fp = amplitude_flow(&params, delta_a_bare, delta_m_bare, &up);
            let fm = amplitude_flow(&params, delta_a_bare, delta_m_bare, &dn);
            for row in 0..6 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                let a = model.drift[(row, col)];
                assert!(
                    (fd - a).abs() <= 1e-6 * (1.0 + a.abs()),
                    "drift ({row},{col}): jacobian {fd:.12e} vs {a:.12e}"
                );
            }
        }
    }
}
