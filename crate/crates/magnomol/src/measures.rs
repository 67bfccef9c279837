//! Gaussian quantum-correlation functionals on covariance matrices:
//! logarithmic negativity, residual contangle, Gaussian quantum discord,
//! EPR steering, and the bidirectional contrast ratio.
//!
//! Conventions: vacuum variance 1/2, symplectic form `[[0, 1], [-1, 0]]`
//! per mode. Two-mode covariance matrices are in the block form
//! `[[phi1, phi3], [phi3^T, phi2]]`.

use crate::dynamics::{symplectic_form, CovarianceMatrix, DynamicsError, StabilityReport};
use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

/// Absolute tolerance before a negative discriminant counts as an error
/// rather than roundoff.
const DISCRIMINANT_TOL: f64 = 1e-12;
/// Arguments of the entropy-like function g may undershoot 1/2 by up to
/// this much and are clamped; anything lower is an error.
const G_DOMAIN_TOL: f64 = 1e-9;
/// Symplectic eigenvalues and the discord W term are square roots of
/// cancellation-prone invariants, so at pure-state boundaries they carry
/// a sqrt(eps)-level noise floor; undershoots of 1/2 within this window
/// are the boundary itself.
const NU_BOUNDARY_TOL: f64 = 1e-7;
const EIGEN_MAX_ITERS: usize = 100_000;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("expected a covariance matrix over {expected} modes, got {got}")]
    WrongModeCount { expected: usize, got: usize },
    #[error("mode index {index} out of range for {n_modes} modes")]
    IndexOutOfRange { index: usize, n_modes: usize },
    #[error("duplicate mode index {index}")]
    DuplicateIndex { index: usize },
    #[error("empty mode selection")]
    EmptySelection,
    #[error("numerical failure in {context}: {detail}")]
    Numerical {
        context: &'static str,
        detail: String,
    },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn numerical(context: &'static str, detail: String) -> MeasureError {
    MeasureError::Numerical { context, detail }
}

/// The three modes of the full state, in covariance-matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Photon,
    Magnon,
    Vibration,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Photon, Mode::Magnon, Mode::Vibration];

    pub fn index(self) -> usize {
        match self {
            Mode::Photon => 0,
            Mode::Magnon => 1,
            Mode::Vibration => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Photon => "a",
            Mode::Magnon => "m",
            Mode::Vibration => "B",
        }
    }
}

/// An ordered pair of distinct mode indices into a covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModePair {
    pub first: usize,
    pub second: usize,
}

impl ModePair {
    pub fn new(first: usize, second: usize) -> Result<Self, MeasureError> {
        if first == second {
            return Err(MeasureError::DuplicateIndex { index: first });
        }
        Ok(Self { first, second })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringDirection {
    FirstToSecond,
    SecondToFirst,
}

/// Extracts the reduced covariance matrix over the selected modes,
/// preserving the given order.
pub fn reduced_cm(v: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix, MeasureError> {
    if modes.is_empty() {
        return Err(MeasureError::EmptySelection);
    }
    for (pos, &m) in modes.iter().enumerate() {
        if m >= v.n_modes() {
            return Err(MeasureError::IndexOutOfRange {
                index: m,
                n_modes: v.n_modes(),
            });
        }
        if modes[..pos].contains(&m) {
            return Err(MeasureError::DuplicateIndex { index: m });
        }
    }
    let dim = 2 * modes.len();
    let data = DMatrix::from_fn(dim, dim, |i, j| {
        let row = 2 * modes[i / 2] + i % 2;
        let col = 2 * modes[j / 2] + j % 2;
        v.data()[(row, col)]
    });
    let labels = modes.iter().map(|&m| v.mode_labels()[m].clone()).collect();
    Ok(CovarianceMatrix::new(data, labels)?)
}

/// Symplectic spectrum of a (possibly partially transposed) covariance
/// matrix body: the n positive moduli of the eigenvalues of `i Omega V`,
/// ascending.
///
/// For positive-definite input the moduli are computed as singular values
/// of the antisymmetric `L^T Omega L` with `V = L L^T`: `eig(Omega L L^T)
/// = eig(L^T Omega L)`, and singular values are perfectly conditioned
/// where eigenvalues of the non-normal `Omega V` are not. Semi-definite
/// edge cases fall back to the Schur route.
fn symplectic_moduli(data: &DMatrix<f64>, n_modes: usize) -> Result<Vec<f64>, MeasureError> {
    let omega = symplectic_form(n_modes);
    let mut moduli: Vec<f64> = match data.clone().cholesky() {
        Some(chol) => {
            let l = chol.l();
            let m = l.transpose() * omega * &l;
            m.svd(false, false)
                .singular_values
                .iter()
                .copied()
                .collect()
        }
        None => {
            let schur =
                Schur::try_new(omega * data, f64::EPSILON, EIGEN_MAX_ITERS).ok_or_else(|| {
                    numerical(
                        "symplectic_eigenvalues",
                        "eigenvalue iteration did not converge".into(),
                    )
                })?;
            schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .collect()
        }
    };
    moduli.sort_by(f64::total_cmp);
    // the moduli come in equal pairs; average each pair
    Ok((0..n_modes)
        .map(|k| 0.5 * (moduli[2 * k] + moduli[2 * k + 1]))
        .collect())
}

/// Symplectic spectrum of a covariance matrix, ascending.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>, MeasureError> {
    symplectic_moduli(v.data(), v.n_modes())
}

fn block_det(v: &DMatrix<f64>, row: usize, col: usize) -> f64 {
    v[(row, col)] * v[(row + 1, col + 1)] - v[(row, col + 1)] * v[(row + 1, col)]
}

fn expect_modes(v: &CovarianceMatrix, expected: usize) -> Result<(), MeasureError> {
    if v.n_modes() != expected {
        return Err(MeasureError::WrongModeCount {
            expected,
            got: v.n_modes(),
        });
    }
    Ok(())
}

/// Logarithmic negativity of a two-mode covariance matrix,
/// `max[0, -ln(2 zeta)]` with `zeta` the smallest symplectic eigenvalue of
/// the partial transpose, computed from the block invariants.
pub fn log_negativity(v4: &CovarianceMatrix) -> Result<f64, MeasureError> {
    expect_modes(v4, 2)?;
    let m = v4.data();
    let sigma_pt = block_det(m, 0, 0) + block_det(m, 2, 2) - 2.0 * block_det(m, 0, 2);
    let det_v = m.determinant();
    let mut disc = sigma_pt * sigma_pt - 4.0 * det_v;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_TOL {
            return Err(numerical(
                "log_negativity",
                format!("discriminant {disc:.3e} < 0"),
            ));
        }
        disc = 0.0;
    }
    let zeta_sq = 0.5 * (sigma_pt - disc.sqrt());
    if zeta_sq <= 0.0 {
        return Err(numerical(
            "log_negativity",
            format!("partial-transpose symplectic eigenvalue vanished (zeta^2 = {zeta_sq:.3e})"),
        ));
    }
    Ok((-(2.0 * zeta_sq.sqrt()).ln()).max(0.0))
}

/// Partial transposition of a single mode: flips the sign of that mode's
/// Y quadrature row and column.
fn partial_transpose_single(v: &DMatrix<f64>, mode: usize) -> DMatrix<f64> {
    let flip = 2 * mode + 1;
    let n = v.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let sign = if (i == flip) ^ (j == flip) { -1.0 } else { 1.0 };
        sign * v[(i, j)]
    })
}

/// One-vs-two logarithmic negativity of a three-mode state for the
/// bipartition `partition | rest`: `max[0, -ln(2 eta)]` with `eta` the
/// smallest symplectic eigenvalue of the partially transposed state.
pub fn one_vs_two_negativity(v6: &CovarianceMatrix, partition: usize) -> Result<f64, MeasureError> {
    expect_modes(v6, 3)?;
    if partition >= 3 {
        return Err(MeasureError::IndexOutOfRange {
            index: partition,
            n_modes: 3,
        });
    }
    let transposed = partial_transpose_single(v6.data(), partition);
    let eta = symplectic_moduli(&transposed, 3)?[0];
    if eta <= 0.0 {
        return Err(numerical(
            "one_vs_two_negativity",
            format!("partial-transpose symplectic eigenvalue vanished (eta = {eta:.3e})"),
        ));
    }
    Ok((-(2.0 * eta).ln()).max(0.0))
}

/// Residual contangles of a three-mode state.
#[derive(Debug, Clone, Copy)]
pub struct Contangle {
    /// `R^{a|mB}`, `R^{m|aB}`, `R^{B|am}` in that order.
    pub parts: [f64; 3],
    pub min: f64,
}

/// Residual contangle `R^{r|st} = C_{r|st} - C_{r|s} - C_{r|t}` for each
/// bipartition, with contangles as squared logarithmic negativities; the
/// minimum over partitions is the tripartite entanglement measure.
pub fn residual_contangle(v6: &CovarianceMatrix) -> Result<Contangle, MeasureError> {
    expect_modes(v6, 3)?;
    let mut parts = [0.0_f64; 3];
    for (slot, part) in parts.iter_mut().enumerate() {
        let others: Vec<usize> = (0..3).filter(|&k| k != slot).collect();
        let one_two = one_vs_two_negativity(v6, slot)?.powi(2);
        let pair_s = log_negativity(&reduced_cm(v6, &[slot, others[0]])?)?.powi(2);
        let pair_t = log_negativity(&reduced_cm(v6, &[slot, others[1]])?)?.powi(2);
        *part = one_two - pair_s - pair_t;
    }
    let min = parts.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Contangle { parts, min })
}

/// Entropy-like weight `g(x) = (x + 1/2) ln(x + 1/2) - (x - 1/2) ln(x - 1/2)`,
/// extended by continuity with g(1/2) = 0.
fn g_entropy(x: f64) -> Result<f64, MeasureError> {
    if !x.is_finite() {
        return Err(numerical(
            "gaussian_discord",
            format!("non-finite g argument {x}"),
        ));
    }
    if x < 0.5 - G_DOMAIN_TOL {
        return Err(numerical(
            "gaussian_discord",
            format!("g argument {x} below 1/2"),
        ));
    }
    let x = x.max(0.5);
    if x == 0.5 {
        return Ok(0.0);
    }
    Ok((x + 0.5) * (x + 0.5).ln() - (x - 0.5) * (x - 0.5).ln())
}

fn clamped_sqrt(value: f64, scale: f64, context: &'static str) -> Result<f64, MeasureError> {
    if value < 0.0 {
        if value < -DISCRIMINANT_TOL * scale.max(1.0) {
            return Err(numerical(context, format!("sqrt argument {value:.3e} < 0")));
        }
        return Ok(0.0);
    }
    Ok(value.sqrt())
}

/// Gaussian quantum discord of a two-mode covariance matrix.
///
/// Uses the closed-form expression in terms of the symplectic invariants
/// `I1 = det phi1, I2 = det phi2, I3 = det phi3, I4 = det V`, with the
/// published piecewise choice of the measurement term W. The removable
/// singularities of that formula (`I3 -> 0`, `4 I1 -> 1`) are routed to
/// the second branch, which is exact there.
pub fn gaussian_discord(v4: &CovarianceMatrix) -> Result<f64, MeasureError> {
    expect_modes(v4, 2)?;
    let m = v4.data();
    let i1 = block_det(m, 0, 0);
    let i2 = block_det(m, 2, 2);
    let i3 = block_det(m, 0, 2);
    let i4 = m.determinant();

    let sigma = i1 + i2 + 2.0 * i3;
    let disc = clamped_sqrt(sigma * sigma - 4.0 * i4, sigma * sigma, "gaussian_discord")?;
    let nu_minus = clamped_sqrt(0.5 * (sigma - disc), sigma, "gaussian_discord")?;
    let nu_plus = clamped_sqrt(0.5 * (sigma + disc), sigma, "gaussian_discord")?;

    let first_branch = if i3.abs() < 1e-15 {
        false
    } else {
        let ratio = 4.0 * (i1 * i2 - i4).powi(2) / ((i2 + 4.0 * i4) * (1.0 + 4.0 * i1) * i3 * i3);
        ratio <= 1.0 && (4.0 * i1 - 1.0).abs() >= 1e-12
    };

    let w = if first_branch {
        let inner = 4.0 * i3 * i3 + (4.0 * i1 - 1.0) * (4.0 * i4 - i2);
        let root = clamped_sqrt(inner, i3 * i3, "gaussian_discord")?;
        ((2.0 * i3.abs() + root) / (4.0 * i1 - 1.0)).powi(2)
    } else {
        let head = i1 * i2 + i4 - i3 * i3;
        let inner = head * head - 4.0 * i1 * i2 * i4;
        let root = clamped_sqrt(inner, head * head, "gaussian_discord")?;
        (head - root) / (2.0 * i1)
    };

    let snap = |x: f64| {
        if (0.5 - NU_BOUNDARY_TOL..0.5).contains(&x) {
            0.5
        } else {
            x
        }
    };
    let discord = g_entropy(snap(clamped_sqrt(i1, i1, "gaussian_discord")?))?
        - g_entropy(snap(nu_minus))?
        - g_entropy(snap(nu_plus))?
        + g_entropy(snap(clamped_sqrt(w, w.abs(), "gaussian_discord")?))?;
    Ok(discord.max(0.0))
}

/// Gaussian EPR steering of a two-mode state in the given direction:
/// `max[0, (1/2) ln(det V_steerer / (4 det V))]` with `V_steerer` the 2x2
/// block of the steering party.
pub fn steering(v4: &CovarianceMatrix, direction: SteeringDirection) -> Result<f64, MeasureError> {
    expect_modes(v4, 2)?;
    let m = v4.data();
    let det_steerer = match direction {
        SteeringDirection::FirstToSecond => block_det(m, 0, 0),
        SteeringDirection::SecondToFirst => block_det(m, 2, 2),
    };
    let det_v = m.determinant();
    if det_steerer <= 0.0 || det_v <= 0.0 {
        return Err(numerical(
            "steering",
            format!("non-positive determinant (steerer {det_steerer:.3e}, full {det_v:.3e})"),
        ));
    }
    Ok((0.5 * (det_steerer / (4.0 * det_v)).ln()).max(0.0))
}

/// Bidirectional contrast ratio `|x+ - x-| / (x+ + x-)` between the two
/// Barnett branches of a measure.
///
/// Returns `None` (no signal) when both inputs vanish. Inputs must be
/// non-negative.
pub fn contrast_ratio(value_pos: f64, value_neg: f64) -> Option<f64> {
    assert!(
        value_pos >= 0.0 && value_neg >= 0.0,
        "contrast_ratio expects non-negative measures, got ({value_pos}, {value_neg})"
    );
    let total = value_pos + value_neg;
    if total == 0.0 {
        return None;
    }
    Some((value_pos - value_neg).abs() / total)
}

/// Which measure families to evaluate at each parameter point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasureSelection {
    pub entanglement: bool,
    pub contangle: bool,
    pub discord: bool,
    pub steering: bool,
}

impl MeasureSelection {
    pub fn all() -> Self {
        Self {
            entanglement: true,
            contangle: true,
            discord: true,
            steering: true,
        }
    }
}

impl Default for MeasureSelection {
    fn default() -> Self {
        Self::all()
    }
}

/// Every scalar correlation measure at one parameter point. Measure fields
/// are `None` when the point is unstable or the measure was not requested,
/// never silently zero.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub stable: bool,
    pub spectral_abscissa: f64,
    /// Smallest symplectic eigenvalue of the full three-mode state.
    pub nu_min: Option<f64>,
    /// Smallest eigenvalue of `V + i Omega / 2`.
    pub physicality_min_eig: Option<f64>,
    pub e_am: Option<f64>,
    #[serde(rename = "e_aB")]
    pub e_ab: Option<f64>,
    #[serde(rename = "e_mB")]
    pub e_mb: Option<f64>,
    #[serde(rename = "r_a_mB")]
    pub r_a_mb: Option<f64>,
    #[serde(rename = "r_m_aB")]
    pub r_m_ab: Option<f64>,
    #[serde(rename = "r_B_am")]
    pub r_b_am: Option<f64>,
    pub r_min: Option<f64>,
    pub d_am: Option<f64>,
    #[serde(rename = "d_aB")]
    pub d_ab: Option<f64>,
    #[serde(rename = "d_mB")]
    pub d_mb: Option<f64>,
    pub g_a_to_m: Option<f64>,
    pub g_m_to_a: Option<f64>,
    #[serde(rename = "g_a_to_B")]
    pub g_a_to_b: Option<f64>,
    #[serde(rename = "g_B_to_a")]
    pub g_b_to_a: Option<f64>,
    #[serde(rename = "g_m_to_B")]
    pub g_m_to_b: Option<f64>,
    #[serde(rename = "g_B_to_m")]
    pub g_b_to_m: Option<f64>,
}

impl CorrelationReport {
    /// Report for an unstable point: stability data only, no measures.
    pub fn unstable(stability: &StabilityReport) -> Self {
        Self {
            stable: false,
            spectral_abscissa: stability.spectral_abscissa,
            nu_min: None,
            physicality_min_eig: None,
            e_am: None,
            e_ab: None,
            e_mb: None,
            r_a_mb: None,
            r_m_ab: None,
            r_b_am: None,
            r_min: None,
            d_am: None,
            d_ab: None,
            d_mb: None,
            g_a_to_m: None,
            g_m_to_a: None,
            g_a_to_b: None,
            g_b_to_a: None,
            g_m_to_b: None,
            g_b_to_m: None,
        }
    }
}

/// Evaluates the requested measures on a stable three-mode state.
pub fn correlation_report(
    v6: &CovarianceMatrix,
    stability: &StabilityReport,
    selection: &MeasureSelection,
) -> Result<CorrelationReport, MeasureError> {
    expect_modes(v6, 3)?;
    let mut report = CorrelationReport::unstable(stability);
    report.stable = stability.stable;
    report.nu_min = Some(symplectic_eigenvalues(v6)?[0]);
    report.physicality_min_eig = Some(v6.physicality_min_eig()?);

    let pairs = [
        ModePair::new(Mode::Photon.index(), Mode::Magnon.index())?,
        ModePair::new(Mode::Photon.index(), Mode::Vibration.index())?,
        ModePair::new(Mode::Magnon.index(), Mode::Vibration.index())?,
    ];
    let mut entanglement = [None; 3];
    let mut discord = [None; 3];
    let mut steer_fwd = [None; 3];
    let mut steer_rev = [None; 3];
    for (k, pair) in pairs.iter().enumerate() {
        let v4 = reduced_cm(v6, &[pair.first, pair.second])?;
        if selection.entanglement {
            entanglement[k] = Some(log_negativity(&v4)?);
        }
        if selection.discord {
            discord[k] = Some(gaussian_discord(&v4)?);
        }
        if selection.steering {
            steer_fwd[k] = Some(steering(&v4, SteeringDirection::FirstToSecond)?);
            steer_rev[k] = Some(steering(&v4, SteeringDirection::SecondToFirst)?);
        }
    }
    [report.e_am, report.e_ab, report.e_mb] = entanglement;
    [report.d_am, report.d_ab, report.d_mb] = discord;
    [report.g_a_to_m, report.g_a_to_b, report.g_m_to_b] = steer_fwd;
    [report.g_m_to_a, report.g_b_to_a, report.g_b_to_m] = steer_rev;

    if selection.contangle {
        let contangle = residual_contangle(v6)?;
        report.r_a_mb = Some(contangle.parts[0]);
        report.r_m_ab = Some(contangle.parts[1]);
        report.r_b_am = Some(contangle.parts[2]);
        report.r_min = Some(contangle.min);
    }
    Ok(report)
}
