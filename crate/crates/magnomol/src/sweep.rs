//! Parameter-sweep harness: evaluates the full pipeline over 1D/2D grids,
//! splits every grid point into the two Barnett branches, and attaches the
//! bidirectional contrast ratios that quantify nonreciprocity.
//!
//! Grid evaluation is a data-parallel map over independent points merged
//! by precomputed index, so results are bit-identical regardless of worker
//! count.

use crate::dynamics::{is_stable, solve_lyapunov, DynamicsError};
use crate::measures::{
    contrast_ratio, correlation_report, CorrelationReport, MeasureError, MeasureSelection, Mode,
};
use crate::model::{effective_system, solve_steady_state, ModelError, SystemParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("unknown preset `{name}` (valid: {valid})")]
    UnknownPreset { name: String, valid: String },
    #[error("all {count} sweep points failed; first error: {first}")]
    AllPointsFailed { count: usize, first: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Parameters that can serve as a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    DeltaA,
    DeltaM,
    DeltaB,
    #[serde(rename = "j")]
    J,
    GA,
    GM,
    NMolecules,
    KappaA,
    KappaM,
    GammaNu,
    Drive,
    Temperature,
}

impl SweptParam {
    pub const ALL: [SweptParam; 12] = [
        SweptParam::DeltaA,
        SweptParam::DeltaM,
        SweptParam::DeltaB,
        SweptParam::J,
        SweptParam::GA,
        SweptParam::GM,
        SweptParam::NMolecules,
        SweptParam::KappaA,
        SweptParam::KappaM,
        SweptParam::GammaNu,
        SweptParam::Drive,
        SweptParam::Temperature,
    ];

    /// Column/config name of the axis.
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::DeltaA => "delta_a",
            SweptParam::DeltaM => "delta_m",
            SweptParam::DeltaB => "delta_b",
            SweptParam::J => "j",
            SweptParam::GA => "g_a",
            SweptParam::GM => "g_m",
            SweptParam::NMolecules => "n_molecules",
            SweptParam::KappaA => "kappa_a",
            SweptParam::KappaM => "kappa_m",
            SweptParam::GammaNu => "gamma_nu",
            SweptParam::Drive => "drive",
            SweptParam::Temperature => "temperature",
        }
    }

    fn apply(self, params: &mut SystemParams, value: f64) -> Result<(), SweepError> {
        match self {
            SweptParam::DeltaA => params.delta_a = value,
            SweptParam::DeltaM => params.delta_m = value,
            SweptParam::DeltaB => params.delta_b = value,
            SweptParam::J => params.j_coupling = value,
            SweptParam::GA => params.g_a = value,
            SweptParam::GM => params.g_m = value,
            SweptParam::NMolecules => {
                let rounded = value.round();
                if !(rounded >= 1.0 && rounded <= u64::MAX as f64) {
                    return Err(SweepError::InvalidSpec(format!(
                        "n_molecules axis value {value} is not a positive count"
                    )));
                }
                params.n_molecules = rounded as u64;
            }
            SweptParam::KappaA => params.kappa_a = value,
            SweptParam::KappaM => params.kappa_m = value,
            SweptParam::GammaNu => params.gamma_nu = value,
            SweptParam::Drive => params.drive = value,
            SweptParam::Temperature => params.temperature = value,
        }
        Ok(())
    }
}

impl FromStr for SweptParam {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        SweptParam::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = SweptParam::ALL.iter().map(|p| p.name()).collect();
                SweepError::InvalidSpec(format!(
                    "unknown sweep axis `{s}` (valid: {})",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepAxis {
    pub param: SweptParam,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: AxisScale,
}

impl SweepAxis {
    pub fn linear(param: SweptParam, min: f64, max: f64, points: usize) -> Self {
        Self {
            param,
            min,
            max,
            points,
            scale: AxisScale::Linear,
        }
    }

    pub fn log(param: SweptParam, min: f64, max: f64, points: usize) -> Self {
        Self {
            param,
            min,
            max,
            points,
            scale: AxisScale::Log,
        }
    }

    fn validate(&self) -> Result<(), SweepError> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(SweepError::InvalidSpec(format!(
                "axis `{}` range [{}, {}] is not finite",
                self.param.name(),
                self.min,
                self.max
            )));
        }
        if self.points == 0 {
            return Err(SweepError::InvalidSpec(format!(
                "axis `{}` needs at least one point",
                self.param.name()
            )));
        }
        if self.scale == AxisScale::Log && (self.min <= 0.0 || self.max <= 0.0) {
            return Err(SweepError::InvalidSpec(format!(
                "axis `{}` uses log scale but its range is not positive",
                self.param.name()
            )));
        }
        Ok(())
    }

    /// Grid values along this axis, evenly spaced on the chosen scale.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let n = (self.points - 1) as f64;
        match self.scale {
            AxisScale::Linear => (0..self.points)
                .map(|k| self.min + (self.max - self.min) * k as f64 / n)
                .collect(),
            AxisScale::Log => {
                let (lo, hi) = (self.min.ln(), self.max.ln());
                (0..self.points)
                    .map(|k| (lo + (hi - lo) * k as f64 / n).exp())
                    .collect()
            }
        }
    }
}

/// Which Barnett branches of each grid point to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarnettBranches {
    #[default]
    Both,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSign {
    Positive,
    Negative,
}

impl BranchSign {
    pub fn label(self) -> &'static str {
        match self {
            BranchSign::Positive => "pos",
            BranchSign::Negative => "neg",
        }
    }

    fn apply(self, delta_b: f64) -> f64 {
        match self {
            BranchSign::Positive => delta_b.abs(),
            BranchSign::Negative => -delta_b.abs(),
        }
    }
}

impl fmt::Display for BranchSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    /// One or two swept axes; with two, the first is the outer (slow) one.
    pub axes: Vec<SweepAxis>,
    pub barnett_branches: BarnettBranches,
    pub measures: MeasureSelection,
    pub worker_count: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        self.base.validate()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(SweepError::InvalidSpec(format!(
                "expected 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.worker_count == 0 {
            return Err(SweepError::InvalidSpec(
                "worker_count must be positive".into(),
            ));
        }
        Ok(())
    }

    fn branches(&self) -> Vec<BranchSign> {
        match self.barnett_branches {
            BarnettBranches::Both => vec![BranchSign::Positive, BranchSign::Negative],
            BarnettBranches::Positive => vec![BranchSign::Positive],
            BarnettBranches::Negative => vec![BranchSign::Negative],
        }
    }

    /// Row-major list of grid coordinates (outer axis slowest).
    fn grid(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(SweepAxis::values).collect();
        match values.len() {
            1 => values[0].iter().map(|&v| vec![v]).collect(),
            2 => {
                let mut out = Vec::with_capacity(values[0].len() * values[1].len());
                for &outer in &values[0] {
                    for &inner in &values[1] {
                        out.push(vec![outer, inner]);
                    }
                }
                out
            }
            _ => unreachable!("validated axis count"),
        }
    }
}

/// One evaluated (grid point, branch) row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub grid_index: usize,
    pub axis_values: Vec<f64>,
    pub branch: BranchSign,
    /// The evaluated report, or a row-level error message; failures never
    /// abort the sweep.
    pub outcome: Result<CorrelationReport, String>,
}

/// Per-grid-point nonreciprocity contrasts; present only where both
/// branches were evaluated and stable. `None` entries mean no signal
/// (both branches read zero) or an unrequested measure.
#[derive(Debug, Clone)]
pub struct ContrastRow {
    pub grid_index: usize,
    pub axis_values: Vec<f64>,
    pub e_am: Option<f64>,
    pub e_ab: Option<f64>,
    pub e_mb: Option<f64>,
    pub r_min: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMetadata {
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Deterministic row-major grid order; branches alternate pos/neg
    /// within a grid point when both are requested.
    pub rows: Vec<SweepRow>,
    pub contrasts: Vec<ContrastRow>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Rows of one branch, in grid order.
    pub fn branch_rows(&self, branch: BranchSign) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.branch == branch)
    }

    pub fn stable_reports(&self) -> impl Iterator<Item = (&SweepRow, &CorrelationReport)> {
        self.rows.iter().filter_map(|row| match &row.outcome {
            Ok(report) if report.stable => Some((row, report)),
            _ => None,
        })
    }
}

/// Full pipeline at a single parameter point: steady state, linearized
/// model, stability check, Lyapunov covariance, then every requested
/// measure. Unstable points return a flagged report without measures.
pub fn run_point(params: &SystemParams) -> Result<CorrelationReport, SweepError> {
    run_point_with(params, &MeasureSelection::all())
}

pub fn run_point_with(
    params: &SystemParams,
    selection: &MeasureSelection,
) -> Result<CorrelationReport, SweepError> {
    let steady = solve_steady_state(params)?;
    let model = effective_system(params, &steady)?;
    let stability = is_stable(&model.drift)?;
    if !stability.stable {
        return Ok(CorrelationReport::unstable(&stability));
    }
    let solution = solve_lyapunov(&model.drift, &model.diffusion)?;
    let labels = Mode::ALL.iter().map(|m| m.label().to_string()).collect();
    let v = solution.cm.with_labels(labels)?;
    Ok(correlation_report(&v, &stability, selection)?)
}

/// Runs the sweep grid over the requested Barnett branches and attaches
/// contrast columns where both branches are available.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let branches = spec.branches();
    let tasks: Vec<(usize, &Vec<f64>, BranchSign)> = grid
        .iter()
        .enumerate()
        .flat_map(|(gi, coords)| branches.iter().map(move |&b| (gi, coords, b)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.worker_count)
        .build()
        .map_err(|e| SweepError::InvalidSpec(format!("cannot build worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(grid_index, coords, branch)| {
                let outcome = evaluate_point(spec, coords, branch);
                SweepRow {
                    grid_index,
                    axis_values: coords.clone(),
                    branch,
                    outcome,
                }
            })
            .collect()
    });

    if !rows.is_empty() && rows.iter().all(|r| r.outcome.is_err()) {
        let first = rows[0].outcome.as_ref().err().cloned().unwrap_or_default();
        return Err(SweepError::AllPointsFailed {
            count: rows.len(),
            first,
        });
    }

    let contrasts = if branches.len() == 2 {
        build_contrasts(&rows, grid.len())
    } else {
        Vec::new()
    };

    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        contrasts,
        metadata: SweepMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
    })
}

fn evaluate_point(
    spec: &SweepSpec,
    coords: &[f64],
    branch: BranchSign,
) -> Result<CorrelationReport, String> {
    let mut params = spec.base.clone();
    for (axis, &value) in spec.axes.iter().zip(coords) {
        axis.param
            .apply(&mut params, value)
            .map_err(|e| e.to_string())?;
    }
    params.delta_b = branch.apply(params.delta_b);
    run_point_with(&params, &spec.measures).map_err(|e| e.to_string())
}

fn build_contrasts(rows: &[SweepRow], grid_len: usize) -> Vec<ContrastRow> {
    let mut contrasts = Vec::new();
    for gi in 0..grid_len {
        let pos = &rows[2 * gi];
        let neg = &rows[2 * gi + 1];
        debug_assert_eq!(pos.branch, BranchSign::Positive);
        debug_assert_eq!(neg.branch, BranchSign::Negative);
        let (Ok(rp), Ok(rn)) = (&pos.outcome, &neg.outcome) else {
            continue;
        };
        if !(rp.stable && rn.stable) {
            continue;
        }
        // the residual contangle may come out slightly negative at hot
        // mixed states; a negative tripartite measure carries no contrast
        // signal
        let pair = |p: Option<f64>, n: Option<f64>| match (p, n) {
            (Some(p), Some(n)) => contrast_ratio(p.max(0.0), n.max(0.0)),
            _ => None,
        };
        contrasts.push(ContrastRow {
            grid_index: gi,
            axis_values: pos.axis_values.clone(),
            e_am: pair(rp.e_am, rn.e_am),
            e_ab: pair(rp.e_ab, rn.e_ab),
            e_mb: pair(rp.e_mb, rn.e_mb),
            r_min: pair(rp.r_min, rn.r_min),
        });
    }
    contrasts
}

/// The bundled figure experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig9a,
    Fig9b,
    Fig9c,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig9a,
        Preset::Fig9b,
        Preset::Fig9c,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig9a => "fig9a",
            Preset::Fig9b => "fig9b",
            Preset::Fig9c => "fig9c",
        }
    }

    pub fn valid_names() -> String {
        Preset::ALL
            .iter()
            .map(|p| p.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl FromStr for Preset {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| SweepError::UnknownPreset {
                name: s.to_string(),
                valid: Preset::valid_names(),
            })
    }
}

/// Sweep spec for a bundled figure experiment. All presets start from the
/// canonical parameter set ([`SystemParams::default`]) and evaluate both
/// Barnett branches with every measure enabled.
pub fn preset(which: Preset) -> SweepSpec {
    let base = SystemParams::default();
    let axes = match which {
        Preset::Fig2 => vec![
            SweepAxis::linear(SweptParam::DeltaA, -2.0, 0.0, 101),
            SweepAxis::linear(SweptParam::DeltaM, -1.0, 1.0, 101),
        ],
        // figs 3-5 share the detuning line scan; they differ in which
        // columns the figure plots
        Preset::Fig3 | Preset::Fig4 | Preset::Fig5 => {
            vec![SweepAxis::linear(SweptParam::DeltaA, -2.0, 0.0, 401)]
        }
        Preset::Fig6 => vec![SweepAxis::log(SweptParam::NMolecules, 1e4, 1e8, 61)],
        Preset::Fig7 => vec![SweepAxis::linear(
            SweptParam::Temperature,
            10.0,
            7000.0,
            200,
        )],
        // wider detuning window than fig3 so the contrast sweeps the full
        // 0..1 range on both flanks
        Preset::Fig9a => vec![SweepAxis::linear(SweptParam::DeltaA, -2.5, 0.5, 401)],
        Preset::Fig9b => vec![SweepAxis::linear(SweptParam::DeltaM, -1.0, 1.0, 401)],
        Preset::Fig9c => vec![SweepAxis::linear(
            SweptParam::Temperature,
            10.0,
            7000.0,
            200,
        )],
    };
    SweepSpec {
        base,
        axes,
        barnett_branches: BarnettBranches::Both,
        measures: MeasureSelection::all(),
        worker_count: default_worker_count(),
    }
}

/// Default worker count: all available cores.
pub fn default_worker_count() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_point_spec() -> SweepSpec {
        SweepSpec {
            base: SystemParams::default(),
            axes: vec![SweepAxis::linear(SweptParam::DeltaA, -1.0, -1.0, 1)],
            barnett_branches: BarnettBranches::Both,
            measures: MeasureSelection::all(),
            worker_count: 1,
        }
    }

    #[test]
    fn single_point_both_branches_counts() {
        let result = run_sweep(&one_point_spec()).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.rows[0].branch, BranchSign::Positive);
        assert_eq!(result.rows[1].branch, BranchSign::Negative);
        assert_eq!(result.contrasts.len(), 1);
    }

    #[test]
    fn undriven_point_has_no_correlations() {
        // E_l = 0 leaves a product thermal/vacuum state; everything is
        // zero up to Lyapunov-solve roundoff
        let params = SystemParams {
            drive: 0.0,
            ..SystemParams::default()
        };
        let report = run_point(&params).unwrap();
        assert!(report.stable);
        assert!(report.e_am.unwrap() < 1e-12);
        assert!(report.e_ab.unwrap() < 1e-12);
        assert!(report.e_mb.unwrap() < 1e-12);
        assert!(report.r_min.unwrap().abs() < 1e-12);
        assert!(report.d_am.unwrap() < 1e-12);
        assert!(report.g_b_to_a.unwrap() < 1e-12);
    }

    #[test]
    fn canonical_point_respects_monogamy() {
        let params = SystemParams { delta_b: -0.3, ..SystemParams::default() };
        let report = run_point(&params).unwrap();
        assert!(report.stable);
        for part in [report.r_a_mb, report.r_m_ab, report.r_b_am] {
            assert!(part.unwrap() >= -1e-9);
        }
        assert!(report.r_min.unwrap() > 0.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut spec = one_point_spec();
        spec.axes = vec![SweepAxis::linear(SweptParam::DeltaA, -1.4, -0.6, 5)];
        let single = run_sweep(&spec).unwrap();
        spec.worker_count = 8;
        let parallel = run_sweep(&spec).unwrap();
        assert_eq!(single.rows.len(), parallel.rows.len());
        for (a, b) in single.rows.iter().zip(&parallel.rows) {
            assert_eq!(a.grid_index, b.grid_index);
            assert_eq!(a.branch, b.branch);
            let (ra, rb) = (a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
            // bit-identical, not approximately equal
            assert_eq!(ra.e_am, rb.e_am);
            assert_eq!(ra.e_ab, rb.e_ab);
            assert_eq!(ra.r_min, rb.r_min);
            assert_eq!(ra.g_b_to_a, rb.g_b_to_a);
        }
    }

    #[test]
    fn zero_barnett_shift_means_no_signal_or_zero_contrast() {
        let mut spec = one_point_spec();
        spec.base.delta_b = 0.0;
        spec.axes = vec![SweepAxis::linear(SweptParam::DeltaA, -1.2, -0.8, 3)];
        let result = run_sweep(&spec).unwrap();
        for row in &result.contrasts {
            for c in [row.e_am, row.e_ab, row.e_mb, row.r_min] {
                match c {
                    None => {}
                    Some(v) => assert!(v.abs() < 1e-12, "contrast {v} should vanish"),
                }
            }
        }
        // entangled points must produce a defined zero contrast
        assert!(result.contrasts.iter().any(|r| r.e_ab == Some(0.0)));
    }

    #[test]
    fn two_axis_grid_is_row_major() {
        let mut spec = one_point_spec();
        spec.axes = vec![
            SweepAxis::linear(SweptParam::DeltaA, -1.0, -0.9, 2),
            SweepAxis::linear(SweptParam::DeltaM, 0.9, 1.0, 2),
        ];
        spec.barnett_branches = BarnettBranches::Negative;
        let result = run_sweep(&spec).unwrap();
        let coords: Vec<Vec<f64>> = result.rows.iter().map(|r| r.axis_values.clone()).collect();
        assert_eq!(
            coords,
            vec![
                vec![-1.0, 0.9],
                vec![-1.0, 1.0],
                vec![-0.9, 0.9],
                vec![-0.9, 1.0],
            ]
        );
        assert!(result.contrasts.is_empty());
    }

    #[test]
    fn log_axis_values_are_geometric() {
        let axis = SweepAxis::log(SweptParam::NMolecules, 1e4, 1e8, 5);
        let values = axis.values();
        for pair in values.windows(2) {
            assert!((pair[1] / pair[0] - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn n_molecules_axis_rounds_to_count() {
        let mut params = SystemParams::default();
        SweptParam::NMolecules.apply(&mut params, 1234.6).unwrap();
        assert_eq!(params.n_molecules, 1235);
        assert!(SweptParam::NMolecules.apply(&mut params, 0.2).is_err());
    }

    #[test]
    fn invalid_axis_point_is_a_row_error_not_a_crash() {
        let mut spec = one_point_spec();
        // negative kappa_a fails parameter validation per point
        spec.axes = vec![SweepAxis::linear(SweptParam::KappaA, -0.01, 0.0166, 2)];
        let result = run_sweep(&spec).unwrap();
        let failed: Vec<_> = result.rows.iter().filter(|r| r.outcome.is_err()).collect();
        assert_eq!(failed.len(), 2); // both branches of the bad point
        for row in failed {
            assert!(row.outcome.as_ref().err().unwrap().contains("kappa_a"));
        }
    }

    #[test]
    fn all_points_failed_is_an_error() {
        let mut spec = one_point_spec();
        spec.axes = vec![SweepAxis::linear(SweptParam::KappaA, -1.0, -0.5, 2)];
        assert!(matches!(
            run_sweep(&spec),
            Err(SweepError::AllPointsFailed { .. })
        ));
    }

    #[test]
    fn preset_parameters_match_captions() {
        let fig3 = preset(Preset::Fig3);
        assert_eq!(fig3.base.j_coupling, 0.2);
        assert_eq!(fig3.axes.len(), 1);
        assert_eq!(fig3.axes[0].param, SweptParam::DeltaA);
        assert_eq!(fig3.axes[0].points, 401);
        assert_eq!(fig3.barnett_branches, BarnettBranches::Both);

        let fig7 = preset(Preset::Fig7);
        assert_eq!(fig7.axes[0].param, SweptParam::Temperature);
        assert_eq!(fig7.barnett_branches, BarnettBranches::Both);

        let fig2 = preset(Preset::Fig2);
        assert_eq!(fig2.axes.len(), 2);
        assert_eq!(fig2.axes[0].points * fig2.axes[1].points, 101 * 101);

        let fig6 = preset(Preset::Fig6);
        assert_eq!(fig6.axes[0].scale, AxisScale::Log);
    }

    #[test]
    fn unknown_preset_name_is_rejected() {
        let err = "fig1".parse::<Preset>().unwrap_err();
        assert!(matches!(err, SweepError::UnknownPreset { .. }));
        assert!(err.to_string().contains("fig2"));
    }
}
