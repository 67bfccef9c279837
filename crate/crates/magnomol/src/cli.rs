//! Command-line front end: `point`, `sweep`, `preset` and `stability`
//! subcommands over a shared configuration pipeline.
//!
//! Exit codes: 0 success, 1 error, 2 success with unstable points.

use crate::config::Config;
use crate::dynamics::is_stable;
use crate::model::{effective_system, solve_steady_state};
use crate::output::{point_json, write_csv, write_json, OutputFormat};
use crate::sweep::{preset, run_point, BranchSign, Preset, SweepResult};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "magnomol",
    version,
    about = "Steady-state Gaussian quantum correlations of a driven photon-magnon-vibration system"
)]
struct Cli {
    /// Configuration file (TOML with [system], [sweep], [output] sections).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. --set delta_b=-0.3 or
    /// --set sweep.points=101. Repeatable; applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true, env = "MAGNOMOL_WORKERS", value_name = "N")]
    workers: Option<usize>,

    /// Suppress metadata (version/timestamp/spec echo) in emitted files.
    #[arg(long, global = true)]
    no_meta: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a single parameter point and print the report as JSON.
    Point,
    /// Run the sweep described by the [sweep] config section.
    Sweep {
        /// Output path (stdout when omitted).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, value_name = "csv|json")]
        format: Option<OutputFormat>,
    },
    /// Run a bundled figure experiment (fig2..fig7, fig9a..fig9c).
    Preset {
        name: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, value_name = "csv|json")]
        format: Option<OutputFormat>,
    },
    /// Print the stability report of the configured point as JSON.
    Stability,
}

/// Parses arguments from the process environment and runs the command,
/// returning the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            eprint!("{e}");
            return EXIT_ERROR;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    let mut config = Config::load(cli.config.as_deref()).map_err(|e| e.to_string())?;
    for expr in &cli.overrides {
        config.apply_override(expr).map_err(|e| e.to_string())?;
    }
    let include_meta = !cli.no_meta && config.output.as_ref().and_then(|o| o.meta).unwrap_or(true);

    match cli.command {
        Command::Point => cmd_point(&config),
        Command::Stability => cmd_stability(&config),
        Command::Sweep { out, format } => {
            let mut spec = config.sweep_spec().map_err(|e| e.to_string())?;
            if let Some(workers) = cli.workers {
                spec.worker_count = workers.max(1);
            }
            let result = crate::sweep::run_sweep(&spec).map_err(|e| e.to_string())?;
            emit(&config, &result, out, format, include_meta)?;
            Ok(run_exit_code(&result))
        }
        Command::Preset { name, out, format } => {
            let which: Preset = name
                .parse()
                .map_err(|e: crate::sweep::SweepError| e.to_string())?;
            let mut spec = preset(which);
            if let Some(workers) = cli.workers {
                spec.worker_count = workers.max(1);
            }
            let result = crate::sweep::run_sweep(&spec).map_err(|e| e.to_string())?;
            emit(&config, &result, out, format, include_meta)?;
            eprintln!("{}", summarize(which, &result));
            Ok(run_exit_code(&result))
        }
    }
}

fn cmd_point(config: &Config) -> Result<i32, String> {
    let params = config.system_params().map_err(|e| e.to_string())?;
    let report = run_point(&params).map_err(|e| e.to_string())?;
    println!("{}", point_json(&report));
    Ok(if report.stable {
        EXIT_OK
    } else {
        EXIT_UNSTABLE
    })
}

fn cmd_stability(config: &Config) -> Result<i32, String> {
    let params = config.system_params().map_err(|e| e.to_string())?;
    let steady = solve_steady_state(&params).map_err(|e| e.to_string())?;
    let model = effective_system(&params, &steady).map_err(|e| e.to_string())?;
    let report = is_stable(&model.drift).map_err(|e| e.to_string())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
    );
    Ok(if report.stable {
        EXIT_OK
    } else {
        EXIT_UNSTABLE
    })
}

fn run_exit_code(result: &SweepResult) -> i32 {
    let clean = result.rows.iter().all(|row| match &row.outcome {
        Ok(report) => report.stable,
        Err(_) => false,
    });
    if clean {
        EXIT_OK
    } else {
        EXIT_UNSTABLE
    }
}

fn emit(
    config: &Config,
    result: &SweepResult,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    include_meta: bool,
) -> Result<(), String> {
    let out = out.or_else(|| {
        config
            .output
            .as_ref()
            .and_then(|o| o.path.as_ref())
            .map(PathBuf::from)
    });
    let format = format
        .or_else(|| config.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Csv);
    let write_to = |w: &mut dyn Write| -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => write_csv(result, w, include_meta),
            OutputFormat::Json => write_json(result, w, include_meta),
        }
    };
    match out {
        Some(path) => {
            let file = File::create(&path)
                .map_err(|e| format!("cannot write `{}`: {e}", path.display()))?;
            let mut writer = BufWriter::new(file);
            write_to(&mut writer).map_err(|e| format!("cannot write `{}`: {e}", path.display()))?;
            writer.flush().map_err(|e| e.to_string())?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_to(&mut lock).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

/// One-line qualitative summary of a preset run.
fn summarize(which: Preset, result: &SweepResult) -> String {
    let axis = result.spec.axes[0].param;
    let unstable = result
        .rows
        .iter()
        .filter(|r| !matches!(&r.outcome, Ok(rep) if rep.stable))
        .count();
    let max_on = |branch: BranchSign,
                  pick: fn(&crate::measures::CorrelationReport) -> Option<f64>| {
        result
            .branch_rows(branch)
            .filter_map(|row| match &row.outcome {
                Ok(rep) => pick(rep).map(|v| (v, row.axis_values[0])),
                Err(_) => None,
            })
            .fold(
                (0.0_f64, f64::NAN),
                |best, (v, x)| if v > best.0 { (v, x) } else { best },
            )
    };
    match which {
        Preset::Fig5 => {
            let (g_ba, at) = max_on(BranchSign::Negative, |r| r.g_b_to_a);
            let (g_bm, _) = max_on(BranchSign::Negative, |r| r.g_b_to_m);
            let (g_am, _) = max_on(BranchSign::Negative, |r| r.g_a_to_m);
            let (g_ma, _) = max_on(BranchSign::Negative, |r| r.g_m_to_a);
            format!(
                "fig5: one-way steering, max g_B_to_a={g_ba:.4} at {}={at:.4}, max g_B_to_m={g_bm:.5}, \
                 max g_a_to_m={g_am:.1e}, max g_m_to_a={g_ma:.1e} (delta_b<0); {unstable} unstable rows",
                axis.name()
            )
        }
        Preset::Fig7 | Preset::Fig9c => {
            let cutoff = result
                .branch_rows(BranchSign::Negative)
                .filter_map(|row| match &row.outcome {
                    Ok(rep) if rep.e_ab.unwrap_or(0.0) > 0.0 => Some(row.axis_values[0]),
                    _ => None,
                })
                .fold(f64::NAN, f64::max);
            let (e_ab, _) = max_on(BranchSign::Negative, |r| r.e_ab);
            format!(
                "{}: e_aB cutoff temperature {cutoff:.0} K (delta_b<0 branch), max e_aB={e_ab:.4}; \
                 {unstable} unstable rows",
                which.name()
            )
        }
        Preset::Fig9a | Preset::Fig9b => {
            let best = result
                .contrasts
                .iter()
                .filter_map(|c| c.e_am.map(|v| (v, c.axis_values[0])))
                .fold(
                    (0.0_f64, f64::NAN),
                    |best, (v, x)| if v > best.0 { (v, x) } else { best },
                );
            format!(
                "{}: max contrast_e_am={:.4} at {}={:.4}; {} contrast rows; {unstable} unstable rows",
                which.name(),
                best.0,
                axis.name(),
                best.1,
                result.contrasts.len()
            )
        }
        _ => {
            let (e_ab_neg, at_neg) = max_on(BranchSign::Negative, |r| r.e_ab);
            let (e_ab_pos, _) = max_on(BranchSign::Positive, |r| r.e_ab);
            let (r_min, _) = max_on(BranchSign::Negative, |r| r.r_min);
            format!(
                "{}: max e_aB={e_ab_neg:.4} at {}={at_neg:.4} (delta_b<0) vs {e_ab_pos:.4} (delta_b>0), \
                 max r_min={r_min:.5}; {unstable} unstable rows",
                which.name(),
                axis.name()
            )
        }
    }
}
