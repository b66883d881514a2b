use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;
use fowler_split::{
    evolve_with, run_study, Error, ErrorRow, InitialDataKind, Parallelism, SchemeKind,
    SpectralGrid, SymbolSpec, Trajectory,
};
use serde::Serialize;
use serde_json::json;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

pub const THREADS_ENV: &str = "FOWLER_SPLIT_THREADS";

fn io_error(path: &Path, err: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {err}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(CliError::runtime)?;
    writeln!(w).map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// Kind name of a library error, for diagnostic sidecars.
fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::BlowUpDetected { .. } => "blow_up_detected",
        Error::CflViolation { .. } => "cfl_violation",
        Error::NonFinite { .. } => "non_finite",
        Error::NonHermitianInput { .. } => "non_hermitian_input",
        Error::SpatialFloorReached { .. } => "spatial_floor_reached",
        Error::QuadratureFailure(_) => "quadrature_failure",
        _ => "error",
    }
}

fn write_trajectory_csv(
    path: &Path,
    grid: &SpectralGrid,
    traj: &Trajectory,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| io_error(path, e);
    writeln!(w, "t,x,u").map_err(io)?;
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        for (x, u) in grid.nodes().zip(snap.values()) {
            writeln!(w, "{t:.16e},{x:.16e},{u:.16e}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn write_trajectory_json(
    path: &Path,
    grid: &SpectralGrid,
    traj: &Trajectory,
) -> Result<(), CliError> {
    let x: Vec<f64> = grid.nodes().collect();
    let u: Vec<&[f64]> = traj.snapshots.iter().map(|s| s.values()).collect();
    write_json(path, &json!({ "t": traj.times, "x": x, "u": u }))
}

fn symbol_summary(spec: &SymbolSpec) -> serde_json::Value {
    json!({
        "alpha0": spec.alpha0(),
        "beta0": spec.beta0(),
        "a_I": spec.a(),
        "b_I": spec.b(),
    })
}

pub fn simulate(config: &RunConfig) -> Result<(), CliError> {
    let grid = config.grid()?;
    let spec = config.symbols(false)?;
    let scheme = config.scheme_spec()?;
    let options = config.options()?;
    let u0 = config.initial_data(config.init)?.sample(grid)?;

    create_dir(&config.out)?;
    let meta_path = config.out.join("meta.json");
    let traj = match evolve_with(&scheme, &spec, &u0, options) {
        Ok(traj) => traj,
        Err(err) => {
            write_json(
                &meta_path,
                &json!({
                    "status": "error",
                    "error_kind": error_kind(&err),
                    "error": err.to_string(),
                    "config": config,
                    "symbols": symbol_summary(&spec),
                }),
            )?;
            return Err(CliError::runtime(err));
        }
    };

    match config.format {
        OutputFormat::Csv => {
            write_trajectory_csv(&config.out.join("trajectory.csv"), &grid, &traj)?
        }
        OutputFormat::Json => {
            write_trajectory_json(&config.out.join("trajectory.json"), &grid, &traj)?
        }
    }
    write_json(
        &meta_path,
        &json!({
            "status": "ok",
            "config": config,
            "symbols": symbol_summary(&spec),
            "n_steps": scheme.n_steps(),
            "burgers_substeps": traj.burgers_substeps,
            "times": traj.times,
            "l2_history": traj.l2_history,
        }),
    )
}

pub fn parallelism() -> Result<Parallelism, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(value) => value
            .trim()
            .parse::<usize>()
            .map(|n| Parallelism(Some(n)))
            .map_err(|e| CliError::Config(format!("{THREADS_ENV} = '{value}': {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(Parallelism::default()),
        Err(e) => Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
    }
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    scheme: SchemeKind,
    initial_data: InitialDataKind,
    slope: f64,
    slope_ci: f64,
    rows: &'a [ErrorRow],
}

#[derive(Serialize)]
struct FailureEntry<'a> {
    scheme: SchemeKind,
    initial_data: InitialDataKind,
    error: &'a str,
}

fn write_rows_csv(path: &Path, rows: &[ErrorRow]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| io_error(path, e);
    writeln!(w, "dt,error_l2").map_err(io)?;
    for row in rows {
        writeln!(w, "{:.16e},{:.16e}", row.dt, row.error_l2).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn converge(config: &RunConfig) -> Result<(), CliError> {
    let study = config.study()?;
    let parallelism = parallelism()?;
    create_dir(&config.out)?;
    let summary_path = config.out.join("summary.json");

    let outcome = match run_study(&study, parallelism) {
        Ok(outcome) => outcome,
        Err(err) => {
            write_json(
                &summary_path,
                &json!({
                    "status": "error",
                    "error_kind": error_kind(&err),
                    "error": err.to_string(),
                    "config": config,
                }),
            )?;
            return Err(CliError::runtime(err));
        }
    };

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for cell in &outcome.cells {
        match &cell.report {
            Ok(report) => {
                let name = format!("{}_{}.csv", report.scheme, report.initial_data);
                write_rows_csv(&config.out.join(name), &report.rows)?;
                reports.push(ReportEntry {
                    scheme: report.scheme,
                    initial_data: report.initial_data,
                    slope: report.slope,
                    slope_ci: report.slope_ci,
                    rows: &report.rows,
                });
            }
            Err(message) => failures.push(FailureEntry {
                scheme: cell.scheme,
                initial_data: cell.initial_data,
                error: message,
            }),
        }
    }

    let floor = outcome.check_spatial_floor();
    let (status, result) = if !failures.is_empty() {
        (
            "partial",
            Err(CliError::Runtime(format!(
                "{} study cells failed",
                failures.len()
            ))),
        )
    } else if let Err(err) = &floor {
        ("spatial_floor", Err(CliError::Quality(err.to_string())))
    } else {
        ("ok", Ok(()))
    };
    let gaps: Vec<_> = outcome
        .reference_gaps
        .iter()
        .map(|(kind, gap)| json!({ "initial_data": kind, "gap": gap }))
        .collect();
    write_json(
        &summary_path,
        &json!({
            "status": status,
            "error": floor.err().map(|e| e.to_string()),
            "config": config,
            "symbols": symbol_summary(&study.symbols),
            "dts": study.dts,
            "burgers_substep": outcome.options.burgers_substep,
            "reference_gaps": gaps,
            "reports": reports,
            "failures": failures,
        }),
    )?;
    result
}

#[derive(Serialize)]
struct SymbolPoint {
    xi: f64,
    re_psi: f64,
    im_psi: f64,
    re_phi: f64,
    im_phi: f64,
    alpha0: f64,
    beta0: f64,
    #[serde(rename = "a_I")]
    a_i: f64,
    #[serde(rename = "b_I")]
    b_i: f64,
}

pub fn symbol(config: &RunConfig, xis: &[f64], out: Option<&Path>) -> Result<(), CliError> {
    let spec = config.symbols(true)?;
    if let Some(xi) = xis.iter().find(|x| !x.is_finite()) {
        return Err(CliError::Config(format!("xi {xi} is not finite")));
    }
    let (alpha0, beta0) = (spec.alpha0(), spec.beta0());
    let points: Vec<SymbolPoint> = xis
        .iter()
        .map(|&xi| {
            let psi = spec.psi(xi);
            let phi = spec.phi(xi);
            SymbolPoint {
                xi,
                re_psi: psi.re,
                im_psi: psi.im,
                re_phi: phi.re,
                im_phi: phi.im,
                alpha0,
                beta0,
                a_i: spec.a(),
                b_i: spec.b(),
            }
        })
        .collect();
    match out {
        Some(path) => write_json(path, &points),
        None => {
            let text = serde_json::to_string_pretty(&points).map_err(CliError::runtime)?;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::runtime(e)),
                _ => Ok(()),
            }
        }
    }
}

/// Parses `start:stop:count` into `count` evenly spaced points.
pub fn parse_range(range: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = range.split(':').collect();
    let bad = || CliError::Config(format!("xi range '{range}' is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("a:1:2").is_err());
    }
}
