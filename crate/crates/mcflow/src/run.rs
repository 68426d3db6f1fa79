//! Batch-run orchestration: resolve a config, seed the initial state, evolve
//! with diagnostic and snapshot hooks, and write artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::config::{self, ConfigError, Overrides, ResolvedConfig, RunConfig};
use crate::diagnostics::{self, TimeSeries};
use crate::geometry::{self, GeometryError};
use crate::mobility;
use crate::output::{self, CsvWriter};
use crate::solver::{PhaseState, Solver, SolverError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// What a run leaves behind in memory, on top of the files on disk.
pub struct RunArtifacts {
    pub final_state: PhaseState,
    pub time_series: TimeSeries,
    pub warnings: Vec<String>,
    pub output_dir: PathBuf,
}

/// Resolved-parameter echo for `validate`; `errors` is empty when the config
/// is runnable.
#[derive(Debug, Default)]
pub struct ConfigReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub lines: Vec<String>,
}

impl ConfigReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl std::fmt::Display for ConfigReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        Ok(())
    }
}

/// Structural checks and parameter resolution without executing; failures are
/// carried in the report rather than returned as errors.
pub fn validate_config(
    config: &RunConfig,
    base_dir: &Path,
    default_output_stem: &str,
    overrides: &Overrides,
) -> ConfigReport {
    let mut report = ConfigReport::default();
    let resolved = match config::resolve(config, base_dir, default_output_stem, overrides) {
        Ok(r) => r,
        Err(e) => {
            report.errors.push(e.to_string());
            return report;
        }
    };

    let sizes = resolved
        .grid
        .sizes()
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" x ");
    let lengths = resolved
        .grid
        .lengths()
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" x ");
    report.lines.push(format!(
        "grid: {}D, {sizes} nodes on [0, {lengths})",
        resolved.grid.dim()
    ));
    report
        .lines
        .push(format!("phases: {}", resolved.n_phases));
    let symbolic = |spec: Option<&str>| spec.map(|s| format!(" ({s})")).unwrap_or_default();
    report.lines.push(format!(
        "epsilon = {}{}",
        resolved.params.epsilon,
        symbolic(config.epsilon.describe())
    ));
    report.lines.push(format!(
        "dt = {}{}",
        resolved.params.dt,
        symbolic(config.dt.describe())
    ));
    report.lines.push(format!(
        "alpha = {}, beta = {:e}",
        resolved.params.alpha, resolved.params.beta
    ));
    match resolved.t_end {
        Some(t_end) => report.lines.push(format!(
            "steps = {} (t_end = {t_end})",
            resolved.params.n_steps
        )),
        None => report
            .lines
            .push(format!("steps = {}", resolved.params.n_steps)),
    }
    report.lines.push(format!(
        "tension split sigma_k = {:?}",
        resolved.tensions.phases()
    ));
    let mode = if resolved.sparse_fallback {
        format!(
            "{} (not harmonically additive; fell back to canonical)",
            resolved.requested_mode.name()
        )
    } else {
        resolved.requested_mode.name().to_string()
    };
    report.lines.push(format!(
        "mobility decomposition: {mode}, P = {}",
        resolved.decomposition.p()
    ));
    for (p, component) in resolved.decomposition.components().iter().enumerate() {
        report
            .lines
            .push(format!("  component {}: m_i^p = {:?}", p + 1, component.coeffs()));
    }
    report.lines.push(format!(
        "m_star = {:?}",
        resolved.decomposition.m_star()
    ));
    match mobility::validate(&resolved.decomposition, &resolved.mobility) {
        Ok(check) if check.passes => report.lines.push(format!(
            "decomposition check: ok (max reconstruction error {:.3e})",
            check.max_reconstruction_error
        )),
        Ok(check) => report.errors.push(format!(
            "decomposition does not rebuild the mobilities (max error {:.3e})",
            check.max_reconstruction_error
        )),
        Err(e) => report.errors.push(e.to_string()),
    }
    report.lines.push(format!(
        "output: {} (snapshots every {}, diagnostics every {})",
        resolved.output_dir.display(),
        resolved.snapshot_every,
        resolved.diagnostic_every
    ));

    for w in geometry::separation_warnings(&resolved.grid, &resolved.shapes, resolved.params.epsilon)
    {
        report.warnings.push(w.to_string());
    }
    report
}

fn is_due(step: usize, n_steps: usize, every: usize) -> bool {
    step == 0 || step == n_steps || (every > 0 && step % every == 0)
}

/// Executes a resolved run: seeds phases from the shapes, steps `n_steps`
/// times, writes `diagnostics.csv`, raw snapshots and PGM composites into the
/// output directory.
pub fn run(resolved: &ResolvedConfig, quiet: bool) -> Result<RunArtifacts, RunError> {
    let started = Instant::now();
    std::fs::create_dir_all(&resolved.output_dir).map_err(io_err(&resolved.output_dir))?;

    let (initial, init_warnings) =
        geometry::init_phases(&resolved.grid, &resolved.shapes, resolved.params.epsilon)?;
    let warnings: Vec<String> = init_warnings.iter().map(|w| w.to_string()).collect();
    if !quiet {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
    }

    let solver = Solver::new(
        &resolved.grid,
        resolved.tensions.clone(),
        resolved.decomposition.clone(),
        resolved.params.clone(),
    )?;

    let csv_path = resolved.output_dir.join("diagnostics.csv");
    let mut csv = CsvWriter::create(&csv_path, resolved.n_phases).map_err(io_err(&csv_path))?;
    let mut series = TimeSeries::default();
    let n_steps = resolved.params.n_steps;

    let final_state = {
        let csv = &mut csv;
        let series = &mut series;
        solver.evolve(initial, |step, state| {
            if is_due(step, n_steps, resolved.diagnostic_every) {
                let row = diagnostics::sample(
                    state,
                    &resolved.tensions,
                    resolved.params.epsilon,
                    solver.transform(),
                );
                csv.write_row(&row)?;
                series.push(row);
            }
            if is_due(step, n_steps, resolved.snapshot_every) {
                output::write_snapshot(&resolved.output_dir, step, state)?;
                output::write_composite_pgm(
                    &resolved.output_dir,
                    step,
                    state,
                    &resolved.composite_weights,
                    resolved.axis_slices,
                )?;
            }
            Ok(())
        })?
    };
    csv.finish().map_err(io_err(&csv_path))?;

    if !quiet {
        println!(
            "completed {} steps to t = {} in {:.1}s; wrote {}",
            n_steps,
            final_state.time(),
            started.elapsed().as_secs_f64(),
            resolved.output_dir.display()
        );
    }
    Ok(RunArtifacts {
        final_state,
        time_series: series,
        warnings,
        output_dir: resolved.output_dir.clone(),
    })
}

/// Convenience wrapper: parse, resolve and run a config file.
pub fn run_config_file(
    path: &Path,
    overrides: &Overrides,
    quiet: bool,
) -> Result<RunArtifacts, RunError> {
    let config = RunConfig::from_path(path)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    let resolved = config::resolve(&config, base_dir, &stem, overrides)?;
    run(&resolved, quiet)
}
