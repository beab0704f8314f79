//! Command-line front end: scenario files in, CSV/JSON/SVG artifacts out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod plots;

use std::path::{Path, PathBuf};

use corridor_core::geometry::{build_layout, patch_bounds};
use corridor_core::{run_scenario, ScenarioRun};
use rayon::prelude::*;
use thiserror::Error;

pub use config::{load_config, parse_config, write_config, ConfigError, ScenarioConfig};
pub use output::{Metrics, OutputError};

/// Default allowance below `d_safe` before `--strict` fails a run.
pub const DEFAULT_SEPARATION_TOLERANCE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation: {0}")]
    Sim(#[from] corridor_core::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("bad pattern: {0}")]
    Pattern(#[from] glob::PatternError),
    #[error("no config matches {0}")]
    NoMatch(String),
    #[error("separation {min:.3} m below {limit:.3} m")]
    SafetyViolation { min: f64, limit: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SafetyViolation { .. } => 1,
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub strict: bool,
    pub separation_tolerance: f64,
    pub plots: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out_dir: None, strict: false, separation_tolerance: DEFAULT_SEPARATION_TOLERANCE, plots: false }
    }
}

/// Corridor design numbers for a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignReport {
    pub r_loiter: f64,
    pub d_loiter: f64,
    pub d_p_min: f64,
    pub d_p_max: f64,
}

impl DesignReport {
    pub fn patch_length(&self) -> f64 {
        self.d_p_max - self.d_p_min
    }
}

impl std::fmt::Display for DesignReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "R_L       {:.6}", self.r_loiter)?;
        writeln!(f, "d_L       {:.6}", self.d_loiter)?;
        writeln!(f, "d_p_min   {:.6}", self.d_p_min)?;
        writeln!(f, "d_p_max   {:.6}", self.d_p_max)?;
        write!(f, "patch     {:.6}", self.patch_length())
    }
}

pub fn check_design(cfg: &ScenarioConfig) -> Result<DesignReport, CliError> {
    let params = cfg.params();
    let layout = build_layout(&params)?;
    let (d_p_min, d_p_max) = patch_bounds(&layout, &params);
    Ok(DesignReport { r_loiter: layout.r_loiter, d_loiter: layout.d_loiter, d_p_min, d_p_max })
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<ScenarioRun<f64>, CliError> {
    Ok(run_scenario(&cfg.to_scenario()?)?)
}

/// Output directory: explicit flag, then the config's own, then `out/<stem>`.
pub fn resolve_out_dir(cfg: &ScenarioConfig, config_path: &Path, explicit: Option<&Path>) -> PathBuf {
    if let Some(dir) = explicit {
        return dir.to_path_buf();
    }
    if let Some(dir) = &cfg.output_dir {
        let dir = PathBuf::from(dir);
        return if dir.is_absolute() { dir } else { config_path.parent().unwrap_or(Path::new(".")).join(dir) };
    }
    let stem = config_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    PathBuf::from("out").join(stem)
}

/// Runs one config file and writes its artifacts.
pub fn run_file(config_path: &Path, opts: &RunOptions) -> Result<(PathBuf, Metrics), CliError> {
    let cfg = load_config(config_path)?;
    let dir = resolve_out_dir(&cfg, config_path, opts.out_dir.as_deref());
    let run = simulate(&cfg)?;
    let metrics = output::write_all(&run, &dir)?;
    if opts.plots {
        plots::write_plots(&run, &dir)?;
    }
    if opts.strict {
        let limit = cfg.d_safe - opts.separation_tolerance;
        if run.safety.min_separation < limit {
            return Err(CliError::SafetyViolation { min: run.safety.min_separation, limit });
        }
    }
    Ok((dir, metrics))
}

/// Per-file outcome of a sweep.
pub type SweepResult = (PathBuf, Result<(PathBuf, Metrics), CliError>);

/// Runs every config matching `pattern` in parallel, each into `<out_root>/<stem>`.
pub fn sweep(pattern: &str, out_root: Option<&Path>, opts: &RunOptions) -> Result<Vec<SweepResult>, CliError> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)?.filter_map(Result::ok).collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::NoMatch(pattern.to_string()));
    }
    Ok(paths
        .into_par_iter()
        .map(|p| {
            let mut o = opts.clone();
            if let Some(root) = out_root {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                o.out_dir = Some(root.join(stem));
            }
            let r = run_file(&p, &o);
            (p, r)
        })
        .collect())
}
