use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hinf_core::discretize::DEFAULT_N;
use hinf_core::extrema::{compute_extrema, CorrectorOptions, ExtremaOptions, DEFAULT_AXIS_TOL};
use hinf_core::model::DEFAULT_RANK_TOL;
use hinf_core::strongnorm::{default_density, strong_hinf_norm, GridOptions, StrongNormOptions};
use hinf_core::transfer::eval_transfer;
use hinf_core::{DdaeSystem, Error};
use num_complex::Complex64;

use crate::format::{load_system, FormatError};
use crate::report::{to_json, ConfigDoc, ExtremumDoc, ResultDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_NOT_CAUSAL: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hinf", version, about = "Extrema of |G(jw)| and strong H-infinity norms of time-delay systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strong H-infinity norm.
    Norm {
        file: PathBuf,
        #[command(flatten)]
        flags: AlgoFlags,
    },
    /// All local extrema of |G(jw)|.
    Extrema {
        file: PathBuf,
        #[command(flatten)]
        flags: AlgoFlags,
        /// Also report candidates the corrector did not converge on.
        #[arg(long)]
        include_unconverged: bool,
    },
    /// Magnitude samples as CSV.
    Bode {
        file: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        wmin: f64,
        #[arg(long, default_value_t = 100.0)]
        wmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Logarithmic spacing (needs wmin > 0).
        #[arg(long)]
        log: bool,
    },
    /// Rewrite any system file as a ddae document.
    Convert { file: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct AlgoFlags {
    /// Number of Chebyshev intervals.
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_AXIS_TOL)]
    pub axis_tol: f64,
    /// Absolute corrector tolerance (default 1e-10 (1 + xi)).
    #[arg(long)]
    pub corrector_tol: Option<f64>,
    /// Grid points per active delay for the asymptotic norm.
    #[arg(long)]
    pub grid_density: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long, default_value_t = CorrectorOptions::default().max_iter)]
    pub max_iter: usize,
    /// Allow more than four active delays (needs --grid-density).
    #[arg(long)]
    pub allow_high_dimension: bool,
}

impl AlgoFlags {
    fn extrema_options(&self) -> ExtremaOptions {
        ExtremaOptions {
            n_cheb: self.n,
            axis_tol: self.axis_tol,
            rank_tol: self.rank_tol,
            corrector: CorrectorOptions { tol: self.corrector_tol, max_iter: self.max_iter },
            ..Default::default()
        }
    }

    fn config(&self, grid_density: Option<usize>) -> ConfigDoc {
        ConfigDoc {
            n: self.n,
            axis_tol: self.axis_tol,
            corrector_tol: self.corrector_tol,
            rank_tol: self.rank_tol,
            max_iter: self.max_iter,
            grid_density,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Format(FormatError::Io { .. }) => EXIT_OTHER,
            CommandError::Format(_) => EXIT_PARSE,
            CommandError::Core(Error::NotCausal { .. }) => EXIT_NOT_CAUSAL,
            CommandError::Core(Error::StabilityViolation { .. } | Error::AsymptoticUnbounded { .. }) => EXIT_UNSTABLE,
            CommandError::Core(_) | CommandError::Usage(_) => EXIT_OTHER,
        }
    }
}

/// Standard output text and warnings of a successful command.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

fn validate(flags: &AlgoFlags) -> Result<(), CommandError> {
    if flags.n == 0 {
        return Err(CommandError::Usage("--N must be positive".into()));
    }
    for (name, v) in [("--axis-tol", flags.axis_tol), ("--rank-tol", flags.rank_tol)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CommandError::Usage(format!("{name} must be positive")));
        }
    }
    if let Some(t) = flags.corrector_tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CommandError::Usage("--corrector-tol must be positive".into()));
        }
    }
    if flags.grid_density == Some(0) {
        return Err(CommandError::Usage("--grid-density must be positive".into()));
    }
    Ok(())
}

pub fn cmd_norm(path: &Path, flags: &AlgoFlags) -> Result<Output, CommandError> {
    validate(flags)?;
    let sys = load_system(path)?;
    let opts = StrongNormOptions {
        extrema: flags.extrema_options(),
        grid: GridOptions { density: flags.grid_density, allow_high_dimension: flags.allow_high_dimension, rank_tol: flags.rank_tol },
        asymptotic_override: None,
    };
    let r = strong_hinf_norm(&sys, &opts)?;
    let density = match r.active_delays.len() {
        0 => None,
        d => flags.grid_density.or(default_density(d)),
    };
    let doc = ResultDocument {
        strong_norm: Some(r.strong_norm),
        frequency: Some(r.frequency.into()),
        standard_peak: Some(r.standard_peak),
        peak_frequency: Some(r.peak_frequency),
        asymptotic_norm: Some(r.asymptotic_norm),
        theta_star: Some(r.theta_star.clone()),
        active_delays: Some(r.active_delays.clone()),
        extrema: r.extrema.iter().map(ExtremumDoc::from).collect(),
        discretization_order: r.discretization_order,
        delta_pencil_size: r.delta_pencil_size,
        warnings: r.warnings.clone(),
        config: flags.config(density),
    };
    Ok(Output { stdout: to_json(&doc), warnings: r.warnings })
}

pub fn cmd_extrema(path: &Path, flags: &AlgoFlags, include_unconverged: bool) -> Result<Output, CommandError> {
    validate(flags)?;
    let sys = load_system(path)?;
    let report = compute_extrema(&sys, &flags.extrema_options())?;
    let mut warnings = Vec::new();
    if report.converged().next().is_none() {
        warnings.push(format!("none of {} candidates converged", report.points.len()));
    }
    let doc = ResultDocument {
        strong_norm: None,
        frequency: None,
        standard_peak: None,
        peak_frequency: None,
        asymptotic_norm: None,
        theta_star: None,
        active_delays: None,
        extrema: report.points.iter().filter(|p| include_unconverged || p.converged).map(ExtremumDoc::from).collect(),
        discretization_order: report.discretization_order,
        delta_pencil_size: report.delta_pencil_size,
        warnings: warnings.clone(),
        config: flags.config(None),
    };
    Ok(Output { stdout: to_json(&doc), warnings })
}

/// Sample frequencies with exact endpoints.
pub fn bode_grid(wmin: f64, wmax: f64, points: usize, log: bool) -> Result<Vec<f64>, CommandError> {
    if !(wmin.is_finite() && wmax.is_finite() && 0.0 <= wmin && wmin < wmax) {
        return Err(CommandError::Usage("need 0 <= wmin < wmax".into()));
    }
    if points < 2 {
        return Err(CommandError::Usage("need at least 2 points".into()));
    }
    if log && wmin <= 0.0 {
        return Err(CommandError::Usage("--log needs wmin > 0".into()));
    }
    let last = (points - 1) as f64;
    let (a, b) = if log { (wmin.log10(), wmax.log10()) } else { (wmin, wmax) };
    Ok((0..points)
        .map(|k| match k {
            0 => wmin,
            k if k == points - 1 => wmax,
            k => {
                let t = a + (b - a) * k as f64 / last;
                if log {
                    10f64.powf(t)
                } else {
                    t
                }
            }
        })
        .collect())
}

pub fn bode_csv(sys: &DdaeSystem, omegas: &[f64]) -> Result<String, CommandError> {
    let mut out = String::from("omega,magnitude\n");
    for &w in omegas {
        match eval_transfer(sys, Complex64::new(0.0, w)) {
            Ok(g) => out.push_str(&format!("{w},{}\n", g.norm())),
            Err(Error::PoleProximity { .. }) => out.push_str(&format!("{w},nan\n")),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

pub fn cmd_bode(path: &Path, wmin: f64, wmax: f64, points: usize, log: bool) -> Result<Output, CommandError> {
    let omegas = bode_grid(wmin, wmax, points, log)?;
    let sys = load_system(path)?;
    Ok(Output { stdout: bode_csv(&sys, &omegas)?, warnings: vec![] })
}

pub fn cmd_convert(path: &Path) -> Result<Output, CommandError> {
    let sys = load_system(path)?;
    Ok(Output { stdout: crate::format::to_ddae_json(&sys), warnings: vec![] })
}

pub fn run(cli: &Cli) -> Result<Output, CommandError> {
    match &cli.command {
        Command::Norm { file, flags } => cmd_norm(file, flags),
        Command::Extrema { file, flags, include_unconverged } => cmd_extrema(file, flags, *include_unconverged),
        Command::Bode { file, wmin, wmax, points, log } => cmd_bode(file, *wmin, *wmax, *points, *log),
        Command::Convert { file } => cmd_convert(file),
    }
}
