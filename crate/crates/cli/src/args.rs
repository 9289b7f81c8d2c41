use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tnc_core::{InitMode, PatternKind, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "tnc", version, about = "Total normal curvature smoothing of grayscale images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Smooth an image or a synthetic pattern.
    Denoise(DenoiseArgs),
    /// Compute a curvature map.
    Curvature(CurvatureArgs),
    /// Write a synthetic test pattern.
    Synth(SynthArgs),
    /// Compare an image against a reference.
    Metrics(MetricsArgs),
}

/// Where the input field comes from.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Grayscale PNG/PGM, or a `.raw` dump.
    #[arg(long, conflicts_with = "pattern")]
    pub input: Option<PathBuf>,
    /// Synthetic pattern: line, square, rings or disk.
    #[arg(long)]
    pub pattern: Option<PatternKind>,
    #[arg(long, default_value_t = 60)]
    pub rows: usize,
    #[arg(long, default_value_t = 60)]
    pub cols: usize,
    /// Standard deviation of added Gaussian noise.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SourceArgs {
    pub fn is_empty(&self) -> bool {
        self.input.is_none() && self.pattern.is_none() && self.sigma.is_none()
    }
}

/// Per-run overrides of solver parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    /// ADMM iterations per outer step.
    #[arg(long)]
    pub imax: Option<usize>,
    #[arg(long)]
    pub ndirs: Option<usize>,
    /// Outer stopping tolerance on the relative change.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub init: Option<InitMode>,
    #[arg(long)]
    pub init_eps: Option<f64>,
    #[arg(long)]
    pub fp_tol: Option<f64>,
    #[arg(long)]
    pub admm_tol: Option<f64>,
    #[arg(long)]
    pub energy_stride: Option<usize>,
}

impl SolverFlags {
    pub fn is_empty(&self) -> bool {
        let reals = [
            self.alpha, self.beta, self.gamma, self.tau, self.eta, self.rho1, self.rho2,
            self.tol, self.init_eps, self.fp_tol, self.admm_tol,
        ];
        let counts = [self.imax, self.ndirs, self.max_iter, self.energy_stride];
        reals.iter().all(Option::is_none) && counts.iter().all(Option::is_none) && self.init.is_none()
    }

    pub fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(
            alpha => alpha, beta => beta, gamma => gamma, tau => tau, eta => eta,
            rho1 => rho1, rho2 => rho2, imax => i_max, ndirs => n_dirs, tol => stop_eps,
            max_iter => max_outer, init => init_mode, init_eps => init_epsilon,
            fp_tol => fp_tol, admm_tol => admm_tol, energy_stride => energy_stride,
        );
        cfg
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// `key = value` parameter file (or JSON); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replay the run recorded in a manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Clean reference for PSNR/SSIM (defaults to the clean pattern).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write the result as a raw float dump.
    #[arg(long)]
    pub raw: bool,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurvatureKind {
    /// Mean curvature.
    Mc,
    /// Gaussian curvature.
    Gc,
    /// Total normal curvature.
    Tnc,
    /// Normal curvature along `--theta`.
    Normal,
}

impl CurvatureKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mc => "mc",
            Self::Gc => "gc",
            Self::Tnc => "tnc",
            Self::Normal => "normal",
        }
    }
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub kind: CurvatureKind,
    /// Direction in radians for `--kind normal`.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 8)]
    pub ndirs: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub pattern: PatternKind,
    pub rows: usize,
    pub cols: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `.png` is 16-bit, `.pgm` 8-bit, `.raw` a float dump.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Print a JSON object instead of `name value` lines.
    #[arg(long)]
    pub json: bool,
}
