use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gs2_core::problems::ProblemSpec;
use gs2_core::relax::{Direction, Form};
use gs2_core::PrecisionMode;

use crate::spec::PrecondSpec;

/// Gauss-Seidel relaxation and Krylov solver experiments.
///
/// Thread count follows RAYON_NUM_THREADS.
#[derive(Debug, Parser)]
#[command(name = "gs2bench", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solve and print `solver precond n iters rel_res wall_ms`.
    Solve(SolveArgs),
    /// Iteration counts over an omega x n_j grid.
    Sweep(SweepArgs),
    /// Spectral radius of the relaxation operator and the Szyld inequality.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Gmres,
    Cg,
    Stationary,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gmres => "gmres",
            SolverKind::Cg => "cg",
            SolverKind::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// Generated problem, e.g. `laplace2d:50` or `elasticity3d:4`.
    #[arg(long, value_parser = parse_problem)]
    pub problem: Option<ProblemSpec>,
    /// MatrixMarket coordinate file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Relaxation {
    /// Preconditioner `kind[:n_t[,n_k[,n_j]]]`; kinds: none, jr, gs, sgs, mt-gs, mt-sgs, gs2, sgs2.
    #[arg(long, default_value = "sgs2:1,1,1", value_parser = parse_precond)]
    pub precond: PrecondSpec,
    /// Outer damping factor.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Inner Jacobi-Richardson damping factor.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// forward, backward or symmetric (sgs kinds are always symmetric).
    #[arg(long, default_value = "forward", value_parser = parse_direction)]
    pub direction: Direction,
    /// non-compact or compact two-stage recurrence.
    #[arg(long, default_value = "non-compact", value_parser = parse_form)]
    pub form: Form,
    /// double, or single for single-precision application inside double.
    #[arg(long, default_value = "double", value_parser = parse_precision)]
    pub precision: PrecisionMode,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Poisson ratio for elasticity problems.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_enum, default_value = "gmres")]
    pub solver: SolverKind,
    /// GMRES restart length.
    #[arg(long, default_value_t = gs2_core::krylov::DEFAULT_RESTART)]
    pub restart: usize,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = gs2_core::krylov::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = gs2_core::krylov::DEFAULT_MAXIT)]
    pub maxit: usize,
    /// Seed of the uniform(-1, 1) right-hand side.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub relax: Relaxation,
    /// Write the residual history as CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub relax: Relaxation,
    /// Outer damping values (rows).
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub omegas: Vec<f64>,
    /// Inner sweep counts n_j (columns).
    #[arg(long = "inner", value_delimiter = ',', default_value = "0,1,2,3")]
    pub inner: Vec<usize>,
    /// Write the grid as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dense,
    Power,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub nu: Option<f64>,
    #[command(flatten)]
    pub relax: Relaxation,
    /// Inner sweep counts n_j to analyse.
    #[arg(long = "inner", value_delimiter = ',', default_value = "0,1,2,3,5")]
    pub inner: Vec<usize>,
    #[arg(long, value_enum, default_value = "dense")]
    pub method: Method,
    /// Iteration cap for the power method.
    #[arg(long, default_value_t = 5000)]
    pub power_iters: usize,
    /// Also check rho(T_{n_j+1}) >= rho(T_1)^{n_j+1} for two-stage GS.
    #[arg(long)]
    pub szyld: bool,
}

fn parse_problem(s: &str) -> Result<ProblemSpec, String> {
    s.parse().map_err(|e: gs2_core::Error| e.to_string())
}

fn parse_precond(s: &str) -> Result<PrecondSpec, String> {
    s.parse().map_err(|e: gs2_core::Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: gs2_core::Error| e.to_string())
}

fn parse_form(s: &str) -> Result<Form, String> {
    s.parse().map_err(|e: gs2_core::Error| e.to_string())
}

fn parse_precision(s: &str) -> Result<PrecisionMode, String> {
    s.parse().map_err(|e: gs2_core::Error| e.to_string())
}
