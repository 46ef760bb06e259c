use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use gs2_core::analysis::{spectral_radius, szyld_check, IterationOperator, SpectralMethod};
use gs2_core::mmio::{read_matrix_market, write_history_csv, HistoryMeta};
use gs2_core::problems::random_rhs;
use gs2_core::relax::RelaxConfig;
use gs2_core::{cg, gmres, stationary, ConvergenceHistory, CsrMatrix, Error, Preconditioner, SolveStatus, SolverOptions};

use crate::cli::{Method, Relaxation, RunArgs, SolveArgs, SolverKind, Source, SpectrumArgs, SweepArgs};

pub const EXIT_CONVERGED: u8 = 0;
pub const EXIT_MAXIT: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_IO: u8 = 5;

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Diverged { .. } | Error::NotPositiveDefinite { .. } | Error::EigenNoConvergence => EXIT_DIVERGED,
        _ => EXIT_CONFIG,
    }
}

pub fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => EXIT_CONVERGED,
        SolveStatus::MaxIterations | SolveStatus::Breakdown => EXIT_MAXIT,
        SolveStatus::Diverged => EXIT_DIVERGED,
    }
}

fn load(source: &Source, nu: Option<f64>) -> Result<CsrMatrix<f64>, Error> {
    match (&source.problem, &source.matrix) {
        (Some(spec), _) => {
            let spec = match nu {
                Some(nu) => spec.clone().with_poisson_ratio(nu),
                None => spec.clone(),
            };
            spec.build()
        }
        (None, Some(path)) => read_matrix_market(path),
        (None, None) => Err(Error::Config("one of --problem or --matrix is required".into())),
    }
}

fn relax_config(r: &Relaxation, omega: f64, n_j: usize) -> RelaxConfig {
    RelaxConfig::gs2(r.precond.n_t, r.precond.n_k, n_j)
        .with_direction(r.direction)
        .with_form(r.form)
        .with_damping(omega, r.gamma)
}

fn options(run: &RunArgs) -> SolverOptions {
    SolverOptions {
        tol: run.tol,
        maxit: run.maxit,
        restart: run.restart,
    }
}

/// Runs the solve loop only; setup happens in the caller.
fn timed_solve(
    a: &CsrMatrix<f64>,
    b: &[f64],
    m: &Preconditioner<'_>,
    solver: SolverKind,
    opts: &SolverOptions,
) -> Result<(ConvergenceHistory, f64), Error> {
    let x0 = vec![0.0; a.nrows()];
    let start = Instant::now();
    let (_, hist) = match solver {
        SolverKind::Gmres => gmres(a, b, m, opts, &x0)?,
        SolverKind::Cg => cg(a, b, m, opts, &x0)?,
        SolverKind::Stationary => stationary(a, b, m, opts, &x0)?,
    };
    Ok((hist, start.elapsed().as_secs_f64() * 1e3))
}

pub fn solve(args: &SolveArgs) -> Result<u8, Error> {
    let run = &args.run;
    let opts = options(run);
    opts.validate()?;
    let a = load(&run.source, run.nu)?;
    let cfg = relax_config(&args.relax, args.relax.omega, args.relax.precond.n_j);
    let m = Preconditioner::new(&a, args.relax.precond.kind, cfg, args.relax.precision)?;
    let b = random_rhs(a.nrows(), run.seed);
    let (hist, ms) = timed_solve(&a, &b, &m, run.solver, &opts)?;
    println!(
        "{} {} {} {} {:.3e} {:.3}",
        run.solver.name(),
        m.label(),
        a.nrows(),
        hist.iterations,
        hist.final_rel_res,
        ms
    );
    if let Some(path) = &args.history {
        let meta = HistoryMeta {
            solver: run.solver.name().to_string(),
            precond: m.label(),
            n: a.nrows(),
            tol: run.tol,
        };
        write_history_csv(&hist, &meta, path)?;
    }
    Ok(status_code(hist.status))
}

struct Cell {
    omega: f64,
    n_j: usize,
    outcome: Result<ConvergenceHistory, Error>,
}

impl Cell {
    fn display(&self) -> String {
        match &self.outcome {
            Ok(h) if h.converged => h.iterations.to_string(),
            _ => "—".to_string(),
        }
    }

    fn status(&self) -> String {
        match &self.outcome {
            Ok(h) => match h.status {
                SolveStatus::Converged => "converged".into(),
                SolveStatus::MaxIterations => "maxit".into(),
                SolveStatus::Breakdown => "breakdown".into(),
                SolveStatus::Diverged => "diverged".into(),
            },
            Err(Error::Diverged { .. }) => "diverged".into(),
            Err(e) => format!("error: {}", e.to_string().replace(',', ";")),
        }
    }
}

fn run_cell(a: &CsrMatrix<f64>, b: &[f64], args: &SweepArgs, omega: f64, n_j: usize) -> Cell {
    let outcome = (|| {
        let cfg = relax_config(&args.relax, omega, n_j);
        let m = Preconditioner::new(a, args.relax.precond.kind, cfg, args.relax.precision)?;
        timed_solve(a, b, &m, args.run.solver, &options(&args.run)).map(|(h, _)| h)
    })();
    Cell { omega, n_j, outcome }
}

pub fn sweep(args: &SweepArgs) -> Result<u8, Error> {
    let opts = options(&args.run);
    opts.validate()?;
    if args.omegas.is_empty() || args.inner.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let a = load(&args.run.source, args.run.nu)?;
    let b = random_rhs(a.nrows(), args.run.seed);
    let grid: Vec<(f64, usize)> = args
        .omegas
        .iter()
        .flat_map(|&w| args.inner.iter().map(move |&j| (w, j)))
        .collect();

    #[cfg(feature = "parallel")]
    let cells: Vec<Cell> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&(w, j)| run_cell(&a, &b, args, w, j)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cells: Vec<Cell> = grid.iter().map(|&(w, j)| run_cell(&a, &b, args, w, j)).collect();

    print!("{}", render_table(args, &cells, a.nrows()));
    if let Some(path) = &args.csv {
        write_file(path, &render_csv(&cells))?;
    }
    Ok(EXIT_CONVERGED)
}

fn render_table(args: &SweepArgs, cells: &[Cell], n: usize) -> String {
    let spec = &args.relax.precond;
    let mut out = String::new();
    writeln!(
        out,
        "# {} {}(n_t={},n_k={}) n={} tol={:e}; iterations, — = not converged",
        args.run.solver.name(),
        spec.kind,
        spec.n_t,
        spec.n_k,
        n,
        args.run.tol
    )
    .unwrap();
    let width = cells.iter().map(|c| c.display().chars().count()).max().unwrap_or(1).max(6);
    write!(out, "{:<10}", "omega\\n_j").unwrap();
    for j in &args.inner {
        write!(out, " {j:>width$}").unwrap();
    }
    out.push('\n');
    for (row, omega) in cells.chunks(args.inner.len()).zip(&args.omegas) {
        write!(out, "{omega:<10}").unwrap();
        for c in row {
            write!(out, " {:>width$}", c.display()).unwrap();
        }
        out.push('\n');
    }
    out
}

fn render_csv(cells: &[Cell]) -> String {
    let mut out = String::from("omega,n_j,iters,rel_res,status\n");
    for c in cells {
        match &c.outcome {
            Ok(h) => writeln!(out, "{},{},{},{:.16e},{}", c.omega, c.n_j, h.iterations, h.final_rel_res, c.status()),
            Err(_) => writeln!(out, "{},{},,,{}", c.omega, c.n_j, c.status()),
        }
        .unwrap();
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn spectrum(args: &SpectrumArgs) -> Result<u8, Error> {
    let a = load(&args.source, args.nu)?;
    let method = match args.method {
        Method::Dense => SpectralMethod::Dense,
        Method::Power => SpectralMethod::Power,
    };
    let kind = args.relax.precond.kind;
    println!("# {kind} n={} method={:?}", a.nrows(), args.method);
    println!("n_j rho converged");
    let inner: &[usize] = if kind.is_two_stage() { &args.inner } else { &args.inner[..1.min(args.inner.len())] };
    for &n_j in inner {
        let cfg = relax_config(&args.relax, args.relax.omega, n_j);
        let op = IterationOperator::new(&a, kind, cfg)?;
        let est = spectral_radius(&op, method, args.power_iters)?;
        println!("{n_j} {:.12} {}", est.rho, est.converged);
    }
    if args.szyld {
        let report = szyld_check(&a, &args.inner)?;
        println!("# szyld rho(T_1)={:.12} regular_splitting={}", report.rho_jr, report.regular_splitting);
        println!("n_j rho_two_stage rho_jr_power holds");
        for row in &report.rows {
            println!("{} {:.12} {:.12} {}", row.n_j, row.rho_two_stage, row.rho_jr_power, row.holds);
        }
    }
    Ok(EXIT_CONVERGED)
}
