//! Right-preconditioned restarted GMRES, preconditioned CG, and the
//! stand-alone stationary driver.

use crate::csr::CsrMatrix;
use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::precond::Preconditioner;
use crate::vector::{all_finite, axpy, dot, norm2};

pub const DEFAULT_RESTART: usize = 60;
pub const DEFAULT_MAXIT: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Arnoldi vectors with norm below this fraction of `||b||` end the cycle.
pub const BREAKDOWN_TOL: f64 = 1e-14;
/// Stand-alone iterations stop as diverged once the relative residual exceeds this.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// GMRES lucky breakdown without reaching the tolerance.
    Breakdown,
    Diverged,
}

/// Relative residual history `||b - A x_k|| / ||b||`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceHistory {
    /// `rel_res[0]` is the initial guess; one entry per iteration after that.
    pub rel_res: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_rel_res: f64,
    pub status: SolveStatus,
    /// Indices into `rel_res` holding a recomputed true residual (GMRES
    /// restarts); all other GMRES entries are Arnoldi estimates.
    pub true_residual_at: Vec<usize>,
}

impl ConvergenceHistory {
    fn start(rel0: f64) -> Self {
        Self {
            rel_res: vec![rel0],
            iterations: 0,
            converged: false,
            final_rel_res: rel0,
            status: SolveStatus::MaxIterations,
            true_residual_at: vec![0],
        }
    }

    fn push(&mut self, rel: f64) {
        self.rel_res.push(rel);
        self.iterations += 1;
    }

    fn finish(&mut self, status: SolveStatus, final_rel: f64, tol: f64) {
        self.final_rel_res = final_rel;
        self.converged = final_rel <= tol && status != SolveStatus::Diverged;
        self.status = if self.converged {
            SolveStatus::Converged
        } else {
            status
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxit: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            restart: DEFAULT_RESTART,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.restart == 0 {
            return Err(Error::Config("restart must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_solve(a: &CsrMatrix<f64>, b: &[f64], x0: &[f64]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    check_len("right-hand side", a.nrows(), b.len())?;
    check_len("initial guess", a.nrows(), x0.len())
}

/// Restarted GMRES with right preconditioning, modified Gram-Schmidt Arnoldi
/// and Givens rotations. `opts.maxit` caps the total number of Arnoldi steps.
pub fn gmres(
    a: &CsrMatrix<f64>,
    b: &[f64],
    m: &Preconditioner<'_>,
    opts: &SolverOptions,
    x0: &[f64],
) -> Result<(Vec<f64>, ConvergenceHistory)> {
    opts.validate()?;
    check_solve(a, b, x0)?;
    let n = a.nrows();
    let exec = Execution::default();
    let bnorm = norm2(b);
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        x.fill(0.0);
        let mut h = ConvergenceHistory::start(0.0);
        h.finish(SolveStatus::Converged, 0.0, opts.tol);
        return Ok((x, h));
    }
    let mut r = a.residual(b, &x)?;
    let mut beta = norm2(&r);
    let mut hist = ConvergenceHistory::start(beta / bnorm);
    let mdim = opts.restart.min(n).max(1);

    let mut v: Vec<Vec<f64>> = Vec::with_capacity(mdim + 1);
    // column-major Hessenberg, h[j] has j + 2 entries
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(mdim);
    let mut cs = vec![0.0; mdim];
    let mut sn = vec![0.0; mdim];
    let mut g = vec![0.0; mdim + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];

    loop {
        let rel = beta / bnorm;
        if rel <= opts.tol {
            hist.finish(SolveStatus::Converged, rel, opts.tol);
            return Ok((x, hist));
        }
        if hist.iterations >= opts.maxit {
            hist.finish(SolveStatus::MaxIterations, rel, opts.tol);
            return Ok((x, hist));
        }

        v.clear();
        h.clear();
        g.fill(0.0);
        g[0] = beta;
        v.push(r.iter().map(|&ri| ri / beta).collect());
        let mut k = 0;
        let mut breakdown = false;
        for j in 0..mdim {
            m.apply_into(&v[j], &mut z)?;
            a.spmv_into(&z, &mut w, exec)?;
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                axpy(-hij, vi, &mut w);
                col[i] = hij;
            }
            let hnext = norm2(&w);
            col[j + 1] = hnext;
            if !hnext.is_finite() || !all_finite(&col) {
                return Err(Error::Diverged {
                    iteration: hist.iterations + 1,
                    rel_res: f64::NAN,
                });
            }
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = col[j] / denom;
                sn[j] = col[j + 1] / denom;
            }
            col[j] = denom;
            col[j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            h.push(col);
            k = j + 1;
            hist.push(g[j + 1].abs() / bnorm);

            if hnext < BREAKDOWN_TOL * bnorm {
                breakdown = true;
                break;
            }
            if g[j + 1].abs() / bnorm <= opts.tol || hist.iterations >= opts.maxit {
                break;
            }
            v.push(w.iter().map(|&wi| wi / hnext).collect());
        }

        // back substitution R y = g
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h[l][i] * y[l];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        let mut u = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            axpy(*yi, vi, &mut u);
        }
        m.apply_into(&u, &mut z)?;
        axpy(1.0, &z, &mut x);
        a.residual_into(b, &x, &mut r, exec)?;
        beta = norm2(&r);
        let rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(Error::Diverged {
                iteration: hist.iterations,
                rel_res: rel,
            });
        }
        // the cycle's last entry becomes the true residual
        *hist.rel_res.last_mut().unwrap() = rel;
        hist.true_residual_at.push(hist.rel_res.len() - 1);
        if breakdown {
            hist.finish(SolveStatus::Breakdown, rel, opts.tol);
            return Ok((x, hist));
        }
    }
}

/// Preconditioned conjugate gradients. Requires a symmetric preconditioner.
pub fn cg(
    a: &CsrMatrix<f64>,
    b: &[f64],
    m: &Preconditioner<'_>,
    opts: &SolverOptions,
    x0: &[f64],
) -> Result<(Vec<f64>, ConvergenceHistory)> {
    opts.validate()?;
    check_solve(a, b, x0)?;
    if !m.is_symmetric() {
        return Err(Error::NonSymmetricPreconditioner(m.label()));
    }
    let n = a.nrows();
    let exec = Execution::default();
    let bnorm = norm2(b);
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        x.fill(0.0);
        let mut h = ConvergenceHistory::start(0.0);
        h.finish(SolveStatus::Converged, 0.0, opts.tol);
        return Ok((x, h));
    }
    let mut r = a.residual(b, &x)?;
    let mut hist = ConvergenceHistory::start(norm2(&r) / bnorm);
    if hist.rel_res[0] <= opts.tol {
        let rel = hist.rel_res[0];
        hist.finish(SolveStatus::Converged, rel, opts.tol);
        return Ok((x, hist));
    }
    let mut z = m.apply(&r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    while hist.iterations < opts.maxit {
        a.spmv_into(&p, &mut ap, exec)?;
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::Diverged {
                iteration: hist.iterations + 1,
                rel_res: f64::NAN,
            });
        }
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                iteration: hist.iterations + 1,
                curvature: pap,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let mut rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::Diverged {
                iteration: hist.iterations + 1,
                rel_res: rel,
            });
        }
        let mut restart = false;
        if rel <= opts.tol {
            // confirm on the true residual
            a.residual_into(b, &x, &mut r, exec)?;
            rel = norm2(&r) / bnorm;
            hist.push(rel);
            hist.true_residual_at.push(hist.iterations);
            if rel <= opts.tol {
                hist.finish(SolveStatus::Converged, rel, opts.tol);
                return Ok((x, hist));
            }
            restart = true;
        } else {
            hist.push(rel);
        }
        m.apply_into(&r, &mut z)?;
        let rz_next = dot(&r, &z);
        if restart {
            p.copy_from_slice(&z);
        } else {
            let beta = rz_next / rz;
            for (pi, &zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        rz = rz_next;
    }
    let rel = *hist.rel_res.last().unwrap();
    hist.finish(SolveStatus::MaxIterations, rel, opts.tol);
    Ok((x, hist))
}

/// Iterates the relaxation itself as a fixed-point solver, one
/// [`Preconditioner::relax_step`] per iteration, until the relative residual
/// reaches `opts.tol`, exceeds [`DIVERGENCE_LIMIT`], or `opts.maxit` steps pass.
pub fn stationary(
    a: &CsrMatrix<f64>,
    b: &[f64],
    m: &Preconditioner<'_>,
    opts: &SolverOptions,
    x0: &[f64],
) -> Result<(Vec<f64>, ConvergenceHistory)> {
    opts.validate()?;
    check_solve(a, b, x0)?;
    let bnorm = norm2(b);
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        x.fill(0.0);
        let mut h = ConvergenceHistory::start(0.0);
        h.finish(SolveStatus::Converged, 0.0, opts.tol);
        return Ok((x, h));
    }
    let mut r = a.residual(b, &x)?;
    let mut rel = norm2(&r) / bnorm;
    let mut hist = ConvergenceHistory::start(rel);
    while rel > opts.tol && hist.iterations < opts.maxit {
        m.relax_step(b, &mut x)?;
        a.residual_into(b, &x, &mut r, Execution::default())?;
        rel = norm2(&r) / bnorm;
        hist.push(if rel.is_finite() { rel } else { f64::INFINITY });
        if !rel.is_finite() || rel > DIVERGENCE_LIMIT {
            hist.finish(SolveStatus::Diverged, rel, opts.tol);
            return Ok((x, hist));
        }
    }
    hist.true_residual_at = (0..hist.rel_res.len()).collect();
    hist.finish(SolveStatus::MaxIterations, rel, opts.tol);
    Ok((x, hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::{PrecisionMode, PrecondKind};
    use crate::problems;
    use crate::relax::RelaxConfig;

    fn a2() -> CsrMatrix<f64> {
        CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap()
    }

    fn opts(tol: f64) -> SolverOptions {
        SolverOptions {
            tol,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn gmres_identity_one_iteration() {
        let a = CsrMatrix::<f64>::identity(5);
        let b = problems::random_rhs(5, 1);
        let p = Preconditioner::identity(&a);
        let (x, h) = gmres(&a, &b, &p, &opts(1e-12), &[0.0; 5]).unwrap();
        assert!(h.converged);
        assert_eq!(h.iterations, 1);
        for (u, v) in x.iter().zip(&b) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn gmres_a2_two_iterations() {
        let a = a2();
        let p = Preconditioner::identity(&a);
        let (x, h) = gmres(&a, &[1.0, 1.0], &p, &opts(1e-12), &[0.0; 2]).unwrap();
        assert!(h.converged);
        assert!(h.iterations <= 2);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert_eq!(h.rel_res.len(), h.iterations + 1);
    }

    #[test]
    fn gmres_restarts_record_true_residual() {
        let a = problems::laplace2d(12, 12);
        let b = problems::random_rhs(a.nrows(), 0);
        let p = Preconditioner::identity(&a);
        let o = SolverOptions {
            tol: 1e-8,
            maxit: 2000,
            restart: 10,
        };
        let (x, h) = gmres(&a, &b, &p, &o, &vec![0.0; a.nrows()]).unwrap();
        assert!(h.converged);
        assert!(h.true_residual_at.len() > 2);
        let r = norm2(&a.residual(&b, &x).unwrap()) / norm2(&b);
        assert!((r - h.final_rel_res).abs() < 1e-14);
        assert_eq!(*h.rel_res.last().unwrap(), h.final_rel_res);
    }

    #[test]
    fn gmres_maxit_status() {
        let a = problems::laplace2d(10, 10);
        let b = problems::random_rhs(100, 0);
        let p = Preconditioner::identity(&a);
        let o = SolverOptions {
            tol: 1e-12,
            maxit: 5,
            restart: 60,
        };
        let (_, h) = gmres(&a, &b, &p, &o, &[0.0; 100]).unwrap();
        assert_eq!(h.status, SolveStatus::MaxIterations);
        assert_eq!(h.iterations, 5);
        assert!(!h.converged);
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let a = a2();
        let p = Preconditioner::identity(&a);
        let (x, h) = gmres(&a, &[0.0, 0.0], &p, &opts(1e-9), &[1.0, 1.0]).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert!(h.converged);
        let (x, h) = cg(&a, &[0.0, 0.0], &p, &opts(1e-9), &[1.0, 1.0]).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert!(h.converged);
    }

    #[test]
    fn cg_diag_with_jacobi_one_iteration() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let p = Preconditioner::new(&a, PrecondKind::Jr, RelaxConfig::gs2(1, 1, 0), PrecisionMode::Same)
            .unwrap();
        let (x, h) = cg(&a, &[1.0; 4], &p, &opts(1e-12), &[0.0; 4]).unwrap();
        assert!(h.converged);
        assert_eq!(h.iterations, 1);
        assert!((x[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cg_a2_two_iterations() {
        let a = a2();
        let p = Preconditioner::identity(&a);
        let (_, h) = cg(&a, &[1.0, 1.0], &p, &opts(1e-12), &[0.0; 2]).unwrap();
        assert!(h.converged && h.iterations <= 2);
    }

    #[test]
    fn cg_rejects_nonsymmetric_preconditioner() {
        let a = a2();
        let p = Preconditioner::new(&a, PrecondKind::GsSeq, RelaxConfig::default(), PrecisionMode::Same)
            .unwrap();
        assert!(matches!(
            cg(&a, &[1.0, 1.0], &p, &opts(1e-9), &[0.0; 2]),
            Err(Error::NonSymmetricPreconditioner(_))
        ));
    }

    #[test]
    fn cg_detects_indefinite_matrix() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let p = Preconditioner::identity(&a);
        assert!(matches!(
            cg(&a, &[1.0, 1.0], &p, &opts(1e-9), &[0.0; 2]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn stationary_sgs_converges_on_laplace() {
        let a = problems::laplace2d(8, 8);
        let b = problems::random_rhs(64, 5);
        let p = Preconditioner::new(&a, PrecondKind::SgsSeq, RelaxConfig::default(), PrecisionMode::Same)
            .unwrap();
        let (_, h) = stationary(&a, &b, &p, &opts(1e-9), &[0.0; 64]).unwrap();
        assert!(h.converged);
        assert!(h.rel_res.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn invalid_options_rejected() {
        let a = a2();
        let p = Preconditioner::identity(&a);
        let bad = SolverOptions {
            tol: 0.0,
            ..SolverOptions::default()
        };
        assert!(gmres(&a, &[1.0, 1.0], &p, &bad, &[0.0; 2]).is_err());
        assert!(gmres(&a, &[1.0], &p, &opts(1e-9), &[0.0; 2]).is_err());
    }
}
