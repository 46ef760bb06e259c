//! Dense oracles and spectral diagnostics for desk-scale problems.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::csr::CsrMatrix;
use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::precond::{PrecisionMode, PrecondKind, Preconditioner};
use crate::problems::random_rhs;
use crate::relax::{gs2_apply, Form, RelaxConfig};
use crate::splitting::Splitting;
use crate::vector::norm2;

pub const DENSE_SOLVE_MAX_N: usize = 2000;
pub const DENSE_SPECTRUM_MAX_N: usize = 500;
pub const LINEARITY_TOL: f64 = 1e-11;
pub const POWER_TOL: f64 = 1e-6;
pub const SZYLD_SLACK: f64 = 1e-8;

pub fn to_dense_matrix(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] = v;
    }
    m
}

/// LU with partial pivoting.
pub fn dense_solve(a: &CsrMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    check_len("right-hand side", a.nrows(), b.len())?;
    if a.nrows() > DENSE_SOLVE_MAX_N {
        return Err(Error::Config(format!(
            "dense solve limited to n <= {DENSE_SOLVE_MAX_N}"
        )));
    }
    dense_lu_solve(to_dense_matrix(a), b)
}

pub(crate) fn dense_lu_solve(m: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.nrows();
    let scale = m.amax();
    let lu = m.lu();
    let u = lu.u();
    let tiny = scale * f64::EPSILON * n.max(1) as f64;
    if (0..n).any(|i| u[(i, i)].abs() <= tiny) {
        return Err(Error::Singular);
    }
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::Singular)
}

/// Error-propagation operator `T = I - Mhat^{-1} A` of a relaxation, where
/// `Mhat^{-1}` is the relaxation applied from a zero initial guess.
#[derive(Debug, Clone)]
pub struct IterationOperator<'a> {
    a: &'a CsrMatrix<f64>,
    precond: Preconditioner<'a>,
}

impl<'a> IterationOperator<'a> {
    pub fn new(a: &'a CsrMatrix<f64>, kind: PrecondKind, cfg: RelaxConfig) -> Result<Self> {
        Ok(Self {
            a,
            precond: Preconditioner::new(a, kind, cfg, PrecisionMode::Same)?,
        })
    }

    pub fn from_preconditioner(a: &'a CsrMatrix<f64>, precond: Preconditioner<'a>) -> Self {
        Self { a, precond }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let av = self.a.spmv(v)?;
        let z = self.precond.apply(&av)?;
        Ok(v.iter().zip(&z).map(|(vi, zi)| vi - zi).collect())
    }

    /// Dense `n x n` matrix, one column per basis vector.
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        let n = self.n();
        let cols = Execution::default().map_collect((0..n).collect(), |j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            self.apply(&e)
        });
        let mut m = DMatrix::zeros(n, n);
        for (j, col) in cols.into_iter().enumerate() {
            m.set_column(j, &DVector::from_vec(col?));
        }
        Ok(m)
    }

    /// Superposition check on `trials` random pairs.
    pub fn check_linearity(&self, trials: usize, seed: u64) -> Result<()> {
        let n = self.n();
        for t in 0..trials as u64 {
            let u = random_rhs(n, seed.wrapping_add(2 * t));
            let v = random_rhs(n, seed.wrapping_add(2 * t + 1));
            let (alpha, beta) = (0.75, -1.5);
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
            let tw = self.apply(&w)?;
            let tu = self.apply(&u)?;
            let tv = self.apply(&v)?;
            let diff: Vec<f64> = (0..n).map(|i| tw[i] - alpha * tu[i] - beta * tv[i]).collect();
            let scale = alpha.abs() * norm2(&tu) + beta.abs() * norm2(&tv) + norm2(&w);
            if norm2(&diff) > LINEARITY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Config(format!(
                    "iteration operator failed the linearity check (defect {:e})",
                    norm2(&diff)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralMethod {
    /// All eigenvalues of the materialized operator.
    Dense,
    /// Power iteration from a fixed start vector.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Spectral radius of a dense matrix via its eigenvalues.
///
/// Symmetric input goes through the symmetric eigensolver. Otherwise a
/// bounded real Schur decomposition is tried on `m` and, if the QR sweeps
/// stall (spectra symmetric about zero can do that), on shifted copies
/// `m + s I`.
pub fn dense_spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if m == &m.transpose() {
        let eig = m.clone().symmetric_eigenvalues();
        return Ok(eig.iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for shift in [0.0, 0.5, -0.37, 1.3] {
        let shifted = m + DMatrix::identity(n, n) * (shift * scale);
        let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 1000 * n) else {
            continue;
        };
        let s = shift * scale;
        let rho = schur
            .complex_eigenvalues()
            .iter()
            .map(|z| (z - Complex::new(s, 0.0)).norm())
            .fold(0.0, f64::max);
        return Ok(rho);
    }
    Err(Error::EigenNoConvergence)
}

pub fn spectral_radius(
    op: &IterationOperator<'_>,
    method: SpectralMethod,
    iters: usize,
) -> Result<SpectralEstimate> {
    match method {
        SpectralMethod::Dense => {
            if op.n() > DENSE_SPECTRUM_MAX_N {
                return Err(Error::Config(format!(
                    "dense spectrum limited to n <= {DENSE_SPECTRUM_MAX_N}"
                )));
            }
            op.check_linearity(3, 0x5eed)?;
            let m = op.materialize()?;
            Ok(SpectralEstimate {
                rho: dense_spectral_radius(&m)?,
                converged: true,
                iterations: 0,
            })
        }
        SpectralMethod::Power => power_radius(op, iters),
    }
}

// Two applications per step: sqrt(||T^2 v||) with ||v|| = 1 also settles when
// the dominant eigenvalues come as a +/- pair.
fn power_radius(op: &IterationOperator<'_>, iters: usize) -> Result<SpectralEstimate> {
    let n = op.n();
    let mut v = random_rhs(n, 0x5eed);
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut prev = f64::NAN;
    for k in 1..=iters {
        let w = op.apply(&op.apply(&v)?)?;
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(SpectralEstimate {
                rho: 0.0,
                converged: true,
                iterations: k,
            });
        }
        let est = nw.sqrt();
        v = w.into_iter().map(|x| x / nw).collect();
        if (est - prev).abs() <= POWER_TOL * 1e-2 * est {
            return Ok(SpectralEstimate {
                rho: est,
                converged: true,
                iterations: k,
            });
        }
        prev = est;
    }
    Ok(SpectralEstimate {
        rho: prev,
        converged: false,
        iterations: iters,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SzyldRow {
    pub n_j: usize,
    /// rho(T_{n_j+1}) of GS2 with `n_j` inner sweeps.
    pub rho_two_stage: f64,
    /// rho(T_1)^{n_j+1} with T_1 the Jacobi-Richardson operator.
    pub rho_jr_power: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SzyldReport {
    pub rho_jr: f64,
    pub rows: Vec<SzyldRow>,
    /// Positive diagonal and nonpositive off-diagonals: the Jacobi splitting
    /// is regular and the inequality is expected to hold. Otherwise the
    /// report is advisory only.
    pub regular_splitting: bool,
}

impl SzyldReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Structural check: positive diagonal, nonpositive off-diagonal entries.
pub fn has_regular_jacobi_splitting(a: &CsrMatrix<f64>) -> bool {
    a.triplets()
        .all(|(i, j, v)| if i == j { v > 0.0 } else { v <= 0.0 })
}

/// Compares `rho(T_{n_j+1})` with `rho(T_1)^{n_j+1}` for each `n_j` using dense spectra.
pub fn szyld_check(a: &CsrMatrix<f64>, inner_sweeps: &[usize]) -> Result<SzyldReport> {
    let jr = IterationOperator::new(a, PrecondKind::Jr, RelaxConfig::gs2(1, 1, 0))?;
    let rho_jr = spectral_radius(&jr, SpectralMethod::Dense, 0)?.rho;
    let rows = inner_sweeps
        .iter()
        .map(|&n_j| {
            let op = IterationOperator::new(a, PrecondKind::Gs2, RelaxConfig::gs2(1, 1, n_j))?;
            let rho_two_stage = spectral_radius(&op, SpectralMethod::Dense, 0)?.rho;
            let rho_jr_power = rho_jr.powi(n_j as i32 + 1);
            Ok(SzyldRow {
                n_j,
                rho_two_stage,
                rho_jr_power,
                holds: rho_two_stage >= rho_jr_power - SZYLD_SLACK,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SzyldReport {
        rho_jr,
        rows,
        regular_splitting: has_regular_jacobi_splitting(a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    /// `||r_two_stage - r_exact||` after one step from the same iterate.
    pub gap: f64,
    /// `||A (I - Mhat^{-1} M)|| ||M^{-1} r_k||`, plus `||A (I - Mhat^{-1} M)|| ||x_k||` for the compact form.
    pub bound: f64,
}

impl GapReport {
    /// `gap <= bound` up to roundoff at the scale of `scale`.
    pub fn holds(&self, scale: f64) -> bool {
        self.gap <= self.bound + 1e-12 * scale
    }
}

/// One forward GS2 step (`omega = gamma = 1`, `n_j` inner sweeps) against one
/// exact forward Gauss-Seidel step from the same `x_k`, with the a-priori bound.
pub fn residual_gap(
    a: &CsrMatrix<f64>,
    b: &[f64],
    x_k: &[f64],
    n_j: usize,
    form: Form,
) -> Result<GapReport> {
    let n = a.nrows();
    if n > DENSE_SPECTRUM_MAX_N {
        return Err(Error::Config(format!(
            "residual gap limited to n <= {DENSE_SPECTRUM_MAX_N}"
        )));
    }
    check_len("right-hand side", n, b.len())?;
    check_len("iterate", n, x_k.len())?;
    let s = Splitting::new(a, 1.0, 1.0)?;
    let ad = to_dense_matrix(a);
    let md = to_dense_matrix(&s.l) + DMatrix::from_diagonal(&DVector::from_column_slice(&s.d));

    // exact step through a dense triangular solve
    let r_k = DVector::from_vec(a.residual(b, x_k)?);
    let minv_r = md
        .solve_lower_triangular(&r_k)
        .ok_or(Error::Singular)?;
    let x_exact = DVector::from_column_slice(x_k) + &minv_r;

    let mut x_two = x_k.to_vec();
    let cfg = RelaxConfig::gs2(1, 1, n_j).with_form(form);
    gs2_apply(a, &s, b, &mut x_two, &cfg)?;
    let x_two = DVector::from_vec(x_two);
    let gap = (&ad * (x_two - x_exact)).norm();

    // E = A (I - Mhat^{-1} M), Mhat^{-1} materialized from the relaxation
    let p = Preconditioner::new(a, PrecondKind::Gs2, RelaxConfig::gs2(1, 1, n_j), PrecisionMode::Same)?;
    let mut mhat_inv = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        mhat_inv.set_column(j, &DVector::from_vec(p.apply(&e)?));
    }
    let e_mat = &ad * (DMatrix::identity(n, n) - &mhat_inv * &md);
    let e_norm = e_mat.singular_values().iter().cloned().fold(0.0, f64::max);
    let mut bound = e_norm * minv_r.norm();
    if form == Form::Compact {
        bound += e_norm * norm2(x_k);
    }
    Ok(GapReport { gap, bound })
}
