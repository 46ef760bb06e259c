//! Stationary relaxation: Jacobi-Richardson, sequential Gauss-Seidel, two-stage
//! Gauss-Seidel (GS2) with inner Jacobi-Richardson sweeps, and the hybrid
//! block-Jacobi variant with local sweeps.
//!
//! Every kernel reads its damping factors from the [`Splitting`]. The
//! `omega`/`gamma` fields of [`RelaxConfig`] are what higher-level
//! constructors use when they build the splitting.

use std::fmt;
use std::str::FromStr;

use crate::csr::CsrMatrix;
use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::scalar::Scalar;
use crate::splitting::Splitting;

/// Order in which a Gauss-Seidel sweep visits rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    #[default]
    Forward,
    Backward,
    /// Forward then backward.
    Symmetric,
}

impl Direction {
    pub fn half_sweeps(self) -> &'static [HalfSweep] {
        match self {
            Direction::Forward => &[HalfSweep::Forward],
            Direction::Backward => &[HalfSweep::Backward],
            Direction::Symmetric => &[HalfSweep::Forward, HalfSweep::Backward],
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" | "fwd" => Ok(Direction::Forward),
            "backward" | "bwd" => Ok(Direction::Backward),
            "symmetric" | "sym" => Ok(Direction::Symmetric),
            _ => Err(Error::Config(format!("unknown direction `{s}`"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Symmetric => "symmetric",
        })
    }
}

/// One triangular half of a sweep: forward uses `L`, backward uses `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfSweep {
    Forward,
    Backward,
}

/// Whether GS2 forms the residual explicitly each outer sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Form {
    /// `x <- x + omega * Mhat^{-1} (b - A x)`
    #[default]
    NonCompact,
    /// `x <- omega * Mhat^{-1} (b - [U + (1 - 1/omega) D] x)`
    Compact,
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-compact" | "noncompact" | "non_compact" => Ok(Form::NonCompact),
            "compact" => Ok(Form::Compact),
            _ => Err(Error::Config(format!("unknown form `{s}`"))),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::NonCompact => "non-compact",
            Form::Compact => "compact",
        })
    }
}

/// Sweep counts and options for a relaxation, written GS2(n_t, n_k, n_j).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    /// Outer applications.
    pub n_t: usize,
    /// Local outer sweeps per application.
    pub n_k: usize,
    /// Inner Jacobi-Richardson sweeps.
    pub n_j: usize,
    pub direction: Direction,
    pub form: Form,
    pub omega: f64,
    pub gamma: f64,
    pub exec: Execution,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            n_t: 1,
            n_k: 1,
            n_j: 1,
            direction: Direction::Forward,
            form: Form::NonCompact,
            omega: 1.0,
            gamma: 1.0,
            exec: Execution::default(),
        }
    }
}

impl RelaxConfig {
    pub fn gs2(n_t: usize, n_k: usize, n_j: usize) -> Self {
        Self {
            n_t,
            n_k,
            n_j,
            ..Self::default()
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn with_damping(mut self, omega: f64, gamma: f64) -> Self {
        self.omega = omega;
        self.gamma = gamma;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 1 {
            return Err(Error::Config("n_t must be at least 1".into()));
        }
        if self.n_k < 1 {
            return Err(Error::Config("n_k must be at least 1".into()));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("omega must be > 0, got {}", self.omega)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Total outer sweeps performed by one application.
    pub fn outer_sweeps(&self) -> usize {
        self.n_t * self.n_k
    }
}

fn check_system<T: Scalar>(a: &CsrMatrix<T>, s: &Splitting<T>, b: &[T], x: &[T]) -> Result<()> {
    check_len("splitting", a.nrows(), s.n())?;
    check_len("right-hand side", a.nrows(), b.len())?;
    check_len("iterate", a.ncols(), x.len())
}

// ---------------------------------------------------------------------------
// Jacobi-Richardson

/// `x <- x + omega * D^{-1} (b - A x)`, repeated `sweeps` times.
pub fn jr_sweeps<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    b: &[T],
    x: &mut [T],
    sweeps: usize,
) -> Result<()> {
    jr_sweeps_with(a, s, b, x, sweeps, Execution::default())
}

pub fn jr_sweeps_with<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    b: &[T],
    x: &mut [T],
    sweeps: usize,
    exec: Execution,
) -> Result<()> {
    check_system(a, s, b, x)?;
    let mut next = vec![T::zero(); x.len()];
    for _ in 0..sweeps {
        jr_step(a, s, b, x, &mut next, exec);
        x.copy_from_slice(&next);
    }
    Ok(())
}

// The arithmetic here is shared with the non-compact GS2 step for n_j = 0 so
// the two agree bitwise.
fn jr_step<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    b: &[T],
    x: &[T],
    next: &mut [T],
    exec: Execution,
) {
    let omega = s.omega;
    exec.fill(next, |i| {
        let g = (b[i] - a.row_dot(i, x)) / s.d[i];
        x[i] + omega * g
    });
}

// ---------------------------------------------------------------------------
// Sequential Gauss-Seidel

#[inline]
pub(crate) fn gs_row_update<T: Scalar>(
    a: &CsrMatrix<T>,
    d: &[T],
    omega: T,
    b: &[T],
    x: &[T],
    i: usize,
) -> T {
    let (cols, vals) = a.row(i);
    let mut sum = T::zero();
    for (&j, &v) in cols.iter().zip(vals) {
        if j != i {
            sum = sum + v * x[j];
        }
    }
    let gs = (b[i] - sum) / d[i];
    if omega == T::one() {
        gs
    } else {
        (T::one() - omega) * x[i] + omega * gs
    }
}

/// One in-place Gauss-Seidel sweep in natural row order (SOR when `omega != 1`).
pub fn gs_sequential_sweep<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    b: &[T],
    x: &mut [T],
    direction: Direction,
) -> Result<()> {
    check_system(a, s, b, x)?;
    let n = a.nrows();
    for &half in direction.half_sweeps() {
        match half {
            HalfSweep::Forward => {
                for i in 0..n {
                    x[i] = gs_row_update(a, &s.d, s.omega, b, x, i);
                }
            }
            HalfSweep::Backward => {
                for i in (0..n).rev() {
                    x[i] = gs_row_update(a, &s.d, s.omega, b, x, i);
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Two-stage Gauss-Seidel

/// Approximates `(D + omega L)^{-1} r` (forward) or `(D + omega U)^{-1} r`
/// (backward) with `n_j` damped Jacobi-Richardson sweeps started from
/// `g = D^{-1} r`.
pub fn inner_jr_solve<T: Scalar>(s: &Splitting<T>, r: &[T], n_j: usize, half: HalfSweep) -> Vec<T> {
    inner_jr_solve_with(s, r, n_j, half, Execution::default())
}

pub fn inner_jr_solve_with<T: Scalar>(
    s: &Splitting<T>,
    r: &[T],
    n_j: usize,
    half: HalfSweep,
    exec: Execution,
) -> Vec<T> {
    let n = s.n();
    debug_assert_eq!(r.len(), n);
    let tri = match half {
        HalfSweep::Forward => &s.dinv_l,
        HalfSweep::Backward => &s.dinv_u,
    };
    let mut g0 = vec![T::zero(); n];
    exec.fill(&mut g0, |i| r[i] / s.d[i]);
    if n_j == 0 {
        return g0;
    }
    let (omega, gamma) = (s.omega, s.gamma);
    let mut g = g0.clone();
    let mut next = vec![T::zero(); n];
    for _ in 0..n_j {
        exec.fill(&mut next, |i| {
            let jr = g0[i] - omega * tri.row_dot(i, &g);
            if gamma == T::one() {
                jr
            } else {
                (T::one() - gamma) * g[i] + gamma * jr
            }
        });
        std::mem::swap(&mut g, &mut next);
    }
    g
}

fn gs2_half_sweep<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    b: &[T],
    x: &mut [T],
    n_j: usize,
    form: Form,
    half: HalfSweep,
    exec: Execution,
    work: &mut [T],
) {
    let omega = s.omega;
    match form {
        Form::NonCompact => {
            {
                let xr: &[T] = x;
                exec.fill(work, |i| b[i] - a.row_dot(i, xr));
            }
            let g = inner_jr_solve_with(s, work, n_j, half, exec);
            exec.update(x, |i, xi| xi + omega * g[i]);
        }
        Form::Compact => {
            let other = match half {
                HalfSweep::Forward => &s.u,
                HalfSweep::Backward => &s.l,
            };
            let shift = T::one() - T::one() / omega;
            {
                let xr: &[T] = x;
                exec.fill(work, |i| {
                    let t = b[i] - other.row_dot(i, xr);
                    if omega == T::one() {
                        t
                    } else {
                        t - shift * s.d[i] * xr[i]
                    }
                });
            }
            let g = inner_jr_solve_with(s, work, n_j, half, exec);
            if omega == T::one() {
                x.copy_from_slice(&g);
            } else {
                exec.update(x, |i, _| omega * g[i]);
            }
        }
    }
}

/// Applies `cfg.n_t * cfg.n_k` two-stage outer sweeps to `x` in place.
pub fn gs2_apply<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    b: &[T],
    x: &mut [T],
    cfg: &RelaxConfig,
) -> Result<()> {
    cfg.validate()?;
    check_system(a, s, b, x)?;
    let mut work = vec![T::zero(); a.nrows()];
    for _ in 0..cfg.outer_sweeps() {
        for &half in cfg.direction.half_sweeps() {
            gs2_half_sweep(a, s, b, x, cfg.n_j, cfg.form, half, cfg.exec, &mut work);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Hybrid block relaxation

/// Contiguous row blocks, standing in for a 1-D block-row distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    offsets: Vec<usize>,
}

impl BlockPartition {
    /// `offsets` must start at 0, end at `n` and be strictly increasing.
    pub fn new(offsets: Vec<usize>, n: usize) -> Result<Self> {
        if offsets.len() < 2 {
            return Err(Error::Config("partition needs at least one block".into()));
        }
        if offsets[0] != 0 || *offsets.last().unwrap() != n {
            return Err(Error::Config(format!(
                "partition must span 0..{n}, got {:?}..{:?}",
                offsets.first(),
                offsets.last()
            )));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("partition offsets must strictly increase".into()));
        }
        Ok(Self { offsets })
    }

    /// `nblocks` blocks of near-equal size (the first `n % nblocks` get one extra row).
    pub fn uniform(n: usize, nblocks: usize) -> Result<Self> {
        if nblocks == 0 || nblocks > n {
            return Err(Error::Config(format!("cannot split {n} rows into {nblocks} blocks")));
        }
        let (q, rem) = (n / nblocks, n % nblocks);
        let mut offsets = Vec::with_capacity(nblocks + 1);
        offsets.push(0);
        for p in 0..nblocks {
            offsets.push(offsets[p] + q + usize::from(p < rem));
        }
        Self::new(offsets, n)
    }

    pub fn num_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn block(&self, p: usize) -> std::ops::Range<usize> {
        self.offsets[p]..self.offsets[p + 1]
    }
}

/// Local solver used inside each block of [`hybrid_relax`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalSolver {
    GaussSeidel,
    TwoStage,
}

/// Hybrid relaxation: per round, snapshot `x` (the simulated neighbor
/// exchange), then each block runs `n_k` local sweeps on its diagonal block
/// with off-block entries frozen at the snapshot. Repeats `n_t` rounds.
///
/// Blocks run concurrently under [`Execution::Parallel`].
pub fn hybrid_relax<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    part: &BlockPartition,
    b: &[T],
    x: &mut [T],
    cfg: &RelaxConfig,
    local: LocalSolver,
) -> Result<()> {
    cfg.validate()?;
    check_system(a, s, b, x)?;
    check_len("block partition", a.nrows(), part.n())?;
    for _ in 0..cfg.n_t {
        let frozen = x.to_vec();
        let mut chunks: Vec<&mut [T]> = Vec::with_capacity(part.num_blocks());
        let mut rest: &mut [T] = x;
        for p in 0..part.num_blocks() {
            let (head, tail) = rest.split_at_mut(part.block(p).len());
            chunks.push(head);
            rest = tail;
        }
        cfg.exec.for_each_chunk(chunks, |p, xp| {
            let block = LocalBlock {
                a,
                s,
                lo: part.offsets[p],
                hi: part.offsets[p + 1],
            };
            block.relax(b, &frozen, xp, cfg, local);
        });
    }
    Ok(())
}

struct LocalBlock<'a, T> {
    a: &'a CsrMatrix<T>,
    s: &'a Splitting<T>,
    lo: usize,
    hi: usize,
}

impl<T: Scalar> LocalBlock<'_, T> {
    #[inline]
    fn inside(&self, j: usize) -> bool {
        j >= self.lo && j < self.hi
    }

    fn relax(&self, b: &[T], frozen: &[T], xp: &mut [T], cfg: &RelaxConfig, local: LocalSolver) {
        // bhat = b - E y, with E the off-block columns
        let bhat: Vec<T> = (self.lo..self.hi)
            .map(|i| {
                let (cols, vals) = self.a.row(i);
                let mut off = T::zero();
                for (&j, &v) in cols.iter().zip(vals) {
                    if !self.inside(j) {
                        off = off + v * frozen[j];
                    }
                }
                b[i] - off
            })
            .collect();
        for _ in 0..cfg.n_k {
            for &half in cfg.direction.half_sweeps() {
                match local {
                    LocalSolver::GaussSeidel => self.gs_half(&bhat, xp, half),
                    LocalSolver::TwoStage => self.gs2_half(&bhat, xp, half, cfg.n_j, cfg.form),
                }
            }
        }
    }

    fn local_dot(&self, m: &CsrMatrix<T>, i: usize, xp: &[T], skip_diag: bool) -> T {
        let (cols, vals) = m.row(i);
        let mut acc = T::zero();
        for (&j, &v) in cols.iter().zip(vals) {
            if self.inside(j) && !(skip_diag && j == i) {
                acc = acc + v * xp[j - self.lo];
            }
        }
        acc
    }

    fn gs_half(&self, bhat: &[T], xp: &mut [T], half: HalfSweep) {
        let omega = self.s.omega;
        let mut visit = |i: usize| {
            let k = i - self.lo;
            let gs = (bhat[k] - self.local_dot(self.a, i, xp, true)) / self.s.d[i];
            xp[k] = if omega == T::one() {
                gs
            } else {
                (T::one() - omega) * xp[k] + omega * gs
            };
        };
        match half {
            HalfSweep::Forward => (self.lo..self.hi).for_each(&mut visit),
            HalfSweep::Backward => (self.lo..self.hi).rev().for_each(&mut visit),
        }
    }

    fn gs2_half(&self, bhat: &[T], xp: &mut [T], half: HalfSweep, n_j: usize, form: Form) {
        let (omega, gamma) = (self.s.omega, self.s.gamma);
        let (tri, other) = match half {
            HalfSweep::Forward => (&self.s.dinv_l, &self.s.u),
            HalfSweep::Backward => (&self.s.dinv_u, &self.s.l),
        };
        let rows = self.lo..self.hi;
        let rhs: Vec<T> = match form {
            Form::NonCompact => rows
                .clone()
                .map(|i| bhat[i - self.lo] - self.local_dot(self.a, i, xp, false))
                .collect(),
            Form::Compact => {
                let shift = T::one() - T::one() / omega;
                rows.clone()
                    .map(|i| {
                        let t = bhat[i - self.lo] - self.local_dot(other, i, xp, false);
                        if omega == T::one() {
                            t
                        } else {
                            t - shift * self.s.d[i] * xp[i - self.lo]
                        }
                    })
                    .collect()
            }
        };
        let g0: Vec<T> = rows.clone().map(|i| rhs[i - self.lo] / self.s.d[i]).collect();
        let mut g = g0.clone();
        for _ in 0..n_j {
            g = rows
                .clone()
                .map(|i| {
                    let k = i - self.lo;
                    let jr = g0[k] - omega * self.local_dot(tri, i, &g, false);
                    if gamma == T::one() {
                        jr
                    } else {
                        (T::one() - gamma) * g[k] + gamma * jr
                    }
                })
                .collect();
        }
        match form {
            Form::NonCompact => {
                for (xk, gk) in xp.iter_mut().zip(&g) {
                    *xk = *xk + omega * *gk;
                }
            }
            Form::Compact => {
                for (xk, gk) in xp.iter_mut().zip(&g) {
                    *xk = if omega == T::one() { *gk } else { omega * *gk };
                }
            }
        }
    }
}
