//! Classical, multicolor and two-stage Gauss-Seidel relaxation for sparse
//! linear systems, used stand-alone or as preconditioners for restarted GMRES
//! and CG.
//!
//! Row-independent kernels (SpMV, Jacobi-Richardson sweeps, multicolor color
//! classes, hybrid blocks, dense operator materialization) run on rayon when
//! the `parallel` feature is enabled (the default). Sequential Gauss-Seidel
//! is always single-threaded.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod analysis;
pub mod cast;
pub mod coloring;
pub mod csr;
pub mod error;
pub mod exec;
pub mod krylov;
pub mod mmio;
pub mod precond;
pub mod problems;
pub mod relax;
pub mod scalar;
pub mod splitting;
pub mod vector;

pub use coloring::{greedy_color, mt_gs_sweep, Coloring};
pub use csr::{CsrMatrix, TripletBuilder};
pub use error::{Error, Result};
pub use exec::Execution;
pub use krylov::{cg, gmres, stationary, ConvergenceHistory, SolveStatus, SolverOptions};
pub use precond::{PrecisionMode, PrecondKind, Preconditioner};
pub use relax::{
    gs2_apply, gs_sequential_sweep, hybrid_relax, inner_jr_solve, jr_sweeps, BlockPartition,
    Direction, Form, HalfSweep, LocalSolver, RelaxConfig,
};
pub use scalar::{Precision, Scalar};
pub use splitting::{extract_splitting, Splitting};
