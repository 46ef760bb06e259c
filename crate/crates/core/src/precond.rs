//! Relaxation-based preconditioners.
//!
//! `apply(r)` runs the configured relaxation on `A z = r` from `z = 0` with
//! fixed sweep counts, so every preconditioner is a fixed linear operator
//! suitable for standard (non-flexible) GMRES and CG.

use std::fmt;
use std::str::FromStr;

use crate::cast::{cast_matrix_down, cast_splitting_down, cast_vector_down, cast_vector_up};
use crate::coloring::{greedy_color, mt_gs_sweep_with, Coloring};
use crate::csr::CsrMatrix;
use crate::error::{check_len, Error, Result};
use crate::relax::{gs2_apply, gs_sequential_sweep, jr_sweeps_with, Direction, Form, RelaxConfig};
use crate::scalar::Scalar;
use crate::splitting::Splitting;
use crate::vector::axpy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecondKind {
    None,
    /// Jacobi-Richardson.
    Jr,
    /// Sequential Gauss-Seidel in `cfg.direction`.
    GsSeq,
    /// Sequential symmetric Gauss-Seidel.
    SgsSeq,
    /// Multicolor Gauss-Seidel in `cfg.direction`.
    MtGs,
    /// Multicolor symmetric Gauss-Seidel.
    MtSgs,
    /// Two-stage Gauss-Seidel in `cfg.direction`.
    Gs2,
    /// Two-stage symmetric Gauss-Seidel.
    Sgs2,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 8] = [
        PrecondKind::None,
        PrecondKind::Jr,
        PrecondKind::GsSeq,
        PrecondKind::SgsSeq,
        PrecondKind::MtGs,
        PrecondKind::MtSgs,
        PrecondKind::Gs2,
        PrecondKind::Sgs2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::None => "none",
            PrecondKind::Jr => "jr",
            PrecondKind::GsSeq => "gs",
            PrecondKind::SgsSeq => "sgs",
            PrecondKind::MtGs => "mt-gs",
            PrecondKind::MtSgs => "mt-sgs",
            PrecondKind::Gs2 => "gs2",
            PrecondKind::Sgs2 => "sgs2",
        }
    }

    /// Sweep direction actually used with the given configuration.
    pub fn direction(self, cfg: &RelaxConfig) -> Direction {
        match self {
            PrecondKind::SgsSeq | PrecondKind::MtSgs | PrecondKind::Sgs2 => Direction::Symmetric,
            _ => cfg.direction,
        }
    }

    pub fn is_two_stage(self) -> bool {
        matches!(self, PrecondKind::Gs2 | PrecondKind::Sgs2)
    }

    fn is_multicolor(self) -> bool {
        matches!(self, PrecondKind::MtGs | PrecondKind::MtSgs)
    }
}

impl FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => PrecondKind::None,
            "jr" | "jacobi" => PrecondKind::Jr,
            "gs" | "gs_seq" | "gs-seq" => PrecondKind::GsSeq,
            "sgs" | "sgs_seq" | "sgs-seq" => PrecondKind::SgsSeq,
            "mt-gs" | "mt_gs" | "mtgs" => PrecondKind::MtGs,
            "mt-sgs" | "mt_sgs" | "mtsgs" => PrecondKind::MtSgs,
            "gs2" => PrecondKind::Gs2,
            "sgs2" => PrecondKind::Sgs2,
            _ => return Err(Error::Config(format!("unknown preconditioner `{s}`"))),
        })
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Working precision of the preconditioner relative to the outer solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PrecisionMode {
    #[default]
    Same,
    /// Residual is rounded to `f32`, relaxed in single precision, and widened back.
    SingleInsideDouble,
}

impl FromStr for PrecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" | "same" => Ok(PrecisionMode::Same),
            "single" | "single-inside-double" => Ok(PrecisionMode::SingleInsideDouble),
            _ => Err(Error::Config(format!("unknown precision `{s}`"))),
        }
    }
}

impl fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecisionMode::Same => "double",
            PrecisionMode::SingleInsideDouble => "single",
        })
    }
}

/// Preconditioner `z = P(r)` over a double-precision system.
#[derive(Debug, Clone)]
pub struct Preconditioner<'a> {
    kind: PrecondKind,
    cfg: RelaxConfig,
    precision: PrecisionMode,
    a: &'a CsrMatrix<f64>,
    split: Option<Splitting<f64>>,
    single: Option<(CsrMatrix<f32>, Splitting<f32>)>,
    coloring: Option<Coloring>,
}

impl<'a> Preconditioner<'a> {
    pub fn new(
        a: &'a CsrMatrix<f64>,
        kind: PrecondKind,
        cfg: RelaxConfig,
        precision: PrecisionMode,
    ) -> Result<Self> {
        cfg.validate()?;
        if !a.is_square() {
            return Err(Error::NotSquare {
                nrows: a.nrows(),
                ncols: a.ncols(),
            });
        }
        let split = match kind {
            PrecondKind::None => None,
            _ => Some(Splitting::new(a, cfg.omega, cfg.gamma)?),
        };
        let single = match (&split, precision) {
            (Some(s), PrecisionMode::SingleInsideDouble) => {
                Some((cast_matrix_down(a)?, cast_splitting_down(s)?))
            }
            _ => None,
        };
        let coloring = if kind.is_multicolor() {
            Some(greedy_color(a)?)
        } else {
            None
        };
        Ok(Self {
            kind,
            cfg,
            precision,
            a,
            split,
            single,
            coloring,
        })
    }

    pub fn identity(a: &'a CsrMatrix<f64>) -> Self {
        Self::new(a, PrecondKind::None, RelaxConfig::default(), PrecisionMode::Same)
            .expect("identity preconditioner is always valid")
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn config(&self) -> &RelaxConfig {
        &self.cfg
    }

    pub fn precision(&self) -> PrecisionMode {
        self.precision
    }

    pub fn coloring(&self) -> Option<&Coloring> {
        self.coloring.as_ref()
    }

    /// Whether `P` is symmetric whenever `A` is (as CG requires).
    ///
    /// Compact two-stage symmetric sweeps are excluded: with an inexact inner
    /// solve the compact backward half is not the transpose of the forward half.
    pub fn is_symmetric(&self) -> bool {
        match self.kind {
            PrecondKind::None | PrecondKind::Jr => true,
            k if k.is_two_stage() => {
                k.direction(&self.cfg) == Direction::Symmetric && self.cfg.form == Form::NonCompact
            }
            k => k.direction(&self.cfg) == Direction::Symmetric,
        }
    }

    /// Short label, e.g. `sgs2(1,1,3)` or `jr(2,1)`.
    pub fn label(&self) -> String {
        let c = &self.cfg;
        let mut s = match self.kind {
            PrecondKind::None => "none".to_string(),
            k if k.is_two_stage() => format!("{k}({},{},{})", c.n_t, c.n_k, c.n_j),
            k => format!("{k}({},{})", c.n_t, c.n_k),
        };
        if self.kind.is_two_stage() && c.form == Form::Compact {
            s.push_str("-compact");
        }
        if self.precision == PrecisionMode::SingleInsideDouble {
            s.push_str("-single");
        }
        s
    }

    /// `z = P(r)`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; r.len()];
        self.apply_into(r, &mut z)?;
        Ok(z)
    }

    pub fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len("preconditioner input", self.a.nrows(), r.len())?;
        check_len("preconditioner output", self.a.nrows(), z.len())?;
        match &self.single {
            Some((a32, s32)) => {
                let r32 = cast_vector_down(r)?;
                let mut z32 = vec![0.0f32; r.len()];
                self.relax(a32, s32, &r32, &mut z32)?;
                z.copy_from_slice(&cast_vector_up(&z32));
            }
            None => {
                z.fill(0.0);
                match &self.split {
                    Some(s) => self.relax(self.a, s, r, z)?,
                    None => z.copy_from_slice(r),
                }
            }
        }
        Ok(())
    }

    /// One stand-alone step toward `A x = b`, starting from the current `x`.
    ///
    /// In double precision the relaxation updates `x` directly (so the compact
    /// form iterates its own recurrence); in single-inside-double mode the step
    /// is the correction `x += P(b - A x)`.
    pub fn relax_step(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        check_len("right-hand side", self.a.nrows(), b.len())?;
        check_len("iterate", self.a.nrows(), x.len())?;
        match (&self.split, &self.single) {
            (Some(s), None) => self.relax(self.a, s, b, x),
            _ => {
                let r = self.a.residual(b, x)?;
                let z = self.apply(&r)?;
                axpy(1.0, &z, x);
                Ok(())
            }
        }
    }

    fn relax<T: Scalar>(&self, a: &CsrMatrix<T>, s: &Splitting<T>, b: &[T], x: &mut [T]) -> Result<()> {
        let cfg = &self.cfg;
        let direction = self.kind.direction(cfg);
        let sweeps = cfg.outer_sweeps();
        match self.kind {
            PrecondKind::None => unreachable!("identity has no splitting"),
            PrecondKind::Jr => jr_sweeps_with(a, s, b, x, sweeps, cfg.exec),
            PrecondKind::GsSeq | PrecondKind::SgsSeq => {
                for _ in 0..sweeps {
                    gs_sequential_sweep(a, s, b, x, direction)?;
                }
                Ok(())
            }
            PrecondKind::MtGs | PrecondKind::MtSgs => {
                let coloring = self.coloring.as_ref().expect("multicolor kinds carry a coloring");
                for _ in 0..sweeps {
                    mt_gs_sweep_with(a, s, coloring, b, x, direction, cfg.exec)?;
                }
                Ok(())
            }
            PrecondKind::Gs2 | PrecondKind::Sgs2 => {
                let cfg = cfg.with_direction(direction);
                gs2_apply(a, s, b, x, &cfg)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn a2() -> CsrMatrix<f64> {
        CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap()
    }

    #[test]
    fn identity_and_jacobi() {
        let a = a2();
        let p = Preconditioner::identity(&a);
        assert_eq!(p.apply(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let p = Preconditioner::new(&a, PrecondKind::Jr, RelaxConfig::gs2(1, 1, 0), PrecisionMode::Same)
            .unwrap();
        assert_eq!(p.apply(&[3.0, -1.0]).unwrap(), vec![1.5, -0.5]);
    }

    #[test]
    fn gs2_matches_relaxation_from_zero() {
        let a = a2();
        let p = Preconditioner::new(&a, PrecondKind::Gs2, RelaxConfig::gs2(1, 1, 1), PrecisionMode::Same)
            .unwrap();
        assert_eq!(p.apply(&[1.0, 1.0]).unwrap(), vec![0.5, 0.75]);
        assert_eq!(p.label(), "gs2(1,1,1)");
    }

    #[test]
    fn single_precision_is_close() {
        let a = problems::laplace2d(8, 8);
        let r = problems::random_rhs(64, 2);
        let cfg = RelaxConfig::gs2(1, 1, 2);
        let pd = Preconditioner::new(&a, PrecondKind::Sgs2, cfg, PrecisionMode::Same).unwrap();
        let ps = Preconditioner::new(&a, PrecondKind::Sgs2, cfg, PrecisionMode::SingleInsideDouble).unwrap();
        let zd = pd.apply(&r).unwrap();
        let zs = ps.apply(&r).unwrap();
        for (u, v) in zd.iter().zip(&zs) {
            assert!((u - v).abs() < 1e-5);
        }
        assert_ne!(zd, zs);
    }

    #[test]
    fn symmetry_flags() {
        let a = a2();
        let mk = |k, cfg| Preconditioner::new(&a, k, cfg, PrecisionMode::Same).unwrap();
        let base = RelaxConfig::gs2(1, 1, 1);
        assert!(mk(PrecondKind::SgsSeq, base).is_symmetric());
        assert!(mk(PrecondKind::MtSgs, base).is_symmetric());
        assert!(mk(PrecondKind::Sgs2, base).is_symmetric());
        assert!(mk(PrecondKind::Jr, base).is_symmetric());
        assert!(!mk(PrecondKind::GsSeq, base).is_symmetric());
        assert!(!mk(PrecondKind::Gs2, base).is_symmetric());
        assert!(!mk(PrecondKind::Sgs2, base.with_form(Form::Compact)).is_symmetric());
        assert!(mk(PrecondKind::GsSeq, base.with_direction(Direction::Symmetric)).is_symmetric());
    }

    #[test]
    fn kind_parsing() {
        for k in PrecondKind::ALL {
            assert_eq!(k.name().parse::<PrecondKind>().unwrap(), k);
        }
        assert!("ilu".parse::<PrecondKind>().is_err());
    }

    #[test]
    fn downcast_overflow_surfaces() {
        let a = a2();
        let p = Preconditioner::new(&a, PrecondKind::Jr, RelaxConfig::default(), PrecisionMode::SingleInsideDouble)
            .unwrap();
        assert!(matches!(p.apply(&[1e39, 0.0]), Err(Error::CastOverflow { .. })));
    }
}
