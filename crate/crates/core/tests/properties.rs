use gs2_core::coloring::{greedy_color, mt_gs_sweep};
use gs2_core::problems::{laplace2d, random_rhs, random_spd, Lcg64};
use gs2_core::relax::{gs2_apply, gs_sequential_sweep, inner_jr_solve, jr_sweeps, Direction, Form, HalfSweep, RelaxConfig};
use gs2_core::vector::norm2;
use gs2_core::{analysis, CsrMatrix, PrecisionMode, PrecondKind, Preconditioner, Splitting, TripletBuilder};
use proptest::prelude::*;

/// Nonsymmetric, diagonally dominant, with an exactly representable diagonal
/// when `pow2_diag` is set.
#[allow(clippy::needless_range_loop)]
fn random_general(n: usize, per_row: usize, seed: u64, pow2_diag: bool) -> CsrMatrix<f64> {
    let mut rng = Lcg64(seed);
    let mut tb = TripletBuilder::new(n, n);
    let mut off = vec![0.0; n];
    for i in 0..n {
        for _ in 0..per_row {
            let j = (rng.next_u64() % n as u64) as usize;
            if j != i {
                let v = 2.0 * rng.next_unit() - 1.0;
                tb.push(i, j, v).unwrap();
                off[i] += v.abs();
            }
        }
    }
    for (i, s) in off.iter().enumerate() {
        let d = if pow2_diag {
            2f64.powi((s + 1.0).log2().ceil() as i32 + (rng.next_u64() % 3) as i32)
        } else {
            1.0 + s + rng.next_unit()
        };
        tb.push(i, i, d).unwrap();
    }
    tb.build()
}

fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm2(&diff) / norm2(y).max(f64::MIN_POSITIVE)
}

fn max_entry_diff(x: &[f64], y: &[f64]) -> f64 {
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// sum_{j=0}^{n_j} (-omega D^{-1} T)^j D^{-1} r for T = L (forward) or U (backward).
fn neumann_oracle(a: &CsrMatrix<f64>, r: &[f64], n_j: usize, omega: f64, half: HalfSweep) -> Vec<f64> {
    let dense = a.to_dense();
    let n = r.len();
    let d: Vec<f64> = (0..n).map(|i| dense[i][i]).collect();
    let tri = |i: usize, j: usize| match half {
        HalfSweep::Forward => j < i,
        HalfSweep::Backward => j > i,
    };
    let mut term: Vec<f64> = (0..n).map(|i| r[i] / d[i]).collect();
    let mut sum = term.clone();
    for _ in 0..n_j {
        term = (0..n)
            .map(|i| {
                let s: f64 = (0..n).filter(|&j| tri(i, j)).map(|j| dense[i][j] * term[j]).sum();
                -omega * s / d[i]
            })
            .collect();
        for (acc, t) in sum.iter_mut().zip(&term) {
            *acc += t;
        }
    }
    sum
}

fn all_kinds() -> Vec<(PrecondKind, RelaxConfig)> {
    vec![
        (PrecondKind::None, RelaxConfig::gs2(1, 1, 0)),
        (PrecondKind::Jr, RelaxConfig::gs2(3, 1, 0)),
        (PrecondKind::GsSeq, RelaxConfig::gs2(1, 1, 0)),
        (PrecondKind::SgsSeq, RelaxConfig::gs2(2, 1, 0)),
        (PrecondKind::MtGs, RelaxConfig::gs2(1, 1, 0)),
        (PrecondKind::MtSgs, RelaxConfig::gs2(1, 1, 0)),
        (PrecondKind::Gs2, RelaxConfig::gs2(1, 1, 2)),
        (PrecondKind::Sgs2, RelaxConfig::gs2(1, 1, 1)),
        (PrecondKind::Sgs2, RelaxConfig::gs2(2, 1, 3).with_damping(0.9, 0.8)),
        (PrecondKind::Gs2, RelaxConfig::gs2(1, 1, 1).with_form(Form::Compact)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmv_matches_dense(nrows in 1usize..200, ncols in 1usize..200, per_row in 0usize..6, seed: u64) {
        let mut rng = Lcg64(seed);
        let mut tb = TripletBuilder::new(nrows, ncols);
        for i in 0..nrows {
            for _ in 0..per_row {
                let j = (rng.next_u64() % ncols as u64) as usize;
                tb.push(i, j, 2.0 * rng.next_unit() - 1.0).unwrap();
            }
        }
        let a = tb.build();
        let x = random_rhs(ncols, seed ^ 1);
        let y = a.spmv(&x).unwrap();
        let oracle = dense_matvec(&a.to_dense(), &x);
        let abs_y = dense_matvec(
            &a.to_dense().iter().map(|r| r.iter().map(|v| v.abs()).collect()).collect::<Vec<_>>(),
            &x.iter().map(|v| v.abs()).collect::<Vec<_>>(),
        );
        for i in 0..nrows {
            prop_assert!((y[i] - oracle[i]).abs() <= 1e-13 * abs_y[i].max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn splitting_reassembles_exactly(n in 1usize..120, per_row in 0usize..5, seed: u64) {
        let a = random_general(n, per_row, seed, true);
        let s = Splitting::new(&a, 1.0, 1.0).unwrap();
        prop_assert_eq!(s.reassemble(), a.clone());
        for i in 0..n {
            let (cols, vals) = s.l.row(i);
            let (dcols, dvals) = s.dinv_l.row(i);
            prop_assert_eq!(cols, dcols);
            for (v, dv) in vals.iter().zip(dvals) {
                prop_assert_eq!((v / s.d[i]).to_bits(), dv.to_bits());
                // power-of-two diagonal: the quotient is exact
                prop_assert_eq!(dv * s.d[i], *v);
            }
        }
    }

    #[test]
    fn finite_termination(n in 1usize..40, per_row in 1usize..4, seed: u64, sweeps in 1usize..4) {
        let a = random_general(n, per_row, seed, false);
        let s = Splitting::new(&a, 1.0, 1.0).unwrap();
        let b = random_rhs(n, seed.wrapping_add(7));
        for dir in [Direction::Forward, Direction::Backward, Direction::Symmetric] {
            let mut x_gs = random_rhs(n, seed.wrapping_add(11));
            let mut x_two = x_gs.clone();
            let cfg = RelaxConfig::gs2(1, 1, n - 1).with_direction(dir);
            for _ in 0..sweeps {
                gs_sequential_sweep(&a, &s, &b, &mut x_gs, dir).unwrap();
                gs2_apply(&a, &s, &b, &mut x_two, &cfg).unwrap();
                prop_assert!(max_entry_diff(&x_two, &x_gs) <= 1e-12, "{:?}", dir);
            }
        }
    }

    #[test]
    fn neumann_oracle_matches(n in 1usize..=100, per_row in 1usize..4, seed: u64, n_j in 0usize..=10, damped: bool) {
        let a = random_general(n, per_row, seed, false);
        let omega = if damped { 0.7 } else { 1.0 };
        let s = Splitting::new(&a, omega, 1.0).unwrap();
        let r = random_rhs(n, seed ^ 0xabc);
        for half in [HalfSweep::Forward, HalfSweep::Backward] {
            let g = inner_jr_solve(&s, &r, n_j, half);
            let oracle = neumann_oracle(&a, &r, n_j, omega, half);
            prop_assert!(rel_diff(&g, &oracle) <= 1e-13, "{:?} {}", half, rel_diff(&g, &oracle));
        }
    }

    #[test]
    fn n_j_zero_is_jacobi_bitwise(n in 1usize..80, seed: u64, omega in 0.3f64..1.2) {
        let a = random_general(n, 3, seed, false);
        let s = Splitting::new(&a, omega, 1.0).unwrap();
        let b = random_rhs(n, seed ^ 5);
        let mut x1 = random_rhs(n, seed ^ 9);
        let mut x2 = x1.clone();
        gs2_apply(&a, &s, &b, &mut x1, &RelaxConfig::gs2(3, 1, 0).with_damping(omega, 1.0)).unwrap();
        jr_sweeps(&a, &s, &b, &mut x2, 3).unwrap();
        prop_assert_eq!(x1, x2);
    }

    #[test]
    fn exact_solution_is_a_fixed_point(n in 2usize..80, seed: u64) {
        let a = random_spd(n, 3, seed);
        let x_star = random_rhs(n, seed ^ 3);
        let b = a.spmv(&x_star).unwrap();
        let x = analysis::dense_solve(&a, &b).unwrap();
        let start = norm2(&a.residual(&b, &x).unwrap());
        prop_assume!(start <= 1e-12 * norm2(&b));
        // the compact form's fixed point is A^{-1} b only for an exact inner solve
        let kinds = all_kinds()
            .into_iter()
            .filter(|(k, c)| *k != PrecondKind::None && c.form == Form::NonCompact)
            .chain([(PrecondKind::Sgs2, RelaxConfig::gs2(1, 1, n - 1).with_form(Form::Compact))]);
        for (kind, cfg) in kinds {
            for precision in [PrecisionMode::Same, PrecisionMode::SingleInsideDouble] {
                let p = Preconditioner::new(&a, kind, cfg, precision).unwrap();
                let mut y = x.clone();
                p.relax_step(&b, &mut y).unwrap();
                let res = norm2(&a.residual(&b, &y).unwrap());
                prop_assert!(res <= 1e-12 * norm2(&b), "{} {}", p.label(), res);
            }
        }
    }

    #[test]
    fn multicolor_sweep_ignores_order_within_colors(nx in 2usize..10, ny in 2usize..10, seed: u64) {
        let a = laplace2d(nx, ny);
        let s = Splitting::new(&a, 1.0, 1.0).unwrap();
        let c = greedy_color(&a).unwrap();
        let mut shuffled = c.clone();
        let mut rng = Lcg64(seed);
        for rows in shuffled.rows_by_color.iter_mut() {
            for k in (1..rows.len()).rev() {
                let j = (rng.next_u64() % (k as u64 + 1)) as usize;
                rows.swap(k, j);
            }
        }
        let b = random_rhs(a.nrows(), seed);
        for dir in [Direction::Forward, Direction::Backward, Direction::Symmetric] {
            let mut x1 = random_rhs(a.nrows(), seed ^ 1);
            let mut x2 = x1.clone();
            mt_gs_sweep(&a, &s, &c, &b, &mut x1, dir).unwrap();
            mt_gs_sweep(&a, &s, &shuffled, &b, &mut x2, dir).unwrap();
            prop_assert_eq!(&x1, &x2);
        }
    }

    #[test]
    fn coloring_is_valid(n in 1usize..150, per_row in 0usize..6, seed: u64) {
        let a = random_general(n, per_row, seed, false);
        let c = greedy_color(&a).unwrap();
        let max_degree = gs2_core::coloring::symmetrized_adjacency(&a).iter().map(Vec::len).max().unwrap_or(0);
        prop_assert!(c.num_colors <= max_degree + 1);
        for (i, j, _) in a.triplets() {
            if i != j {
                prop_assert_ne!(c.color[i], c.color[j]);
            }
        }
    }

    #[test]
    fn preconditioners_are_linear(n in 2usize..200, seed: u64) {
        let a = random_spd(n, 3, seed);
        let r1 = random_rhs(n, seed ^ 1);
        let r2 = random_rhs(n, seed ^ 2);
        let sum: Vec<f64> = r1.iter().zip(&r2).map(|(p, q)| p + q).collect();
        for (kind, cfg) in all_kinds() {
            let p = Preconditioner::new(&a, kind, cfg, PrecisionMode::Same).unwrap();
            let (z1, z2, z12) = (p.apply(&r1).unwrap(), p.apply(&r2).unwrap(), p.apply(&sum).unwrap());
            let defect: Vec<f64> = (0..n).map(|i| z12[i] - z1[i] - z2[i]).collect();
            prop_assert!(norm2(&defect) <= 1e-12 * (norm2(&r1) + norm2(&r2)), "{}", p.label());
        }
    }

    #[test]
    fn symmetric_preconditioners_are_symmetric(n in 2usize..100, seed: u64) {
        let a = random_spd(n, 3, seed);
        let r1 = random_rhs(n, seed ^ 1);
        let r2 = random_rhs(n, seed ^ 2);
        for (kind, cfg) in all_kinds() {
            let p = Preconditioner::new(&a, kind, cfg, PrecisionMode::Same).unwrap();
            if !p.is_symmetric() {
                continue;
            }
            let lhs = gs2_core::vector::dot(&r1, &p.apply(&r2).unwrap());
            let rhs = gs2_core::vector::dot(&r2, &p.apply(&r1).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * norm2(&r1) * norm2(&r2), "{}", p.label());
        }
    }
}

#[test]
fn compact_and_non_compact_iterates_differ() {
    let a = laplace2d(5, 5);
    let s = Splitting::new(&a, 1.0, 1.0).unwrap();
    let b = random_rhs(25, 0);
    let x0 = random_rhs(25, 1);
    let mut xn = x0.clone();
    let mut xc = x0.clone();
    gs2_apply(&a, &s, &b, &mut xn, &RelaxConfig::gs2(1, 1, 1)).unwrap();
    gs2_apply(&a, &s, &b, &mut xc, &RelaxConfig::gs2(1, 1, 1).with_form(Form::Compact)).unwrap();
    assert!(rel_diff(&xc, &xn) > 1e-8);

    // from zero both recurrences coincide
    let mut zn = vec![0.0; 25];
    let mut zc = vec![0.0; 25];
    gs2_apply(&a, &s, &b, &mut zn, &RelaxConfig::gs2(1, 1, 1)).unwrap();
    gs2_apply(&a, &s, &b, &mut zc, &RelaxConfig::gs2(1, 1, 1).with_form(Form::Compact)).unwrap();
    assert!(rel_diff(&zc, &zn) <= 1e-15);
}

#[test]
fn inexact_compact_form_moves_the_exact_solution() {
    let a = laplace2d(5, 5);
    let x = random_rhs(25, 4);
    let b = a.spmv(&x).unwrap();
    let p = Preconditioner::new(&a, PrecondKind::Gs2, RelaxConfig::gs2(1, 1, 1).with_form(Form::Compact), PrecisionMode::Same)
        .unwrap();
    let mut y = x.clone();
    p.relax_step(&b, &mut y).unwrap();
    assert!(norm2(&a.residual(&b, &y).unwrap()) > 1e-3 * norm2(&b));
}
