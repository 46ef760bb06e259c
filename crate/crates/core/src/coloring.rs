//! Greedy coloring of the symmetrized matrix graph and multicolor Gauss-Seidel.

use crate::csr::CsrMatrix;
use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::relax::{gs_row_update, Direction, HalfSweep};
use crate::scalar::Scalar;
use crate::splitting::Splitting;

/// Row coloring such that rows sharing a color are not coupled in either
/// direction (`a[i,j] = a[j,i] = 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub color: Vec<usize>,
    pub num_colors: usize,
    /// Rows of each color. Greedy construction lists them in ascending order,
    /// but any order gives the same sweep.
    pub rows_by_color: Vec<Vec<usize>>,
}

impl Coloring {
    /// Groups rows by a per-row color array.
    pub fn from_colors(color: Vec<usize>) -> Self {
        let num_colors = color.iter().max().map_or(0, |&c| c + 1);
        let mut rows_by_color = vec![Vec::new(); num_colors];
        for (i, &c) in color.iter().enumerate() {
            rows_by_color[c].push(i);
        }
        Self {
            color,
            num_colors,
            rows_by_color,
        }
    }

    /// Checks the coloring against every stored off-diagonal entry of `a`.
    pub fn validate<T: Scalar>(&self, a: &CsrMatrix<T>) -> Result<()> {
        check_len("coloring", a.nrows(), self.color.len())?;
        for (i, j, _) in a.triplets() {
            if i != j && self.color[i] == self.color[j] {
                return Err(Error::Config(format!(
                    "rows {i} and {j} are coupled but share color {}",
                    self.color[i]
                )));
            }
        }
        let mut seen = vec![false; self.color.len()];
        for (c, rows) in self.rows_by_color.iter().enumerate() {
            for &i in rows {
                if i >= seen.len() || seen[i] || self.color[i] != c {
                    return Err(Error::Config(format!("row {i} misfiled in color {c}")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config("rows_by_color does not cover every row".into()));
        }
        Ok(())
    }
}

/// Neighbor lists of the symmetrized pattern `A + A^T`, diagonal excluded.
pub fn symmetrized_adjacency<T: Scalar>(a: &CsrMatrix<T>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Sequential greedy coloring in ascending row order, smallest free color first.
pub fn greedy_color<T: Scalar>(a: &CsrMatrix<T>) -> Result<Coloring> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    let adj = symmetrized_adjacency(a);
    let n = a.nrows();
    let mut color = vec![usize::MAX; n];
    // forbidden[c] == i marks color c as taken by a neighbor of row i
    let mut forbidden: Vec<usize> = Vec::new();
    for i in 0..n {
        for &j in &adj[i] {
            let c = color[j];
            if c != usize::MAX {
                if c >= forbidden.len() {
                    forbidden.resize(c + 1, usize::MAX);
                }
                forbidden[c] = i;
            }
        }
        color[i] = (0..)
            .find(|&c| forbidden.get(c).is_none_or(|&f| f != i))
            .unwrap();
    }
    Ok(Coloring::from_colors(color))
}

/// One multicolor Gauss-Seidel sweep. Colors are visited in ascending order
/// (descending for backward); rows within a color are updated concurrently
/// under [`Execution::Parallel`].
pub fn mt_gs_sweep<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    coloring: &Coloring,
    b: &[T],
    x: &mut [T],
    direction: Direction,
) -> Result<()> {
    mt_gs_sweep_with(a, s, coloring, b, x, direction, Execution::default())
}

pub fn mt_gs_sweep_with<T: Scalar>(
    a: &CsrMatrix<T>,
    s: &Splitting<T>,
    coloring: &Coloring,
    b: &[T],
    x: &mut [T],
    direction: Direction,
    exec: Execution,
) -> Result<()> {
    check_len("coloring", a.nrows(), coloring.color.len())?;
    check_len("splitting", a.nrows(), s.n())?;
    check_len("right-hand side", a.nrows(), b.len())?;
    check_len("iterate", a.ncols(), x.len())?;
    let mut buf: Vec<T> = Vec::new();
    for &half in direction.half_sweeps() {
        let order: Box<dyn Iterator<Item = &Vec<usize>>> = match half {
            HalfSweep::Forward => Box::new(coloring.rows_by_color.iter()),
            HalfSweep::Backward => Box::new(coloring.rows_by_color.iter().rev()),
        };
        for rows in order {
            buf.resize(rows.len(), T::zero());
            {
                let xr: &[T] = x;
                exec.fill(&mut buf, |k| gs_row_update(a, &s.d, s.omega, b, xr, rows[k]));
            }
            for (&i, &v) in rows.iter().zip(&buf) {
                x[i] = v;
            }
        }
    }
    Ok(())
}
