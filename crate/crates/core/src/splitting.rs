//! Matrix splitting `A = L + D + U` with prescaled triangular factors.

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Diagonal, strictly lower and strictly upper parts of a square matrix.
///
/// `dinv_l` and `dinv_u` hold `D^{-1} L` and `D^{-1} U` so inner Jacobi
/// sweeps need no separate diagonal scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Splitting<T> {
    pub d: Vec<T>,
    pub l: CsrMatrix<T>,
    pub u: CsrMatrix<T>,
    pub dinv_l: CsrMatrix<T>,
    pub dinv_u: CsrMatrix<T>,
    /// Outer damping factor.
    pub omega: T,
    /// Inner (Jacobi-Richardson) damping factor.
    pub gamma: T,
}

impl<T: Scalar> Splitting<T> {
    pub fn new(a: &CsrMatrix<T>, omega: T, gamma: T) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                nrows: a.nrows(),
                ncols: a.ncols(),
            });
        }
        if !(omega > T::zero() && omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
        }
        let n = a.nrows();
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            match a.get(i, i) {
                None => return Err(Error::MissingDiagonal { row: i }),
                Some(v) if v == T::zero() || !v.is_finite() => {
                    return Err(Error::BadDiagonal {
                        row: i,
                        value: v.to_f64(),
                    })
                }
                Some(v) => d.push(v),
            }
        }
        let l = a.filter(|i, j| j < i);
        let u = a.filter(|i, j| j > i);
        let dinv_l = prescale(&l, &d);
        let dinv_u = prescale(&u, &d);
        Ok(Self {
            d,
            l,
            u,
            dinv_l,
            dinv_u,
            omega,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Same factors with different damping.
    pub fn with_damping(&self, omega: T, gamma: T) -> Self {
        Self {
            omega,
            gamma,
            ..self.clone()
        }
    }

    /// Reassembles `diag(d) + L + U`.
    pub fn reassemble(&self) -> CsrMatrix<T> {
        let n = self.n();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(self.l.nnz() + self.u.nnz() + n);
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..n {
            let (lc, lv) = self.l.row(i);
            col_idx.extend_from_slice(lc);
            values.extend_from_slice(lv);
            col_idx.push(i);
            values.push(self.d[i]);
            let (uc, uv) = self.u.row(i);
            col_idx.extend_from_slice(uc);
            values.extend_from_slice(uv);
            row_ptr.push(col_idx.len());
        }
        CsrMatrix::from_parts_unchecked(n, n, row_ptr, col_idx, values)
    }
}

fn prescale<T: Scalar>(m: &CsrMatrix<T>, d: &[T]) -> CsrMatrix<T> {
    let mut values = Vec::with_capacity(m.nnz());
    for i in 0..m.nrows() {
        let (_, vals) = m.row(i);
        values.extend(vals.iter().map(|&v| v / d[i]));
    }
    CsrMatrix::from_parts_unchecked(
        m.nrows(),
        m.ncols(),
        m.row_ptr().to_vec(),
        m.col_idx().to_vec(),
        values,
    )
}

/// Extracts the splitting of `a` with damping factors `omega` and `gamma`.
pub fn extract_splitting<T: Scalar>(a: &CsrMatrix<T>, omega: T, gamma: T) -> Result<Splitting<T>> {
    Splitting::new(a, omega, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> CsrMatrix<f64> {
        CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap()
    }

    #[test]
    fn a2_splitting() {
        let s = extract_splitting(&a2(), 1.0, 1.0).unwrap();
        assert_eq!(s.d, vec![2.0, 2.0]);
        assert_eq!(s.l.triplets().collect::<Vec<_>>(), vec![(1, 0, -1.0)]);
        assert_eq!(s.u.triplets().collect::<Vec<_>>(), vec![(0, 1, -1.0)]);
        assert_eq!(s.dinv_l.triplets().collect::<Vec<_>>(), vec![(1, 0, -0.5)]);
        assert_eq!(s.dinv_u.triplets().collect::<Vec<_>>(), vec![(0, 1, -0.5)]);
        assert_eq!(s.reassemble(), a2());
    }

    #[test]
    fn diagonal_matrix_has_empty_triangles() {
        let a = CsrMatrix::from_diagonal(&[3.0, 5.0]);
        let s = extract_splitting(&a, 1.0, 1.0).unwrap();
        assert_eq!(s.d, vec![3.0, 5.0]);
        assert_eq!(s.l.nnz(), 0);
        assert_eq!(s.u.nnz(), 0);
        assert_eq!(s.l.row_ptr(), &[0, 0, 0]);
    }

    #[test]
    fn zero_or_missing_diagonal_names_row() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        match extract_splitting(&a, 1.0, 1.0) {
            Err(Error::MissingDiagonal { row }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
        let a = CsrMatrix::new(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 0.0]).unwrap();
        match extract_splitting(&a, 1.0, 1.0) {
            Err(Error::BadDiagonal { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square_and_bad_damping() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            extract_splitting(&a, 1.0, 1.0),
            Err(Error::NotSquare { .. })
        ));
        assert!(extract_splitting(&a2(), 0.0, 1.0).is_err());
        assert!(extract_splitting(&a2(), 1.0, -1.0).is_err());
    }
}
