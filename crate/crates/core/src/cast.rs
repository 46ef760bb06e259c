//! Conversions between double and single precision objects.

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::splitting::Splitting;

/// Rounds each entry to the nearest `f32`. Finite values that overflow are an error.
pub fn cast_vector_down(src: &[f64]) -> Result<Vec<f32>> {
    let mut out = Vec::with_capacity(src.len());
    for (index, &value) in src.iter().enumerate() {
        let v = value as f32;
        if v.is_infinite() && value.is_finite() {
            return Err(Error::CastOverflow { index, value });
        }
        out.push(v);
    }
    Ok(out)
}

pub fn cast_vector_up(src: &[f32]) -> Vec<f64> {
    src.iter().map(|&v| v as f64).collect()
}

/// Downcasts the stored values; the error index refers to the value array.
pub fn cast_matrix_down(src: &CsrMatrix<f64>) -> Result<CsrMatrix<f32>> {
    let values = cast_vector_down(src.values())?;
    Ok(CsrMatrix::from_parts_unchecked(
        src.nrows(),
        src.ncols(),
        src.row_ptr().to_vec(),
        src.col_idx().to_vec(),
        values,
    ))
}

pub fn cast_matrix_up(src: &CsrMatrix<f32>) -> CsrMatrix<f64> {
    src.map_values(|v| v as f64)
}

/// Single-precision copy of a splitting. The prescaled factors are recomputed
/// in single precision from the rounded `L`, `U` and `D` rather than rounded
/// from their double-precision counterparts.
pub fn cast_splitting_down(src: &Splitting<f64>) -> Result<Splitting<f32>> {
    let a = cast_matrix_down(&src.reassemble())?;
    Splitting::new(&a, src.omega as f32, src.gamma as f32)
}
