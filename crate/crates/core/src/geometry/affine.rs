use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Determinant magnitude below which a map is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Affine map `x ↦ matrix·x + offset` on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "affine matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != offset.len() {
            return Err(Error::DimensionMismatch {
                context: "affine offset",
                expected: matrix.nrows(),
                found: offset.len(),
            });
        }
        if matrix.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite affine coefficient".into(),
            ));
        }
        Ok(Self { matrix, offset })
    }

    /// Builds a map from row-major rows and an offset vector.
    pub fn from_rows(rows: &[Vec<f64>], offset: &[f64]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(
                "affine matrix rows must have length d".into(),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(d, d, &flat),
            DVector::from_column_slice(offset),
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            offset: DVector::zeros(dim),
        }
    }

    /// Uniform scaling `x ↦ s·x + offset`.
    pub fn scaling(s: f64, offset: &[f64]) -> Self {
        let d = offset.len();
        Self {
            matrix: DMatrix::identity(d, d) * s,
            offset: DVector::from_column_slice(offset),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "apply_affine",
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|r| {
                let mut acc = self.offset[r];
                for (c, xc) in x.iter().enumerate() {
                    acc += self.matrix[(r, c)] * xc;
                }
                acc
            })
            .collect()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn invert(&self) -> Result<Self> {
        let det = self.determinant();
        if det.abs() <= SINGULAR_TOL {
            return Err(Error::SingularMap { det });
        }
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMap { det })?;
        let offset = -(&inv * &self.offset);
        Ok(Self {
            matrix: inv,
            offset,
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> Result<Self> {
        if self.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                context: "compose affine",
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &inner.matrix,
            offset: &self.matrix * &inner.offset + &self.offset,
        })
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Max absolute difference of coefficients.
    pub fn max_abs_diff(&self, other: &AffineMap) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .chain(self.offset.iter().zip(other.offset.iter()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|r| self.matrix.row(r).iter().copied().collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor_f2() -> AffineMap {
        AffineMap::scaling(1.0 / 3.0, &[2.0 / 3.0])
    }

    #[test]
    fn cantor_maps_fix_endpoints() {
        let f1 = AffineMap::scaling(1.0 / 3.0, &[0.0]);
        assert_eq!(f1.apply(&[0.0]).unwrap(), vec![0.0]);
        assert!((cantor_f2().apply(&[1.0]).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_of_cantor_maps() {
        let inv = cantor_f2().invert().unwrap();
        assert!((inv.matrix()[(0, 0)] - 3.0).abs() < 1e-14);
        assert!((inv.offset()[0] + 2.0).abs() < 1e-14);
        let back = inv.invert().unwrap();
        assert!(back.max_abs_diff(&cantor_f2()) < 1e-14);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let f = AffineMap::new(DMatrix::zeros(2, 2), DVector::zeros(2)).unwrap();
        assert!(matches!(f.invert(), Err(Error::SingularMap { .. })));
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let f = AffineMap::identity(2);
        assert!(matches!(
            f.apply(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn operator_norm_of_rotation_scaling() {
        let s = 3f64.sqrt() / 6.0;
        let f = AffineMap::from_rows(
            &[vec![1.0 / 6.0, -s], vec![s, 1.0 / 6.0]],
            &[1.0 / 3.0, 0.0],
        )
        .unwrap();
        assert!((f.operator_norm() - 1.0 / 3.0).abs() < 1e-12);
    }
}
