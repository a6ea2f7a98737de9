//! Fixed-capacity vectors and matrices for pixel-sized problems.
//!
//! Every pixel value, mean and covariance in this crate has dimension 1
//! (intensity) or 3 (RGB). Both live in nalgebra's stack-allocated 3-vectors
//! and 3x3 matrices; for intensity only the leading entry is used and the
//! rest stay zero, so element-wise arithmetic needs no special casing. The
//! operations that do depend on the dimension (factorization, eigenvalues)
//! dispatch on [`ColorMode`].

use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::mog::ColorMode;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector {
    mode: ColorMode,
    v: Vector3<f64>,
}

impl Vector {
    pub fn new(mode: ColorMode, values: &[f64]) -> Result<Self> {
        if values.len() != mode.dim() {
            return Err(Error::usage(format!(
                "expected {} components for {:?}, got {}",
                mode.dim(),
                mode,
                values.len()
            )));
        }
        let mut v = Vector3::zeros();
        for (dst, src) in v.iter_mut().zip(values) {
            *dst = *src;
        }
        Ok(Vector { mode, v })
    }

    pub fn zeros(mode: ColorMode) -> Self {
        Vector {
            mode,
            v: Vector3::zeros(),
        }
    }

    /// Every used component set to `x`.
    pub fn splat(mode: ColorMode, x: f64) -> Self {
        let mut v = Vector3::zeros();
        for i in 0..mode.dim() {
            v[i] = x;
        }
        Vector { mode, v }
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.mode.dim()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v.as_slice()[..self.mode.dim()]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.as_slice()[i]
    }

    /// Average of the used components.
    pub fn component_mean(&self) -> f64 {
        self.as_slice().iter().sum::<f64>() / self.dim() as f64
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.v.dot(&other.v)
    }

    pub fn outer(&self) -> Matrix {
        Matrix {
            mode: self.mode,
            m: self.v * self.v.transpose(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Vector {
        let mut out = *self;
        for i in 0..self.dim() {
            out.v[i] = f(self.v[i]);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.mode, rhs.mode);
        Vector {
            mode: self.mode,
            v: self.v + rhs.v,
        }
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.mode, rhs.mode);
        self.v += rhs.v;
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.mode, rhs.mode);
        Vector {
            mode: self.mode,
            v: self.v - rhs.v,
        }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        Vector {
            mode: self.mode,
            v: self.v * s,
        }
    }
}

/// Square d x d matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    mode: ColorMode,
    m: Matrix3<f64>,
}

impl Matrix {
    pub fn zeros(mode: ColorMode) -> Self {
        Matrix {
            mode,
            m: Matrix3::zeros(),
        }
    }

    pub fn scaled_identity(mode: ColorMode, s: f64) -> Self {
        let mut m = Matrix3::zeros();
        for i in 0..mode.dim() {
            m[(i, i)] = s;
        }
        Matrix { mode, m }
    }

    pub fn identity(mode: ColorMode) -> Self {
        Self::scaled_identity(mode, 1.0)
    }

    pub fn diagonal(mode: ColorMode, diag: &[f64]) -> Result<Self> {
        let d = Vector::new(mode, diag)?;
        let mut m = Matrix3::zeros();
        for i in 0..mode.dim() {
            m[(i, i)] = d.v[i];
        }
        Ok(Matrix { mode, m })
    }

    /// Builds a matrix from `d * d` values in row-major order.
    pub fn from_row_major(mode: ColorMode, values: &[f64]) -> Result<Self> {
        let d = mode.dim();
        if values.len() != d * d {
            return Err(Error::usage(format!(
                "expected {} matrix entries for {:?}, got {}",
                d * d,
                mode,
                values.len()
            )));
        }
        let mut m = Matrix3::zeros();
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = values[r * d + c];
            }
        }
        Ok(Matrix { mode, m })
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let d = self.mode.dim();
        assert!(r < d && c < d, "index ({r}, {c}) out of range for dimension {d}");
        self.m[(r, c)]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.mode.dim();
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                out.push(self.m[(r, c)]);
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.mode.dim()).map(|i| self.m[(i, i)]).sum()
    }

    pub fn diagonal_entries(&self) -> Vector {
        let mut v = Vector3::zeros();
        for i in 0..self.mode.dim() {
            v[i] = self.m[(i, i)];
        }
        Vector { mode: self.mode, v }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let d = self.mode.dim();
        (0..d).all(|r| (0..d).all(|c| (self.m[(r, c)] - self.m[(c, r)]).abs() <= tol))
    }

    pub fn symmetrized(&self) -> Matrix {
        Matrix {
            mode: self.mode,
            m: (self.m + self.m.transpose()) * 0.5,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        (self.m - other.m).amax()
    }

    /// Cholesky factorization; `None` unless the matrix is symmetric
    /// positive definite.
    pub fn cholesky(&self) -> Option<Cholesky> {
        match self.mode {
            ColorMode::Intensity => {
                let a = self.m[(0, 0)];
                (a > 0.0 && a.is_finite()).then(|| {
                    let mut l = Matrix3::zeros();
                    l[(0, 0)] = a.sqrt();
                    Cholesky {
                        mode: self.mode,
                        l,
                    }
                })
            }
            ColorMode::Rgb => {
                if !self.is_finite() {
                    return None;
                }
                nalgebra::Cholesky::new(self.m).map(|c| Cholesky {
                    mode: self.mode,
                    l: c.unpack(),
                })
            }
        }
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        match self.mode {
            ColorMode::Intensity => self.m[(0, 0)],
            ColorMode::Rgb => self.symmetrized().m.symmetric_eigenvalues().min(),
        }
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        debug_assert_eq!(self.mode, rhs.mode);
        Matrix {
            mode: self.mode,
            m: self.m + rhs.m,
        }
    }
}

impl AddAssign for Matrix {
    fn add_assign(&mut self, rhs: Matrix) {
        debug_assert_eq!(self.mode, rhs.mode);
        self.m += rhs.m;
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        debug_assert_eq!(self.mode, rhs.mode);
        Matrix {
            mode: self.mode,
            m: self.m - rhs.m,
        }
    }
}

impl Mul<f64> for Matrix {
    type Output = Matrix;
    fn mul(self, s: f64) -> Matrix {
        Matrix {
            mode: self.mode,
            m: self.m * s,
        }
    }
}

/// Lower-triangular factor `L` with `A = L L^T`.
#[derive(Clone, Copy, Debug)]
pub struct Cholesky {
    mode: ColorMode,
    l: Matrix3<f64>,
}

impl Cholesky {
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.mode.dim()).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    /// `L z`; maps a standard normal draw to one with covariance `A`.
    pub fn lower_times(&self, z: &Vector) -> Vector {
        Vector {
            mode: z.mode,
            v: self.l * z.v,
        }
    }

    /// `x^T A^{-1} x`.
    pub fn mahalanobis_sq(&self, x: &Vector) -> f64 {
        match self.mode {
            ColorMode::Intensity => {
                let y = x.v[0] / self.l[(0, 0)];
                y * y
            }
            ColorMode::Rgb => self
                .l
                .solve_lower_triangular(&x.v)
                .map_or(f64::INFINITY, |y| y.norm_squared()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensity_uses_leading_entry_only() {
        let v = Vector::new(ColorMode::Intensity, &[3.0]).unwrap();
        assert_eq!(v.as_slice(), &[3.0]);
        let o = v.outer();
        assert_eq!(o.to_row_major(), vec![9.0]);
        assert_eq!(o.trace(), 9.0);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(Vector::new(ColorMode::Rgb, &[1.0, 2.0]).is_err());
        assert!(Matrix::from_row_major(ColorMode::Intensity, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn cholesky_matches_direct_inverse() {
        let a = Matrix::from_row_major(ColorMode::Rgb, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0])
            .unwrap();
        let chol = a.cholesky().unwrap();
        let x = Vector::new(ColorMode::Rgb, &[1.0, -2.0, 0.5]).unwrap();
        let inv = a.m.try_inverse().unwrap();
        let direct = (x.v.transpose() * inv * x.v)[(0, 0)];
        assert!((chol.mahalanobis_sq(&x) - direct).abs() < 1e-12);
        assert!((chol.log_det() - a.m.determinant().ln()).abs() < 1e-12);
    }

    #[test]
    fn indefinite_matrix_has_no_factor() {
        let a = Matrix::diagonal(ColorMode::Rgb, &[1.0, -1.0, 1.0]).unwrap();
        assert!(a.cholesky().is_none());
        assert_eq!(a.min_eigenvalue(), -1.0);
        assert!(Matrix::zeros(ColorMode::Intensity).cholesky().is_none());
    }
}
