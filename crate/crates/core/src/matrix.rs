//! Dense complex matrices.
//!
//! [`ComplexMatrix`] is the carrier for every matrix in the crate: Hermitian,
//! normal and general, square or rectangular. Values are immutable; every
//! transform returns a fresh matrix. Storage is row-major.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// JSON form `{"rows": r, "cols": c, "re": [...], "im": [...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixLiteral {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

impl TryFrom<MatrixLiteral> for ComplexMatrix {
    type Error = Error;

    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        let n = lit.rows * lit.cols;
        let im = lit.im.unwrap_or_else(|| vec![0.0; n]);
        if lit.re.len() != n || im.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix needs {} entries, got re={} im={}",
                lit.rows,
                lit.cols,
                n,
                lit.re.len(),
                im.len()
            )));
        }
        let data = lit.re.iter().zip(&im).map(|(&r, &i)| C64::new(r, i)).collect();
        ComplexMatrix::new(lit.rows, lit.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixLiteral {
    fn from(m: ComplexMatrix) -> Self {
        MatrixLiteral {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: Some(m.data.iter().map(|z| z.im).collect()),
        }
    }
}

/// Structural classes recognised by [`ComplexMatrix::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MatrixClass {
    General,
    Hermitian,
    Normal,
    Unitary,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {k}")));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Builds from data known to be finite and correctly sized.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        ComplexMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d, d);
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * d + i] = z;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        ComplexMatrix { rows: r, cols: c, data }
    }

    /// Builds a matrix from complex rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        ComplexMatrix { rows: r, cols: c, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &z) in col.iter().enumerate() {
                m.data[i * cols + j] = z;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare { rows: self.rows, cols: self.cols })
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// Square block `[start, start + size)` on both axes.
    pub fn principal_block(&self, start: usize, size: usize) -> Self {
        self.block(start, start, size, size)
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.data[i * cols + j] = self[(row0 + i, col0 + j)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// Frobenius norm `(Σ|a_ij|²)^{1/2}`, written ‖A‖₂ throughout the crate.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        crate::eigen::largest_singular_value(self)
    }

    /// `A − (Tr A / d) I`.
    pub fn traceless_part(&self) -> Result<Self> {
        let d = self.require_square()?;
        if d == 0 {
            return Ok(self.clone());
        }
        let mean = self.trace() / d as f64;
        let mut out = self.clone();
        for i in 0..d {
            out.data[i * d + i] -= mean;
        }
        Ok(out)
    }

    /// `A / ‖A‖₂`.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.frobenius_norm();
        if n == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        Ok(self.scale_real(1.0 / n))
    }

    /// `‖A − A*‖₂`.
    pub fn hermitian_residual(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }

    /// `‖A*A − AA*‖₂`.
    pub fn normal_residual(&self) -> f64 {
        let adj = self.adjoint();
        adj.matmul(self).sub(&self.matmul(&adj)).frobenius_norm()
    }

    /// `‖U*U − I‖₂`.
    pub fn unitary_residual(&self) -> f64 {
        self.adjoint().matmul(self).sub(&Self::identity(self.cols)).frobenius_norm()
    }

    pub fn is_hermitian(&self, class_tol: f64) -> bool {
        self.is_square() && self.hermitian_residual() <= class_tol * self.frobenius_norm()
    }

    pub fn is_normal(&self, class_tol: f64) -> bool {
        let n = self.frobenius_norm();
        self.is_square() && self.normal_residual() <= class_tol * n * n
    }

    pub fn is_unitary(&self, class_tol: f64) -> bool {
        self.is_square() && self.unitary_residual() <= class_tol
    }

    /// Every class whose residual test passes at `class_tol`; `General` alone
    /// when none does.
    pub fn classify(&self, class_tol: f64) -> Result<BTreeSet<MatrixClass>> {
        self.require_square()?;
        let mut set = BTreeSet::new();
        if self.is_hermitian(class_tol) {
            set.insert(MatrixClass::Hermitian);
        }
        if self.is_normal(class_tol) {
            set.insert(MatrixClass::Normal);
        }
        if self.is_unitary(class_tol) {
            set.insert(MatrixClass::Unitary);
        }
        if set.is_empty() {
            set.insert(MatrixClass::General);
        }
        Ok(set)
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale_real(0.5)
    }

    /// `(A − A*) / (2i)`, so that `A = H + iK`.
    pub fn skew_part(&self) -> Self {
        self.sub(&self.adjoint()).scale(C64::new(0.0, -0.5))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
