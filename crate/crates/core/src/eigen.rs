//! Eigensolvers for Hermitian and normal matrices, singular values and the
//! ordered characteristic map `λ↑`.
//!
//! The Hermitian solver is a cyclic complex Jacobi method. Each rotation
//! first removes the phase of the pivot `a_pq` with a diagonal unitary and
//! then applies a real plane rotation, so the working matrix stays exactly
//! Hermitian with a real diagonal.
//!
//! Normal matrices are split as `A = H + iK` with commuting Hermitian parts.
//! `H` is diagonalized first; inside every cluster of nearly equal
//! eigenvalues of `H` the compressed `K` is diagonalized, and the composed
//! basis is polished by two-sided Schur rotations on `V*AV`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};

/// Increasingly ordered real spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OrderedSpectrum(Vec<f64>);

impl OrderedSpectrum {
    /// Sorts the values increasingly.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        OrderedSpectrum(values)
    }

    /// Wraps values that must already be non-decreasing.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::BadParam("spectrum is not non-decreasing".into()));
        }
        Ok(OrderedSpectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for OrderedSpectrum {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        OrderedSpectrum::new(v)
    }
}

impl From<OrderedSpectrum> for Vec<f64> {
    fn from(s: OrderedSpectrum) -> Self {
        s.0
    }
}

/// Decreasingly ordered singular values `σ₁ ≥ … ≥ σ_d ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularValues(Vec<f64>);

impl SingularValues {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0)
    }

    /// `σ₁ / σ_d`; infinite for singular input.
    pub fn condition_number(&self) -> f64 {
        self.largest() / self.smallest()
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub spectrum: Vec<C64>,
    /// Unitary; column `j` is the eigenvector for `spectrum[j]`.
    pub basis: ComplexMatrix,
    /// `‖A − V diag(spectrum) V*‖₂`.
    pub residual: f64,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = ComplexMatrix::from_diagonal(&self.spectrum);
        self.basis.matmul(&lambda).matmul(&self.basis.adjoint())
    }

    pub fn real_spectrum(&self) -> Vec<f64> {
        self.spectrum.iter().map(|z| z.re).collect()
    }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let d = m.rows();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Applies `M ← W* M W`, `V ← V W` for a unitary `W` acting on the
/// coordinate plane `(p, q)`. `w = [w_pp, w_pq, w_qp, w_qq]`.
fn rotate_plane(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, w: [C64; 4]) {
    let d = m.rows();
    let [w_pp, w_pq, w_qp, w_qq] = w;
    let data = m.data_mut();
    for k in 0..d {
        let mp = data[k * d + p];
        let mq = data[k * d + q];
        data[k * d + p] = mp * w_pp + mq * w_qp;
        data[k * d + q] = mp * w_pq + mq * w_qq;
    }
    for k in 0..d {
        let mp = data[p * d + k];
        let mq = data[q * d + k];
        data[p * d + k] = w_pp.conj() * mp + w_qp.conj() * mq;
        data[q * d + k] = w_pq.conj() * mp + w_qq.conj() * mq;
    }
    let n = v.rows();
    let vd = v.data_mut();
    for k in 0..n {
        let vp = vd[k * d + p];
        let vq = vd[k * d + q];
        vd[k * d + p] = vp * w_pp + vq * w_qp;
        vd[k * d + q] = vp * w_pq + vq * w_qq;
    }
}

/// One Hermitian Jacobi rotation annihilating `m[p, q]`.
fn hermitian_rotation(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = (apq / r).conj();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let w = [C64::new(c, 0.0), C64::new(s, 0.0), phase * (-s), phase * c];
    rotate_plane(m, v, p, q, w);
    let d = m.rows();
    let data = m.data_mut();
    data[p * d + q] = ZERO;
    data[q * d + p] = ZERO;
    data[p * d + p] = C64::new(data[p * d + p].re, 0.0);
    data[q * d + q] = C64::new(data[q * d + q].re, 0.0);
}

struct JacobiOutcome {
    values: Vec<f64>,
    basis: ComplexMatrix,
    off: f64,
    sweeps: usize,
}

/// Cyclic Jacobi on an exactly Hermitian matrix. Returns values sorted
/// increasingly with matching basis columns.
fn jacobi_hermitian(mut m: ComplexMatrix, threshold: f64, max_sweeps: usize) -> JacobiOutcome {
    let d = m.rows();
    let mut v = ComplexMatrix::identity(d);
    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&m);
    let mut extra = 1;
    while sweeps < max_sweeps {
        if off <= threshold {
            // One more sweep after reaching the threshold drives the
            // off-diagonal mass down to round-off.
            if extra == 0 || off == 0.0 {
                break;
            }
            extra -= 1;
        }
        for p in 0..d {
            for q in p + 1..d {
                hermitian_rotation(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m);
    }
    let values: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values = order.iter().map(|&i| values[i]).collect();
    let basis = permute_columns(&v, &order);
    JacobiOutcome { values, basis, off, sweeps }
}

fn permute_columns(v: &ComplexMatrix, order: &[usize]) -> ComplexMatrix {
    let cols: Vec<Vec<C64>> = order.iter().map(|&j| v.column(j)).collect();
    ComplexMatrix::from_columns(v.rows(), &cols)
}

/// Makes the largest-modulus component of every column real positive.
fn fix_phases(v: &ComplexMatrix) -> ComplexMatrix {
    let n = v.rows();
    let cols: Vec<Vec<C64>> = (0..v.cols())
        .map(|j| {
            let mut col = v.column(j);
            let mut best = 0;
            for i in 1..n {
                if col[i].norm() > col[best].norm() {
                    best = i;
                }
            }
            let pivot = col[best];
            if pivot.norm() > 0.0 {
                let phase = pivot.conj() / pivot.norm();
                for z in &mut col {
                    *z *= phase;
                }
                col[best] = C64::new(col[best].re, 0.0);
            }
            col
        })
        .collect();
    ComplexMatrix::from_columns(n, &cols)
}

fn residual(a: &ComplexMatrix, spectrum: &[C64], basis: &ComplexMatrix) -> f64 {
    let lambda = ComplexMatrix::from_diagonal(spectrum);
    a.sub(&basis.matmul(&lambda).matmul(&basis.adjoint())).frobenius_norm()
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    eig_hermitian_with(a, &Tolerances::default())
}

/// Eigendecomposition of a Hermitian matrix with increasingly sorted real
/// spectrum.
pub fn eig_hermitian_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    a.require_square()?;
    let norm = a.frobenius_norm();
    let herm_res = a.hermitian_residual();
    if herm_res > tol.class_tol * norm {
        return Err(Error::NotHermitian { residual: herm_res });
    }
    let out = jacobi_hermitian(a.hermitian_part(), tol.eig_tol * norm, tol.max_sweeps);
    if out.off > tol.eig_tol * norm {
        return Err(Error::NoConvergence { sweeps: out.sweeps, off: out.off });
    }
    let basis = fix_phases(&out.basis);
    let spectrum: Vec<C64> = out.values.iter().map(|&x| C64::new(x, 0.0)).collect();
    let residual = residual(a, &spectrum, &basis);
    Ok(EigenDecomposition { spectrum, basis, residual })
}

/// One two-sided Schur rotation on the `(p, q)` plane of a nearly normal
/// matrix: the 2x2 block is triangularized with the eigenvalue closest to
/// `m[p, p]`.
fn schur_rotation(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let a = m[(p, p)];
    let b = m[(p, q)];
    let c = m[(q, p)];
    let e = m[(q, q)];
    if b == ZERO && c == ZERO {
        return;
    }
    let half = (a - e) * 0.5;
    let root = (half * half + b * c).sqrt();
    let mid = (a + e) * 0.5;
    let (mu1, mu2) = (mid + root, mid - root);
    let mu = if (mu1 - a).norm() <= (mu2 - a).norm() { mu1 } else { mu2 };
    let x_row = [b, mu - a];
    let x_col = [mu - e, c];
    let nr = (x_row[0].norm_sqr() + x_row[1].norm_sqr()).sqrt();
    let nc = (x_col[0].norm_sqr() + x_col[1].norm_sqr()).sqrt();
    let (x, n) = if nc >= nr { (x_col, nc) } else { (x_row, nr) };
    if n == 0.0 || !n.is_finite() {
        return;
    }
    let (x1, x2) = (x[0] / n, x[1] / n);
    rotate_plane(m, v, p, q, [x1, -x2.conj(), x2, x1.conj()]);
}

pub fn eig_normal(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    eig_normal_with(a, &Tolerances::default())
}

/// Eigendecomposition of a normal matrix. The spectrum is ordered by
/// `(Re, Im)` lexicographically.
pub fn eig_normal_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    let d = a.require_square()?;
    let norm = a.frobenius_norm();
    let normal_res = a.normal_residual();
    if normal_res > tol.class_tol * norm * norm {
        return Err(Error::NotNormal { residual: normal_res });
    }
    let threshold = tol.eig_tol * norm;
    let h = a.hermitian_part();
    let k = a.skew_part();
    let outer = jacobi_hermitian(h, threshold, tol.max_sweeps);
    let mut basis = outer.basis;

    // Clusters of the sorted H spectrum, chained by gaps <= cluster radius.
    let radius = tol.cluster_tol * norm;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && outer.values[end] - outer.values[end - 1] <= radius {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<Vec<C64>> = (start..end).map(|j| basis.column(j)).collect();
            let vs = ComplexMatrix::from_columns(d, &cols);
            let compressed = vs.adjoint().matmul(&k).matmul(&vs).hermitian_part();
            let inner = jacobi_hermitian(compressed, threshold, tol.max_sweeps);
            let rotated = vs.matmul(&inner.basis);
            let data = basis.data_mut();
            for (jj, j) in (start..end).enumerate() {
                for i in 0..d {
                    data[i * d + j] = rotated[(i, jj)];
                }
            }
        }
        start = end;
    }

    let mut m = basis.adjoint().matmul(a).matmul(&basis);
    let mut off = off_diagonal_norm(&m);
    let mut sweeps = 0;
    let mut extra = 1;
    while sweeps < tol.max_sweeps {
        if off <= threshold {
            if extra == 0 || off == 0.0 {
                break;
            }
            extra -= 1;
        }
        for p in 0..d {
            for q in p + 1..d {
                schur_rotation(&mut m, &mut basis, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m);
    }
    if off > threshold {
        return Err(Error::NoConvergence { sweeps, off });
    }
    let diag = m.diagonal();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| cmp_complex(&diag[i], &diag[j]));
    let spectrum: Vec<C64> = order.iter().map(|&i| diag[i]).collect();
    let basis = fix_phases(&permute_columns(&basis, &order));
    let residual = residual(a, &spectrum, &basis);
    Ok(EigenDecomposition { spectrum, basis, residual })
}

/// Lexicographic `(Re, Im)` order.
pub fn cmp_complex(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `λ↑(A)`: eigenvalues of a Hermitian matrix in increasing order.
pub fn ordered_spectrum(a: &ComplexMatrix) -> Result<OrderedSpectrum> {
    Ok(OrderedSpectrum(eig_hermitian(a)?.real_spectrum()))
}

pub fn ordered_spectrum_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<OrderedSpectrum> {
    Ok(OrderedSpectrum(eig_hermitian_with(a, tol)?.real_spectrum()))
}

/// Singular values of a `D x d` matrix with `d <= D`, from the spectrum of
/// `A*A` with tiny negative eigenvalues clamped to zero.
pub fn singular_values(a: &ComplexMatrix) -> Result<SingularValues> {
    if a.cols() > a.rows() {
        return Err(Error::WideMatrix { rows: a.rows(), cols: a.cols() });
    }
    let gram = a.adjoint().matmul(a);
    let tol = Tolerances::default();
    let out = jacobi_hermitian(gram, tol.eig_tol * a.frobenius_norm().powi(2), tol.max_sweeps);
    let mut sv: Vec<f64> = out.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    sv.reverse();
    Ok(SingularValues(sv))
}

/// `σ₁(A)` for any shape.
pub(crate) fn largest_singular_value(a: &ComplexMatrix) -> f64 {
    if a.rows() == 1 || a.cols() == 1 {
        return a.frobenius_norm();
    }
    let gram = if a.cols() <= a.rows() { a.adjoint().matmul(a) } else { a.matmul(&a.adjoint()) };
    let tol = Tolerances::default();
    let out = jacobi_hermitian(gram, tol.eig_tol * a.frobenius_norm().powi(2), tol.max_sweeps);
    out.values.last().map_or(0.0, |&x| x.max(0.0).sqrt())
}

/// Spectral functionals of singular values and Hermitian spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralStatistic {
    /// `Σ σ_i^p`, the p-th power of the Schatten norm.
    Schatten { p: f64 },
    /// `Σ_{i<k} σ_i`.
    KyFan { k: usize },
    /// `−Σ λ_i log λ_i` of a density matrix.
    VonNeumann,
    /// `(1 − α)^{-1} log Σ λ_i^α` of a density matrix, `α > 1`.
    Renyi { alpha: f64 },
    /// `λ↑_{i+1} − λ↑_i` (zero-based `i`).
    SpectralGap { i: usize },
}

fn density_spectrum(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let spec = ordered_spectrum(a).map_err(|e| match e {
        Error::NotHermitian { .. } => Error::NotDensityMatrix("not Hermitian".into()),
        e => e,
    })?;
    let trace: f64 = spec.values().iter().sum();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::NotDensityMatrix(format!("trace {trace} != 1")));
    }
    if let Some(&min) = spec.values().first() {
        if min < -1e-12 {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min}")));
        }
    }
    Ok(spec.into_vec())
}

pub fn spectral_statistic(a: &ComplexMatrix, kind: SpectralStatistic) -> Result<f64> {
    match kind {
        SpectralStatistic::Schatten { p } => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::BadParam(format!("Schatten exponent {p} < 1")));
            }
            Ok(singular_values_any(a)?.values().iter().map(|s| s.powf(p)).sum())
        }
        SpectralStatistic::KyFan { k } => {
            let sv = singular_values_any(a)?;
            if k == 0 || k > sv.values().len() {
                return Err(Error::BadParam(format!("Ky Fan index {k} out of range")));
            }
            Ok(sv.values()[..k].iter().sum())
        }
        SpectralStatistic::VonNeumann => Ok(density_spectrum(a)?
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum()),
        SpectralStatistic::Renyi { alpha } => {
            if !(alpha > 1.0) || !alpha.is_finite() {
                return Err(Error::BadParam(format!("Renyi order {alpha} must exceed 1")));
            }
            let s: f64 = density_spectrum(a)?
                .iter()
                .filter(|&&l| l > 0.0)
                .map(|&l| l.powf(alpha))
                .sum();
            Ok(s.ln() / (1.0 - alpha))
        }
        SpectralStatistic::SpectralGap { i } => {
            let spec = ordered_spectrum(a)?;
            let v = spec.values();
            if i + 1 >= v.len() {
                return Err(Error::BadParam(format!("gap index {i} out of range")));
            }
            Ok(v[i + 1] - v[i])
        }
    }
}

/// Singular values for either orientation.
fn singular_values_any(a: &ComplexMatrix) -> Result<SingularValues> {
    if a.cols() > a.rows() {
        singular_values(&a.adjoint())
    } else {
        singular_values(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_normal, rng_for};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_hermitian() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.real_spectrum(), vec![1.0, 2.0, 3.0]);
        assert_eq!(e.basis, ComplexMatrix::identity(3));
        assert_eq!(e.residual, 0.0);
    }

    #[test]
    fn symmetric_two_by_two() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [2.0, 0.0]]);
        let s = ordered_spectrum(&a).unwrap();
        assert!((s.values()[0] + 2.0).abs() < 1e-14);
        assert!((s.values()[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ordered_spectrum_examples() {
        let s = ordered_spectrum(&ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);

        let s = ordered_spectrum(&ComplexMatrix::from_real_diagonal(&[0.2, -0.2])).unwrap();
        assert_eq!(s.values(), &[-0.2, 0.2]);

        let a = ComplexMatrix::from_real_rows(&[[1.0 / 3.0, 1.0], [1.0, -1.0 / 3.0]]);
        let r = (1.0f64 + 1.0 / 9.0).sqrt();
        let s = ordered_spectrum(&a).unwrap();
        assert!((s.values()[0] + r).abs() < 1e-14);
        assert!((s.values()[1] - r).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(eig_normal(&j), Err(Error::NotNormal { .. })));
    }

    #[test]
    fn random_hermitian_residual() {
        let mut rng = rng_for(11, 0);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 8);
            let e = eig_hermitian(&a).unwrap();
            assert!(e.residual <= 1e-10 * a.frobenius_norm(), "{}", e.residual);
            assert!(e.basis.unitary_residual() < 1e-12);
            assert!(e.real_spectrum().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn normal_examples() {
        let a = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let e = eig_normal(&a).unwrap();
        assert_eq!(e.spectrum, vec![c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);

        let skew = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let e = eig_normal(&skew).unwrap();
        assert!((e.spectrum[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e.spectrum[1] - c(0.0, 1.0)).norm() < 1e-14);
        assert!(e.residual < 1e-14);
    }

    #[test]
    fn normal_construct_then_recover() {
        let mut rng = rng_for(5, 0);
        for _ in 0..20 {
            let (a, z) = random_normal(&mut rng, 5);
            let e = eig_normal(&a).unwrap();
            let mut want = z.clone();
            want.sort_by(cmp_complex);
            for (got, want) in e.spectrum.iter().zip(&want) {
                assert!((got - want).norm() < 1e-9);
            }
            assert!(e.residual <= 1e-10 * a.frobenius_norm());
        }
    }

    #[test]
    fn normal_with_degenerate_real_parts() {
        // Real parts coincide pairwise, so the H split has nontrivial clusters.
        let z = [c(1.0, 2.0), c(1.0, -3.0), c(-0.5, 0.5), c(-0.5, 0.25)];
        let mut rng = rng_for(3, 1);
        let u = crate::random::random_unitary(&mut rng, 4);
        let a = u.matmul(&ComplexMatrix::from_diagonal(&z)).matmul(&u.adjoint());
        let e = eig_normal(&a).unwrap();
        assert!(e.residual < 1e-12 * a.frobenius_norm());
        let mut want = z.to_vec();
        want.sort_by(cmp_complex);
        for (got, want) in e.spectrum.iter().zip(&want) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn normal_with_nearly_degenerate_real_parts() {
        let z = [c(1.0, 2.0), c(1.0 + 3e-7, -1.0), c(-2.0, 0.5)];
        let mut rng = rng_for(3, 2);
        let u = crate::random::random_unitary(&mut rng, 3);
        let a = u.matmul(&ComplexMatrix::from_diagonal(&z)).matmul(&u.adjoint());
        let e = eig_normal(&a).unwrap();
        assert!(e.residual < 1e-12 * a.frobenius_norm(), "{}", e.residual);
    }

    #[test]
    fn singular_value_examples() {
        let sv = singular_values(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(sv.values(), &[1.0, 1.0]);
        let sv = singular_values(&ComplexMatrix::from_real_diagonal(&[-3.0, 4.0])).unwrap();
        assert_eq!(sv.values(), &[4.0, 3.0]);
        assert!(matches!(singular_values(&ComplexMatrix::zeros(2, 3)), Err(Error::WideMatrix { .. })));
    }

    #[test]
    fn singular_values_match_augmented_hermitian() {
        // The Hermitian matrix [[0, Ã], [Ã*, 0]] with Ã = [A | 0] has
        // eigenvalues ±σ_i and D − d zeros.
        let a = ComplexMatrix::from_rows(&[
            [c(1.0, 0.5), c(-0.3, 0.0)],
            [c(0.2, -1.0), c(2.0, 0.1)],
            [c(0.0, 0.7), c(0.4, 0.4)],
        ]);
        let (big_d, d) = (3, 2);
        let mut aug = vec![vec![ZERO; 2 * big_d]; 2 * big_d];
        for i in 0..big_d {
            for j in 0..d {
                aug[i][big_d + j] = a[(i, j)];
                aug[big_d + j][i] = a[(i, j)].conj();
            }
        }
        let aug = ComplexMatrix::from_rows(&aug);
        let spec = ordered_spectrum(&aug).unwrap();
        let sv = singular_values(&a).unwrap();
        let v = spec.values();
        assert!((v[5] - sv.values()[0]).abs() < 1e-12);
        assert!((v[4] - sv.values()[1]).abs() < 1e-12);
        assert!(v[2].abs() < 1e-12 && v[3].abs() < 1e-12);
        assert!((v[0] + sv.values()[0]).abs() < 1e-12);
        assert!((v[1] + sv.values()[1]).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((ComplexMatrix::identity(4).operator_norm() - 1.0).abs() < 1e-15);
        assert!((ComplexMatrix::from_real_diagonal(&[3.0, -5.0]).operator_norm() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = rng_for(17, 0);
        let a = crate::random::random_gaussian_matrix(&mut rng, 4, 4);
        let gram = a.adjoint().matmul(&a);
        // Power iteration oracle on A*A.
        let mut x: Vec<C64> = (0..4).map(|i| c(1.0 + i as f64, 0.5)).collect();
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let y = gram.mul_vec(&x);
            let n = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lambda = n;
            x = y.into_iter().map(|z| z / n).collect();
        }
        assert!((a.operator_norm() - lambda.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn statistics_examples() {
        let rho = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        let vn = spectral_statistic(&rho, SpectralStatistic::VonNeumann).unwrap();
        assert!((vn - 2f64.ln()).abs() < 1e-15);

        let a = ComplexMatrix::from_rows(&[[c(1.0, 1.0), c(0.0, 2.0)], [c(-1.0, 0.0), c(0.5, 0.0)]]);
        let k1 = spectral_statistic(&a, SpectralStatistic::KyFan { k: 1 }).unwrap();
        assert!((k1 - a.operator_norm()).abs() < 1e-12);
        let s2 = spectral_statistic(&a, SpectralStatistic::Schatten { p: 2.0 }).unwrap();
        assert!((s2 - a.frobenius_norm().powi(2)).abs() < 1e-12);

        let r = spectral_statistic(&rho, SpectralStatistic::Renyi { alpha: 2.0 }).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-15);
        let g = spectral_statistic(
            &ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 4.0]),
            SpectralStatistic::SpectralGap { i: 1 },
        )
        .unwrap();
        assert_eq!(g, 3.0);
    }

    #[test]
    fn statistics_errors() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 1.0]);
        assert!(matches!(
            spectral_statistic(&a, SpectralStatistic::VonNeumann),
            Err(Error::NotDensityMatrix(_))
        ));
        assert!(matches!(
            spectral_statistic(&a, SpectralStatistic::Schatten { p: 0.5 }),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            spectral_statistic(&a, SpectralStatistic::KyFan { k: 3 }),
            Err(Error::BadParam(_))
        ));
        let rho = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(matches!(
            spectral_statistic(&rho, SpectralStatistic::Renyi { alpha: 1.0 }),
            Err(Error::BadParam(_))
        ));
    }
}
