//! Random matrix ensembles for fuzzing and property tests.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`, so trial
//! `k` of a run draws the same matrices no matter how trials are scheduled
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{ComplexMatrix, C64};

pub type LabRng = ChaCha8Rng;

pub fn rng_for(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Independent standard complex Gaussian entries.
pub fn random_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix::from_raw(rows, cols, data)
}

/// `(G + G*) / 2` for a complex Gaussian `G` (unnormalized GUE).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    random_gaussian_matrix(rng, d, d).hermitian_part()
}

/// Haar-distributed unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    orthonormalize(&random_gaussian_matrix(rng, d, d))
}

/// Gram–Schmidt on the columns of a square matrix of full rank.
pub fn orthonormalize(g: &ComplexMatrix) -> ComplexMatrix {
    let d = g.cols();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // Two passes of modified Gram–Schmidt keep the columns orthonormal
        // to working precision.
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= n;
        }
        cols.push(v);
    }
    ComplexMatrix::from_columns(g.rows(), &cols)
}

/// `U · Q` where `Q` orthonormalizes `I + step · G` for a Gaussian `G`.
pub fn perturb_unitary<R: Rng + ?Sized>(rng: &mut R, u: &ComplexMatrix, step: f64) -> ComplexMatrix {
    let d = u.cols();
    let kick = ComplexMatrix::identity(d).add(&random_gaussian_matrix(rng, d, d).scale_real(step));
    u.matmul(&orthonormalize(&kick))
}

/// `U diag(z) U*` with Haar `U` and complex Gaussian `z`. Returns the
/// matrix together with `z`.
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> (ComplexMatrix, Vec<C64>) {
    let z: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
    (conjugate_diagonal(&random_unitary(rng, d), &z), z)
}

/// `U diag(z) U*`.
pub fn conjugate_diagonal(u: &ComplexMatrix, z: &[C64]) -> ComplexMatrix {
    u.matmul(&ComplexMatrix::from_diagonal(z)).matmul(&u.adjoint())
}

/// Random Hermitian matrix with prescribed real spectrum.
pub fn random_hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> ComplexMatrix {
    let u = random_unitary(rng, spectrum.len());
    let z: Vec<C64> = spectrum.iter().map(|&x| C64::new(x, 0.0)).collect();
    conjugate_diagonal(&u, &z).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_for(1, 0);
        for d in [1, 2, 5, 16] {
            let u = random_unitary(&mut rng, d);
            assert!(u.unitary_residual() < 1e-13);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = random_hermitian(&mut rng_for(9, 4), 3);
        let b = random_hermitian(&mut rng_for(9, 4), 3);
        let c = random_hermitian(&mut rng_for(9, 5), 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn normal_ensemble_is_normal() {
        let mut rng = rng_for(2, 0);
        let (a, _) = random_normal(&mut rng, 6);
        assert!(a.is_normal(1e-10));
    }
}
