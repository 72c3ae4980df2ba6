//! Numerical tolerances shared by every module.
//!
//! All thresholds live here so the command line can override them in one
//! place. The library functions without a `_with` suffix use
//! [`Tolerances::default`].

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual threshold for structural class tests.
    pub class_tol: f64,
    /// Relative off-diagonal threshold for the Jacobi eigensolver.
    pub eig_tol: f64,
    pub max_sweeps: usize,
    /// Relative cluster radius used when splitting a normal matrix into
    /// commuting Hermitian parts.
    pub cluster_tol: f64,
    /// Largest tuple size handled by exhaustive permutation search.
    pub brute_force_max: usize,
    /// Relative tie tolerance for minimizing permutations, scaled by `1 + d2`.
    pub tie_tol: f64,
    /// Largest number of node pairs scanned by all-pairs seminorms.
    pub pair_budget: usize,
    /// Relative floor on the smallest singular value (times the largest
    /// Frobenius norm along the family).
    pub sigma_floor: f64,
    /// Relative spectral gap needed for a block splitting.
    pub gap_tol: f64,
    /// Relative off-diagonal residual allowed after block-diagonalization.
    pub bd_tol: f64,
    /// Absolute bound on imaginary parts of a "real" tuple.
    pub real_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            class_tol: 1e-10,
            eig_tol: 1e-12,
            max_sweeps: 64,
            cluster_tol: 1e-8,
            brute_force_max: 8,
            tie_tol: 1e-9,
            pair_budget: 4_000_000,
            sigma_floor: 1e-12,
            gap_tol: 1e-6,
            bd_tol: 1e-9,
            real_tol: 1e-12,
        }
    }
}
