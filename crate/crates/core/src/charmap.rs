//! Characteristic maps of sampled matrix families.
//!
//! Every node is diagonalized on its own. No branch tracking happens here;
//! unordered flows keep only the class of each spectrum and leave pairing to
//! the metrics in [`crate::unordered`] and [`crate::sobolev`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::eigen::{self, OrderedSpectrum};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::sobolev::{AxisKind, SampledFamily};
use crate::unordered::{AlmgrenEmbedding, UnorderedSpectrum};

/// Eigenvalue family together with the worst eigensolver residual seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlow<S> {
    pub flow: SampledFamily<S>,
    /// `max_x ‖A(x) − V Λ V*‖₂`.
    pub solver_residual_max: f64,
}

pub type OrderedFlow = SpectralFlow<OrderedSpectrum>;
pub type UnorderedFlow = SpectralFlow<UnorderedSpectrum>;

/// Evaluates `f` at every node in parallel and reports the lowest failing
/// node, so error messages do not depend on scheduling.
pub(crate) fn node_map<V: Sync, W: Send>(
    values: &[V],
    f: impl Fn(&V) -> Result<W> + Sync,
) -> Result<Vec<W>> {
    let results: Vec<Result<W>> = values.par_iter().map(&f).collect();
    let mut out = Vec::with_capacity(results.len());
    for (node, r) in results.into_iter().enumerate() {
        out.push(r.map_err(|e| Error::at_node(node, e))?);
    }
    Ok(out)
}

/// `E(A) = λ↑ ∘ A` for a Hermitian family.
pub fn char_map_hermitian(a: &SampledFamily<ComplexMatrix>) -> Result<OrderedFlow> {
    char_map_hermitian_with(a, &Tolerances::default())
}

pub fn char_map_hermitian_with(a: &SampledFamily<ComplexMatrix>, tol: &Tolerances) -> Result<OrderedFlow> {
    let decomps = node_map(a.samples(), |m| eigen::eig_hermitian_with(m, tol))?;
    let solver_residual_max = decomps.iter().map(|d| d.residual).fold(0.0, f64::max);
    let samples = decomps.into_iter().map(|d| OrderedSpectrum::from_unsorted(d.real_spectrum())).collect();
    Ok(SpectralFlow { flow: SampledFamily::new(a.grid().clone(), samples)?, solver_residual_max })
}

/// `E_u(A) = Λ ∘ A` for a normal family.
pub fn char_map_normal(a: &SampledFamily<ComplexMatrix>) -> Result<UnorderedFlow> {
    char_map_normal_with(a, &Tolerances::default())
}

pub fn char_map_normal_with(a: &SampledFamily<ComplexMatrix>, tol: &Tolerances) -> Result<UnorderedFlow> {
    let decomps = node_map(a.samples(), |m| eigen::eig_normal_with(m, tol))?;
    let solver_residual_max = decomps.iter().map(|d| d.residual).fold(0.0, f64::max);
    let samples = decomps.into_iter().map(|d| UnorderedSpectrum::new(d.spectrum)).collect();
    Ok(SpectralFlow { flow: SampledFamily::new(a.grid().clone(), samples)?, solver_residual_max })
}

/// `Δ ∘ E_u(A)`, a family of real `N`-vectors.
pub fn embedded_flow(f: &SampledFamily<UnorderedSpectrum>, e: &AlmgrenEmbedding) -> Result<SampledFamily<Vec<f64>>> {
    f.try_map(|x| e.embed(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFlow {
    pub kappa: SampledFamily<f64>,
    /// Smallest `σ_d` over the family and the node where it occurs.
    pub min_sigma: f64,
    pub min_sigma_node: usize,
}

/// `κ(A(x)) = σ₁/σ_d` at every node. Fails with [`Error::SingularNode`] at
/// the first node whose `σ_d` is below `sigma_floor · max_x ‖A(x)‖₂`.
pub fn condition_number_flow(a: &SampledFamily<ComplexMatrix>) -> Result<ConditionFlow> {
    condition_number_flow_with(a, &Tolerances::default())
}

pub fn condition_number_flow_with(a: &SampledFamily<ComplexMatrix>, tol: &Tolerances) -> Result<ConditionFlow> {
    let sv = node_map(a.samples(), |m| {
        if m.cols() > m.rows() {
            eigen::singular_values(&m.adjoint())
        } else {
            eigen::singular_values(m)
        }
    })?;
    let max_norm = a.samples().iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
    let floor = tol.sigma_floor * max_norm;
    let mut min_sigma = f64::INFINITY;
    let mut min_sigma_node = 0;
    for (node, s) in sv.iter().enumerate() {
        let sigma = s.smallest();
        if !(sigma >= floor) || sigma == 0.0 {
            return Err(Error::SingularNode { node, sigma, floor });
        }
        if sigma < min_sigma {
            min_sigma = sigma;
            min_sigma_node = node;
        }
    }
    let kappa = SampledFamily::new(a.grid().clone(), sv.iter().map(|s| s.condition_number()).collect())?;
    Ok(ConditionFlow { kappa, min_sigma, min_sigma_node })
}

/// Area of the graph of a scalar function:
/// `Σ_cells √(1 + |∇f|²) · vol(cell)` with forward-difference gradients at
/// the lower corner of each cell.
pub fn graph_surface_area(f: &SampledFamily<f64>) -> Result<f64> {
    let grid = f.grid();
    if grid.kinds().iter().any(|&k| k != AxisKind::Nodes) {
        return Err(Error::InvalidGrid("surface area needs node samples on every axis".into()));
    }
    let m = grid.dim();
    let counts = grid.counts();
    let h = grid.spacing();
    let volume: f64 = h.iter().product();
    let mut area = 0.0;
    for k in 0..grid.len() {
        let idx = grid.multi_index(k);
        if idx.iter().zip(counts).any(|(&i, &n)| i + 1 == n) {
            continue;
        }
        let mut grad2 = 0.0;
        for j in 0..m {
            let mut next = idx.clone();
            next[j] += 1;
            let slope = (f.samples()[grid.flat_index(&next)] - f.samples()[k]) / h[j];
            grad2 += slope * slope;
        }
        area += (1.0 + grad2).sqrt() * volume;
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::random::{random_unitary, rng_for};
    use crate::sobolev::Grid;
    use crate::unordered::up_map;

    fn family(n: usize, lower: f64, upper: f64, f: impl Fn(f64) -> ComplexMatrix) -> SampledFamily<ComplexMatrix> {
        SampledFamily::sample(Grid::interval(lower, upper, n).unwrap(), |x| f(x[0]))
    }

    fn ex_a(n: f64) -> impl Fn(f64) -> ComplexMatrix {
        move |x| ComplexMatrix::from_real_rows(&[[1.0 / n, x], [x, -1.0 / n]])
    }

    #[test]
    fn hermitian_examples() {
        let flow = char_map_hermitian(&family(401, -1.0, 1.0, ex_a(10.0))).unwrap();
        for (k, s) in flow.flow.samples().iter().enumerate() {
            let x = flow.flow.grid().point(k)[0];
            let a = (x * x + 0.01f64).sqrt();
            assert!((s.values()[0] + a).abs() < 1e-10 && (s.values()[1] - a).abs() < 1e-10);
        }
        assert!(flow.solver_residual_max < 1e-12);

        let constant = char_map_hermitian(&family(5, 0.0, 1.0, |_| ComplexMatrix::from_real_diagonal(&[1.0, 2.0]))).unwrap();
        assert!(constant.flow.samples().iter().all(|s| s.values() == [1.0, 2.0]));

        let diag = char_map_hermitian(&family(21, -1.0, 1.0, |x| ComplexMatrix::from_real_diagonal(&[x, -x]))).unwrap();
        for (k, s) in diag.flow.samples().iter().enumerate() {
            let x = diag.flow.grid().point(k)[0];
            assert_eq!(s.values(), [-x.abs(), x.abs()]);
        }
    }

    #[test]
    fn hermitian_error_names_node() {
        let f = family(5, 0.0, 1.0, |x| ComplexMatrix::from_real_rows(&[[0.0, x], [0.0, 0.0]]));
        let err = char_map_hermitian(&f).unwrap_err();
        assert!(matches!(err, Error::AtNode { node: 1, .. }), "{err}");
        assert!(matches!(err.root(), Error::NotHermitian { .. }));
    }

    #[test]
    fn normal_examples() {
        let skew = char_map_normal(&family(11, 0.0, 1.0, |x| ComplexMatrix::from_real_rows(&[[0.0, x], [-x, 0.0]]))).unwrap();
        for (k, s) in skew.flow.samples().iter().enumerate() {
            let x = skew.flow.grid().point(k)[0];
            let want = UnorderedSpectrum::new(vec![C64::new(0.0, x), C64::new(0.0, -x)]);
            assert!(crate::unordered::d2(s, &want).unwrap() < 1e-12);
        }

        let herm = family(41, -1.0, 1.0, ex_a(7.0));
        let ordered = char_map_hermitian(&herm).unwrap();
        let unordered = char_map_normal(&herm).unwrap();
        for (o, u) in ordered.flow.samples().iter().zip(unordered.flow.samples()) {
            let up = up_map(u).unwrap();
            for (a, b) in o.values().iter().zip(up.values()) {
                assert!((a - b).abs() < 1e-9);
            }
        }

        let u = random_unitary(&mut rng_for(5, 0), 2);
        let rot = family(17, 0.0, 1.0, |x| {
            let z = C64::from_polar(1.0, 3.0 * x);
            u.matmul(&ComplexMatrix::from_diagonal(&[z, -z])).matmul(&u.adjoint())
        });
        let flow = char_map_normal(&rot).unwrap();
        for (k, s) in flow.flow.samples().iter().enumerate() {
            let z = C64::from_polar(1.0, 3.0 * flow.flow.grid().point(k)[0]);
            assert!(crate::unordered::d2(s, &UnorderedSpectrum::new(vec![z, -z])).unwrap() < 1e-12);
        }
    }

    #[test]
    fn embedded_flow_examples() {
        let e = AlmgrenEmbedding::new(2);
        let zero = SampledFamily::sample(Grid::interval(0.0, 1.0, 4).unwrap(), |_| UnorderedSpectrum::from_real(&[0.0, 0.0]));
        assert!(embedded_flow(&zero, &e).unwrap().samples().iter().all(|v| v.iter().all(|&c| c == 0.0)));
        let f = SampledFamily::sample(Grid::interval(0.0, 1.0, 4).unwrap(), |x| UnorderedSpectrum::from_real(&[x[0], 1.0]));
        let g = SampledFamily::sample(Grid::interval(0.0, 1.0, 4).unwrap(), |x| UnorderedSpectrum::from_real(&[1.0, x[0]]));
        assert_eq!(embedded_flow(&f, &e).unwrap(), embedded_flow(&g, &e).unwrap());
        assert!(embedded_flow(&f, &AlmgrenEmbedding::new(3)).is_err());
    }

    #[test]
    fn condition_examples() {
        let c = condition_number_flow(&family(6, 0.0, 1.0, |_| ComplexMatrix::from_real_diagonal(&[2.0, 1.0]))).unwrap();
        assert!(c.kappa.samples().iter().all(|&k| (k - 2.0).abs() < 1e-14));
        let i = condition_number_flow(&family(6, 0.0, 1.0, |_| ComplexMatrix::identity(3))).unwrap();
        assert!(i.kappa.samples().iter().all(|&k| (k - 1.0).abs() < 1e-14));
        let crossing = family(5, -1.0, 1.0, |x| ComplexMatrix::from_real_diagonal(&[1.0, x]));
        let err = condition_number_flow(&crossing).unwrap_err();
        assert!(matches!(err, Error::SingularNode { node: 2, .. }), "{err}");
    }

    #[test]
    fn condition_is_unitarily_invariant() {
        let mut rng = rng_for(8, 0);
        let (u, v) = (random_unitary(&mut rng, 3), random_unitary(&mut rng, 3));
        let base = |x: f64| ComplexMatrix::from_real_rows(&[[2.0 + x, 0.3, 0.0], [0.1, 1.5, x], [0.0, 0.2, 1.0]]);
        let a = condition_number_flow(&family(9, 0.0, 1.0, base)).unwrap();
        let b = condition_number_flow(&family(9, 0.0, 1.0, |x| {
            u.matmul(&base(x)).matmul(&v).scale(C64::from_polar(1.0, 5.0 * x))
        }))
        .unwrap();
        for (p, q) in a.kappa.samples().iter().zip(b.kappa.samples()) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn area_examples() {
        let flat = SampledFamily::sample(Grid::interval(0.0, 1.0, 11).unwrap(), |_| 4.0);
        assert!((graph_surface_area(&flat).unwrap() - 1.0).abs() < 1e-12);
        let v = SampledFamily::sample(Grid::interval(-1.0, 1.0, 101).unwrap(), |x| x[0].abs());
        assert!((graph_surface_area(&v).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let plane = SampledFamily::sample(Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![5, 9]).unwrap(), |x| {
            3.0 * x[0] + 4.0 * x[1]
        });
        assert!((graph_surface_area(&plane).unwrap() - 2.0 * 26f64.sqrt()).abs() < 1e-12);
    }
}
