//! Two-block unitary splitting of normal matrices along a spectral gap.
//!
//! [`block_diagonalize`] builds `U` from eigenvectors grouped by cluster, so
//! the blocks come out diagonal. [`block_diagonalize_aligned`] instead
//! projects a fixed reference frame onto the two invariant subspaces and
//! orthonormalizes it by the polar factor. The result depends smoothly on the
//! matrix, which is what difference bounds along families require.

use serde::{Deserialize, Serialize};

use crate::charmap::node_map;
use crate::config::Tolerances;
use crate::eigen::{self, cmp_complex, EigenDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::report::ExperimentReport;
use crate::sobolev::SampledFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionStrategy {
    /// Split the sorted real spectrum at its largest gap.
    Hermitian,
    /// Two clusters maximizing the smallest inter-cluster distance.
    Normal,
}

/// Indices into a spectrum split into two nonempty clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPartition {
    pub cluster_a: Vec<usize>,
    pub cluster_b: Vec<usize>,
    /// Smallest distance between the two cluster spectra.
    pub gap: f64,
    /// The spectrum the indices refer to.
    pub values: Vec<C64>,
}

impl SpectralPartition {
    pub fn values_a(&self) -> Vec<C64> {
        self.cluster_a.iter().map(|&i| self.values[i]).collect()
    }

    pub fn values_b(&self) -> Vec<C64> {
        self.cluster_b.iter().map(|&i| self.values[i]).collect()
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.cluster_a.len(), self.cluster_b.len())
    }
}

fn cross_gap(values: &[C64], in_a: &[bool]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if in_a[i] && !in_a[j] {
                gap = gap.min((values[i] - values[j]).norm());
            }
        }
    }
    gap
}

/// Largest `min_{i∈A, j∈B} |z_i − z_j|` by scanning all `2^{d−1} − 1`
/// bipartitions. Ties keep the first bipartition in mask order.
fn best_bipartition_exhaustive(values: &[C64]) -> Vec<bool> {
    let d = values.len();
    let mut best = (f64::NEG_INFINITY, vec![false; d]);
    for mask in 1u64..(1u64 << (d - 1)) {
        let in_a: Vec<bool> = (0..d).map(|i| i < d - 1 && mask & (1 << i) != 0).collect();
        let gap = cross_gap(values, &in_a);
        if gap > best.0 {
            best = (gap, in_a);
        }
    }
    best.1
}

/// The same maximizer via single linkage: cutting the longest edge of a
/// minimum spanning tree (Prim's algorithm) gives the optimal two clusters.
fn best_bipartition_mst(values: &[C64]) -> Vec<bool> {
    let d = values.len();
    let mut in_tree = vec![false; d];
    let mut dist = vec![f64::INFINITY; d];
    let mut parent = vec![usize::MAX; d];
    dist[0] = 0.0;
    let mut edges = Vec::with_capacity(d - 1);
    for _ in 0..d {
        let u = (0..d).filter(|&i| !in_tree[i]).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            edges.push((dist[u], parent[u], u));
        }
        for v in 0..d {
            if !in_tree[v] {
                let w = (values[u] - values[v]).norm();
                if w < dist[v] {
                    dist[v] = w;
                    parent[v] = u;
                }
            }
        }
    }
    let cut = edges.iter().enumerate().max_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).map(|(k, _)| k).unwrap();
    // Flood fill from one endpoint of the removed edge.
    let mut adjacency = vec![Vec::new(); d];
    for (k, &(_, a, b)) in edges.iter().enumerate() {
        if k != cut {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    let mut side = vec![false; d];
    let mut stack = vec![edges[cut].1];
    side[edges[cut].1] = true;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if !side[v] {
                side[v] = true;
                stack.push(v);
            }
        }
    }
    side
}

/// Splits a spectrum into two clusters. `cluster_a` is the cluster holding
/// the `(Re, Im)`-smallest value, so for the Hermitian strategy it is the
/// lower part of the spectrum.
pub fn partition_by_gap(spectrum: &[C64], strategy: PartitionStrategy) -> Result<SpectralPartition> {
    partition_by_gap_with(spectrum, strategy, &Tolerances::default())
}

pub fn partition_by_gap_with(
    spectrum: &[C64],
    strategy: PartitionStrategy,
    tol: &Tolerances,
) -> Result<SpectralPartition> {
    let d = spectrum.len();
    let scale = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let spread = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (spectrum[i] - spectrum[j]).norm())
        .fold(0.0, f64::max);
    if d < 2 || spread <= tol.gap_tol * scale || spread == 0.0 {
        return Err(Error::AllEqual);
    }

    let mut in_a = match strategy {
        PartitionStrategy::Hermitian => {
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| spectrum[a].re.total_cmp(&spectrum[b].re));
            let split = (0..d - 1)
                .map(|k| (spectrum[order[k + 1]].re - spectrum[order[k]].re, k))
                .fold((f64::NEG_INFINITY, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
                .1;
            let mut in_a = vec![false; d];
            for &i in &order[..=split] {
                in_a[i] = true;
            }
            in_a
        }
        PartitionStrategy::Normal if d <= 12 => best_bipartition_exhaustive(spectrum),
        PartitionStrategy::Normal => best_bipartition_mst(spectrum),
    };
    let smallest = (0..d).min_by(|&a, &b| cmp_complex(&spectrum[a], &spectrum[b])).unwrap();
    if !in_a[smallest] {
        in_a.iter_mut().for_each(|v| *v = !*v);
    }
    let gap = match strategy {
        PartitionStrategy::Hermitian => {
            let top_a = (0..d).filter(|&i| in_a[i]).map(|i| spectrum[i].re).fold(f64::NEG_INFINITY, f64::max);
            let low_b = (0..d).filter(|&i| !in_a[i]).map(|i| spectrum[i].re).fold(f64::INFINITY, f64::min);
            low_b - top_a
        }
        PartitionStrategy::Normal => cross_gap(spectrum, &in_a),
    };
    Ok(SpectralPartition {
        cluster_a: (0..d).filter(|&i| in_a[i]).collect(),
        cluster_b: (0..d).filter(|&i| !in_a[i]).collect(),
        gap,
        values: spectrum.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagonalization {
    /// Unitary; the first `block_b.rows()` columns span the first cluster.
    pub u: ComplexMatrix,
    pub block_b: ComplexMatrix,
    pub block_c: ComplexMatrix,
    /// `‖U*AU − diag(B, C)‖₂`.
    pub off_diag_residual: f64,
}

impl BlockDiagonalization {
    /// `U* A U` with the off-diagonal blocks set to zero.
    pub fn block_matrix(&self) -> ComplexMatrix {
        let (k, l) = (self.block_b.rows(), self.block_c.rows());
        let mut data = vec![C64::new(0.0, 0.0); (k + l) * (k + l)];
        for i in 0..k {
            for j in 0..k {
                data[i * (k + l) + j] = self.block_b[(i, j)];
            }
        }
        for i in 0..l {
            for j in 0..l {
                data[(k + i) * (k + l) + k + j] = self.block_c[(i, j)];
            }
        }
        ComplexMatrix::new(k + l, k + l, data).expect("finite blocks")
    }
}

fn decompose(a: &ComplexMatrix, tol: &Tolerances) -> Result<(EigenDecomposition, bool)> {
    let hermitian = a.is_hermitian(tol.class_tol);
    let dec = if hermitian { eigen::eig_hermitian_with(a, tol)? } else { eigen::eig_normal_with(a, tol)? };
    Ok((dec, hermitian))
}

/// Column indices of the eigenbasis falling into each cluster, by nearest
/// cluster value.
fn assign_clusters(dec: &EigenDecomposition, p: &SpectralPartition) -> Result<(Vec<usize>, Vec<usize>)> {
    let (va, vb) = (p.values_a(), p.values_b());
    let dist = |z: C64, set: &[C64]| set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (j, &z) in dec.spectrum.iter().enumerate() {
        if dist(z, &va) <= dist(z, &vb) {
            a.push(j);
        } else {
            b.push(j);
        }
    }
    if (a.len(), b.len()) != p.sizes() {
        return Err(Error::BadParam(format!(
            "partition sizes {:?} do not match the spectrum (found {}+{})",
            p.sizes(),
            a.len(),
            b.len()
        )));
    }
    Ok((a, b))
}

fn check_gap(a: &ComplexMatrix, p: &SpectralPartition, tol: &Tolerances) -> Result<()> {
    let required = tol.gap_tol * a.frobenius_norm();
    if !(p.gap >= required) || p.gap == 0.0 {
        return Err(Error::GapTooSmall { gap: p.gap, required });
    }
    Ok(())
}

fn assemble(a: &ComplexMatrix, u: ComplexMatrix, k: usize, hermitian: bool) -> BlockDiagonalization {
    let d = a.rows();
    let m = u.adjoint().matmul(a).matmul(&u);
    let mut block_b = m.principal_block(0, k);
    let mut block_c = m.principal_block(k, d - k);
    if hermitian {
        block_b = block_b.hermitian_part();
        block_c = block_c.hermitian_part();
    }
    let upper = m.block(0, k, k, d - k).frobenius_norm();
    let lower = m.block(k, 0, d - k, k).frobenius_norm();
    let off_diag_residual = (upper * upper + lower * lower).sqrt();
    BlockDiagonalization { u, block_b, block_c, off_diag_residual }
}

/// `U* A U = diag(B, C)` with `U` made of eigenvectors grouped by cluster.
pub fn block_diagonalize(a: &ComplexMatrix, p: &SpectralPartition) -> Result<BlockDiagonalization> {
    block_diagonalize_with(a, p, &Tolerances::default())
}

pub fn block_diagonalize_with(
    a: &ComplexMatrix,
    p: &SpectralPartition,
    tol: &Tolerances,
) -> Result<BlockDiagonalization> {
    let (dec, hermitian) = decompose(a, tol)?;
    check_gap(a, p, tol)?;
    let (ca, cb) = assign_clusters(&dec, p)?;
    let columns: Vec<Vec<C64>> = ca.iter().chain(&cb).map(|&j| dec.basis.column(j)).collect();
    let u = ComplexMatrix::from_columns(a.rows(), &columns);
    Ok(assemble(a, u, ca.len(), hermitian))
}

/// `X (X*X)^{-1/2}`, the orthonormal frame closest to the columns of `X`.
fn polar_frame(x: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let gram = x.adjoint().matmul(x).hermitian_part();
    let dec = eigen::eig_hermitian_with(&gram, tol)?;
    let smallest = dec.real_spectrum().into_iter().fold(f64::INFINITY, f64::min);
    if !(smallest > 1e-6) {
        return Err(Error::BadParam(format!(
            "reference frame is nearly orthogonal to the invariant subspace (overlap {smallest:.3e})"
        )));
    }
    let inv_sqrt: Vec<C64> = dec.spectrum.iter().map(|l| C64::new(l.re.powf(-0.5), 0.0)).collect();
    let root = dec.basis.matmul(&ComplexMatrix::from_diagonal(&inv_sqrt)).matmul(&dec.basis.adjoint());
    Ok(x.matmul(&root))
}

/// Orthogonal projector onto the span of the given eigenvector columns.
fn projector(dec: &EigenDecomposition, columns: &[usize]) -> ComplexMatrix {
    let d = dec.basis.rows();
    let v = ComplexMatrix::from_columns(d, &columns.iter().map(|&j| dec.basis.column(j)).collect::<Vec<_>>());
    v.matmul(&v.adjoint())
}

/// Block-diagonalization with `U = (polar(P_A R_A), polar(P_B R_B))`, where
/// `P_A`, `P_B` are the spectral projectors of the clusters and `R_A`, `R_B`
/// the column blocks of a fixed unitary `reference`. If both clusters have
/// the same size, the orientation that overlaps the reference best is used.
pub fn block_diagonalize_aligned(
    a: &ComplexMatrix,
    p: &SpectralPartition,
    reference: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<BlockDiagonalization> {
    let (dec, hermitian) = decompose(a, tol)?;
    check_gap(a, p, tol)?;
    let (ca, cb) = assign_clusters(&dec, p)?;
    let d = a.rows();
    let k = ca.len();
    let (pa, pb) = (projector(&dec, &ca), projector(&dec, &cb));
    let ra = reference.block(0, 0, d, k);
    let rb = reference.block(0, k, d, d - k);
    let (pa, pb) = if k == d - k {
        let straight = pa.matmul(&ra).frobenius_norm() + pb.matmul(&rb).frobenius_norm();
        let swapped = pb.matmul(&ra).frobenius_norm() + pa.matmul(&rb).frobenius_norm();
        if swapped > straight {
            (pb, pa)
        } else {
            (pa, pb)
        }
    } else {
        (pa, pb)
    };
    let ua = polar_frame(&pa.matmul(&ra), tol)?;
    let ub = polar_frame(&pb.matmul(&rb), tol)?;
    let columns: Vec<Vec<C64>> = (0..k).map(|j| ua.column(j)).chain((0..d - k).map(|j| ub.column(j))).collect();
    Ok(assemble(a, ComplexMatrix::from_columns(d, &columns), k, hermitian))
}

fn block_spectrum(m: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<C64>> {
    if m.is_hermitian(tol.class_tol) {
        Ok(eigen::eig_hermitian_with(m, tol)?.spectrum)
    } else {
        Ok(eigen::eig_normal_with(m, tol)?.spectrum)
    }
}

/// Empirical separation constant
/// `min_{μ ∈ spec B(A), ν ∈ spec C(B)} |‖B‖₂ μ − ‖A‖₂ ν| / (‖A‖₂ ‖B‖₂)`.
pub fn separation_margin(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    pa: &SpectralPartition,
    pb: &SpectralPartition,
) -> Result<f64> {
    let tol = Tolerances::default();
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mu = block_spectrum(&block_diagonalize_with(a, pa, &tol)?.block_b, &tol)?;
    let nu = block_spectrum(&block_diagonalize_with(b, pb, &tol)?.block_c, &tol)?;
    let mut margin = f64::INFINITY;
    for m in &mu {
        for n in &nu {
            margin = margin.min((m * nb - n * na).norm() / (na * nb));
        }
    }
    Ok(margin)
}

fn family_strategy(a: &SampledFamily<ComplexMatrix>, tol: &Tolerances) -> PartitionStrategy {
    if a.samples().iter().all(|m| m.is_hermitian(tol.class_tol)) {
        PartitionStrategy::Hermitian
    } else {
        PartitionStrategy::Normal
    }
}

/// Node-wise and cellwise constants for the block-diagonalization
/// difference bounds on two families over the same 1-D grid.
///
/// With `M_j = U*(A_j) A_j U(A_j)` built by [`block_diagonalize_aligned`]
/// against the eigenvector frame of `A1` at the first node:
/// - `C_nodes = max_x ‖M₁ − M₂‖₂ / ‖A₁ − A₂‖₂`;
/// - `C_cells = max_cells ‖ΔM₁ − ΔM₂‖₂ / min_j R_j` with
///   `R_j = ‖ΔA₁ − ΔA₂‖₂ + (‖ΔA₁‖₂ + ‖ΔA₂‖₂) ‖A_j‖₂⁻¹ ‖A₁ − A₂‖₂`,
///   differences taken as forward quotients.
pub fn bdiag_difference_bounds(
    a1: &SampledFamily<ComplexMatrix>,
    a2: &SampledFamily<ComplexMatrix>,
) -> Result<ExperimentReport> {
    bdiag_difference_bounds_with(a1, a2, &Tolerances::default())
}

pub fn bdiag_difference_bounds_with(
    a1: &SampledFamily<ComplexMatrix>,
    a2: &SampledFamily<ComplexMatrix>,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    if a1.grid().dim() != 1 {
        return Err(Error::NotCurve(a1.grid().dim()));
    }
    let diff = a1.zip_with(a2, |x, y| x.sub(y))?;
    let strategy = if family_strategy(a1, tol) == PartitionStrategy::Hermitian
        && family_strategy(a2, tol) == PartitionStrategy::Hermitian
    {
        PartitionStrategy::Hermitian
    } else {
        PartitionStrategy::Normal
    };

    let partitions = |f: &SampledFamily<ComplexMatrix>| {
        node_map(f.samples(), |m| {
            if m.frobenius_norm() == 0.0 {
                return Err(Error::ZeroMatrix);
            }
            let (dec, _) = decompose(m, tol)?;
            partition_by_gap_with(&dec.spectrum, strategy, tol)
        })
    };
    let (p1, p2) = (partitions(a1)?, partitions(a2)?);
    let sizes = p1[0].sizes();
    for (node, p) in p1.iter().chain(&p2).enumerate() {
        if p.sizes() != sizes {
            return Err(Error::ClusterFlip { node: node % p1.len() });
        }
    }

    let reference = block_diagonalize_with(&a1.samples()[0], &p1[0], tol)?.u;
    let blocks = |f: &SampledFamily<ComplexMatrix>, ps: &[SpectralPartition]| {
        let pairs: Vec<(&ComplexMatrix, &SpectralPartition)> = f.samples().iter().zip(ps).collect();
        node_map(&pairs, |(m, p)| Ok(block_diagonalize_aligned(m, p, &reference, tol)?.block_matrix()))
    };
    let (m1, m2) = (blocks(a1, &p1)?, blocks(a2, &p2)?);

    let mut report = ExperimentReport::new("bdiag_difference_bounds");
    report.provenance(
        "pointwise: |U*(A1)A1U(A1) - U*(A2)A2U(A2)| <= C |A1 - A2| with C depending only on d",
    );
    report.provenance(
        "a.e.: |(M1)' - (M2)'| <= C (|A1' - A2'| + (|A1'| + |A2'|) |Aj|^-1 |A1 - A2|) for j = 1, 2",
    );

    let n = a1.len();
    let mut node_lhs = Vec::with_capacity(n);
    let mut c_nodes: f64 = 0.0;
    let mut unbounded = 0;
    for k in 0..n {
        let lhs = m1[k].sub(&m2[k]).frobenius_norm();
        let rhs = diff.samples()[k].frobenius_norm();
        node_lhs.push(lhs);
        if rhs > 0.0 {
            c_nodes = c_nodes.max(lhs / rhs);
        } else if lhs > 1e-12 * (1.0 + m1[k].frobenius_norm()) {
            unbounded += 1;
        }
    }

    let h = a1.grid().spacing()[0];
    let mut cell_lhs = Vec::with_capacity(n.saturating_sub(1));
    let mut c_cells: f64 = 0.0;
    for k in 0..n.saturating_sub(1) {
        let dm1 = m1[k + 1].sub(&m1[k]).scale_real(1.0 / h);
        let dm2 = m2[k + 1].sub(&m2[k]).scale_real(1.0 / h);
        let lhs = dm1.sub(&dm2).frobenius_norm();
        let da1 = a1.samples()[k + 1].sub(&a1.samples()[k]).scale_real(1.0 / h);
        let da2 = a2.samples()[k + 1].sub(&a2.samples()[k]).scale_real(1.0 / h);
        let gap = diff.samples()[k].frobenius_norm();
        let slope = da1.frobenius_norm() + da2.frobenius_norm();
        let base = da1.sub(&da2).frobenius_norm();
        let rhs = [&a1.samples()[k], &a2.samples()[k]]
            .iter()
            .map(|m| base + slope * gap / m.frobenius_norm())
            .fold(f64::INFINITY, f64::min);
        cell_lhs.push(lhs);
        if rhs > 0.0 {
            c_cells = c_cells.max(lhs / rhs);
        } else if lhs > 1e-12 * (1.0 + dm1.frobenius_norm()) {
            unbounded += 1;
        }
    }

    report.meta("nodes", n);
    report.meta("strategy", format!("{strategy:?}"));
    report.meta("cluster_sizes", vec![sizes.0, sizes.1]);
    report.scalar("c_nodes", c_nodes)?;
    report.scalar("c_cells", c_cells)?;
    report.scalar("max_node_lhs", node_lhs.iter().copied().fold(0.0, f64::max))?;
    report.scalar("max_cell_lhs", cell_lhs.iter().copied().fold(0.0, f64::max))?;
    report.scalar("unbounded_points", unbounded as f64)?;
    report.series("node_lhs", node_lhs)?;
    report.series("cell_lhs", cell_lhs)?;
    if unbounded > 0 {
        report.flag(format!("{unbounded} points have a zero right-hand side but a nonzero left-hand side"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_normal, random_unitary, rng_for};
    use crate::sobolev::Grid;
    use crate::unordered::{d2, UnorderedSpectrum};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reals(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn partition_examples() {
        let p = partition_by_gap(&reals(&[-1.0, 1.0]), PartitionStrategy::Hermitian).unwrap();
        assert_eq!((p.cluster_a.clone(), p.cluster_b.clone(), p.gap), (vec![0], vec![1], 2.0));
        let p = partition_by_gap(&reals(&[5.1, 0.0, 5.0, 0.1]), PartitionStrategy::Hermitian).unwrap();
        assert_eq!((p.cluster_a.clone(), p.cluster_b.clone()), (vec![1, 3], vec![0, 2]));
        assert!((p.gap - 4.9).abs() < 1e-12);
        let square = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let p = partition_by_gap(&square, PartitionStrategy::Normal).unwrap();
        assert!((p.gap - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(partition_by_gap(&reals(&[2.0, 2.0, 2.0]), PartitionStrategy::Normal), Err(Error::AllEqual)));
    }

    #[test]
    fn single_linkage_matches_exhaustive() {
        let mut rng = rng_for(61, 0);
        for d in 2..=10 {
            for _ in 0..20 {
                let z: Vec<C64> = (0..d).map(|_| crate::random::gaussian_complex(&mut rng)).collect();
                let ex = best_bipartition_exhaustive(&z);
                let mst = best_bipartition_mst(&z);
                assert_eq!(cross_gap(&z, &ex), cross_gap(&z, &mst));
            }
        }
    }

    #[test]
    fn already_block_diagonal() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, -3.0]]);
        let spec = eigen::eig_hermitian(&a).unwrap().spectrum;
        let p = partition_by_gap(&spec, PartitionStrategy::Hermitian).unwrap();
        let bd = block_diagonalize(&a, &p).unwrap();
        assert!(bd.off_diag_residual <= 1e-12);
        assert_eq!((bd.block_b.rows(), bd.block_c.rows()), (1, 2));
        assert!((bd.block_b[(0, 0)].re + 3.0).abs() < 1e-12);
    }

    #[test]
    fn construct_then_recover() {
        let mut rng = rng_for(62, 0);
        let v = random_unitary(&mut rng, 3);
        let a = crate::random::conjugate_diagonal(&v, &reals(&[1.0, 1.0, -1.0])).hermitian_part();
        let spec = eigen::eig_hermitian(&a).unwrap().spectrum;
        let p = partition_by_gap(&spec, PartitionStrategy::Hermitian).unwrap();
        assert_eq!(p.sizes(), (1, 2));
        let bd = block_diagonalize(&a, &p).unwrap();
        assert!(bd.off_diag_residual <= 1e-10);
        assert!(bd.u.unitary_residual() < 1e-12);
    }

    #[test]
    fn ex_a_matrix_splits_one_plus_one() {
        let (n, x) = (10.0, 0.3);
        let a = ComplexMatrix::from_real_rows(&[[1.0 / n, x], [x, -1.0 / n]]);
        let spec = eigen::eig_hermitian(&a).unwrap().spectrum;
        let p = partition_by_gap(&spec, PartitionStrategy::Hermitian).unwrap();
        let bd = block_diagonalize(&a, &p).unwrap();
        let an = (x * x + 1.0 / (n * n)).sqrt();
        assert!((bd.block_b[(0, 0)].re + an).abs() < 1e-12);
        assert!((bd.block_c[(0, 0)].re - an).abs() < 1e-12);
    }

    #[test]
    fn gap_and_normality_errors() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 2.0]]);
        let p = partition_by_gap(&reals(&[1.0, 2.0]), PartitionStrategy::Hermitian).unwrap();
        assert!(matches!(block_diagonalize(&a, &p), Err(Error::NotNormal { .. })));
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 1.0 + 1e-9]);
        let p = partition_by_gap(&reals(&[1.0, 1.0 + 1e-9]), PartitionStrategy::Hermitian);
        assert!(matches!(p, Err(Error::AllEqual)));
        let tight = SpectralPartition { cluster_a: vec![0], cluster_b: vec![1], gap: 1e-9, values: reals(&[1.0, 1.0 + 1e-9]) };
        assert!(matches!(block_diagonalize(&a, &tight), Err(Error::GapTooSmall { .. })));
    }

    #[test]
    fn separation_examples() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let p = partition_by_gap(&reals(&[1.0, -1.0]), PartitionStrategy::Hermitian).unwrap();
        let m = separation_margin(&a, &a, &p, &p).unwrap();
        assert!((m - 2f64.sqrt()).abs() < 1e-15, "{m}");

        let mut rng = rng_for(63, 0);
        let b = random_hermitian(&mut rng, 4);
        let pb = partition_by_gap(&eigen::eig_hermitian(&b).unwrap().spectrum, PartitionStrategy::Hermitian).unwrap();
        let a = random_hermitian(&mut rng, 4);
        let pa = partition_by_gap(&eigen::eig_hermitian(&a).unwrap().spectrum, PartitionStrategy::Hermitian).unwrap();
        let m1 = separation_margin(&a, &b, &pa, &pb).unwrap();
        let scaled = |m: &ComplexMatrix, p: &SpectralPartition, s: f64| {
            let mut q = p.clone();
            q.values.iter_mut().for_each(|z| *z *= s);
            q.gap *= s;
            (m.scale_real(s), q)
        };
        let (sa, spa) = scaled(&a, &pa, 3.5);
        let (sb, spb) = scaled(&b, &pb, 3.5);
        assert!((separation_margin(&sa, &sb, &spa, &spb).unwrap() - m1).abs() < 1e-12);

        // Closed form for two matrices of the counterexample family at x = 0.5.
        let ex = |n: f64| ComplexMatrix::from_real_rows(&[[1.0 / n, 0.5], [0.5, -1.0 / n]]);
        let (a, b) = (ex(4.0), ex(9.0));
        let part = |m: &ComplexMatrix| partition_by_gap(&eigen::eig_hermitian(m).unwrap().spectrum, PartitionStrategy::Hermitian).unwrap();
        let (an, bn) = ((0.25f64 + 1.0 / 16.0).sqrt(), (0.25f64 + 1.0 / 81.0).sqrt());
        let expected = ((-an) * 2f64.sqrt() * bn - bn * 2f64.sqrt() * an).abs() / (2.0 * an * bn);
        assert!((separation_margin(&a, &b, &part(&a), &part(&b)).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn spectrum_is_preserved_for_normal_input() {
        let mut rng = rng_for(64, 0);
        let (a, z) = random_normal(&mut rng, 6);
        let p = partition_by_gap(&z, PartitionStrategy::Normal).unwrap();
        let bd = block_diagonalize(&a, &p).unwrap();
        let mut got = block_spectrum(&bd.block_b, &Tolerances::default()).unwrap();
        got.extend(block_spectrum(&bd.block_c, &Tolerances::default()).unwrap());
        let dist = d2(&UnorderedSpectrum::new(got), &UnorderedSpectrum::new(z)).unwrap();
        assert!(dist <= 1e-9 * 6.0, "{dist}");
    }

    fn ex_a_family(n: f64, nodes: usize) -> SampledFamily<ComplexMatrix> {
        SampledFamily::sample(Grid::interval(0.25, 1.0, nodes).unwrap(), |x| {
            ComplexMatrix::from_real_rows(&[[1.0 / n, x[0]], [x[0], -1.0 / n]])
        })
    }

    #[test]
    fn difference_bounds_identical_families() {
        let f = ex_a_family(8.0, 31);
        let r = bdiag_difference_bounds(&f, &f).unwrap();
        assert_eq!(r.get("max_node_lhs"), Some(0.0));
        assert_eq!(r.get("c_nodes"), Some(0.0));
        assert_eq!(r.get("unbounded_points"), Some(0.0));
    }

    #[test]
    fn difference_bounds_scale_with_perturbation() {
        let f = ex_a_family(8.0, 41);
        let e = ComplexMatrix::from_real_rows(&[[0.3, 0.7], [0.7, -0.3]]);
        let lhs = |eps: f64| {
            let g = f.map(|m| m.add(&e.scale_real(eps)));
            bdiag_difference_bounds(&f, &g).unwrap()
        };
        let (r1, r2) = (lhs(1e-3), lhs(1e-4));
        let ratio = r1.get("max_node_lhs").unwrap() / r2.get("max_node_lhs").unwrap();
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
        assert!(r1.get("c_nodes").unwrap() < 10.0);
    }

    #[test]
    fn difference_constant_is_stable_in_n() {
        let cs: Vec<f64> = [8.0, 16.0, 32.0]
            .iter()
            .map(|&n| {
                let r = bdiag_difference_bounds(&ex_a_family(n, 301), &ex_a_family(2.0 * n, 301)).unwrap();
                r.get("c_nodes").unwrap().max(r.get("c_cells").unwrap())
            })
            .collect();
        assert!(cs.iter().all(|&c| c.is_finite() && c < 10.0), "{cs:?}");
    }
}
