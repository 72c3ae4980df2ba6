//! Sampled families on uniform grids and their discrete Sobolev norms.
//!
//! Derivatives are forward differences placed on cells (indexed by their left
//! node). Integrals are left-endpoint Riemann sums, so a function sampled on
//! nodes drops the last node of every axis while a function sampled on cells
//! uses all of them. Both conventions give the exact measure of the box for
//! constants.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::eigen::OrderedSpectrum;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::unordered::{self, UnorderedSpectrum};

/// Whether the samples along an axis sit on grid nodes or on the cells
/// between them (left endpoints).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    #[default]
    Nodes,
    Cells,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
    spacing: Vec<f64>,
    kinds: Vec<AxisKind>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != counts.len() {
            return Err(Error::InvalidGrid(format!(
                "lower, upper and counts must have the same positive length (got {}, {}, {})",
                lower.len(),
                upper.len(),
                counts.len()
            )));
        }
        for j in 0..lower.len() {
            if !(lower[j].is_finite() && upper[j].is_finite() && lower[j] < upper[j]) {
                return Err(Error::InvalidGrid(format!("axis {j}: need finite lower < upper")));
            }
            if counts[j] < 2 {
                return Err(Error::InvalidGrid(format!("axis {j}: need at least 2 nodes")));
            }
        }
        let spacing = (0..lower.len()).map(|j| (upper[j] - lower[j]) / (counts[j] - 1) as f64).collect();
        let kinds = vec![AxisKind::Nodes; lower.len()];
        Ok(Grid { lower, upper, counts, spacing, kinds })
    }

    /// `count` equispaced nodes on `[lower, upper]`, endpoints included.
    pub fn interval(lower: f64, upper: f64, count: usize) -> Result<Self> {
        Grid::new(vec![lower], vec![upper], vec![count])
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn kinds(&self) -> &[AxisKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat index `k` (row-major, first axis slowest).
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = k % self.counts[j];
            k /= self.counts[j];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn coordinate(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim()).map(|j| self.lower[j] + idx[j] as f64 * self.spacing[j]).collect()
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.coordinate(&self.multi_index(k))
    }

    /// All sample locations, in flat order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Riemann weight of sample `k`.
    pub fn weight(&self, k: usize) -> f64 {
        let idx = self.multi_index(k);
        let mut w = 1.0;
        for j in 0..self.dim() {
            let last = idx[j] + 1 == self.counts[j];
            if self.kinds[j] == AxisKind::Nodes && last {
                return 0.0;
            }
            w *= self.spacing[j];
        }
        w
    }

    /// Grid of the forward differences along `axis`: one fewer sample on that
    /// axis, marked as living on cells.
    pub fn cells_along(&self, axis: usize) -> Result<Grid> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim() });
        }
        if self.kinds[axis] == AxisKind::Cells {
            return Err(Error::InvalidGrid(format!("axis {axis} already holds cell values")));
        }
        let mut g = self.clone();
        g.counts[axis] -= 1;
        g.upper[axis] -= g.spacing[axis];
        g.kinds[axis] = AxisKind::Cells;
        Ok(g)
    }

    fn same_samples(&self, other: &Grid) -> bool {
        self.counts == other.counts
            && self.kinds == other.kinds
            && self.lower.iter().zip(&other.lower).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
            && self.spacing.iter().zip(&other.spacing).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
    }
}

/// Values that can be written as a flat row of reals.
pub trait CsvValue {
    fn component_names(&self) -> Vec<String>;
    fn components(&self) -> Vec<f64>;
}

/// Values in a normed vector space: differences and Euclidean norms.
pub trait VectorValue: CsvValue + Clone + Send + Sync {
    /// `(other − self) · s`.
    fn diff_scaled(&self, other: &Self, s: f64) -> Self;
    fn norm2(&self) -> f64;
    /// Number of scalar entries, used to check that samples agree in shape.
    fn size(&self) -> usize;
}

impl CsvValue for f64 {
    fn component_names(&self) -> Vec<String> {
        vec!["value".into()]
    }
    fn components(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl VectorValue for f64 {
    fn diff_scaled(&self, other: &Self, s: f64) -> Self {
        (other - self) * s
    }
    fn norm2(&self) -> f64 {
        self.abs()
    }
    fn size(&self) -> usize {
        1
    }
}

impl CsvValue for Vec<f64> {
    fn component_names(&self) -> Vec<String> {
        (0..self.len()).map(|i| format!("v{i}")).collect()
    }
    fn components(&self) -> Vec<f64> {
        self.clone()
    }
}

impl VectorValue for Vec<f64> {
    fn diff_scaled(&self, other: &Self, s: f64) -> Self {
        self.iter().zip(other).map(|(a, b)| (b - a) * s).collect()
    }
    fn norm2(&self) -> f64 {
        self.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn size(&self) -> usize {
        self.len()
    }
}

impl CsvValue for ComplexMatrix {
    fn component_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(2 * self.rows() * self.cols());
        for part in ["re", "im"] {
            for r in 0..self.rows() {
                for c in 0..self.cols() {
                    names.push(format!("{part}_{r}_{c}"));
                }
            }
        }
        names
    }
    fn components(&self) -> Vec<f64> {
        let e = self.entries();
        e.iter().map(|z| z.re).chain(e.iter().map(|z| z.im)).collect()
    }
}

impl VectorValue for ComplexMatrix {
    fn diff_scaled(&self, other: &Self, s: f64) -> Self {
        other.sub(self).scale_real(s)
    }
    fn norm2(&self) -> f64 {
        self.frobenius_norm()
    }
    fn size(&self) -> usize {
        self.rows() * self.cols()
    }
}

impl CsvValue for OrderedSpectrum {
    fn component_names(&self) -> Vec<String> {
        (0..self.len()).map(|i| format!("lambda{i}")).collect()
    }
    fn components(&self) -> Vec<f64> {
        self.values().to_vec()
    }
}

impl CsvValue for UnorderedSpectrum {
    fn component_names(&self) -> Vec<String> {
        (0..self.len()).flat_map(|i| [format!("re{i}"), format!("im{i}")]).collect()
    }
    fn components(&self) -> Vec<f64> {
        self.canonical().iter().flat_map(|z| [z.re, z.im]).collect()
    }
}

/// One value per grid sample, in flat order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFamily<V> {
    grid: Grid,
    samples: Vec<V>,
}

impl<V> SampledFamily<V> {
    pub fn new(grid: Grid, samples: Vec<V>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        Ok(SampledFamily { grid, samples })
    }

    /// Samples `f` at every grid location.
    pub fn sample(grid: Grid, f: impl Fn(&[f64]) -> V) -> Self {
        let samples = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        SampledFamily { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[V] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<V> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn map<W>(&self, f: impl Fn(&V) -> W) -> SampledFamily<W> {
        SampledFamily { grid: self.grid.clone(), samples: self.samples.iter().map(f).collect() }
    }

    pub fn try_map<W>(&self, f: impl Fn(&V) -> Result<W>) -> Result<SampledFamily<W>> {
        let samples = self.samples.iter().map(f).collect::<Result<_>>()?;
        Ok(SampledFamily { grid: self.grid.clone(), samples })
    }

    /// Pointwise combination of two families on the same grid.
    pub fn zip_with<W, U>(&self, other: &SampledFamily<W>, f: impl Fn(&V, &W) -> U) -> Result<SampledFamily<U>> {
        check_same_grid(&self.grid, &other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| f(a, b)).collect();
        Ok(SampledFamily { grid: self.grid.clone(), samples })
    }

    fn require_curve(&self) -> Result<()> {
        if self.grid.dim() != 1 {
            return Err(Error::NotCurve(self.grid.dim()));
        }
        Ok(())
    }
}

impl<V: CsvValue> SampledFamily<V> {
    /// CSV with columns `i0.., x0.., <value components>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = self.grid.dim();
        let mut header: Vec<String> = (0..m).map(|j| format!("i{j}")).collect();
        header.extend((0..m).map(|j| format!("x{j}")));
        if let Some(first) = self.samples.first() {
            header.extend(first.component_names());
        }
        writeln!(out, "{}", header.join(","))?;
        for (k, v) in self.samples.iter().enumerate() {
            let idx = self.grid.multi_index(k);
            let x = self.grid.coordinate(&idx);
            let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            row.extend(x.iter().map(|c| c.to_string()));
            row.extend(v.components().iter().map(|c| c.to_string()));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_samples(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn check_shapes<V: VectorValue>(f: &SampledFamily<V>) -> Result<()> {
    if let Some(first) = f.samples.first() {
        if let Some(bad) = f.samples.iter().position(|v| v.size() != first.size()) {
            return Err(Error::ShapeMismatch(format!(
                "sample {bad} has {} entries, sample 0 has {}",
                f.samples[bad].size(),
                first.size()
            )));
        }
    }
    Ok(())
}

fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::BadExponent(q));
    }
    Ok(())
}

fn check_mask(grid: &Grid, mask: Option<&[bool]>) -> Result<()> {
    match mask {
        Some(m) if m.len() != grid.len() => Err(Error::InvalidGrid(format!(
            "mask has {} entries for {} samples",
            m.len(),
            grid.len()
        ))),
        _ => Ok(()),
    }
}

/// Forward differences along `axis`.
pub fn fd_derivative<V: VectorValue>(f: &SampledFamily<V>, axis: usize) -> Result<SampledFamily<V>> {
    let grid = f.grid.cells_along(axis)?;
    let h = f.grid.spacing[axis];
    let samples = (0..grid.len())
        .map(|k| {
            let mut idx = grid.multi_index(k);
            let here = f.grid.flat_index(&idx);
            idx[axis] += 1;
            let next = f.grid.flat_index(&idx);
            f.samples[here].diff_scaled(&f.samples[next], 1.0 / h)
        })
        .collect();
    Ok(SampledFamily { grid, samples })
}

/// `(Σ_k w_k |v_k|^q)^{1/q}`, or the maximum for `q = ∞`, over unmasked
/// samples.
pub fn lq_of_scalars(grid: &Grid, values: &[f64], q: f64, mask: Option<&[bool]>) -> Result<f64> {
    check_exponent(q)?;
    check_mask(grid, mask)?;
    let keep = |k: usize| mask.is_none_or(|m| m[k]);
    if q.is_infinite() {
        return Ok(values.iter().enumerate().filter(|&(k, _)| keep(k)).fold(0.0, |m, (_, v)| m.max(v.abs())));
    }
    let mut sum = 0.0;
    for (k, v) in values.iter().enumerate() {
        if keep(k) {
            sum += v.abs().powf(q) * grid.weight(k);
        }
    }
    Ok(sum.powf(1.0 / q))
}

/// `‖ ‖f‖₂ ‖_{L^q}`.
pub fn lq_norm<V: VectorValue>(f: &SampledFamily<V>, q: f64) -> Result<f64> {
    lq_norm_masked(f, q, None)
}

pub fn lq_norm_masked<V: VectorValue>(f: &SampledFamily<V>, q: f64, mask: Option<&[bool]>) -> Result<f64> {
    check_shapes(f)?;
    let norms: Vec<f64> = f.samples.iter().map(VectorValue::norm2).collect();
    lq_of_scalars(&f.grid, &norms, q, mask)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub lq: f64,
    pub derivative_lq: Vec<f64>,
    pub w1q: f64,
    pub q: f64,
}

/// `‖f‖_{L^q} + Σ_j ‖∂_j f‖_{L^q}`.
pub fn w1q_norm<V: VectorValue>(f: &SampledFamily<V>, q: f64) -> Result<SobolevReport> {
    let lq = lq_norm(f, q)?;
    let derivative_lq = (0..f.grid.dim())
        .map(|j| lq_norm(&fd_derivative(f, j)?, q))
        .collect::<Result<Vec<_>>>()?;
    let w1q = derivative_lq.iter().fold(lq, |acc, d| acc + d);
    Ok(SobolevReport { lq, derivative_lq, w1q, q })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn check_pairs(n: usize, budget: usize) -> Result<()> {
    let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
    if pairs > budget {
        return Err(Error::PairBudgetExceeded { pairs, budget });
    }
    Ok(())
}

/// Hölder seminorm for an arbitrary distance between samples. On a line with
/// `alpha = 1` only neighbouring samples are compared, since every
/// difference quotient is an average of neighbouring ones.
pub fn holder_seminorm_by<V: Sync>(
    f: &SampledFamily<V>,
    alpha: f64,
    tol: &Tolerances,
    dist: impl Fn(&V, &V) -> Result<f64> + Sync,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::BadParam(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    let n = f.len();
    let points = f.grid.points();
    if alpha == 1.0 && f.grid.dim() == 1 {
        let quotients = (0..n.saturating_sub(1))
            .map(|k| Ok(dist(&f.samples[k], &f.samples[k + 1])? / f.grid.spacing[0]))
            .collect::<Result<Vec<f64>>>()?;
        return Ok(quotients.into_iter().fold(0.0, f64::max));
    }
    check_pairs(n, tol.pair_budget)?;
    all_pairs_holder(f, alpha, &points, &dist)
}

fn all_pairs_holder<V: Sync>(
    f: &SampledFamily<V>,
    alpha: f64,
    points: &[Vec<f64>],
    dist: &(impl Fn(&V, &V) -> Result<f64> + Sync),
) -> Result<f64> {
    let n = f.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            for j in i + 1..n {
                let d = dist(&f.samples[i], &f.samples[j])?;
                best = best.max(d / euclid(&points[i], &points[j]).powf(alpha));
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// `sup_{x≠y} ‖f(x) − f(y)‖₂ / ‖x − y‖₂^α`.
pub fn holder_seminorm<V: VectorValue>(f: &SampledFamily<V>, alpha: f64) -> Result<f64> {
    holder_seminorm_with(f, alpha, &Tolerances::default())
}

pub fn holder_seminorm_with<V: VectorValue>(f: &SampledFamily<V>, alpha: f64, tol: &Tolerances) -> Result<f64> {
    check_shapes(f)?;
    holder_seminorm_by(f, alpha, tol, |a, b| Ok(a.diff_scaled(b, 1.0).norm2()))
}

/// `|f|_{C^{0,α}}` for unordered-spectrum valued families, measured in `d₂`.
pub fn holder_seminorm_unordered(f: &SampledFamily<UnorderedSpectrum>, alpha: f64, tol: &Tolerances) -> Result<f64> {
    holder_seminorm_by(f, alpha, tol, |a, b| unordered::d2_with(a, b, tol))
}

/// `sup ‖f‖₂ + |f|_{C^{0,1}}`.
pub fn c01_norm<V: VectorValue>(f: &SampledFamily<V>) -> Result<f64> {
    Ok(lq_norm(f, f64::INFINITY)? + holder_seminorm(f, 1.0)?)
}

/// `sup |s_f(x, y) − s_g(x, y)|` over distinct sample pairs with both ends
/// in the mask, where `s_f(x, y) = ‖f(x) − f(y)‖₂ / ‖x − y‖₂`.
pub fn slope_function<V: VectorValue>(
    f: &SampledFamily<V>,
    g: &SampledFamily<V>,
    mask: Option<&[bool]>,
) -> Result<f64> {
    slope_function_with(f, g, mask, &Tolerances::default())
}

pub fn slope_function_with<V: VectorValue>(
    f: &SampledFamily<V>,
    g: &SampledFamily<V>,
    mask: Option<&[bool]>,
    tol: &Tolerances,
) -> Result<f64> {
    check_same_grid(&f.grid, &g.grid)?;
    check_mask(&f.grid, mask)?;
    let kept: Vec<usize> = (0..f.len()).filter(|&k| mask.is_none_or(|m| m[k])).collect();
    check_pairs(kept.len(), tol.pair_budget)?;
    let points = f.grid.points();
    let rows: Vec<f64> = (0..kept.len())
        .into_par_iter()
        .map(|a| {
            let i = kept[a];
            let mut best: f64 = 0.0;
            for &j in &kept[a + 1..] {
                let dx = euclid(&points[i], &points[j]);
                let sf = f.samples[i].diff_scaled(&f.samples[j], 1.0).norm2() / dx;
                let sg = g.samples[i].diff_scaled(&g.samples[j], 1.0).norm2() / dx;
                best = best.max((sf - sg).abs());
            }
            best
        })
        .collect();
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Per cell, `d₂(L(x_{k+1}), L(x_k)) / h`.
pub fn metric_speed(l: &SampledFamily<UnorderedSpectrum>) -> Result<SampledFamily<f64>> {
    metric_speed_with(l, &Tolerances::default())
}

pub fn metric_speed_with(l: &SampledFamily<UnorderedSpectrum>, tol: &Tolerances) -> Result<SampledFamily<f64>> {
    l.require_curve()?;
    let grid = l.grid.cells_along(0)?;
    let h = l.grid.spacing[0];
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|k| Ok(unordered::d2_with(&l.samples[k + 1], &l.samples[k], tol)? / h))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampledFamily { grid, samples })
}

/// `E_q = ∫ |L̇|^q`.
pub fn q_energy(l: &SampledFamily<UnorderedSpectrum>, q: f64) -> Result<f64> {
    q_energy_with(l, q, &Tolerances::default())
}

pub fn q_energy_with(l: &SampledFamily<UnorderedSpectrum>, q: f64, tol: &Tolerances) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::BadExponent(q));
    }
    let speed = metric_speed_with(l, tol)?;
    Ok(lq_of_scalars(&speed.grid, &speed.samples, q, None)?.powf(q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D1qReport {
    /// `sup_E s₀`.
    pub s0_sup: f64,
    /// `‖s₁‖_{L^q(E)}`.
    pub s1_lq: f64,
    /// `s0_sup + s1_lq`.
    pub total: f64,
    pub q: f64,
    /// Cells where several tied permutations gave different `s₁` values, so
    /// that fixing a single tie-break would change the result.
    pub tie_sensitive_cells: usize,
}

/// Cellwise differentials of a curve of unordered tuples: the
/// representative at `x_k` is paired with `x_{k+1}` by the least minimizing
/// permutation.
fn differentials(l: &SampledFamily<UnorderedSpectrum>, k: usize, tol: &Tolerances) -> Result<Vec<crate::matrix::C64>> {
    let (here, next) = (&l.samples[k], &l.samples[k + 1]);
    let tie = unordered::default_tie_tol(here, next, tol)?;
    let perms = unordered::minimizing_permutations_with(here, next, tie, tol)?;
    let sigma = &perms[0];
    let h = l.grid.spacing[0];
    Ok((0..here.len()).map(|i| (next.points()[sigma[i]] - here.points()[i]) / h).collect())
}

/// Value at the middle of the cell of the linear interpolant, keeping the
/// labels of the left node.
fn midpoint(left: &UnorderedSpectrum, d: &[crate::matrix::C64], h: f64) -> UnorderedSpectrum {
    UnorderedSpectrum::new(left.points().iter().zip(d).map(|(z, dz)| z + dz * (0.5 * h)).collect())
}

/// The pair `(‖s₀‖_{L^∞(E)}, ‖s₁‖_{L^q(E)})` of the `d^{1,q}_E` semimetric.
///
/// On each cell both curves are replaced by their linear interpolants and
/// `s₁` is evaluated at the cell midpoint: the maximum, over permutations
/// minimizing `d₂` there, of the mismatch between the two differentials.
/// A collision that only occurs at a grid node therefore does not leak a
/// spurious mismatch into the whole cell. Cell `k` belongs to `E` when node
/// `k` does.
pub fn d1q_semimetric(
    f: &SampledFamily<UnorderedSpectrum>,
    g: &SampledFamily<UnorderedSpectrum>,
    q: f64,
    mask: Option<&[bool]>,
) -> Result<D1qReport> {
    d1q_semimetric_with(f, g, q, mask, &Tolerances::default())
}

pub fn d1q_semimetric_with(
    f: &SampledFamily<UnorderedSpectrum>,
    g: &SampledFamily<UnorderedSpectrum>,
    q: f64,
    mask: Option<&[bool]>,
    tol: &Tolerances,
) -> Result<D1qReport> {
    f.require_curve()?;
    check_same_grid(&f.grid, &g.grid)?;
    check_mask(&f.grid, mask)?;
    check_exponent(q)?;
    if let Some((a, b)) = f.samples.iter().zip(&g.samples).find(|(a, b)| a.len() != b.len()) {
        return Err(Error::SizeMismatch { left: a.len(), right: b.len() });
    }

    let s0 = f
        .samples
        .par_iter()
        .zip(&g.samples)
        .map(|(a, b)| unordered::d2_with(a, b, tol))
        .collect::<Result<Vec<f64>>>()?;
    let s0_sup = lq_of_scalars(&f.grid, &s0, f64::INFINITY, mask)?;

    let cells = f.grid.cells_along(0)?;
    let h = f.grid.spacing[0];
    let per_cell = (0..cells.len())
        .into_par_iter()
        .map(|k| -> Result<(f64, bool)> {
            let df = differentials(f, k, tol)?;
            let dg = differentials(g, k, tol)?;
            let fm = midpoint(&f.samples[k], &df, h);
            let gm = midpoint(&g.samples[k], &dg, h);
            let tie = unordered::default_tie_tol(&fm, &gm, tol)?;
            let taus = unordered::minimizing_permutations_with(&fm, &gm, tie, tol)?;
            let values: Vec<f64> = taus.iter().map(|tau| unordered::pairing_distance(&df, &dg, tau)).collect();
            let max = values.iter().copied().fold(0.0, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((max, max - min > tol.tie_tol * (1.0 + max)))
        })
        .collect::<Result<Vec<_>>>()?;
    let s1: Vec<f64> = per_cell.iter().map(|c| c.0).collect();
    let cell_mask: Option<Vec<bool>> = mask.map(|m| m[..cells.len()].to_vec());
    let s1_lq = lq_of_scalars(&cells, &s1, q, cell_mask.as_deref())?;
    let tie_sensitive_cells = per_cell
        .iter()
        .enumerate()
        .filter(|&(k, c)| c.1 && cell_mask.as_ref().is_none_or(|m| m[k]))
        .count();
    Ok(D1qReport { s0_sup, s1_lq, total: s0_sup + s1_lq, q, tie_sensitive_cells })
}

/// The permutation-free pairing of an ordered flow with another, used to
/// compare ordered eigenvalue curves as real vectors.
pub fn ordered_as_vectors(f: &SampledFamily<OrderedSpectrum>) -> SampledFamily<Vec<f64>> {
    f.map(|s| s.values().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::random::{gaussian, rng_for};
    use proptest::prelude::*;

    fn line(lower: f64, upper: f64, n: usize, f: impl Fn(f64) -> f64) -> SampledFamily<f64> {
        SampledFamily::sample(Grid::interval(lower, upper, n).unwrap(), |x| f(x[0]))
    }

    fn pair_curve(lower: f64, upper: f64, n: usize, f: impl Fn(f64) -> Vec<f64>) -> SampledFamily<UnorderedSpectrum> {
        SampledFamily::sample(Grid::interval(lower, upper, n).unwrap(), |x| UnorderedSpectrum::from_real(&f(x[0])))
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::interval(1.0, 0.0, 5).is_err());
        assert!(Grid::interval(0.0, 1.0, 1).is_err());
        assert!(Grid::new(vec![0.0], vec![1.0, 2.0], vec![3]).is_err());
        let g = Grid::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![3, 5]).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.multi_index(7), vec![1, 2]);
        assert_eq!(g.flat_index(&[1, 2]), 7);
        assert_eq!(g.point(7), vec![0.5, 0.0]);
    }

    #[test]
    fn derivative_of_affine_is_exact() {
        let f = line(0.0, 1.0, 11, |x| x);
        let df = fd_derivative(&f, 0).unwrap();
        assert_eq!(df.len(), 10);
        assert!(df.samples().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(matches!(fd_derivative(&f, 1), Err(Error::AxisOutOfRange { axis: 1, dim: 1 })));
    }

    #[test]
    fn derivative_of_abs_changes_sign_at_kink() {
        let f = line(-1.0, 1.0, 21, f64::abs);
        let df = fd_derivative(&f, 0).unwrap();
        for (k, v) in df.samples().iter().enumerate() {
            let want = if k < 10 { -1.0 } else { 1.0 };
            assert!((v - want).abs() < 1e-12, "cell {k}: {v}");
        }
    }

    #[test]
    fn derivative_of_square_within_h() {
        let n = 101;
        let f = line(0.0, 1.0, n, |x| x * x);
        let df = fd_derivative(&f, 0).unwrap();
        let h = 1.0 / (n - 1) as f64;
        for (k, v) in df.samples().iter().enumerate() {
            let x = df.grid().point(k)[0];
            assert!((v - 2.0 * x).abs() <= h + 1e-12);
        }
    }

    #[test]
    fn lq_examples() {
        let c = line(0.0, 1.0, 17, |_| -2.5);
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((lq_norm(&c, q).unwrap() - 2.5).abs() < 1e-12);
        }
        let n = 1001;
        let h = 1.0 / (n - 1) as f64;
        let x = line(0.0, 1.0, n, |x| x);
        assert!((lq_norm(&x, 2.0).unwrap() - 3f64.sqrt().recip()).abs() <= h);
        let a5 = line(-1.0, 1.0, 401, |x| (x * x + 1.0 / 25.0).sqrt());
        assert!((lq_norm(&a5, f64::INFINITY).unwrap() - (1.0f64 + 1.0 / 25.0).sqrt()).abs() < 1e-15);
        assert!(matches!(lq_norm(&x, 0.5), Err(Error::BadExponent(_))));
    }

    #[test]
    fn w1q_examples() {
        let c = line(0.0, 1.0, 9, |_| 3.0);
        let r = w1q_norm(&c, 2.0).unwrap();
        assert!((r.w1q - 3.0).abs() < 1e-12);
        let x = line(0.0, 1.0, 2001, |x| x);
        let r = w1q_norm(&x, 1.0).unwrap();
        assert!((r.w1q - 1.5).abs() < 1e-3);
        assert_eq!(r.w1q, r.lq + r.derivative_lq[0]);
    }

    #[test]
    fn holder_examples() {
        let f = line(-2.0, 3.0, 41, |x| 0.5 - 1.75 * x);
        assert!((holder_seminorm(&f, 1.0).unwrap() - 1.75).abs() < 1e-12);
        let g = SampledFamily::sample(Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![5, 7]).unwrap(), |x| {
            vec![3.0 * x[0], 4.0 * x[1]]
        });
        // The slope of x ↦ (3x₀, 4x₁) is attained along the x₁ axis.
        assert!((holder_seminorm(&g, 1.0).unwrap() - 4.0).abs() < 1e-12);
        let tight = Tolerances { pair_budget: 10, ..Tolerances::default() };
        assert!(matches!(
            holder_seminorm_with(&g, 1.0, &tight),
            Err(Error::PairBudgetExceeded { pairs: 595, budget: 10 })
        ));
        assert!(holder_seminorm(&f, 0.0).is_err());
    }

    #[test]
    fn slope_examples() {
        let f = line(0.0, 1.0, 30, |x| (3.0 * x).sin());
        let g = f.map(|v| v + 7.0);
        assert_eq!(slope_function(&f, &f, None).unwrap(), 0.0);
        assert!(slope_function(&f, &g, None).unwrap() < 1e-12);
        let other = line(0.0, 2.0, 30, |x| x);
        assert!(matches!(slope_function(&f, &other, None), Err(Error::GridMismatch)));
    }

    #[test]
    fn metric_speed_examples() {
        let still = pair_curve(0.0, 1.0, 11, |_| vec![1.0, 2.0]);
        assert!(metric_speed(&still).unwrap().samples().iter().all(|&v| v == 0.0));
        assert_eq!(q_energy(&still, 2.0).unwrap(), 0.0);
        let cross = pair_curve(0.0, 1.0, 101, |x| vec![x, -x]);
        let speed = metric_speed(&cross).unwrap();
        assert!(speed.samples().iter().all(|v| (v - 2f64.sqrt()).abs() < 1e-12));
        assert!((q_energy(&cross, 2.0).unwrap() - 2.0).abs() < 1e-12);
        let plane = SampledFamily::sample(Grid::new(vec![0.0; 2], vec![1.0; 2], vec![3, 3]).unwrap(), |_| {
            UnorderedSpectrum::from_real(&[0.0])
        });
        assert!(matches!(metric_speed(&plane), Err(Error::NotCurve(2))));
    }

    #[test]
    fn d1q_examples() {
        let f = pair_curve(-1.0, 1.0, 41, |x| vec![x, -x]);
        let r = d1q_semimetric(&f, &f, 2.0, None).unwrap();
        assert_eq!((r.s0_sup, r.s1_lq), (0.0, 0.0));
        let g = pair_curve(-1.0, 1.0, 41, |x| vec![-x, x]);
        let r = d1q_semimetric(&f, &g, 2.0, None).unwrap();
        assert_eq!((r.s0_sup, r.s1_lq), (0.0, 0.0));
        let other = pair_curve(0.0, 1.0, 41, |x| vec![x, -x]);
        assert!(matches!(d1q_semimetric(&f, &other, 2.0, None), Err(Error::GridMismatch)));
    }

    #[test]
    fn d1q_is_symmetric_on_random_curves() {
        let mut rng = rng_for(44, 0);
        for _ in 0..20 {
            let (a, b, c) = (gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng));
            let f = SampledFamily::sample(Grid::interval(0.0, 1.0, 33).unwrap(), |x| {
                let t = x[0];
                UnorderedSpectrum::new(vec![C64::new(a * t, t * t), C64::new(-t, b), C64::new(c, t.sin())])
            });
            let g = SampledFamily::sample(Grid::interval(0.0, 1.0, 33).unwrap(), |x| {
                let t = x[0];
                UnorderedSpectrum::new(vec![C64::new(t, 0.0), C64::new(b * t, c), C64::new(a, -t)])
            });
            for q in [1.0, 2.0, f64::INFINITY] {
                let fg = d1q_semimetric(&f, &g, q, None).unwrap();
                let gf = d1q_semimetric(&g, &f, q, None).unwrap();
                assert_eq!(fg, gf);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let f = line(0.0, 1.0, 3, |x| 2.0 * x);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i0,x0,value\n0,0,0\n1,0.5,1\n2,1,2\n");
    }

    proptest! {
        #[test]
        fn lq_is_monotone(values in proptest::collection::vec(-10.0..10.0f64, 2..40), q in 1.0..6.0f64) {
            let grid = Grid::interval(0.0, 1.0, values.len()).unwrap();
            let f = SampledFamily::new(grid.clone(), values.clone()).unwrap();
            let g = SampledFamily::new(grid, values.iter().map(|v| v.abs() + 0.5).collect()).unwrap();
            prop_assert!(lq_norm(&f, q).unwrap() <= lq_norm(&g, q).unwrap());
        }

        #[test]
        fn adjacent_holder_equals_all_pairs(values in proptest::collection::vec(-10.0..10.0f64, 2..60)) {
            let grid = Grid::interval(-1.0, 2.0, values.len()).unwrap();
            let f = SampledFamily::new(grid, values).unwrap();
            let adjacent = holder_seminorm(&f, 1.0).unwrap();
            let points = f.grid().points();
            let all = all_pairs_holder(&f, 1.0, &points, &|a: &f64, b: &f64| Ok((a - b).abs())).unwrap();
            prop_assert!((adjacent - all).abs() <= 1e-9 * (1.0 + adjacent));
        }
    }
}
