//! Unordered tuples of complex numbers and the Almgren embedding.
//!
//! An [`UnorderedSpectrum`] stores one representative of a class; all
//! comparisons and metrics are permutation-invariant. Canonical ordering by
//! `(Re, Im)` is used only for equality, hashing-like comparisons and
//! serialization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::config::Tolerances;
use crate::eigen::{cmp_complex, OrderedSpectrum};
use crate::error::{Error, Result};
use crate::matrix::C64;

#[derive(Clone, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", from = "Vec<[f64; 2]>")]
pub struct UnorderedSpectrum {
    points: Vec<C64>,
}

impl UnorderedSpectrum {
    pub fn new(points: Vec<C64>) -> Self {
        UnorderedSpectrum { points }
    }

    pub fn from_real(values: &[f64]) -> Self {
        UnorderedSpectrum::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The stored representative, in whatever order it was built.
    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Representative sorted by `(Re, Im)`.
    pub fn canonical(&self) -> Vec<C64> {
        let mut pts = self.points.clone();
        pts.sort_by(cmp_complex);
        pts
    }
}

impl PartialEq for UnorderedSpectrum {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl std::fmt::Debug for UnorderedSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (k, z) in self.canonical().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, "]")
    }
}

impl From<UnorderedSpectrum> for Vec<[f64; 2]> {
    fn from(x: UnorderedSpectrum) -> Self {
        x.canonical().iter().map(|z| [z.re, z.im]).collect()
    }
}

impl From<Vec<[f64; 2]>> for UnorderedSpectrum {
    fn from(pairs: Vec<[f64; 2]>) -> Self {
        UnorderedSpectrum::new(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

fn check_sizes(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { left: x.len(), right: y.len() });
    }
    Ok(())
}

fn squared_costs(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Vec<Vec<f64>> {
    x.points
        .iter()
        .map(|z| y.points.iter().map(|w| (z - w).norm_sqr()).collect())
        .collect()
}

fn abs_costs(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Vec<Vec<f64>> {
    x.points
        .iter()
        .map(|z| y.points.iter().map(|w| (z - w).norm()).collect())
        .collect()
}

/// `‖x − σy‖₂` for `σ = perm`. The squared terms are added in sorted order so
/// the value does not depend on how either representative is stored.
pub fn pairing_distance(x: &[C64], y: &[C64], perm: &[usize]) -> f64 {
    let mut terms: Vec<f64> = perm.iter().enumerate().map(|(i, &j)| (x[i] - y[j]).norm_sqr()).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().sqrt()
}

/// `d₂` by exhaustive search over permutations.
pub fn d2_exhaustive(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<f64> {
    check_sizes(x, y)?;
    let perm = assignment::exhaustive_min_sum(&squared_costs(x, y));
    Ok(pairing_distance(&x.points, &y.points, &perm))
}

/// `d₂` by minimum-cost assignment on `|z_i − w_j|²`.
pub fn d2_assignment(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<f64> {
    check_sizes(x, y)?;
    let perm = assignment::min_cost_assignment(&squared_costs(x, y));
    Ok(pairing_distance(&x.points, &y.points, &perm))
}

/// `d₂([z],[w]) = min_σ (Σ|z_i − w_σ(i)|²)^{1/2}`.
pub fn d2(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<f64> {
    d2_with(x, y, &Tolerances::default())
}

pub fn d2_with(x: &UnorderedSpectrum, y: &UnorderedSpectrum, tol: &Tolerances) -> Result<f64> {
    let value = if x.len() <= tol.brute_force_max { d2_exhaustive(x, y)? } else { d2_assignment(x, y)? };
    // Computing both orientations and keeping the smaller makes the metric
    // exactly symmetric in floating point.
    let reverse = if x.len() <= tol.brute_force_max { d2_exhaustive(y, x)? } else { d2_assignment(y, x)? };
    Ok(value.min(reverse))
}

pub fn dinf_exhaustive(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<f64> {
    check_sizes(x, y)?;
    Ok(assignment::exhaustive_min_max(&abs_costs(x, y)).0)
}

pub fn dinf_matching(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<f64> {
    check_sizes(x, y)?;
    Ok(assignment::bottleneck_assignment(&abs_costs(x, y)).0)
}

/// `d_∞([z],[w]) = min_σ max_i |z_i − w_σ(i)|`.
pub fn d_inf(x: &UnorderedSpectrum, y: &UnorderedSpectrum) -> Result<f64> {
    d_inf_with(x, y, &Tolerances::default())
}

pub fn d_inf_with(x: &UnorderedSpectrum, y: &UnorderedSpectrum, tol: &Tolerances) -> Result<f64> {
    if x.len() <= tol.brute_force_max {
        dinf_exhaustive(x, y)
    } else {
        dinf_matching(x, y)
    }
}

/// Every `σ` with `‖x − σy‖₂ ≤ d₂(x, y) + tie_tol`, in lexicographic order.
/// `σ[i] = j` pairs `x[i]` with `y[j]`. The first entry is the least
/// minimizing permutation.
pub fn minimizing_permutations(
    x: &UnorderedSpectrum,
    y: &UnorderedSpectrum,
    tie_tol: f64,
) -> Result<Vec<Vec<usize>>> {
    minimizing_permutations_with(x, y, tie_tol, &Tolerances::default())
}

pub fn minimizing_permutations_with(
    x: &UnorderedSpectrum,
    y: &UnorderedSpectrum,
    tie_tol: f64,
    tol: &Tolerances,
) -> Result<Vec<Vec<usize>>> {
    check_sizes(x, y)?;
    if x.len() > tol.brute_force_max {
        return Err(Error::TooLarge { d: x.len(), max: tol.brute_force_max });
    }
    let best = d2_exhaustive(x, y)?;
    let bound = best + tie_tol;
    // Prune on squared partial sums against the squared bound.
    let costs = squared_costs(x, y);
    let perms = assignment::permutations_within(&costs, bound * bound, |p| {
        pairing_distance(&x.points, &y.points, p).powi(2)
    });
    Ok(perms.into_iter().filter(|p| pairing_distance(&x.points, &y.points, p) <= bound).collect())
}

/// Default tie tolerance `tie_tol · (1 + d₂)`.
pub fn default_tie_tol(x: &UnorderedSpectrum, y: &UnorderedSpectrum, tol: &Tolerances) -> Result<f64> {
    Ok(tol.tie_tol * (1.0 + d2_with(x, y, tol)?))
}

fn check_unit(theta: C64) -> Result<()> {
    let modulus = theta.norm();
    if (modulus - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitModulus { modulus });
    }
    Ok(())
}

/// `Re(θ z_i)` sorted increasingly.
pub fn almgren_map(theta: C64, x: &UnorderedSpectrum) -> Result<OrderedSpectrum> {
    check_unit(theta)?;
    Ok(project_sorted(theta, &x.points))
}

fn project_sorted(theta: C64, points: &[C64]) -> OrderedSpectrum {
    OrderedSpectrum::from_unsorted(points.iter().map(|z| (theta * z).re).collect())
}

/// `Δ([z]) = h^{-1/2} (H_1([z]), …, H_h([z]))` with `H_l` the Almgren map
/// for `θ_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmgrenEmbedding {
    d: usize,
    thetas: Vec<C64>,
}

impl AlmgrenEmbedding {
    /// `h = 2d² + 1` forms with `θ_l = e^{2πil/h}`.
    pub fn new(d: usize) -> Self {
        let h = 2 * d * d + 1;
        let thetas = (0..h).map(|l| C64::from_polar(1.0, 2.0 * PI * l as f64 / h as f64)).collect();
        AlmgrenEmbedding { d, thetas }
    }

    pub fn with_thetas(d: usize, thetas: Vec<C64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::BadParam("an embedding needs at least one form".into()));
        }
        for &t in &thetas {
            check_unit(t)?;
        }
        Ok(AlmgrenEmbedding { d, thetas })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[C64] {
        &self.thetas
    }

    /// Embedded dimension `N = d·h`.
    pub fn dim(&self) -> usize {
        self.d * self.h()
    }

    pub fn scale(&self) -> f64 {
        1.0 / (self.h() as f64).sqrt()
    }

    pub fn embed(&self, x: &UnorderedSpectrum) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::SizeMismatch { left: self.d, right: x.len() });
        }
        let s = self.scale();
        let mut out = Vec::with_capacity(self.dim());
        for &theta in &self.thetas {
            out.extend(project_sorted(theta, &x.points).values().iter().map(|v| v * s));
        }
        Ok(out)
    }
}

/// `(max, min)` over the pairs of `‖Δx − Δy‖₂ / d₂(x, y)`.
pub fn embedding_distortion(
    e: &AlmgrenEmbedding,
    pairs: &[(UnorderedSpectrum, UnorderedSpectrum)],
) -> Result<(f64, f64)> {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (index, (x, y)) in pairs.iter().enumerate() {
        let dist = d2(x, y)?;
        if dist == 0.0 {
            return Err(Error::DegeneratePair { index });
        }
        let ex = e.embed(x)?;
        let ey = e.embed(y)?;
        let num = ex.iter().zip(&ey).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let ratio = num / dist;
        max = max.max(ratio);
        min = min.min(ratio);
    }
    Ok((max, min))
}

/// The order isomorphism `[x] ↦ x↑` on tuples of reals.
pub fn up_map(x: &UnorderedSpectrum) -> Result<OrderedSpectrum> {
    up_map_with(x, &Tolerances::default())
}

pub fn up_map_with(x: &UnorderedSpectrum, tol: &Tolerances) -> Result<OrderedSpectrum> {
    for (index, z) in x.points.iter().enumerate() {
        if z.im.abs() > tol.real_tol {
            return Err(Error::NotRealTuple { index, imag: z.im });
        }
    }
    Ok(OrderedSpectrum::from_unsorted(x.points.iter().map(|z| z.re).collect()))
}
