//! Convergence studies: distances between the spectral data of a family
//! `A` and of approximations `A_n`, tracked over a sweep of `n`.
//!
//! A finite sweep cannot show a limit, so each study asserts a trend instead:
//! the window-3 means of the series strictly decrease and the last value is
//! below a threshold.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charmap::{char_map_normal, condition_number_flow, embedded_flow, graph_surface_area};
use crate::eigen::OrderedSpectrum;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::random::{random_gaussian_matrix, random_hermitian, rng_for};
use crate::report::ExperimentReport;
use crate::sobolev::{fd_derivative, lq_of_scalars, metric_speed, ordered_as_vectors, q_energy, w1q_norm, Grid, SampledFamily};
use crate::unordered::{AlmgrenEmbedding, UnorderedSpectrum};

use super::decreasing_after_smoothing;
use super::families::{make_companion, make_family, Counterexample, FamilyId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceStudy {
    /// `‖λ↑(A) − λ↑(A_n)‖_{W^{1,q}}` on the first counterexample.
    ExAOrdered,
    /// `‖Δ∘Λ(A) − Δ∘Λ(A_n)‖_{W^{1,q}}` on the same family.
    ExAUnordered,
    /// `‖ |Λ̇| − |Λ̇_n| ‖_{L^q}` for the metric speeds.
    ExASpeed,
    /// `|E_q(Λ) − E_q(Λ_n)|` for the `q`-energies.
    ExAEnergy,
    /// Fraction of cells where the derivatives of the ordered flows differ
    /// by more than `epsilon`, together with the largest difference.
    ExAPointwise,
    /// `‖Δ∘Λ(A) − Δ∘Λ(A + P/n)‖_{W^{1,q}}` for a smooth random Hermitian `A`.
    RandomHermitian,
    /// `‖κ(A) − κ(A + P/n)‖_{W^{1,q}}` for a well-conditioned random family.
    Kappa,
    /// `|Area(a_n) − Area(a)|` for the first counterexample.
    Area,
}

impl ConvergenceStudy {
    pub const ALL: [ConvergenceStudy; 8] = [
        ConvergenceStudy::ExAOrdered,
        ConvergenceStudy::ExAUnordered,
        ConvergenceStudy::ExASpeed,
        ConvergenceStudy::ExAEnergy,
        ConvergenceStudy::ExAPointwise,
        ConvergenceStudy::RandomHermitian,
        ConvergenceStudy::Kappa,
        ConvergenceStudy::Area,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConvergenceStudy::ExAOrdered => "exa-ordered",
            ConvergenceStudy::ExAUnordered => "exa-unordered",
            ConvergenceStudy::ExASpeed => "exa-speed",
            ConvergenceStudy::ExAEnergy => "exa-energy",
            ConvergenceStudy::ExAPointwise => "exa-pointwise",
            ConvergenceStudy::RandomHermitian => "random-hermitian",
            ConvergenceStudy::Kappa => "kappa",
            ConvergenceStudy::Area => "area",
        }
    }

    /// Default bound on the last value of the series.
    pub fn default_threshold(self) -> f64 {
        match self {
            ConvergenceStudy::ExAPointwise => 0.02,
            ConvergenceStudy::Kappa => 1e-2,
            ConvergenceStudy::Area => 5e-3,
            _ => 0.05,
        }
    }

    fn claim(self) -> &'static str {
        match self {
            ConvergenceStudy::ExAOrdered => "A_n -> A in W^{1,q} implies lambda(A_n) -> lambda(A) in W^{1,q}",
            ConvergenceStudy::ExAUnordered | ConvergenceStudy::RandomHermitian => {
                "A_n -> A in W^{1,q} implies Delta(Lambda(A_n)) -> Delta(Lambda(A)) in W^{1,q}"
            }
            ConvergenceStudy::ExASpeed => "|Lambda_n'| -> |Lambda'| in L^q",
            ConvergenceStudy::ExAEnergy => "E_q(Lambda_n) -> E_q(Lambda)",
            ConvergenceStudy::ExAPointwise => "derivatives of the eigenvalues converge almost everywhere",
            ConvergenceStudy::Kappa => "kappa(A_n) -> kappa(A) in W^{1,q}",
            ConvergenceStudy::Area => "Area(a_n) -> Area(a)",
        }
    }
}

impl fmt::Display for ConvergenceStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvergenceStudy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConvergenceStudy::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::BadParam(format!("unknown study '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    pub ns: Vec<usize>,
    /// Node count of the grid on `(−1, 1)`.
    pub nodes: usize,
    pub q: f64,
    pub seed: u64,
    /// Matrix size of the random families.
    pub d: usize,
    /// Derivative gap counted by the pointwise study.
    pub epsilon: f64,
    /// Bound on the last value; the study default when `None`.
    pub threshold: Option<f64>,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams {
            ns: vec![4, 8, 16, 32, 64, 128, 256],
            nodes: 4001,
            q: 2.0,
            seed: 7,
            d: 4,
            epsilon: 0.05,
            threshold: None,
        }
    }
}

fn validate(p: &ConvergenceParams) -> Result<()> {
    if p.ns.is_empty() || p.ns.contains(&0) {
        return Err(Error::BadParam("the sweep needs at least one n, all positive".into()));
    }
    if !(p.q.is_finite() && p.q >= 1.0) {
        return Err(Error::BadExponent(p.q));
    }
    if p.nodes < 3 {
        return Err(Error::BadParam(format!("need at least 3 grid nodes, got {}", p.nodes)));
    }
    if p.d == 0 {
        return Err(Error::BadParam("matrix size must be at least 1".into()));
    }
    Ok(())
}

type Spectra = SampledFamily<OrderedSpectrum>;

fn ex_a(n: usize, grid: &Grid) -> Result<(Spectra, Spectra)> {
    let c = Counterexample::new(FamilyId::ExA, n, 0.0, grid.clone())?;
    Ok((make_companion(&c)?.1, make_family(&c)?.1))
}

fn as_unordered(f: &Spectra) -> SampledFamily<UnorderedSpectrum> {
    f.map(|s| UnorderedSpectrum::from_real(s.values()))
}

fn vector_diff(a: &SampledFamily<Vec<f64>>, b: &SampledFamily<Vec<f64>>) -> Result<SampledFamily<Vec<f64>>> {
    a.zip_with(b, |x, y| x.iter().zip(y).map(|(u, v)| u - v).collect())
}

fn embedded_distance(
    a: &SampledFamily<UnorderedSpectrum>,
    b: &SampledFamily<UnorderedSpectrum>,
    e: &AlmgrenEmbedding,
    q: f64,
) -> Result<f64> {
    Ok(w1q_norm(&vector_diff(&embedded_flow(a, e)?, &embedded_flow(b, e)?)?, q)?.w1q)
}

/// Per cell, the largest componentwise gap between forward differences of
/// two ordered flows.
fn derivative_gaps(a: &Spectra, b: &Spectra) -> Result<SampledFamily<f64>> {
    let da = fd_derivative(&ordered_as_vectors(a), 0)?;
    let db = fd_derivative(&ordered_as_vectors(b), 0)?;
    da.zip_with(&db, |x, y| x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

/// A smooth Hermitian curve `A0 + x A1 + x² A2` and a fixed Hermitian
/// direction `P` of unit Frobenius norm.
fn random_hermitian_family(seed: u64, d: usize, grid: &Grid) -> (SampledFamily<ComplexMatrix>, ComplexMatrix) {
    let mut rng = rng_for(seed, 0);
    let coeffs: Vec<ComplexMatrix> = (0..3).map(|_| random_hermitian(&mut rng, d)).collect();
    let p = random_hermitian(&mut rng, d);
    let p = p.normalize().unwrap_or(p);
    let family = SampledFamily::sample(grid.clone(), |x| {
        coeffs[0].add(&coeffs[1].scale_real(x[0])).add(&coeffs[2].scale_real(x[0] * x[0]))
    });
    (family, p)
}

/// `diag(1, …, d) + (x/4) G` with `‖G‖₂ = 1`, and a direction `P` with
/// `‖P‖₂ = 1`. Each singular value stays within `1/4` of its diagonal entry,
/// so `σ₁` and `σ_d` stay simple and `σ_d ≥ 3/4` on `[−1, 1]`.
fn well_conditioned_family(seed: u64, d: usize, grid: &Grid) -> (SampledFamily<ComplexMatrix>, ComplexMatrix) {
    let mut rng = rng_for(seed, 1);
    let g = random_gaussian_matrix(&mut rng, d, d);
    let g = g.normalize().unwrap_or(g);
    let p = random_gaussian_matrix(&mut rng, d, d);
    let p = p.normalize().unwrap_or(p);
    let base = ComplexMatrix::from_real_diagonal(&(1..=d).map(|k| k as f64).collect::<Vec<_>>());
    (SampledFamily::sample(grid.clone(), |x| base.add(&g.scale_real(0.25 * x[0]))), p)
}

fn shifted(a: &SampledFamily<ComplexMatrix>, p: &ComplexMatrix, n: usize) -> SampledFamily<ComplexMatrix> {
    a.map(|m| m.add(&p.scale_real(1.0 / n as f64)))
}

/// Runs one study over `params.ns` and checks the trend.
pub fn run_convergence(study: ConvergenceStudy, params: &ConvergenceParams) -> Result<ExperimentReport> {
    validate(params)?;
    let grid = Grid::interval(-1.0, 1.0, params.nodes)?;
    let q = params.q;
    let mut r = ExperimentReport::new(format!("convergence_{}", study.name()));
    r.provenance(study.claim());
    r.meta("study", study.name());
    r.meta("nodes", params.nodes);
    r.meta("q", q);
    r.meta("ns", params.ns.clone());

    let ns = &params.ns;
    let series: Vec<f64> = match study {
        ConvergenceStudy::ExAOrdered => ns
            .par_iter()
            .map(|&n| {
                let (a, an) = ex_a(n, &grid)?;
                Ok(w1q_norm(&vector_diff(&ordered_as_vectors(&a), &ordered_as_vectors(&an))?, q)?.w1q)
            })
            .collect::<Result<_>>()?,
        ConvergenceStudy::ExAUnordered => {
            let e = AlmgrenEmbedding::new(2);
            ns.par_iter()
                .map(|&n| {
                    let (a, an) = ex_a(n, &grid)?;
                    embedded_distance(&as_unordered(&a), &as_unordered(&an), &e, q)
                })
                .collect::<Result<_>>()?
        }
        ConvergenceStudy::ExASpeed => ns
            .par_iter()
            .map(|&n| {
                let (a, an) = ex_a(n, &grid)?;
                let sa = metric_speed(&as_unordered(&a))?;
                let sn = metric_speed(&as_unordered(&an))?;
                let gap: Vec<f64> = sa.samples().iter().zip(sn.samples()).map(|(x, y)| x - y).collect();
                lq_of_scalars(sa.grid(), &gap, q, None)
            })
            .collect::<Result<_>>()?,
        ConvergenceStudy::ExAEnergy => ns
            .par_iter()
            .map(|&n| {
                let (a, an) = ex_a(n, &grid)?;
                Ok((q_energy(&as_unordered(&a), q)? - q_energy(&as_unordered(&an), q)?).abs())
            })
            .collect::<Result<_>>()?,
        ConvergenceStudy::ExAPointwise => {
            let rows = ns
                .par_iter()
                .map(|&n| {
                    let (a, an) = ex_a(n, &grid)?;
                    let gaps = derivative_gaps(&a, &an)?;
                    let above = gaps.samples().iter().filter(|&&g| g > params.epsilon).count();
                    let sup = gaps.samples().iter().copied().fold(0.0, f64::max);
                    Ok((above as f64 / gaps.len() as f64, sup))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let sups: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let last_sup = *sups.last().expect("sweep is nonempty");
            r.meta("epsilon", params.epsilon);
            r.scalar("final_sup", last_sup)?;
            r.check_at_least("final_sup", last_sup, 0.25, "the derivatives do not converge uniformly near 0")?;
            r.series("sup", sups)?;
            rows.iter().map(|r| r.0).collect()
        }
        ConvergenceStudy::RandomHermitian => {
            r.seed = Some(params.seed);
            r.meta("d", params.d);
            let (a, p) = random_hermitian_family(params.seed, params.d, &grid);
            let e = AlmgrenEmbedding::new(params.d);
            let base = char_map_normal(&a)?.flow;
            ns.iter()
                .map(|&n| embedded_distance(&base, &char_map_normal(&shifted(&a, &p, n))?.flow, &e, q))
                .collect::<Result<_>>()?
        }
        ConvergenceStudy::Kappa => {
            r.seed = Some(params.seed);
            r.meta("d", params.d);
            let (a, p) = well_conditioned_family(params.seed, params.d, &grid);
            let base = condition_number_flow(&a)?.kappa;
            ns.iter()
                .map(|&n| {
                    let kn = condition_number_flow(&shifted(&a, &p, n))?.kappa;
                    Ok(w1q_norm(&base.zip_with(&kn, |x, y| x - y)?, q)?.w1q)
                })
                .collect::<Result<_>>()?
        }
        ConvergenceStudy::Area => {
            let c = Counterexample::new(FamilyId::ExA, 1, 0.0, grid.clone())?;
            let limit = graph_surface_area(&SampledFamily::sample(grid.clone(), |x| c.companion_eigenvalue(x[0])))?;
            r.scalar("limit_area", limit)?;
            let areas = ns
                .par_iter()
                .map(|&n| {
                    let c = Counterexample::new(FamilyId::ExA, n, 0.0, grid.clone())?;
                    graph_surface_area(&SampledFamily::sample(grid.clone(), |x| c.eigenvalue(x[0])))
                })
                .collect::<Result<Vec<f64>>>()?;
            let excess = areas.iter().map(|a| a - limit).fold(f64::NEG_INFINITY, f64::max);
            r.check_at_most("area_excess", excess, 1e-9, "the smoothed graph is no longer than the limit graph")?;
            let gaps = areas.iter().map(|a| (a - limit).abs()).collect();
            r.series("area", areas)?;
            gaps
        }
    };

    let last = *series.last().expect("sweep is nonempty");
    let threshold = params.threshold.unwrap_or(study.default_threshold());
    r.scalar("final", last)?;
    r.check_at_most("smoothed_increases", (!decreasing_after_smoothing(&series)) as u8 as f64, 0.0, study.claim())?;
    r.check_at_most("final", last, threshold, study.claim())?;
    r.series("n", ns.iter().map(|&n| n as f64).collect())?;
    r.series("distance", series)?;
    Ok(r)
}
