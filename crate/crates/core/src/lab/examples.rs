//! Reproducible runs of the four counterexamples. Bound checks use the
//! closed-form spectra; agreement with the eigensolver is checked separately
//! when the families are built.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::report::ExperimentReport;
use crate::sobolev::{c01_norm, fd_derivative, holder_seminorm, lq_norm, lq_of_scalars, w1q_norm, Grid, SampledFamily};

use super::families::{make_companion, make_family, Counterexample, FamilyId};
use super::{count_increases, loglog_slope};

pub const EX_A_NODES: usize = 4001;
pub const EX_AUC_NODES: usize = 2049;
/// Cells per unit of `n` for the sawtooth family.
pub const EX_UCQ_CELLS_PER_N: usize = 8;
/// Cells per unit of the largest `n` in the doubling sweep.
pub const EX_A2_CELLS_PER_N: usize = 16;
pub const EX_A_SWEEP: [usize; 7] = [4, 8, 16, 32, 64, 128, 256];

fn check_exponent(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Error::BadExponent(q))
    }
}

fn check_nodes(nodes: usize, min: usize, what: &str) -> Result<()> {
    if nodes < min {
        return Err(Error::BadParam(format!("{what} needs at least {min} grid nodes, got {nodes}")));
    }
    Ok(())
}

fn index_nearest(grid: &Grid, x: f64) -> usize {
    let k = ((x - grid.lower()[0]) / grid.spacing()[0]).round();
    (k.max(0.0) as usize).min(grid.len() - 1)
}

fn scalar_family(grid: &Grid, f: impl Fn(f64) -> f64) -> SampledFamily<f64> {
    SampledFamily::sample(grid.clone(), |x| f(x[0]))
}

/// The limit `a(x) = |x|` against `a_n(x) = √(x² + 1/n²)` on `(−1, 1)`.
///
/// `nodes` must be odd so that `0` is a node; `1/n` is placed at the nearest
/// node and its coordinate is recorded.
pub fn run_ex_a(n: usize, nodes: usize) -> Result<ExperimentReport> {
    check_nodes(nodes, 3, "exA")?;
    if nodes.is_multiple_of(2) {
        return Err(Error::BadParam(format!("exA needs an odd node count so that 0 is a node, got {nodes}")));
    }
    let grid = Grid::interval(-1.0, 1.0, nodes)?;
    let c = Counterexample::new(FamilyId::ExA, n, 0.0, grid.clone())?;
    make_family(&c)?;
    make_companion(&c)?;

    let mut r = ExperimentReport::new("exA");
    r.provenance("A_n(x) = ((1/n, x), (x, -1/n)), a_n(x) = sqrt(x^2 + 1/n^2), a(x) = |x|");
    r.meta("n", n);
    r.meta("nodes", nodes);

    let gap = scalar_family(&grid, |x| c.companion_eigenvalue(x) - c.eigenvalue(x));
    let lipschitz = holder_seminorm(&gap, 1.0)?;
    r.scalar("lipschitz_gap", lipschitz)?;
    r.check_at_least("lipschitz_gap", lipschitz, 2.0 - SQRT_2 - 1e-3, "|a - a_n|_{C^{0,1}} >= 2 - sqrt(2)")?;

    let node = index_nearest(&grid, 1.0 / n as f64);
    let x = grid.point(node)[0];
    r.meta("node_near_1_over_n", x);
    let derivative_gap = (c.companion_derivative(x) - c.derivative(x)).abs();
    r.scalar("derivative_gap_at_1_over_n", derivative_gap)?;
    let target = 1.0 - 1.0 / SQRT_2;
    r.check_at_most(
        "derivative_gap_at_1_over_n_error",
        (derivative_gap - target).abs(),
        1e-6,
        "a_n'(1/n) = 1/sqrt(2) while a'(1/n) = 1",
    )?;

    let cells = grid.cells_along(0)?;
    let slopes: Vec<f64> = fd_derivative(&gap, 0)?.into_samples().iter().map(|v| v.abs()).collect();
    let sup = lq_of_scalars(&cells, &slopes, f64::INFINITY, None)?;
    r.scalar("derivative_gap_sup", sup)?;
    r.check_at_least("derivative_gap_sup", sup, 0.25, "a_n' does not converge to a' uniformly near 0")?;

    let mut sweep = Vec::new();
    for &m in &EX_A_SWEEP {
        let cm = Counterexample::new(FamilyId::ExA, m, 0.0, grid.clone())?;
        let diff = scalar_family(&grid, |x| cm.companion_eigenvalue(x) - cm.eigenvalue(x));
        sweep.push(w1q_norm(&diff, 2.0)?.w1q);
    }
    r.series("sweep_n", EX_A_SWEEP.iter().map(|&m| m as f64).collect())?;
    r.check_at_most("w12_sweep_increases", count_increases(&sweep) as f64, 0.0, "||a - a_n||_{W^{1,2}} -> 0")?;
    r.series("w12_gap", sweep)?;
    Ok(r)
}

/// The sawtooth family `a_n = √(φ_n² + 1/n²)`, `b_n = √(φ_n² + 1/(4n²))` on
/// `(0, 1)`. Derivatives are evaluated in closed form at cell midpoints,
/// where the sawtooth slope is `±1`; the kinks sit at the nodes `k/n`.
pub fn run_ex_ucq(n: usize, q: f64, nodes: usize) -> Result<ExperimentReport> {
    check_exponent(q)?;
    check_nodes(nodes, EX_UCQ_CELLS_PER_N * n + 1, "exUcq")?;
    let grid = Grid::interval(0.0, 1.0, nodes)?;
    let c = Counterexample::new(FamilyId::ExUcq, n, 0.0, grid.clone())?;
    let (a, _) = make_family(&c)?;
    let (b, _) = make_companion(&c)?;

    let mut r = ExperimentReport::new("exUcq");
    r.provenance("a_n = sqrt(phi_n^2 + 1/n^2), b_n = sqrt(phi_n^2 + 1/(4n^2)), phi_n a sawtooth of slope 1");
    r.meta("n", n);
    r.meta("q", q);
    r.meta("nodes", nodes);
    r.meta("kinks", "nodes k/n; derivatives taken at cell midpoints");

    let cells = grid.cells_along(0)?;
    let h = grid.spacing()[0];
    let gaps: Vec<f64> = (0..cells.len())
        .map(|k| {
            let mid = cells.point(k)[0] + 0.5 * h;
            c.derivative(mid) - c.companion_derivative(mid)
        })
        .collect();
    let lq = lq_of_scalars(&cells, &gaps, q, None)?;
    r.scalar("derivative_gap_lq", lq)?;
    r.check_at_least(
        "derivative_gap_lq",
        lq,
        1.0 / (12.0 * 2f64.powf(1.0 / q)) - 1e-3,
        "||a_n' - b_n'||_{L^q} >= 1/(12 2^{1/q})",
    )?;

    let diff = a.zip_with(&b, |x, y| x.sub(y))?;
    let distance = c01_norm(&diff)?;
    r.scalar("matrix_c01_distance", distance)?;
    r.check_at_most(
        "matrix_c01_distance_error",
        (distance - SQRT_2 / (2.0 * n as f64)).abs(),
        1e-9,
        "||A_n - B_n||_{C^{0,1}} = sqrt(2)/(2n)",
    )?;
    Ok(r)
}

/// `a_n(x) = √(n²x² + n^{−2r})` against `b_n(x) = √(n²x² + n^{−2r}/4)` with
/// `r = α/(1−α)`, on a symmetric grid that has `0` and
/// `x* = n^{−1/(1−α)}` as nodes.
pub fn run_ex_auc(n: usize, alpha: f64, nodes: usize) -> Result<ExperimentReport> {
    check_nodes(nodes, 3, "exAuc")?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadParam(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n == 0 {
        return Err(Error::BadParam("family index n must be at least 1".into()));
    }
    let x_star = (n as f64).powf(-1.0 / (1.0 - alpha));
    let half = (nodes - 1) / 2;
    let steps = ((half as f64 * x_star).ceil() as usize).clamp(1, half);
    let h = x_star / steps as f64;
    let extent = half as f64 * h;
    let grid = Grid::interval(-extent, extent, 2 * half + 1)?;
    let c = Counterexample::new(FamilyId::ExAuc, n, alpha, grid.clone())?;
    make_family(&c)?;
    make_companion(&c)?;

    let mut r = ExperimentReport::new("exAuc");
    r.provenance("A_n(x) = ((n^{-r}, nx), (nx, -n^{-r})), r = alpha/(1-alpha); B_n halves the diagonal");
    r.meta("n", n);
    r.meta("alpha", alpha);
    r.meta("nodes", 2 * half + 1);
    r.meta("x_star", x_star);
    r.meta("x_star_node", grid.point(half + steps)[0]);

    let gap = scalar_family(&grid, |x| c.eigenvalue(x) - c.companion_eigenvalue(x));
    let seminorm = holder_seminorm(&gap, alpha)?;
    r.scalar("holder_gap", seminorm)?;
    let bound = 5f64.sqrt() / 2.0 + 0.5 - SQRT_2;
    r.check_at_least("holder_gap", seminorm, bound - 1e-3, "|a_n - b_n|_{C^{0,alpha}} >= sqrt(5)/2 + 1/2 - sqrt(2)")?;
    Ok(r)
}

/// `‖a_n' − a_{2n}'‖_{L^q((0,1))}` for `n, 2n, 4n, 8n` on one grid, with the
/// derivative taken by forward differences of the closed forms.
pub fn run_ex_a2(n: usize, q: f64, nodes: Option<usize>) -> Result<ExperimentReport> {
    check_exponent(q)?;
    if n == 0 {
        return Err(Error::BadParam("family index n must be at least 1".into()));
    }
    let ns: Vec<usize> = (0..4).map(|k| n << k).collect();
    let largest = *ns.last().expect("sweep is nonempty");
    let nodes = nodes.unwrap_or(EX_A2_CELLS_PER_N * 4 * largest + 1);
    check_nodes(nodes, EX_A2_CELLS_PER_N * largest + 1, "exA2")?;
    let grid = Grid::interval(0.0, 1.0, nodes)?;

    let mut r = ExperimentReport::new("exA2");
    r.provenance("a_n = sqrt(x^2 + 1/n^2) on (0, 1) compared with a_{2n}");
    r.meta("n", n);
    r.meta("q", q);
    r.meta("nodes", nodes);

    let mut norms = Vec::new();
    for &m in &ns {
        let c = Counterexample::new(FamilyId::ExA2, m, 0.0, grid.clone())?;
        let (a, _) = make_family(&c)?;
        let (a2, _) = make_companion(&c)?;
        let gap = scalar_family(&grid, |x| c.eigenvalue(x) - c.companion_eigenvalue(x));
        let norm = lq_norm(&fd_derivative(&gap, 0)?, q)?;
        let bound = 1.0 / (6.0 * (q + 1.0).powf(1.0 / q) * (m as f64).powf(1.0 / q));
        r.check_at_least(
            &format!("derivative_gap_lq_n{m}"),
            norm,
            bound - 1e-4,
            "||a_n' - a_{2n}'||_{L^q} >= 1/(6 (q+1)^{1/q} n^{1/q})",
        )?;
        norms.push(norm);

        let diff = a.zip_with(&a2, |x, y| x.sub(y))?;
        let sup = lq_norm(&diff, f64::INFINITY)?;
        r.check_at_most(
            &format!("matrix_sup_distance_error_n{m}"),
            (sup - SQRT_2 / (2.0 * m as f64)).abs(),
            1e-12,
            "||A_n - A_{2n}||_{L^inf} = sqrt(2)/(2n)",
        )?;
        let derivative = lq_norm(&fd_derivative(&diff, 0)?, f64::INFINITY)?;
        r.check_at_most(&format!("matrix_derivative_gap_n{m}"), derivative, 0.0, "A_n' - A_{2n}' = 0")?;
    }
    r.scalar("derivative_gap_lq", norms[0])?;
    let slope = loglog_slope(&ns.iter().map(|&m| m as f64).collect::<Vec<_>>(), &norms);
    r.scalar("loglog_slope", slope)?;
    r.check_at_most("loglog_slope_error", (slope + 1.0 / q).abs(), 0.1, "decay like n^{-1/q}")?;
    r.series("sweep_n", ns.iter().map(|&m| m as f64).collect())?;
    r.series("derivative_gap_lq", norms)?;
    Ok(r)
}

/// Runs one example with its default grid when `nodes` is `None`.
pub fn run_example(id: FamilyId, n: usize, q: f64, alpha: f64, nodes: Option<usize>) -> Result<ExperimentReport> {
    match id {
        FamilyId::ExA => run_ex_a(n, nodes.unwrap_or(EX_A_NODES)),
        FamilyId::ExUcq => run_ex_ucq(n, q, nodes.unwrap_or(EX_UCQ_CELLS_PER_N * n + 1)),
        FamilyId::ExAuc => run_ex_auc(n, alpha, nodes.unwrap_or(EX_AUC_NODES)),
        FamilyId::ExA2 => run_ex_a2(n, q, nodes),
    }
}
