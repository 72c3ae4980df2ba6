//! Experiment suites: the counterexample families, randomized checks of the
//! perturbation inequalities, and convergence studies. Every run returns an
//! [`ExperimentReport`](crate::report::ExperimentReport) whose checks record
//! the asserted bounds.

pub mod convergence;
pub mod examples;
pub mod families;
pub mod fuzz;

pub use convergence::{run_convergence, ConvergenceParams, ConvergenceStudy};
pub use examples::{run_ex_a, run_ex_a2, run_ex_auc, run_ex_ucq, run_example};
pub use families::{make_companion, make_family, Counterexample, FamilyId};
pub use fuzz::{fuzz_inequalities, InequalityKind};

/// Number of `k` with `values[k + 1] >= values[k]`.
pub fn count_increases(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] >= w[0]).count()
}

/// Means over consecutive windows of three.
pub fn smoothed3(values: &[f64]) -> Vec<f64> {
    values.windows(3).map(|w| (w[0] + w[1] + w[2]) / 3.0).collect()
}

/// True when the window-3 means strictly decrease (or there are fewer than
/// two of them and the raw series does not increase).
pub fn decreasing_after_smoothing(values: &[f64]) -> bool {
    let s = smoothed3(values);
    if s.len() < 2 {
        return count_increases(values) == 0;
    }
    count_increases(&s) == 0
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_helpers() {
        assert_eq!(count_increases(&[3.0, 2.0, 2.0, 1.0]), 1);
        assert_eq!(smoothed3(&[3.0, 0.0, 3.0, 0.0]), vec![2.0, 1.0]);
        assert!(decreasing_after_smoothing(&[5.0, 4.0, 4.1, 3.0, 2.0]));
        assert!(!decreasing_after_smoothing(&[1.0, 2.0, 3.0, 4.0]));
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((loglog_slope(&x, &y) + 0.5).abs() < 1e-12);
    }
}
