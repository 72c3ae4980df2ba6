//! Counterexample families of symmetric 2×2 matrices with closed-form
//! spectra.
//!
//! Each family comes with a companion: the limit curve for `ExA`, `B_n`
//! for `ExUcq` and `ExAuc`, and `A_{2n}` for `ExA2`. All matrices have the
//! form `[[p, s], [s, −p]]`, whose eigenvalues are `±√(p² + s²)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::charmap::char_map_hermitian;
use crate::eigen::OrderedSpectrum;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::sobolev::{Grid, SampledFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyId {
    ExA,
    ExUcq,
    ExAuc,
    ExA2,
}

impl FamilyId {
    pub fn name(self) -> &'static str {
        match self {
            FamilyId::ExA => "exA",
            FamilyId::ExUcq => "exUcq",
            FamilyId::ExAuc => "exAuc",
            FamilyId::ExA2 => "exA2",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exA" => Ok(FamilyId::ExA),
            "exUcq" => Ok(FamilyId::ExUcq),
            "exAuc" => Ok(FamilyId::ExAuc),
            "exA2" => Ok(FamilyId::ExA2),
            other => Err(Error::BadParam(format!("unknown family '{other}' (expected exA, exUcq, exAuc or exA2)"))),
        }
    }
}

/// The sawtooth of slope ±1 on `[k/n, (k+1)/n]`, with `φ_n(k/n) = 0` for
/// even `k` and `1/n` for odd `k`.
pub fn sawtooth(n: usize, x: f64) -> f64 {
    let t = (n as f64 * x).rem_euclid(2.0);
    let tri = if t <= 1.0 { t } else { 2.0 - t };
    tri / n as f64
}

/// `φ_n'(x)` away from the kinks: `+1` on even cells, `−1` on odd ones.
pub fn sawtooth_slope(n: usize, x: f64) -> f64 {
    let k = (n as f64 * x).floor() as i64;
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One member of a counterexample family together with its companion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub id: FamilyId,
    pub n: usize,
    /// Hölder exponent, used by `ExAuc` only.
    pub alpha: f64,
    pub grid: Grid,
}

/// `(p, s)` with the matrix `[[p, s], [s, −p]]`, plus `(∂p, ∂s)`.
type Entries = ((f64, f64), (f64, f64));

impl Counterexample {
    pub fn new(id: FamilyId, n: usize, alpha: f64, grid: Grid) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParam("family index n must be at least 1".into()));
        }
        if grid.dim() != 1 {
            return Err(Error::NotCurve(grid.dim()));
        }
        if id == FamilyId::ExAuc && !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::BadParam(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Counterexample { id, n, alpha, grid })
    }

    /// `r = α / (1 − α)`.
    pub fn r(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn entries(&self, x: f64, companion: bool) -> Entries {
        let n = self.nf();
        match (self.id, companion) {
            (FamilyId::ExA, false) | (FamilyId::ExA2, false) => ((1.0 / n, x), (0.0, 1.0)),
            (FamilyId::ExA, true) => ((0.0, x), (0.0, 1.0)),
            (FamilyId::ExA2, true) => ((1.0 / (2.0 * n), x), (0.0, 1.0)),
            (FamilyId::ExUcq, c) => {
                let p = if c { 1.0 / (2.0 * n) } else { 1.0 / n };
                ((p, sawtooth(self.n, x)), (0.0, sawtooth_slope(self.n, x)))
            }
            (FamilyId::ExAuc, c) => {
                let p = n.powf(-self.r()) * if c { 0.5 } else { 1.0 };
                ((p, n * x), (0.0, n))
            }
        }
    }

    fn matrix_from(((p, s), _): Entries) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[p, s], [s, -p]])
    }

    pub fn matrix(&self, x: f64) -> ComplexMatrix {
        Self::matrix_from(self.entries(x, false))
    }

    pub fn companion_matrix(&self, x: f64) -> ComplexMatrix {
        Self::matrix_from(self.entries(x, true))
    }

    fn top(((p, s), _): Entries) -> f64 {
        p.hypot(s)
    }

    fn top_derivative(((p, s), (dp, ds)): Entries) -> f64 {
        let a = p.hypot(s);
        if a == 0.0 {
            0.0
        } else {
            (p * dp + s * ds) / a
        }
    }

    /// The nonnegative eigenvalue (`a_n`).
    pub fn eigenvalue(&self, x: f64) -> f64 {
        Self::top(self.entries(x, false))
    }

    /// The nonnegative eigenvalue of the companion (`a`, `b_n` or `a_{2n}`).
    pub fn companion_eigenvalue(&self, x: f64) -> f64 {
        Self::top(self.entries(x, true))
    }

    /// Analytic derivative of [`Self::eigenvalue`] where it exists.
    pub fn derivative(&self, x: f64) -> f64 {
        Self::top_derivative(self.entries(x, false))
    }

    pub fn companion_derivative(&self, x: f64) -> f64 {
        Self::top_derivative(self.entries(x, true))
    }

    fn build(&self, companion: bool) -> Result<(SampledFamily<ComplexMatrix>, SampledFamily<OrderedSpectrum>)> {
        let matrices = SampledFamily::sample(self.grid.clone(), |x| Self::matrix_from(self.entries(x[0], companion)));
        let spectra = SampledFamily::sample(self.grid.clone(), |x| {
            let a = Self::top(self.entries(x[0], companion));
            OrderedSpectrum::from_unsorted(vec![-a, a])
        });
        let solved = char_map_hermitian(&matrices)?;
        for (node, (got, want)) in solved.flow.samples().iter().zip(spectra.samples()).enumerate() {
            let deviation = got.values().iter().zip(want.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if deviation > 1e-10 {
                return Err(Error::SolverMismatch { node, deviation });
            }
        }
        Ok((matrices, spectra))
    }
}

/// The sampled matrices `A_n` and their closed-form ordered spectra
/// `(−a_n, a_n)`, after checking the eigensolver against the closed form to
/// `1e-10` at every node.
pub fn make_family(c: &Counterexample) -> Result<(SampledFamily<ComplexMatrix>, SampledFamily<OrderedSpectrum>)> {
    c.build(false)
}

/// The same for the companion family.
pub fn make_companion(c: &Counterexample) -> Result<(SampledFamily<ComplexMatrix>, SampledFamily<OrderedSpectrum>)> {
    c.build(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lower: f64, upper: f64, n: usize) -> Grid {
        Grid::interval(lower, upper, n).unwrap()
    }

    #[test]
    fn ex_a_at_zero() {
        let c = Counterexample::new(FamilyId::ExA, 5, 0.5, grid(-1.0, 1.0, 11)).unwrap();
        let (m, s) = make_family(&c).unwrap();
        let zero = &m.samples()[5];
        assert_eq!(*zero, ComplexMatrix::from_real_diagonal(&[0.2, -0.2]));
        assert_eq!(s.samples()[5].values(), &[-0.2, 0.2]);
    }

    #[test]
    fn sawtooth_shape() {
        let n = 7;
        for k in 0..=n {
            let want = if k % 2 == 0 { 0.0 } else { 1.0 / n as f64 };
            assert!((sawtooth(n, k as f64 / n as f64) - want).abs() < 1e-15);
        }
        assert!((sawtooth(n, 1.0 / (2.0 * n as f64)) - 1.0 / (2.0 * n as f64)).abs() < 1e-15);
        assert_eq!(sawtooth_slope(n, 0.5 / n as f64), 1.0);
        assert_eq!(sawtooth_slope(n, 1.5 / n as f64), -1.0);
        let c = Counterexample::new(FamilyId::ExUcq, n, 0.5, grid(0.0, 1.0, 8 * n + 1)).unwrap();
        make_family(&c).unwrap();
        make_companion(&c).unwrap();
    }

    #[test]
    fn ex_auc_half_is_r_one() {
        let c = Counterexample::new(FamilyId::ExAuc, 4, 0.5, grid(-1.0, 1.0, 5)).unwrap();
        assert_eq!(c.r(), 1.0);
        assert_eq!(c.matrix(0.5), ComplexMatrix::from_real_rows(&[[0.25, 2.0], [2.0, -0.25]]));
        assert!(Counterexample::new(FamilyId::ExAuc, 4, 1.0, grid(-1.0, 1.0, 5)).is_err());
        assert!(Counterexample::new(FamilyId::ExA, 0, 0.5, grid(-1.0, 1.0, 5)).is_err());
    }

    #[test]
    fn analytic_derivatives() {
        let c = Counterexample::new(FamilyId::ExA, 100, 0.5, grid(-1.0, 1.0, 3)).unwrap();
        assert!((c.derivative(0.01) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.companion_derivative(0.3), 1.0);
        assert_eq!(c.companion_derivative(-0.3), -1.0);
        assert_eq!("exAuc".parse::<FamilyId>().unwrap(), FamilyId::ExAuc);
        assert!("exB".parse::<FamilyId>().is_err());
    }
}
