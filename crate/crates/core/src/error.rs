use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix has zero Frobenius norm")]
    ZeroMatrix,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not normal (commutator residual {residual:.3e})")]
    NotNormal { residual: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("singular values need rows >= cols, got {rows}x{cols}; pass the adjoint")]
    WideMatrix { rows: usize, cols: usize },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("tuple sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("tuple size {d} exceeds exhaustive limit {max}")]
    TooLarge { d: usize, max: usize },
    #[error("rotation has modulus {modulus}, expected 1")]
    NotUnitModulus { modulus: f64 },
    #[error("pair {index} has zero d2 distance")]
    DegeneratePair { index: usize },
    #[error("component {index} has imaginary part {imag:.3e}")]
    NotRealTuple { index: usize, imag: f64 },
    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("exponent must satisfy 1 <= q (or be infinite), got {0}")]
    BadExponent(f64),
    #[error("{pairs} node pairs exceed the pair budget {budget}")]
    PairBudgetExceeded { pairs: usize, budget: usize },
    #[error("grids or sample shapes do not match")]
    GridMismatch,
    #[error("expected a curve (1-D grid), got dimension {0}")]
    NotCurve(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("smallest singular value {sigma:.3e} below floor {floor:.3e} at node {node}")]
    SingularNode { node: usize, sigma: f64, floor: f64 },
    #[error("all spectral values coincide within the gap tolerance")]
    AllEqual,
    #[error("spectral gap {gap:.3e} below required {required:.3e}")]
    GapTooSmall { gap: f64, required: f64 },
    #[error("cluster sizes change along the grid at node {node}")]
    ClusterFlip { node: usize },
    #[error("node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("eigensolver disagrees with the closed form by {deviation:.3e} at node {node}")]
    SolverMismatch { node: usize, deviation: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_node(node: usize, source: Error) -> Error {
        Error::AtNode { node, source: Box::new(source) }
    }

    /// Strips any `AtNode` wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root(),
            e => e,
        }
    }
}
