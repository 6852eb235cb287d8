use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),

    #[error("unsupported basis order {0} (supported: 0..=3)")]
    UnsupportedOrder(usize),

    #[error("order mismatch: basis has order {basis}, charge space has order {charge}")]
    OrderMismatch { basis: usize, charge: usize },

    #[error("reference point ({0}, {1}) lies outside the reference triangle")]
    OutsideReference(f64, f64),

    #[error(
        "non-finite kernel value for cells {cell_a} and {cell_b} (pair classified as {class})"
    )]
    NonFiniteKernel {
        cell_a: usize,
        cell_b: usize,
        class: &'static str,
    },

    #[error("conjugate gradients did not converge in {iterations} iterations (last relative residual {:.3e})", .history.last().copied().unwrap_or(f64::NAN))]
    CgNotConverged {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("GMRES stagnated after {iterations} iterations at relative residual {residual:.3e}")]
    GmresStagnation { iterations: usize, residual: f64 },

    #[error("power iteration did not converge in {0} iterations")]
    PowerIterationNotConverged(usize),

    #[error("singular system matrix")]
    SingularMatrix,

    #[error("matrix of size {size} exceeds the dense limit {limit}")]
    DenseLimit { size: usize, limit: usize },

    #[error("singular value decomposition failed")]
    SvdFailed,

    #[error("empty solenoidal subspace: cannot form the scaling constant")]
    ZeroSolenoidalNorm,

    #[error("Mie series did not converge with {0} terms")]
    MieTruncation(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
