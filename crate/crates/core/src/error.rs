use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("parameter {name} = {value} lies outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("row-sum constraint {row} violated: residual {residual:e}")]
    ConstraintViolation { row: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing key `{0}` in model file")]
    MissingKey(&'static str),

    #[error("closed form disagrees with generic compression for {partition}: |{closed:e} - {generic:e}| = {discrepancy:e}")]
    Inconsistent {
        partition: String,
        closed: f64,
        generic: f64,
        discrepancy: f64,
    },
}
