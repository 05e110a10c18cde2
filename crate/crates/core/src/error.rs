use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (negative radius, y ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid discretization or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two objects that must share a grid or lattice do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A computation left the representable floating-point range.
    #[error("numeric range error: {0}")]
    NumericRange(String),

    /// A geometric impossibility that should never be reachable.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("lattice generation failed: {0}")]
    Generation(String),

    #[error("covering violation at node {node}: no lattice center within support radius")]
    CoveringViolation { node: usize },

    #[error("point ({x}, {y}) lies outside the interpolation region")]
    Extrapolation { x: f64, y: f64 },

    #[error("iteration is not contracting: step ratio {ratio:.4} >= 1 for {steps} consecutive steps")]
    NonContraction { ratio: f64, steps: usize },

    #[error("ill-posed configuration: condition estimate {condition:.3e} exceeds {limit:.1e}")]
    IllPosed { condition: f64, limit: f64 },

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
