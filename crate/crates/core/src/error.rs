use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coefficient nonpositive at x={x}")]
    Nonpositive { x: f64 },
    #[error("table format: {0}")]
    TableFormat(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("eigenvalue bracket not found below {limit}")]
    BracketNotFound { limit: f64 },
    #[error("precision warning: eigenvalue shifted by {shift:e} (relative) under step doubling")]
    Precision { shift: f64 },
    #[error("{solver} did not converge in {iterations} iterations (residual {residual:e})")]
    IterationCap {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("no zero crossing of the Prüfer angle")]
    NoCrossing,

    #[error("domain too thin for h = {h}: {nodes} nodes across the narrowest section")]
    TooThin { h: f64, nodes: usize },
    #[error("grid has no interior nodes on the symmetry axis")]
    NoAxisRow,
    #[error("point ({x}, {y}) too close to the boundary")]
    TooCloseToBoundary { x: f64, y: f64 },
    #[error("no admissible candidate points")]
    NoCandidates,
    #[error("flux contours disagree: {first} vs {second}")]
    ContourMismatch { first: f64, second: f64 },
}

impl Error {
    /// True for failures of a numerical method on valid input, as opposed
    /// to input that failed validation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::BracketNotFound { .. }
                | Error::Precision { .. }
                | Error::IterationCap { .. }
                | Error::NoCrossing
                | Error::ContourMismatch { .. }
        )
    }
}
