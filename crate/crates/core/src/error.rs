use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error(
        "probability at abscissa {abscissa} is zero; the grid is below the resolution of the data"
    )]
    ZeroProbability { abscissa: f64 },

    #[error("grid abscissae must be strictly {0}")]
    NotMonotone(&'static str),

    #[error("empty interval [{lo}, {hi}]")]
    EmptyBox { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature did not converge (estimated relative error {estimated_error:e} at depth {depth})")]
    NonConvergence { depth: usize, estimated_error: f64 },

    #[error("no sampled path satisfies the conditioning event")]
    EmptyConditioning,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
