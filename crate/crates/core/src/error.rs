use crate::lattice::NodeRole;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice has {nodes} nodes but the enumeration cap is {cap}")]
    EnumerationLimit { nodes: usize, cap: usize },

    #[error("numeric range: {0}")]
    NumericRange(String),

    /// Conditioning on an event whose stabilized weight is below [`crate::model::ZERO_MEASURE`].
    #[error("zero-measure condition: {0}")]
    ZeroMeasure(String),

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("lattice has no {0} node")]
    MissingRole(NodeRole),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a model with null conditioning events.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::ZeroMeasure(_) | Error::Degenerate(_))
    }
}
