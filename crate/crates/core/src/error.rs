use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("field has {got} values but the mesh has {expected} vertices")]
    Misaligned { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("mesh has no boundary vertices")]
    NoBoundary,

    #[error("mesh is not closed: {0} boundary vertices")]
    NotClosed(usize),

    #[error("mesh has no snapped equator ring relative to the pole")]
    NoEquatorRing,

    #[error("not mirror symmetric: {0}")]
    Asymmetric(String),

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("map is not balanced: moment norm {defect:.3e} exceeds {limit:.3e}")]
    Unbalanced { defect: f64, limit: f64 },

    #[error("factor volume is {volume}, expected 1")]
    NotNormalized { volume: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
