use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid parameter: {0}")]
    GridParameter(String),

    #[error("grid mismatch: operands were built on different grids")]
    GridMismatch,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("basis mismatch: operands were compressed with different bases")]
    BasisMismatch,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("correlation undefined for a constant array")]
    ConstantArray,

    #[error("container i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("container format: {0}")]
    ContainerFormat(String),

    #[error("phantom spec: {0}")]
    PhantomSpec(String),
}
