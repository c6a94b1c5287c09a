use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unphysical Bloch vector: norm {norm} exceeds 1")]
    UnphysicalBloch { norm: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} outside the domain of {what}")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("degenerate ratio: both outputs dark")]
    DarkOutputs,

    #[error("incomplete correlator table: missing E[{a0}{a1},{y}]")]
    IncompleteTable { a0: u8, a1: u8, y: u8 },

    #[error("triad is not orthonormal (deviation {deviation:e})")]
    NonOrthonormalTriad { deviation: f64 },

    #[error("distinguishability of input {a0}{a1} (y={y}) drifts with phi_x by {drift:e}")]
    EncodingViolated { a0: u8, a1: u8, y: u8, drift: f64 },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
