use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid atom #{index} ({point}, {mass}): {reason}")]
    InvalidAtom {
        index: usize,
        point: f64,
        mass: f64,
        reason: &'static str,
    },

    #[error("cannot normalize zero measure")]
    ZeroMeasure,

    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),

    /// The moment sequence generated by a triplet is not strictly positive.
    #[error("triplet does not generate a positive sequence (witness index {witness:?})")]
    NonPositiveSequence { witness: Option<u64> },

    #[error("positivity of the generated sequence could not be decided")]
    Undecided,

    #[error("beta_{n} disagrees between routes: closed form {closed}, from weights {direct}")]
    BetaMismatch { n: u64, closed: f64, direct: f64 },

    #[error("{0}")]
    WrongType(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("empty parameter window: {0}")]
    EmptyWindow(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
