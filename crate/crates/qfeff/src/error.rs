use thiserror::Error;

/// Errors surfaced by the symbolic kernel and the geometric layers on top
/// of it.  Fallible constructors return `Result<_, Error>`; internal
/// invariant violations panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("division by a quantity that is identically zero")]
    DivisionByZero,

    #[error("no value supplied for symbol `{0}` at the sample point")]
    MissingAssignment(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vector is not null: g(k,k) = {0:.3e}")]
    NotNull(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("coframe is singular at the base point (determinant {0:.3e})")]
    SingularCoframe(f64),

    #[error("quantity expected to vanish has magnitude {0:.3e}")]
    NonVanishing(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
