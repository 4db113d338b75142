use thiserror::Error;

/// Unified error type. Variants carry enough context to name the offending
/// entity (operand, matrix entry, file position) in user-facing output.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("division by zero: ({num}) / ({den})")]
    DivisionByZero { num: String, den: String },

    #[error("pi is transcendental and cannot be bound to a value")]
    PiBinding,

    #[error("undeclared symbol `{name}`")]
    UndeclaredSymbol { name: String },

    #[error("J^2 != -I at entry ({row}, {col}): got {entry}")]
    NotAlmostComplex { row: usize, col: usize, entry: String },

    #[error("J entry ({row}, {col}) = {entry} is not constant in the frame")]
    NonConstantJ { row: usize, col: usize, entry: String },

    #[error("manifold data invalid: {0}")]
    Manifold(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("outside the supported class: {0}")]
    Unsupported(String),

    #[error("family invalid: {0}")]
    Family(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("spec file invalid:{}", .0.iter().map(|e| format!("\n  - {e}")).collect::<String>())]
    SpecFile(Vec<String>),

    #[error("io error: {0}")]
    Io(String),

    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl Error {
    /// Exit code contract: 1 for validation errors, 2 for internal breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
