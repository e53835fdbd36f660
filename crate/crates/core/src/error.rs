use thiserror::Error;

/// Errors raised by analysis, synthesis, simulation and model building.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("attack index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("pencil (E, A) is not regular")]
    NotRegular,
    #[error("system is not index one: {0}")]
    NotIndexOne(String),
    #[error("s = {re}{im:+}i is a generalized eigenvalue of (E, A)")]
    SingularAtS { re: f64, im: f64 },
    #[error("Rosenbrock pencil has deficient normal column rank")]
    NotLeftInvertible,
    #[error("search budget of {0} evaluations exhausted")]
    BudgetExceeded(usize),
    #[error("no undetectability witness available: {0}")]
    NoWitness(String),
    #[error("transfer matrix has trivial right null space")]
    TrivialNullSpace,
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("model shape mismatch: {0}")]
    ModelShapeMismatch(String),
    #[error("network graph is disconnected")]
    DisconnectedGraph,
    #[error("generator {0} has nonpositive inertia")]
    NonpositiveInertia(usize),
    #[error("pipe {0} has zero operating pressure drop")]
    ZeroOperatingDrop(usize),
    #[error("missing data file: {0}")]
    MissingDataFile(String),
    #[error("pencil pattern s[E]-[A] is structurally degenerate")]
    DegeneratePencil,
    #[error("integration diverged at t = {0}")]
    StepUnstable(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag used in CLI and FFI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NotRegular => "NotRegular",
            Error::NotIndexOne(_) => "NotIndexOne",
            Error::SingularAtS { .. } => "SingularAtS",
            Error::NotLeftInvertible => "NotLeftInvertible",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::NoWitness(_) => "NoWitness",
            Error::TrivialNullSpace => "TrivialNullSpace",
            Error::PreconditionUnmet(_) => "PreconditionUnmet",
            Error::ModelShapeMismatch(_) => "ModelShapeMismatch",
            Error::DisconnectedGraph => "DisconnectedGraph",
            Error::NonpositiveInertia(_) => "NonpositiveInertia",
            Error::ZeroOperatingDrop(_) => "ZeroOperatingDrop",
            Error::MissingDataFile(_) => "MissingDataFile",
            Error::DegeneratePencil => "DegeneratePencil",
            Error::StepUnstable(_) => "StepUnstable",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for negative or inconclusive analysis outcomes, false for bad input data.
    pub fn is_analysis(&self) -> bool {
        matches!(
            self,
            Error::NotRegular
                | Error::NotIndexOne(_)
                | Error::SingularAtS { .. }
                | Error::NotLeftInvertible
                | Error::BudgetExceeded(_)
                | Error::NoWitness(_)
                | Error::TrivialNullSpace
                | Error::PreconditionUnmet(_)
                | Error::DegeneratePencil
                | Error::StepUnstable(_)
        )
    }
}
