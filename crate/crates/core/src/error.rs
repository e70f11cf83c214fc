use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or checking a cover.
#[derive(Debug, Error)]
pub enum Error {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("closed loop is not Hurwitz (spectral abscissa {abscissa:e})")]
    UnstableClosedLoop { abscissa: f64 },

    /// The Riccati equation has no admissible (stabilizing, positive semidefinite) solution.
    #[error("Riccati equation has no admissible solution: {0}")]
    NoSolution(String),

    #[error("pair (A, B) is not stabilizable: {0}")]
    Uncontrollable(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("guaranteed cost synthesis found no feasible tau")]
    GccInfeasible,

    #[error("certified bound {bound} violated: observed cost {worst} at sigma {sigma:?}")]
    CertificationFailure { bound: f64, worst: f64, sigma: Vec<f64> },

    #[error("cover construction failed: {0}")]
    CoverConstruction(String),

    #[error("no cover found up to pitch {max_pitch}: {} uncertified cells at the last pitch", failing.len())]
    CoverNotFound { max_pitch: usize, failing: Vec<FailingCell> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A cell that could not be certified, kept for failure reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FailingCell {
    pub index: Vec<usize>,
    pub sigma_lo: Vec<f64>,
    pub sigma_hi: Vec<f64>,
    pub reason: String,
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NumericalFailure(_) => "numerical_failure",
            Error::UnstableClosedLoop { .. } => "unstable_closed_loop",
            Error::NoSolution(_) => "no_solution",
            Error::Uncontrollable(_) => "uncontrollable",
            Error::ContractViolation(_) => "contract_violation",
            Error::Domain(_) => "domain",
            Error::GccInfeasible => "gcc_infeasible",
            Error::CertificationFailure { .. } => "certification_failure",
            Error::CoverConstruction(_) => "cover_construction",
            Error::CoverNotFound { .. } => "cover_not_found",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
