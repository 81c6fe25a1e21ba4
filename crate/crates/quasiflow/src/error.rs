use quasiflow_core::bifurcation::BifurcationError;
use quasiflow_core::flow::{FlowError, ProfileError};
use quasiflow_core::spectral::SpectralError;
use quasiflow_core::stationary::StationaryError;
use quasiflow_core::{FieldError, GridError, ParamsError};

use crate::record::RecordError;

/// Exit status for a bad request: invalid flags, inadmissible parameters
/// or unreadable inputs.
pub const EXIT_PRECONDITION: i32 = 2;
/// Exit status for a run that was accepted but failed numerically (or
/// could not be persisted).
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("writing {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Numerical(_) | CliError::Record(_) | CliError::Write { .. } => EXIT_NUMERICAL,
        }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::StiffnessBreakdown { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<StationaryError> for CliError {
    fn from(e: StationaryError) -> Self {
        match e {
            StationaryError::NoBracket { .. } | StationaryError::DegenerateWindow { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::TooManyEigenpairs(_) => CliError::Precondition(e.to_string()),
            SpectralError::Solver(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<BifurcationError> for CliError {
    fn from(e: BifurcationError) -> Self {
        match e {
            BifurcationError::Flow(e) => e.into(),
            BifurcationError::Stationary(e) => e.into(),
            BifurcationError::BracketFailure { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}
