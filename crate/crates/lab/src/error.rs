use std::path::PathBuf;

use nonlocal_core::certificates::CertificateError;
use nonlocal_core::domain::DomainError;
use nonlocal_core::model::ModelError;
use nonlocal_core::regimes::RegimeError;
use nonlocal_core::solver::SolverError;
use nonlocal_core::spectral::SpectralError;
use thiserror::Error;

/// Every failure the harness reports. [`LabError::exit_code`] maps each to
/// the process status: 2 for a bad config, 3 for a violated hypothesis or
/// precondition, 4 for a numerical failure, 1 for output I/O.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("config schema: {0}")]
    Schema(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl LabError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::ReadConfig { .. } | LabError::Schema(_) => 2,
            LabError::Hypothesis(_) => 3,
            LabError::Numerical(_) => 4,
            LabError::Write { .. } => 1,
        }
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        LabError::Schema(msg.into())
    }
}

impl From<ModelError> for LabError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Spectral(s) => s.into(),
            other => LabError::Schema(other.to_string()),
        }
    }
}

impl From<DomainError> for LabError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::ChartBreakdown { .. } => LabError::Numerical(e.to_string()),
            _ => LabError::Schema(e.to_string()),
        }
    }
}

impl From<SpectralError> for LabError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Domain(d) => d.into(),
            SpectralError::NonpositiveMargin(_) => LabError::Schema(e.to_string()),
            SpectralError::NoConvergence { .. } | SpectralError::EmptyWindow { .. } => LabError::Numerical(e.to_string()),
        }
    }
}

impl From<SolverError> for LabError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Model(m) => m.into(),
            SolverError::Spectral(s) => s.into(),
            SolverError::InvalidControls(_) => LabError::Schema(e.to_string()),
            SolverError::Incompatible { .. } | SolverError::ComparePrecondition(_) | SolverError::NotFlat(_) => {
                LabError::Hypothesis(e.to_string())
            }
            SolverError::BoundaryClosure { .. }
            | SolverError::StiffnessFailure { .. }
            | SolverError::NormalizationMismatch { .. }
            | SolverError::NoSnapshots(_) => LabError::Numerical(e.to_string()),
        }
    }
}

impl From<CertificateError> for LabError {
    fn from(e: CertificateError) -> Self {
        match e {
            CertificateError::Model(m) => m.into(),
            CertificateError::Spectral(s) => s.into(),
            CertificateError::Solver(s) => s.into(),
            CertificateError::Domain(d) => d.into(),
            CertificateError::Hypothesis { .. } | CertificateError::InfeasibleWindow(_) => LabError::Hypothesis(e.to_string()),
            CertificateError::GridMismatch { .. } | CertificateError::InvalidArgument(_) => LabError::Schema(e.to_string()),
            CertificateError::SearchExhausted { .. }
            | CertificateError::OutsideRegion { .. }
            | CertificateError::ThinMargin { .. } => LabError::Numerical(e.to_string()),
        }
    }
}

impl From<RegimeError> for LabError {
    fn from(e: RegimeError) -> Self {
        match e {
            RegimeError::Model(m) => m.into(),
            RegimeError::Run { source, .. } => source.into(),
            RegimeError::MissingHypothesis { .. } => LabError::Hypothesis(e.to_string()),
            RegimeError::BadScales(_) => LabError::Schema(e.to_string()),
        }
    }
}
