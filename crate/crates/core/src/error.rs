use crate::dynamics::Trajectory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside chart {chart}")]
    OutOfDomain { chart: String, point: Vec<f64> },
    #[error("form degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("interior product needs a form of degree at least 1")]
    DegreeUnderflow,
    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),
    #[error("volume form is degenerate (|coefficient| = {0:e})")]
    DegenerateVolume(f64),
    #[error("rescaling factor vanishes (|f| = {0:e})")]
    ZeroFactor(f64),
    #[error("operation requires an odd-dimensional chart of dimension 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("collision singularity: |q| = {0:e}")]
    CollisionSingularity(f64),
    #[error("trajectory is off the energy level by {0:e}")]
    EnergyDriftExceeded(f64),
    #[error("energy level {c} does not exceed the sampled potential maximum {max_potential}")]
    EnergyBelowPotential { c: f64, max_potential: f64 },
    #[error("initial state has energy {actual}, expected {expected}")]
    EnergyMismatch { expected: f64, actual: f64 },
    #[error("trajectory too sparse: {0}")]
    TooSparse(String),
    #[error("vector field vanishes (|X| = {0:e})")]
    VanishingField(f64),
    #[error("field is not Beltrami: curl residual {residual:e} against best-fit factor, |f| min {min_factor:e}")]
    NotBeltrami { residual: f64, min_factor: f64 },
    #[error("dα restricted to ker α is degenerate (|det| = {0:e})")]
    DegenerateTwoForm(f64),
    #[error("field is not Reeb-like: {0}")]
    NotReebLike(String),
    #[error("input is not invariant under the group action (residual {0:e})")]
    NotInvariant(f64),
    #[error("quadrature too coarse: doubling nodes changes the average by {0:e}")]
    QuadratureTooCoarse(f64),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64, partial: Box<Trajectory> },
    #[error("trajectory left the chart domain at t = {t}")]
    LeftDomain { t: f64, partial: Box<Trajectory> },
    #[error("collision at t = {time}")]
    Collision { time: f64, partial: Box<Trajectory> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable short name used in machine-readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::OutOfDomain { .. } | Error::LeftDomain { .. } => "OutOfDomain",
            Error::DegreeOverflow { .. } => "DegreeOverflow",
            Error::DegreeUnderflow => "DegreeUnderflow",
            Error::ChartMismatch(..) => "ChartMismatch",
            Error::DegenerateVolume(_) => "DegenerateVolume",
            Error::ZeroFactor(_) => "ZeroFactor",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::CollisionSingularity(_) => "CollisionSingularity",
            Error::EnergyDriftExceeded(_) => "EnergyDriftExceeded",
            Error::EnergyBelowPotential { .. } => "EnergyBelowPotential",
            Error::EnergyMismatch { .. } => "EnergyMismatch",
            Error::TooSparse(_) => "TooSparse",
            Error::VanishingField(_) => "VanishingField",
            Error::NotBeltrami { .. } => "NotBeltrami",
            Error::DegenerateTwoForm(_) => "DegenerateTwoForm",
            Error::NotReebLike(_) => "NotReebLike",
            Error::NotInvariant(_) => "NotInvariant",
            Error::QuadratureTooCoarse(_) => "QuadratureTooCoarse",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::Collision { .. } => "Collision",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
