//! Numerical realization of the Reeb–Beltrami correspondence for the
//! regularized Kepler problem.
//!
//! The crate builds the constant-curvature metrics of the three energy
//! regimes, their Sasaki–Mok lifts to the unit cotangent bundle, and the Reeb
//! fields of the Liouville form, and checks pointwise (with automatic
//! differentiation) that these fields are Beltrami with eigenvalue one. The
//! [`dynamics`] module integrates the direct and regularized flows and
//! compares them up to reparametrization.

pub mod ad;
pub mod chart;
pub mod correspondence;
pub mod dynamics;
pub mod error;
pub mod forms;
pub mod hamiltonian;
pub mod lift;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod suite;

pub use ad::Dual;
pub use chart::{Chart, ChartPoint, EnergyRegime, MetricField, SignClass};
pub use error::{Error, Result};
pub use forms::{KForm, ScalarField, VectorField, VolumeForm};
pub use report::VerificationReport;
