//! ODE integration of the direct and regularized Kepler flows, orbit
//! equivalence up to reparametrization and orbit classification.

mod integrator;
mod orbit;
mod regularized;
mod trace;
mod trajectory;

pub use integrator::{hermite, integrate, integrate_clocked, solve, state_at, Event, IntegratorConfig, Outcome, Rhs};
pub use orbit::{detect_periodicity, energy_drift_report, eventually_monotone, golden_section, wrap_angle, OrbitClass, OrbitReport};
pub use regularized::{
    compare_regularized, integrate_direct, integrate_regularized, RegimeAtlas, RegularizedRun, RegularizedSegment, Side, COMPARE_TOLERANCE,
    WINDOWED_TOLERANCE,
};
pub use trace::{
    arc_length, dense_trace, hausdorff, hausdorff_positions, resample_arc_length, trace_distance, Point2, DENSE_SPACING, RESAMPLE_POINTS,
};
pub use trajectory::{Method, Sample, Trajectory, TrajectoryMeta};
