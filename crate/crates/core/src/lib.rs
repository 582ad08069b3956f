//! Structure-preserving time integration of the Landau-Lifshitz-Gilbert
//! equation for single magnetic moments.
//!
//! The LLG equation is rewritten as `∂t m = W·m` with a skew-symmetric `W`
//! built from the effective field and the director itself. The exact flow of
//! such an equation is a rotation, which the exponential update reproduces at
//! any step size through the closed-form exponential in [`so3`]. Backward
//! Euler, a renormalized backward Euler and two midpoint variants are
//! provided for comparison.
//!
//! Modules:
//! - [`so3`]: 3-vectors, 3x3 matrices, hat map, skew exponential.
//! - [`field`]: anisotropy enthalpies and the effective field.
//! - [`integrators`]: the time steppers and their fixed-point solver.
//! - [`experiments`]: trajectories, the switching and step-size studies.

pub mod error;
pub mod experiments;
pub mod field;
pub mod integrators;
pub mod so3;

pub use error::{Error, Result};
pub use experiments::{
    analytic_period, deviation_from_reference, polar_angle_unwrapped, run_precession_study,
    run_stepsize_study, run_trajectory, ExperimentSpec, Horizon, Sample, Steps, StepsizeStudy,
    SummaryRow, Trajectory,
};
pub use field::{
    AnisotropyKind, AnisotropyModel, AnisotropyScaling, FieldConfig, MaterialParams,
};
pub use integrators::{IntegratorConfig, Scheme, StepReport};
pub use so3::{Mat3, Vec3};
