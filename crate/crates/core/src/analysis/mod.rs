//! Numerical companions to the convergence analysis: the energy
//! conservation relation, step-size bounds, the Wiener solution, the
//! second-moment recursion and a Monte Carlo check of the bound.

pub mod bounds;
pub mod ecr;
pub mod misalignment;
pub mod moments;
pub mod wiener;

pub use bounds::{error_std, stepsize_bound, stepsize_bound_eigen, DEFAULT_SIGMA_WINDOW};
pub use ecr::{ecr_run, ecr_step, EcrRecord, EcrRunConfig, ExplicitWeightState};
pub use misalignment::{mean_misalignment, pilot_bound, MisalignmentConfig};
pub use moments::{moment_recursion_step, MomentState};
pub use wiener::{wiener_solution, WienerSolution};
