//! Nonrelativistic particle dynamics in a constant force on deformed phase
//! spaces: classical, canonical (`{x_i, x_j} = θ_ij`), Lie-algebraic with
//! coordinates closing on time or on space, and a time-dependent quadratic
//! deformation.
//!
//! The crate integrates the Hamilton flow `ζ̇ = Π(ζ, t) ∂H` numerically and
//! cross-checks it against closed-form trajectories.

pub mod analysis;
pub mod analytic;
pub mod dynamics;
mod error;
pub mod fresnel;
pub mod integrator;
pub mod phasespace;
pub mod quadrature;

pub use analysis::{compare, convergence_order, ComparisonReport, Tolerances};
pub use analytic::{
    classical_solution, closed_form, lie_space_solution, lie_time_solution, quadratic_solution,
    roll_distance, vortex_period, ScenarioParams,
};
pub use dynamics::{
    consistency_residual, hamilton_rhs, hamilton_rhs_explicit, hamiltonian, newton_accel, ForceModel,
    ParticleModel, PotentialField, PotentialModel,
};
pub use error::{Error, Result};
pub use fresnel::fresnel;
pub use integrator::{integrate, simulate, IntegratorConfig, Trajectory, TrajectoryMeta};
pub use phasespace::{
    bracket, jacobi_residual, structure_matrix, Axis, DeformationSpec, PhaseState, PoissonStructure,
    StructureMatrix, Vec3, WithoutMomentumExtension,
};
