//! Radial equilibria of a self-gravitating gas confined to the unit ball.
//!
//! Every radial solution of the nonlocal problem `Δφ = F(λ − φ)`, `φ = 0` on
//! the boundary, `∫ F(λ − φ) = M` is parametrized by its central density
//! `ρ₀`. For each `ρ₀` the crate integrates the cumulated-mass system from
//! a truncated centre out to the boundary, reconstructs the profile and
//! its energies, and sweeps `ρ₀` to trace bifurcation branches, locate
//! turning points and count solutions for a prescribed mass.
//!
//! Three statistics are supported: Maxwell–Boltzmann, Fermi–Dirac and the
//! simplified Fermi–Dirac model (see [`statistics`]).

pub mod branch;
pub mod energetics;
pub mod error;
pub mod fermi;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod shooting;
pub mod statistics;
pub mod validation;

pub use branch::{
    count_solutions, detect_turning_points, refine_root, trace_branch, Branch, BranchSample,
    SolutionCount, TurningPoint, TurningPointSet,
};
pub use energetics::{entropy, free_energy, potential_energy, EnergyReport, PotentialConvention};
pub use error::{Error, Result};
pub use fermi::{FermiEvalConfig, FermiOrder};
pub use shooting::{
    initial_state, integrate, reconstruct_profile, trajectory_distance, IntegratorConfig,
    SolutionProfile, Trajectory, TrajectorySample,
};
pub use statistics::{ModelSpec, Statistics, ThermoValues};
pub use validation::CheckReport;
