//! Ground states of the semilinear Kirchhoff–Love plate functional
//!
//! ```text
//! J_σ(u) = ½∫(Δu)² − ½(1 − σ)∮ u_n² − (1/(p+1))∫ g|u|^{p+1}
//! ```
//!
//! on the unit disk under Steklov boundary conditions, computed by radial
//! spectral collocation.

pub mod eigen;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod operators;
pub mod solve;
pub mod verify;

pub use eigen::{first_eigenfunction, sigma_star, steklov_eigs, EigenResult};
pub use energy::{energy, rayleigh, t_star, EnergyReport};
pub use error::{Error, Result};
pub use experiments::{Outcome, RunConfig};
pub use grid::{build_grid, diff_op, quad, RadialGrid, Scheme};
pub use operators::{Boundary, ProblemParams, Profile, RadialField, SteklovSystem};
pub use solve::{
    ground_state, ground_state_with, solve_linear, sweep, GroundStateResult, References,
    SolveOptions, StartProfile, SweepRecord,
};
pub use verify::Certificates;
