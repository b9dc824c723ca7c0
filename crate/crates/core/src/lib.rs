//! Steady transonic shocks of the forced 2D Euler system in a flat nozzle.

pub mod background;
pub mod coefficients;
pub mod error;
pub mod field;
pub mod gas;
pub mod io;
pub mod iteration;
pub mod state;

pub use background::{oblique_jump, rh_jump, BackgroundSolution, NozzleSetup, PressureWindow, Regime, ShootingOptions, SolutionBranch};
pub use coefficients::{rh_boundary_partials, JumpPartials, LinearCoefficients};
pub use error::{Error, Result};
pub use gas::{FlowState, ForceField, GasModel};
pub use field::{GridQ, Interpolation, PotentialSolution};
pub use state::{ExitPerturbation, ExitProfile, PerturbationState};
pub use iteration::{update_shock, IterationOptions, IterationReport, PhysicalFields, RemainderBundle, ResidualReport, ShockProblem};
