//! Grid, stencils and the two PDE kernels of the iteration.

pub mod diff;
pub mod elliptic;
pub mod grid;
pub mod interp;
pub mod transport;

pub use diff::Parity;
pub use elliptic::{EllipticCoefficients, EllipticSolver, PotentialSolution};
pub use grid::GridQ;
pub use interp::Interpolation;
pub use transport::{solve_bernoulli_transport, trace_characteristics, CharacteristicFoot};
