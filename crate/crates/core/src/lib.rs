//! Energy-conservative finite-difference schemes for KdV-type equations.
//!
//! The crate covers the whole pipeline for the periodic problem
//! `u_t = -alpha (f(u))_x + beta u_xxx`:
//!
//! - [`grid`]: periodic grids, state vectors, discrete norms and inner products.
//! - [`operators`]: the difference/average operator algebra and the generalized
//!   inverse of the central difference used by the Ostrovsky equation.
//! - [`schemes`]: residual and fixed-point forms of the conservative scheme for
//!   KdV, generalized KdV and Ostrovsky, plus the step-size bounds that make the
//!   fixed-point map a contraction.
//! - [`solver`]: one-step solvers (fixed point and Newton) and full simulations.
//! - [`invariants`]: discrete mass, energy, norm and the modified error energy.
//! - [`analysis`]: exact and spectral reference solutions, truncation error,
//!   convergence studies, the Gronwall checker and the explicit error constants.
//! - [`checks`]: seeded randomized property suites over all of the above.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod checks;
pub mod equation;
pub mod error;
pub mod grid;
pub mod invariants;
mod linalg;
pub mod operators;
pub mod schemes;
pub mod solver;
mod summation;

pub use equation::{EquationSpec, Family};
pub use error::{Error, Result};
pub use grid::{Grid, State};
pub use invariants::InvariantReport;
pub use operators::{FdInverse, Stencil, TemporalOp};
pub use schemes::{Scheme, StepBounds};
pub use solver::{Guard, Method, SimulationError, SolverConfig, StepDiagnostics, TimeSeries};
