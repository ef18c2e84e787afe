//! Reference solutions and error analysis.

mod constants;
mod convergence;
mod exact;
mod gronwall;
mod spectral;

pub use constants::{theory_constants, DxRestriction, TheoryConstants};
pub use convergence::{
    convergence_study, ConvergenceRow, ConvergenceTable, LevelStatus, Reference,
};
pub use exact::{exact_soliton, ExactSolution, Soliton, SolutionFn, SupBounds};
pub use gronwall::{gronwall_check, GronwallReport};
pub use spectral::{
    spectral_reference, trig_interpolant, trig_resample, SpectralEvolver, SPECTRAL_TOL,
};

use crate::equation::EquationSpec;
use crate::error::{check_len, Result};
use crate::grid::{h1_norm, Grid, State};
use crate::schemes::scheme_residual;

/// Local truncation error `ξ⁽ᵐ⁾`: the scheme residual at the sampled exact
/// solution, `R(ũ⁽ᵐ⁺¹⁾, ũ⁽ᵐ⁾)`.
pub fn truncation_error(
    spec: &EquationSpec,
    grid: &Grid,
    exact: &ExactSolution,
    m: usize,
) -> Result<State> {
    exact.validate_for(spec)?;
    let curr = exact.sample_level(grid, m);
    let next = exact.sample_level(grid, m + 1);
    scheme_residual(spec, grid, &next, &curr)
}

/// `‖u - ref‖_{H¹}`.
pub fn h1_error(u: &[f64], reference: &[f64], dx: f64) -> Result<f64> {
    check_len(u.len(), reference.len())?;
    let e: Vec<f64> = u.iter().zip(reference).map(|(a, b)| a - b).collect();
    Ok(h1_norm(&e, dx))
}
