//! Residual and fixed-point forms of the energy-conservative scheme
//!
//! ```text
//! δ⁺_t u = -c δ⟨1⟩_x F(u⁺, u) + β δ⟨1⟩_x δ⟨2⟩_x μ⁺_t u  [+ γ δ⟨1⟩_x (δ_FD⁻¹)² μ⁺_t u]
//! ```
//!
//! where `F` is the symmetric polynomial flux of [`dvdm_flux`] and `c` the
//! family's leading coefficient (`α/6`, or `α/(p(p+1))` for generalized KdV).

use crate::equation::{EquationSpec, Family};
use crate::error::{check_len, Error, Result};
use crate::grid::{Grid, State};
use crate::operators::{dispersion, stencil_apply, FdInverse, Stencil};

/// `Σ_{j=0}^{p} a^j b^{p-j}`, i.e. `(a^{p+1} - b^{p+1}) / (a - b)` without the
/// removable singularity at `a = b`.
pub fn flux_scalar(family: Family, a: f64, b: f64) -> f64 {
    match family {
        Family::Kdv | Family::Ostrovsky { .. } => a * a + a * b + b * b,
        Family::GeneralizedKdv { p } => {
            let mut pow_a = 1.0;
            let mut s = 1.0;
            for _ in 0..p {
                pow_a *= a;
                s = pow_a + b * s;
            }
            s
        }
    }
}

/// `∂/∂a` of [`flux_scalar`].
pub fn flux_derivative(family: Family, a: f64, b: f64) -> f64 {
    match family {
        Family::Kdv | Family::Ostrovsky { .. } => 2.0 * a + b,
        Family::GeneralizedKdv { p } => {
            // S_n = a^n + b S_{n-1}  =>  S'_n = n a^{n-1} + b S'_{n-1}
            let mut pow_a_prev = 1.0;
            let mut ds = 0.0;
            for n in 1..=p {
                ds = n as f64 * pow_a_prev + b * ds;
                pow_a_prev *= a;
            }
            ds
        }
    }
}

/// Elementwise discrete flux, before the coefficient and `δ⟨1⟩_x`.
pub fn dvdm_flux(spec: &EquationSpec, next: &[f64], curr: &[f64]) -> Result<State> {
    check_len(next.len(), curr.len())?;
    let family = spec.family();
    Ok(State(
        next.iter()
            .zip(curr)
            .map(|(&a, &b)| flux_scalar(family, a, b))
            .collect(),
    ))
}

/// Step-size thresholds below which the fixed-point map is a self-map of the
/// ball `‖w‖_∞ ≤ q r` (`eps1`) and a contraction on it (`eps2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBounds {
    pub eps1: f64,
    pub eps2: f64,
    pub q: f64,
    pub r: f64,
}

impl StepBounds {
    pub fn min(&self) -> f64 {
        self.eps1.min(self.eps2)
    }

    /// Strict inequality `dt < min(eps1, eps2)`.
    pub fn admits(&self, dt: f64) -> bool {
        dt < self.min()
    }
}

pub fn step_size_bounds(q: f64, r: f64, dx: f64, alpha: f64, beta: f64) -> Result<StepBounds> {
    if !(q > 1.0) {
        return Err(Error::invalid("q", format!("need q > 1, got {q}")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("need r > 0, got {r}")));
    }
    if !(dx > 0.0) {
        return Err(Error::invalid("dx", format!("need dx > 0, got {dx}")));
    }
    let (a, b) = (alpha.abs(), beta.abs());
    let dx2 = dx * dx;
    let dx3 = dx2 * dx;
    let eps1 = (q - 1.0) * dx3 / (a / 6.0 * dx2 * (q * q + q + 1.0) * r + 1.5 * b * (q + 1.0));
    let eps2 = dx3 / (a / 6.0 * dx2 * (2.0 * q + 1.0) * r + 1.5 * b);
    Ok(StepBounds { eps1, eps2, q, r })
}

/// The scheme for one equation on one grid, with the Ostrovsky inverse
/// operator planned once.
#[derive(Debug, Clone)]
pub struct Scheme {
    spec: EquationSpec,
    grid: Grid,
    fd_inverse: Option<FdInverse>,
}

impl Scheme {
    pub fn new(spec: EquationSpec, grid: Grid) -> Self {
        let fd_inverse = matches!(spec.family(), Family::Ostrovsky { .. })
            .then(|| FdInverse::new(grid.nodes(), grid.dx()));
        Scheme {
            spec,
            grid,
            fd_inverse,
        }
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fd_inverse(&self) -> Option<&FdInverse> {
        self.fd_inverse.as_ref()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        check_len(v.len(), self.grid.nodes())
    }

    /// Linear part `β δ⟨1⟩δ⟨2⟩ s + γ δ⟨1⟩ (δ_FD⁻¹)² s` applied to `s`.
    pub fn linear_part(&self, s: &[f64]) -> State {
        let dx = self.grid.dx();
        let beta = self.spec.beta();
        let mut out = dispersion(s, dx);
        out.0.iter_mut().for_each(|v| *v *= beta);
        if let Some(inv) = &self.fd_inverse {
            let gamma = self.spec.gamma();
            let nonlocal = stencil_apply(Stencil::CDiff1, &inv.apply_twice(s), dx);
            for (o, n) in out.0.iter_mut().zip(nonlocal.0) {
                *o += gamma * n;
            }
        }
        out
    }

    /// Right-hand side of the scheme, evaluated with `next` in the flux and
    /// averages.
    pub fn rhs(&self, next: &[f64], curr: &[f64]) -> Result<State> {
        self.check(next)?;
        self.check(curr)?;
        let family = self.spec.family();
        let flux: Vec<f64> = next
            .iter()
            .zip(curr)
            .map(|(&a, &b)| flux_scalar(family, a, b))
            .collect();
        let avg: Vec<f64> = next.iter().zip(curr).map(|(a, b)| 0.5 * (a + b)).collect();
        let c = self.spec.flux_coefficient();
        let dflux = stencil_apply(Stencil::CDiff1, &flux, self.grid.dx());
        let lin = self.linear_part(&avg);
        Ok(State(
            dflux.0.iter().zip(lin.0).map(|(f, l)| -c * f + l).collect(),
        ))
    }

    /// `R = δ⁺_t u - RHS`, in units of 1/time. Zero exactly on scheme solutions.
    pub fn residual(&self, next: &[f64], curr: &[f64]) -> Result<State> {
        let rhs = self.rhs(next, curr)?;
        let dt = self.grid.dt();
        Ok(State(
            next.iter()
                .zip(curr)
                .zip(rhs.0)
                .map(|((a, b), r)| (a - b) / dt - r)
                .collect(),
        ))
    }

    /// The fixed-point map `φ(w) = u + Δt · RHS(w, u)`; its fixed points are
    /// exactly the solutions of the scheme.
    pub fn phi(&self, curr: &[f64], w: &[f64]) -> Result<State> {
        let rhs = self.rhs(w, curr)?;
        let dt = self.grid.dt();
        Ok(State(
            curr.iter().zip(rhs.0).map(|(u, r)| u + dt * r).collect(),
        ))
    }
}

pub fn scheme_residual(
    spec: &EquationSpec,
    grid: &Grid,
    next: &[f64],
    curr: &[f64],
) -> Result<State> {
    Scheme::new(*spec, *grid).residual(next, curr)
}

pub fn phi_map(spec: &EquationSpec, grid: &Grid, curr: &[f64], w: &[f64]) -> Result<State> {
    Scheme::new(*spec, *grid).phi(curr, w)
}
