//! Discrete invariants and the error-energy functionals.
//!
//! [`energy`] is the single implementation of the conserved energy; the
//! solver diagnostics call it too.

use crate::equation::{EquationSpec, Family};
use crate::grid::{norm_sq, sup_norm};
use crate::operators::{stencil_apply, FdInverse, Stencil};
use crate::summation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub mass: f64,
    pub energy: f64,
    pub l2: f64,
    pub sup: f64,
}

impl InvariantReport {
    pub fn new(spec: &EquationSpec, v: &[f64], dx: f64) -> Self {
        Self::with_inverse(spec, v, dx, None)
    }

    pub(crate) fn with_inverse(
        spec: &EquationSpec,
        v: &[f64],
        dx: f64,
        inverse: Option<&FdInverse>,
    ) -> Self {
        InvariantReport {
            mass: mass(v, dx),
            energy: energy_with(spec, v, dx, inverse),
            l2: l2_invariant(v, dx),
            sup: sup_norm(v),
        }
    }
}

/// `𝓜_d(v) = Σ v_k dx`.
pub fn mass(v: &[f64], dx: f64) -> f64 {
    summation::sum(v.iter().copied()) * dx
}

/// `Σ v_k^n dx`.
fn power_sum(v: &[f64], n: u32, dx: f64) -> f64 {
    summation::sum(v.iter().map(|x| x.powi(n as i32))) * dx
}

/// Conserved discrete energy.
///
/// KdV: `(α/6) Σ v³ dx + (β/2) ‖δ⁺v‖²`.
/// Ostrovsky (normalized by `2/β`): `(α/(3β)) Σ v³ dx + ‖δ⁺v‖² + (γ/β) ‖δ_FD⁻¹ v‖²`.
/// Generalized KdV (normalized by `2/β`): `(2α/(p(p+1)β)) Σ v^{p+1} dx + ‖δ⁺v‖²`.
pub fn energy(spec: &EquationSpec, v: &[f64], dx: f64) -> f64 {
    energy_with(spec, v, dx, None)
}

pub(crate) fn energy_with(
    spec: &EquationSpec,
    v: &[f64],
    dx: f64,
    inverse: Option<&FdInverse>,
) -> f64 {
    let (alpha, beta) = (spec.alpha(), spec.beta());
    let grad = norm_sq(&stencil_apply(Stencil::FwdDiff, v, dx), dx);
    match spec.family() {
        Family::Kdv => alpha / 6.0 * power_sum(v, 3, dx) + 0.5 * beta * grad,
        Family::Ostrovsky { gamma } => {
            alpha / (3.0 * beta) * power_sum(v, 3, dx)
                + grad
                + gamma / beta * inverse_norm_sq(v, dx, inverse)
        }
        Family::GeneralizedKdv { p } => {
            let pf = p as f64;
            2.0 * alpha / (pf * (pf + 1.0) * beta) * power_sum(v, p + 1, dx) + grad
        }
    }
}

fn inverse_norm_sq(v: &[f64], dx: f64, inverse: Option<&FdInverse>) -> f64 {
    match inverse {
        Some(inv) if inv.len() == v.len() => norm_sq(&inv.apply(v), dx),
        _ => norm_sq(&FdInverse::new(v.len(), dx).apply(v), dx),
    }
}

/// `𝓝(v) = ‖v‖²`.
pub fn l2_invariant(v: &[f64], dx: f64) -> f64 {
    norm_sq(v, dx)
}

/// The non-quadratic part `A` of the error energy `‖δ⁺e‖² + A`.
///
/// KdV: `(α/(3β)) Σ e³ dx`; Ostrovsky adds `(γ/β) ‖δ_FD⁻¹ e‖²`;
/// generalized KdV: `(2α/(p(p+1)β)) Σ e^{p+1} dx`.
pub fn error_energy_a(spec: &EquationSpec, e: &[f64], dx: f64) -> f64 {
    let (alpha, beta) = (spec.alpha(), spec.beta());
    match spec.family() {
        Family::Kdv => alpha / (3.0 * beta) * power_sum(e, 3, dx),
        Family::Ostrovsky { gamma } => {
            alpha / (3.0 * beta) * power_sum(e, 3, dx) + gamma / beta * inverse_norm_sq(e, dx, None)
        }
        Family::GeneralizedKdv { p } => {
            let pf = p as f64;
            2.0 * alpha / (pf * (pf + 1.0) * beta) * power_sum(e, p + 1, dx)
        }
    }
}

/// Smallest `θ` for which `θ‖e‖² + ‖δ⁺e‖² + A ≥ ‖e‖²_{H¹}` whenever
/// `‖e‖_∞ ≤ 2qr`. `length` enters only through the Ostrovsky bound
/// `‖δ_FD⁻¹‖ ≤ L/4`.
pub fn theta_min(spec: &EquationSpec, q: f64, r: f64, length: f64) -> f64 {
    let (a, b) = (spec.alpha().abs(), spec.beta().abs());
    match spec.family() {
        Family::Kdv => 1.0 + 2.0 * q * r * a / (3.0 * b),
        Family::Ostrovsky { gamma } => {
            1.0 + (32.0 * a * q * r + 3.0 * gamma.abs() * length * length) / (48.0 * b)
        }
        Family::GeneralizedKdv { p } => {
            let pf = p as f64;
            let qr = (q * r).powi(p as i32 - 1);
            1.0 + 2f64.powi(p as i32) * a * qr / (pf * (pf + 1.0) * b)
        }
    }
}

/// `𝓔'_d = θ‖e‖² + ‖δ⁺e‖² + A`.
pub fn modified_error_energy(spec: &EquationSpec, e: &[f64], dx: f64, theta: f64) -> f64 {
    let de = stencil_apply(Stencil::FwdDiff, e, dx);
    theta * norm_sq(e, dx) + norm_sq(&de, dx) + error_energy_a(spec, e, dx)
}
