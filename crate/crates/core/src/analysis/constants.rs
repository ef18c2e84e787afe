use crate::analysis::SupBounds;
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::grid::sobolev_constant;
use crate::invariants::theta_min;

/// The mesh restriction that keeps `‖uᵐ‖_∞ ≤ r`.
#[derive(Debug, Clone, PartialEq)]
pub enum DxRestriction {
    /// `Δx ≤ bound`; zero when the constant overflows.
    Bound(f64),
    Undefined {
        reason: String,
    },
}

impl DxRestriction {
    pub fn bound(&self) -> Option<f64> {
        match self {
            DxRestriction::Bound(b) => Some(*b),
            DxRestriction::Undefined { .. } => None,
        }
    }
}

/// Explicit constants of the error analysis. They are derived for KdV; for
/// the other families only `theta` is family-specific.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConstants {
    pub c1: f64,
    pub c2: f64,
    pub theta: f64,
    /// `[2(|α|/(6|β|) + θ) c₀² T exp(2(θC₁ + C₂)T)]^{1/2}`, the constant `C`
    /// in `‖e⁽ᵐ⁾‖_{H¹} ≤ C((Δt)² + (Δx)²)`. May be `+∞`.
    pub cqr_bound: f64,
    pub dx_max: DxRestriction,
}

/// Evaluates `C₁`, `C₂`, `θ`, `C(q, r)` and the `Δx` restriction.
///
/// `sup` holds the suprema of `|u|, |u_x|, |u_xx|, |u_t|` of the target
/// solution over `[0, T] × [0, L]`.
pub fn theory_constants(
    spec: &EquationSpec,
    q: f64,
    r: f64,
    sup: SupBounds,
    length: f64,
    t_final: f64,
    c0: f64,
) -> Result<TheoryConstants> {
    if !(q > 1.0) {
        return Err(Error::invalid("q", format!("need q > 1, got {q}")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("need r > 0, got {r}")));
    }
    for (name, v) in [
        ("sup_u", sup.u),
        ("sup_ux", sup.ux),
        ("sup_uxx", sup.uxx),
        ("sup_ut", sup.ut),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(
                name,
                format!("must be finite and nonnegative, got {v}"),
            ));
        }
    }
    if !(length > 0.0) {
        return Err(Error::invalid(
            "L",
            format!("must be positive, got {length}"),
        ));
    }
    if !(t_final > 0.0) {
        return Err(Error::invalid(
            "T",
            format!("must be positive, got {t_final}"),
        ));
    }
    if !(c0 > 0.0) {
        return Err(Error::invalid("c0", format!("must be positive, got {c0}")));
    }

    let a = spec.alpha().abs();
    let b = spec.beta().abs();
    let c1 = (3.0 * a * (2.0 * q * q + 1.0) * r * r + 1.0).max(a / 2.0);
    let c2_first = 6.0 * a / b * (1.0 + 2.0 * a) * q * q * r * r
        + a * a / (2.0 * b) * sup.ux * sup.ux
        + a * (2.0 + sup.uxx * sup.uxx);
    let c2_second = 1.0
        + a * a / (2.0 * b) * r * r
        + a * (1.5 * sup.ux * sup.ux + 2.0 / 3.0 * sup.ut * sup.ut + 2.0 / 3.0);
    let c2 = c2_first.max(c2_second);
    let theta = theta_min(spec, q, r, length);

    // log domain: the exponent is routinely in the hundreds
    let log_sq = (2.0 * (a / (6.0 * b) + theta) * c0 * c0 * t_final).ln()
        + 2.0 * (theta * c1 + c2) * t_final;
    let cqr_bound = (0.5 * log_sq).exp();

    let dx_max = if r <= sup.u {
        DxRestriction::Undefined {
            reason: format!("r = {r} does not exceed sup|u| = {}", sup.u),
        }
    } else {
        let l_hat = sobolev_constant(length);
        DxRestriction::Bound(((r - sup.u) / (2.0 * l_hat * cqr_bound)).sqrt())
    };
    Ok(TheoryConstants {
        c1,
        c2,
        theta,
        cqr_bound,
        dx_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_sup() -> SupBounds {
        SupBounds::default()
    }

    #[test]
    fn c1_hand_values() {
        let spec = EquationSpec::kdv(6.0, 1.0).unwrap();
        let k = theory_constants(&spec, 2.0, 1.0, zero_sup(), 40.0, 1.0, 1.0).unwrap();
        assert_eq!(k.c1, 163.0);
        let lin = EquationSpec::kdv(0.0, 1.0).unwrap();
        let k = theory_constants(&lin, 2.0, 1.0, zero_sup(), 40.0, 1.0, 1.0).unwrap();
        assert_eq!(k.c1, 1.0);
        // dominant branch scales with r²
        let k1 = theory_constants(&spec, 2.0, 10.0, zero_sup(), 40.0, 1.0, 1.0).unwrap();
        let k2 = theory_constants(&spec, 2.0, 20.0, zero_sup(), 40.0, 1.0, 1.0).unwrap();
        assert!(((k2.c1 - 1.0) / (k1.c1 - 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn c2_and_constant_hand_values() {
        // α = 0: C₂ = max{0, 1} = 1, θ = 1, C = sqrt(2 c₀² T e^{2(1+1)T})
        let lin = EquationSpec::kdv(0.0, 1.0).unwrap();
        let sup = SupBounds {
            u: 0.5,
            ux: 0.2,
            uxx: 0.3,
            ut: 0.2,
        };
        let k = theory_constants(&lin, 2.0, 1.0, sup, 4.0, 0.5, 0.1).unwrap();
        assert_eq!(k.c2, 1.0);
        assert_eq!(k.theta, 1.0);
        let c = (2.0 * 0.01 * 0.5 * (2.0f64).exp()).sqrt();
        assert!((k.cqr_bound - c).abs() < 1e-14);
        // L̂ = √2·2 for L = 4
        let dx = (0.5 / (2.0 * 2.0 * 2f64.sqrt() * c)).sqrt();
        assert!((k.dx_max.bound().unwrap() - dx).abs() < 1e-14);
    }

    #[test]
    fn undefined_restriction_and_overflow() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let sup = SupBounds {
            u: 0.5,
            ..Default::default()
        };
        let k = theory_constants(&spec, 2.0, 0.5, sup, 40.0, 1.0, 1.0).unwrap();
        assert!(matches!(k.dx_max, DxRestriction::Undefined { .. }));
        let k = theory_constants(&spec, 2.0, 1.0, sup, 40.0, 10.0, 1.0).unwrap();
        assert!(k.cqr_bound.is_infinite());
        assert_eq!(k.dx_max, DxRestriction::Bound(0.0));
        assert!(k.c1 > 0.0 && k.c2 > 0.0 && k.theta > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        assert!(theory_constants(&spec, 1.0, 1.0, zero_sup(), 40.0, 1.0, 1.0).is_err());
        let neg = SupBounds {
            ux: -1.0,
            ..Default::default()
        };
        assert!(theory_constants(&spec, 2.0, 1.0, neg, 40.0, 1.0, 1.0).is_err());
        assert!(theory_constants(&spec, 2.0, 1.0, zero_sup(), 40.0, 1.0, 0.0).is_err());
    }
}
