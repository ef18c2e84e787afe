use crate::error::{Error, Result};

/// Which member of the KdV family is being solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `f(u) = u²/2`.
    Kdv,
    /// `f(u) = u^p / p`.
    GeneralizedKdv { p: u32 },
    /// `f(u) = u²/2` plus the nonlocal term `γ ∂ₓ⁻¹ u`.
    Ostrovsky { gamma: f64 },
}

/// `u_t = -α (f(u))_x + β u_xxx` with a concrete nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationSpec {
    family: Family,
    alpha: f64,
    beta: f64,
}

impl EquationSpec {
    pub fn new(family: Family, alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if !beta.is_finite() || beta == 0.0 {
            return Err(Error::invalid(
                "beta",
                format!("must be finite and nonzero, got {beta}"),
            ));
        }
        match family {
            Family::GeneralizedKdv { p: 0 } => {
                return Err(Error::invalid("p", "exponent must be at least 1"));
            }
            Family::Ostrovsky { gamma } if !gamma.is_finite() => {
                return Err(Error::invalid("gamma", "must be finite"));
            }
            _ => {}
        }
        Ok(EquationSpec {
            family,
            alpha,
            beta,
        })
    }

    pub fn kdv(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Kdv, alpha, beta)
    }

    pub fn generalized_kdv(alpha: f64, beta: f64, p: u32) -> Result<Self> {
        Self::new(Family::GeneralizedKdv { p }, alpha, beta)
    }

    pub fn ostrovsky(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::Ostrovsky { gamma }, alpha, beta)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// γ for Ostrovsky, zero otherwise.
    pub fn gamma(&self) -> f64 {
        match self.family {
            Family::Ostrovsky { gamma } => gamma,
            _ => 0.0,
        }
    }

    /// Polynomial degree of the nonlinearity `f`.
    pub fn degree(&self) -> u32 {
        match self.family {
            Family::GeneralizedKdv { p } => p,
            _ => 2,
        }
    }

    /// Coefficient in front of `δ⟨1⟩_x` of the discrete flux:
    /// `α/6` for KdV and Ostrovsky, `α/(p(p+1))` for generalized KdV.
    pub fn flux_coefficient(&self) -> f64 {
        let p = self.degree() as f64;
        self.alpha / (p * (p + 1.0))
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Kdv => "kdv",
            Family::GeneralizedKdv { .. } => "gkdv",
            Family::Ostrovsky { .. } => "ostrovsky",
        }
    }
}
