use std::fmt;
use std::sync::Arc;

use crate::equation::{EquationSpec, Family};
use crate::error::{Error, Result};
use crate::grid::{Grid, State};

/// `u(t, x) = (3c/α) sech²(½ √(c/(-β)) (x - ct - x0))` on the real line.
pub fn exact_soliton(c: f64, x0: f64, alpha: f64, beta: f64, t: f64, x: f64) -> Result<f64> {
    Ok(Soliton::new(c, x0, alpha, beta, None)?.value(t, x))
}

/// KdV soliton, optionally wrapped to the nearest image of period `L`.
///
/// The wrap is one term, not an image sum. On `L = 40` with `c = 1, β = -1`
/// the profile at distance `L/2` is about `8e-9` of the peak, which is the
/// size of the kink at the wrap point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Soliton {
    pub c: f64,
    pub x0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub period: Option<f64>,
}

/// Suprema of `|u|, |u_x|, |u_xx|, |u_t|` over a time-space box.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SupBounds {
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
    pub ut: f64,
}

impl Soliton {
    pub fn new(c: f64, x0: f64, alpha: f64, beta: f64, period: Option<f64>) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(
                "c",
                format!("soliton speed must be positive, got {c}"),
            ));
        }
        if !(beta < 0.0) {
            return Err(Error::invalid(
                "beta",
                format!("soliton profile needs beta < 0, got {beta}"),
            ));
        }
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::invalid("alpha", "soliton profile needs alpha != 0"));
        }
        if !x0.is_finite() {
            return Err(Error::invalid("x0", "must be finite"));
        }
        if let Some(l) = period {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::invalid(
                    "L",
                    format!("period must be positive, got {l}"),
                ));
            }
        }
        Ok(Soliton {
            c,
            x0,
            alpha,
            beta,
            period,
        })
    }

    pub fn amplitude(&self) -> f64 {
        3.0 * self.c / self.alpha
    }

    /// Inverse width `κ = ½ √(c/(-β))`.
    pub fn kappa(&self) -> f64 {
        0.5 * (self.c / -self.beta).sqrt()
    }

    fn phase(&self, t: f64, x: f64) -> f64 {
        let xi = x - self.c * t - self.x0;
        match self.period {
            Some(l) => xi - l * (xi / l).round(),
            None => xi,
        }
    }

    /// `(sech², tanh)` at the wrapped phase.
    fn parts(&self, t: f64, x: f64) -> (f64, f64) {
        let z = self.kappa() * self.phase(t, x);
        let s = 1.0 / z.cosh();
        (s * s, z.tanh())
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.amplitude() * self.parts(t, x).0
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        let (s, th) = self.parts(t, x);
        -2.0 * self.amplitude() * self.kappa() * s * th
    }

    pub fn dxx(&self, t: f64, x: f64) -> f64 {
        let (s, _) = self.parts(t, x);
        let k = self.kappa();
        2.0 * self.amplitude() * k * k * s * (2.0 - 3.0 * s)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        -self.c * self.dx(t, x)
    }

    /// Sampled suprema over one period (or `[x0 - 20/κ, x0 + 20/κ]` when
    /// unwrapped). A traveling wave needs no time sampling.
    pub fn sup_bounds(&self, samples: usize) -> SupBounds {
        let samples = samples.max(2);
        let (lo, width) = match self.period {
            Some(l) => (self.x0 - 0.5 * l, l),
            None => (self.x0 - 20.0 / self.kappa(), 40.0 / self.kappa()),
        };
        let mut b = SupBounds::default();
        for i in 0..=samples {
            let x = lo + width * i as f64 / samples as f64;
            b.u = b.u.max(self.value(0.0, x).abs());
            b.ux = b.ux.max(self.dx(0.0, x).abs());
            b.uxx = b.uxx.max(self.dxx(0.0, x).abs());
            b.ut = b.ut.max(self.dt(0.0, x).abs());
        }
        b
    }
}

pub type SolutionFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A target solution `u(t, x)` used to measure errors.
#[derive(Clone)]
pub enum ExactSolution {
    KdvSoliton(Soliton),
    /// Any function of `(t, x)`; validity is the caller's responsibility.
    Custom(SolutionFn),
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactSolution::KdvSoliton(s) => f.debug_tuple("KdvSoliton").field(s).finish(),
            ExactSolution::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ExactSolution {
    /// Soliton for `spec`, periodized on `length`.
    pub fn kdv_soliton(spec: &EquationSpec, c: f64, x0: f64, length: f64) -> Result<Self> {
        let s = Soliton::new(c, x0, spec.alpha(), spec.beta(), Some(length))?;
        let sol = ExactSolution::KdvSoliton(s);
        sol.validate_for(spec)?;
        Ok(sol)
    }

    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ExactSolution::Custom(Arc::new(f))
    }

    pub fn validate_for(&self, spec: &EquationSpec) -> Result<()> {
        match self {
            ExactSolution::Custom(_) => Ok(()),
            ExactSolution::KdvSoliton(s) => {
                if !matches!(spec.family(), Family::Kdv) {
                    return Err(Error::invalid(
                        "exact",
                        format!(
                            "KdV soliton is not a solution of the {} equation",
                            spec.name()
                        ),
                    ));
                }
                if s.alpha != spec.alpha() || s.beta != spec.beta() {
                    return Err(Error::invalid(
                        "exact",
                        "soliton alpha/beta differ from the equation's",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        match self {
            ExactSolution::KdvSoliton(s) => s.value(t, x),
            ExactSolution::Custom(f) => f(t, x),
        }
    }

    /// `(u(t, x_k))_k`.
    pub fn sample(&self, grid: &Grid, t: f64) -> State {
        grid.sample(|x| self.value(t, x))
    }

    /// `ũ⁽ᵐ⁾ = (u(mΔt, kΔx))_k`.
    pub fn sample_level(&self, grid: &Grid, m: usize) -> State {
        self.sample(grid, grid.time(m))
    }
}
