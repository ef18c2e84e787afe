//! Fourier pseudospectral reference solver.
//!
//! `û_t = λ(k) û + N(û)` with `λ = -iβk³` (Ostrovsky adds `-iγ/k`) and
//! `N = -α ik 𝓕[f(u)]` under the 2/3 dealiasing mask. The linear part is
//! integrated exactly (integrating factor), the rest with adaptive
//! Dormand–Prince 5(4).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::equation::{EquationSpec, Family};
use crate::error::{Error, Result};
use crate::grid::{Grid, State};

/// Local error tolerance of the adaptive integrator.
pub const SPECTRAL_TOL: f64 = 1e-12;
const MAX_STEPS: usize = 2_000_000;

/// Time evolution on a fixed Fourier grid.
#[derive(Clone)]
pub struct SpectralEvolver {
    spec: EquationSpec,
    length: f64,
    n: usize,
    /// `ik`, zero at the Nyquist mode.
    ik: Vec<Complex64>,
    lambda: Vec<Complex64>,
    mask: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    tol: f64,
}

impl fmt::Debug for SpectralEvolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralEvolver")
            .field("spec", &self.spec)
            .field("length", &self.length)
            .field("n", &self.n)
            .field("tol", &self.tol)
            .finish()
    }
}

/// Signed mode index of FFT bin `j` (the Nyquist bin counts as positive).
fn mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl SpectralEvolver {
    pub fn new(spec: EquationSpec, length: f64, nodes: usize) -> Result<Self> {
        if nodes < 4 {
            return Err(Error::invalid(
                "K_fine",
                format!("need at least 4 nodes, got {nodes}"),
            ));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid(
                "L",
                format!("must be positive, got {length}"),
            ));
        }
        let n = nodes;
        let nyquist = n.is_multiple_of(2);
        let mut ik = Vec::with_capacity(n);
        let mut lambda = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for j in 0..n {
            let m = mode(j, n);
            let k = 2.0 * PI * m as f64 / length;
            let odd_ok = !(nyquist && j == n / 2);
            ik.push(if odd_ok {
                Complex64::new(0.0, k)
            } else {
                Complex64::new(0.0, 0.0)
            });
            let mut lam = -spec.beta() * k * k * k;
            if let Family::Ostrovsky { gamma } = spec.family() {
                if m != 0 {
                    lam -= gamma / k;
                }
            }
            lambda.push(if odd_ok {
                Complex64::new(0.0, lam)
            } else {
                Complex64::new(0.0, 0.0)
            });
            mask.push(3 * m.unsigned_abs() as usize <= n);
        }
        let mut planner = FftPlanner::new();
        Ok(SpectralEvolver {
            spec,
            length,
            n,
            ik,
            lambda,
            mask,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            tol: SPECTRAL_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse(&self, uh: &[Complex64]) -> Vec<f64> {
        let mut buf = uh.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    fn flux(&self, u: f64) -> f64 {
        match self.spec.family() {
            Family::Kdv | Family::Ostrovsky { .. } => 0.5 * u * u,
            Family::GeneralizedKdv { p } => u.powi(p as i32) / p as f64,
        }
    }

    /// `N(û)` in physical-to-spectral form.
    fn nonlinear(&self, uh: &[Complex64]) -> Vec<Complex64> {
        let alpha = self.spec.alpha();
        if alpha == 0.0 {
            return vec![Complex64::new(0.0, 0.0); self.n];
        }
        let u = self.inverse(uh);
        let f: Vec<f64> = u.iter().map(|&v| self.flux(v)).collect();
        let mut fh = self.forward(&f);
        for j in 0..self.n {
            fh[j] = if self.mask[j] {
                -alpha * self.ik[j] * fh[j]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fh
    }

    /// Evolves physical values `u` on this grid to time `t`.
    pub fn evolve(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: self.n,
            });
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(u.to_vec());
        }
        let uh = self.forward(u);
        let out = self.evolve_spectral(uh, t)?;
        Ok(self.inverse(&out))
    }

    fn evolve_spectral(&self, mut uh: Vec<Complex64>, t_end: f64) -> Result<Vec<Complex64>> {
        let n = self.n;
        let scale = 1.0 / n as f64;
        let amp = |v: &[Complex64]| v.iter().fold(0.0_f64, |m, c| m.max(c.norm())) * scale;
        let mut t = 0.0;
        let mut h = (t_end * 1e-3).min(1e-3);
        let mut steps = 0usize;
        let mut stages: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
        let mut arg = vec![Complex64::new(0.0, 0.0); n];
        while t < t_end {
            steps += 1;
            if steps > MAX_STEPS || h < 1e-14 * t_end.max(1.0) {
                return Err(Error::Oracle(format!(
                    "spectral integrator stalled at t = {t} (step {h:e})"
                )));
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            // stage j lives at offset C[j]·h; w = e^{-λ c h} N(e^{λ c h} v)
            for s in 0..7 {
                for j in 0..n {
                    let mut v = uh[j];
                    for (q, a) in A[s].iter().enumerate() {
                        if *a != 0.0 {
                            v += h * a * stages[q][j];
                        }
                    }
                    arg[j] = v * (self.lambda[j] * (C[s] * h)).exp();
                }
                let nl = self.nonlinear(&arg);
                for j in 0..n {
                    stages[s][j] = nl[j] * (-self.lambda[j] * (C[s] * h)).exp();
                }
            }
            let mut err = 0.0_f64;
            let mut next = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                let mut hi = uh[j];
                let mut e = Complex64::new(0.0, 0.0);
                for s in 0..7 {
                    hi += h * B[s] * stages[s][j];
                    e += h * (B[s] - BHAT[s]) * stages[s][j];
                }
                next[j] = hi;
                err = err.max(e.norm());
            }
            if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                h *= 0.25;
                continue;
            }
            let size = amp(&uh).max(1.0);
            let ratio = err * scale / (self.tol * size);
            if ratio <= 1.0 {
                for j in 0..n {
                    uh[j] = next[j] * (self.lambda[j] * h).exp();
                }
                t = if last { t_end } else { t + h };
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                0.9 * ratio.powf(-0.2)
            };
            h *= factor.clamp(0.2, 5.0);
        }
        Ok(uh)
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const BHAT: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Band-limited resampling of `u` (values on `u.len()` equispaced nodes of a
/// period) onto `nodes` equispaced nodes. Exact subsampling when `nodes`
/// divides `u.len()`.
pub fn trig_resample(u: &[f64], nodes: usize) -> Vec<f64> {
    let n = u.len();
    if nodes == n {
        return u.to_vec();
    }
    if nodes > 0 && n.is_multiple_of(nodes) {
        let stride = n / nodes;
        return u.iter().step_by(stride).copied().collect();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut uh: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut uh);
    let mut out = vec![Complex64::new(0.0, 0.0); nodes];
    let limit = n.min(nodes);
    for (j, &c) in uh.iter().enumerate() {
        let m = mode(j, n);
        let twice = 2 * m.unsigned_abs() as usize;
        if twice > limit {
            continue;
        }
        if twice == limit && limit == n {
            // source Nyquist mode: split evenly between ±m on the finer grid
            out[m.rem_euclid(nodes as i64) as usize] += 0.5 * c;
            out[(-m).rem_euclid(nodes as i64) as usize] += 0.5 * c;
        } else {
            out[m.rem_euclid(nodes as i64) as usize] += c;
        }
    }
    planner.plan_fft_inverse(nodes).process(&mut out);
    let s = 1.0 / n as f64;
    out.iter().map(|c| c.re * s).collect()
}

/// The trigonometric interpolant of `u` on a period of `length`, as a
/// function of `x`. It agrees with [`trig_resample`] at every resampled node.
pub fn trig_interpolant(u: &[f64], length: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let n = u.len();
    let mut uh: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if n > 0 {
        FftPlanner::<f64>::new()
            .plan_fft_forward(n)
            .process(&mut uh);
    }
    // (wavenumber, weighted coefficient) for the nonnegative modes
    let terms: Vec<(f64, Complex64)> = (0..=n / 2)
        .filter(|&m| n > 0 && m < n)
        .map(|m| {
            let paired = m != 0 && 2 * m != n;
            let w = if paired { 2.0 } else { 1.0 } / n as f64;
            (2.0 * PI * m as f64 / length, uh[m] * w)
        })
        .collect();
    move |x| {
        terms
            .iter()
            .map(|&(k, c)| (c * Complex64::from_polar(1.0, k * x)).re)
            .sum()
    }
}

/// Reference solution at time `t` for coarse data `u0`.
///
/// `u0` lives on `u0.len()` nodes of the same period as `fine`; it is
/// trigonometrically interpolated onto `fine`, evolved, and restricted back
/// to the coarse nodes.
pub fn spectral_reference(spec: &EquationSpec, u0: &[f64], fine: &Grid, t: f64) -> Result<State> {
    let coarse = u0.len();
    if coarse == 0 {
        return Err(Error::invalid("u0", "empty initial data"));
    }
    if fine.nodes() < 4 * coarse {
        return Err(Error::invalid(
            "K_fine",
            format!(
                "need at least 4x the coarse nodes ({}), got {}",
                4 * coarse,
                fine.nodes()
            ),
        ));
    }
    let evolver = SpectralEvolver::new(*spec, fine.length(), fine.nodes())?;
    let lifted = trig_resample(u0, fine.nodes());
    let out = evolver.evolve(&lifted, t)?;
    Ok(State(trig_resample(&out, coarse)))
}
