//! Periodic difference and average operators.
//!
//! Every operator here maps K-periodic vectors to K-periodic vectors. Stencils
//! are applied matrix-free with wraparound indexing; [`FdInverse`] works in the
//! discrete Fourier basis. Dense matrices only appear in
//! [`operator_norm_estimate`], which is a diagnostic.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::grid::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stencil {
    /// `δ⁺_x`: `(v[k+1] - v[k]) / dx`
    FwdDiff,
    /// `δ⁻_x`: `(v[k] - v[k-1]) / dx`
    BwdDiff,
    /// `δ⟨1⟩_x`: `(v[k+1] - v[k-1]) / (2 dx)`
    CDiff1,
    /// `δ⟨2⟩_x`: `(v[k+1] - 2 v[k] + v[k-1]) / dx²`
    CDiff2,
    /// `μ⁺_x`: `(v[k+1] + v[k]) / 2`
    FwdAvg,
    /// `μ⟨1⟩_x`: `(v[k+1] + v[k-1]) / 2`
    CAvg1,
}

impl Stencil {
    pub const ALL: [Stencil; 6] = [
        Stencil::FwdDiff,
        Stencil::BwdDiff,
        Stencil::CDiff1,
        Stencil::CDiff2,
        Stencil::FwdAvg,
        Stencil::CAvg1,
    ];

    /// `(prev, center, next)` weights of the three-point stencil.
    fn weights(self, dx: f64) -> (f64, f64, f64) {
        match self {
            Stencil::FwdDiff => (0.0, -1.0 / dx, 1.0 / dx),
            Stencil::BwdDiff => (-1.0 / dx, 1.0 / dx, 0.0),
            Stencil::CDiff1 => (-0.5 / dx, 0.0, 0.5 / dx),
            Stencil::CDiff2 => {
                let h2 = dx * dx;
                (1.0 / h2, -2.0 / h2, 1.0 / h2)
            }
            Stencil::FwdAvg => (0.0, 0.5, 0.5),
            Stencil::CAvg1 => (0.5, 0.0, 0.5),
        }
    }

    /// Maximum absolute row sum, i.e. the induced ∞-norm.
    pub fn abs_row_sum(self, dx: f64) -> f64 {
        let (a, b, c) = self.weights(dx);
        a.abs() + b.abs() + c.abs()
    }

    pub fn is_average(self) -> bool {
        matches!(self, Stencil::FwdAvg | Stencil::CAvg1)
    }

    pub fn apply(self, v: &[f64], dx: f64) -> State {
        stencil_apply(self, v, dx)
    }
}

pub fn stencil_apply(kind: Stencil, v: &[f64], dx: f64) -> State {
    let n = v.len();
    let (wp, wc, wn) = kind.weights(dx);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let prev = v[(k + n - 1) % n];
        let next = v[(k + 1) % n];
        // Differences first so a constant input gives an exact zero.
        let value = match kind {
            Stencil::FwdDiff => (next - v[k]) * wn,
            Stencil::BwdDiff => (v[k] - prev) * wc,
            Stencil::CDiff1 => (next - prev) * wn,
            Stencil::CDiff2 => ((next - v[k]) - (v[k] - prev)) * wp,
            Stencil::FwdAvg | Stencil::CAvg1 => wp * prev + wc * v[k] + wn * next,
        };
        out.push(value);
    }
    State(out)
}

/// Fused `δ⟨1⟩_x δ⟨2⟩_x`:
/// `(v[k+2] - 2 v[k+1] + 2 v[k-1] - v[k-2]) / (2 dx³)`.
pub fn dispersion(v: &[f64], dx: f64) -> State {
    let n = v.len();
    let scale = 0.5 / (dx * dx * dx);
    State(
        (0..n)
            .map(|k| {
                let p2 = v[(k + 2) % n];
                let p1 = v[(k + 1) % n];
                let m1 = v[(k + n - 1) % n];
                let m2 = v[(k + 2 * n - 2) % n];
                ((p2 - m2) - 2.0 * (p1 - m1)) * scale
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalOp {
    /// `δ⁺_t`
    FwdDiff,
    /// `μ⁺_t`
    FwdAvg,
}

pub fn temporal_pair(op: TemporalOp, next: &[f64], curr: &[f64], dt: f64) -> Result<State> {
    check_len(next.len(), curr.len())?;
    let values = match op {
        TemporalOp::FwdDiff => {
            if !(dt > 0.0) {
                return Err(Error::invalid("dt", "must be positive"));
            }
            next.iter().zip(curr).map(|(a, b)| (a - b) / dt).collect()
        }
        TemporalOp::FwdAvg => next.iter().zip(curr).map(|(a, b)| 0.5 * (a + b)).collect(),
    };
    Ok(State(values))
}

/// Generalized inverse of `δ⟨1⟩_x`.
///
/// In the Fourier basis `δ⟨1⟩_x` has symbol `i sin(2πj/K) / dx`. The inverse
/// divides every mode by that symbol except the mean mode and, for even `K`,
/// the Nyquist mode, which both lie in the kernel and are mapped to zero.
/// Its operator norm is `max_j dx / |sin(2πj/K)|`. For even `K` that is
/// `dx / sin(2π/K) ≤ L/4`; for odd `K` the modes next to Nyquist give
/// `dx / sin(π/K) ≈ L/π`, which exceeds `L/4`.
#[derive(Clone)]
pub struct FdInverse {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Mode multipliers divided by `len` (the FFT is unnormalized).
    multiplier: Vec<Complex64>,
}

impl fmt::Debug for FdInverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FdInverse").field("len", &self.len).finish()
    }
}

impl FdInverse {
    pub fn new(len: usize, dx: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scale = 1.0 / len as f64;
        let multiplier = (0..len)
            .map(|j| {
                if j == 0 || 2 * j == len {
                    Complex64::new(0.0, 0.0)
                } else {
                    let s = (2.0 * std::f64::consts::PI * j as f64 / len as f64).sin();
                    // dx / (i s) = -i dx / s
                    Complex64::new(0.0, -dx / s * scale)
                }
            })
            .collect();
        FdInverse {
            len,
            forward,
            inverse,
            multiplier,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn apply(&self, v: &[f64]) -> State {
        self.apply_symbol(v, |m| m)
    }

    /// `(δ_FD⁻¹)² v` in a single transform pair.
    pub fn apply_twice(&self, v: &[f64]) -> State {
        let n = self.len as f64;
        self.apply_symbol(v, |m| m * m * n)
    }

    fn apply_symbol(&self, v: &[f64], symbol: impl Fn(Complex64) -> Complex64) -> State {
        assert_eq!(v.len(), self.len, "FdInverse length mismatch");
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, &m) in buf.iter_mut().zip(&self.multiplier) {
            *b *= symbol(m);
        }
        self.inverse.process(&mut buf);
        State(buf.into_iter().map(|c| c.re).collect())
    }
}

pub fn fd_inverse(v: &[f64], dx: f64) -> State {
    FdInverse::new(v.len(), dx).apply(v)
}

/// Linear operators whose spectral norm [`operator_norm_estimate`] can measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearOp {
    Stencil(Stencil),
    /// `δ⟨1⟩_x δ⟨2⟩_x`
    Dispersion,
    FdInverse,
    Zero,
}

impl LinearOp {
    fn materialize(self, n: usize, dx: f64) -> Vec<Vec<f64>> {
        let inv = matches!(self, LinearOp::FdInverse).then(|| FdInverse::new(n, dx));
        // columns
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                match self {
                    LinearOp::Stencil(s) => stencil_apply(s, &e, dx).0,
                    LinearOp::Dispersion => dispersion(&e, dx).0,
                    LinearOp::FdInverse => inv.as_ref().map(|f| f.apply(&e).0).unwrap_or_default(),
                    LinearOp::Zero => vec![0.0; n],
                }
            })
            .collect()
    }
}

pub const NORM_ESTIMATE_TOL: f64 = 1e-8;
const NORM_ESTIMATE_MAX_ITER: usize = 200_000;

/// Spectral norm of `op` on `K`-periodic vectors, by power iteration on `opᵀ op`.
///
/// Iterates until the eigen-residual `‖AᵀA x - λ x‖` drops below
/// `1e-8 · λ`.
pub fn operator_norm_estimate(op: LinearOp, k: usize, dx: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("K", "operator dimension must be positive"));
    }
    let cols = op.materialize(k, dx);
    // gram[i][j] = <col_i, col_j>
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let g: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let matvec = |x: &[f64]| -> Vec<f64> {
        gram.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    };
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();

    // Deterministic, generic start vector.
    let mut x: Vec<f64> = (0..k)
        .map(|i| 1.0 + 0.5 * (1.7 * i as f64 + 0.3).sin() + 0.25 * (0.37 * (i * i) as f64).cos())
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut lambda = 0.0;
    for _ in 0..NORM_ESTIMATE_MAX_ITER {
        let y = matvec(&x);
        lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let residual = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= NORM_ESTIMATE_TOL * lambda.abs() {
            return Ok(lambda.max(0.0).sqrt());
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    Err(Error::PowerIteration {
        iterations: NORM_ESTIMATE_MAX_ITER,
        estimate: lambda.max(0.0).sqrt(),
    })
}
