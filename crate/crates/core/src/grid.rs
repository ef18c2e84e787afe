//! Periodic space-time grids, grid functions and the discrete norms on them.
//!
//! Nodes are indexed `0..K`; a [`State`] is implicitly extended by
//! `u[k + K] = u[k]`. All norms carry the `dx` weight, so on a grid of period
//! `L` the constant function `1` has squared norm `L`.

use std::ops::{Deref, Index};

use crate::error::{check_len, Error, Result};
use crate::operators::{stencil_apply, Stencil};
use crate::summation;

/// The widest stencil in the scheme (`δ⟨1⟩δ⟨2⟩`) touches five nodes.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    nodes: usize,
    dx: f64,
    final_time: f64,
    steps: usize,
    dt: f64,
}

impl Grid {
    pub fn new(length: f64, nodes: usize, final_time: f64, steps: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(
                "L",
                format!("period must be positive, got {length}"),
            ));
        }
        if nodes < MIN_NODES {
            return Err(Error::invalid(
                "K",
                format!("need at least {MIN_NODES} nodes, got {nodes}"),
            ));
        }
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::invalid(
                "T",
                format!("final time must be positive, got {final_time}"),
            ));
        }
        if steps == 0 {
            return Err(Error::invalid("M", "need at least one time step"));
        }
        Ok(Grid {
            length,
            nodes,
            dx: length / nodes as f64,
            final_time,
            steps,
            dt: final_time / steps as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Position of node `k`.
    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.dx
    }

    /// Time of level `m`.
    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    /// Same spatial layout with a different time discretization.
    pub fn with_time(&self, final_time: f64, steps: usize) -> Result<Self> {
        Grid::new(self.length, self.nodes, final_time, steps)
    }

    /// Samples `f(x)` at every node.
    pub fn sample(&self, mut f: impl FnMut(f64) -> f64) -> State {
        State((0..self.nodes).map(|k| f(self.x(k))).collect())
    }
}

/// Alias kept for callers that prefer a free constructor.
pub fn make_grid(length: f64, nodes: usize, final_time: f64, steps: usize) -> Result<Grid> {
    Grid::new(length, nodes, final_time, steps)
}

/// One time level of a periodic grid function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct State(pub(crate) Vec<f64>);

impl State {
    /// Wraps `values`, rejecting non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "state",
                format!("entry {k} is not finite ({})", values[k]),
            ));
        }
        Ok(State(values))
    }

    pub fn zeros(len: usize) -> Self {
        State(vec![0.0; len])
    }

    pub fn constant(len: usize, value: f64) -> Self {
        State(vec![value; len])
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        State((0..len).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Periodic access: `at(-1)` is the last node.
    pub fn at(&self, k: isize) -> f64 {
        let n = self.0.len() as isize;
        self.0[k.rem_euclid(n) as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> State {
        State(self.0.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise combination; panics on length mismatch.
    pub fn zip_map(&self, other: &[f64], f: impl Fn(f64, f64) -> f64) -> State {
        assert_eq!(self.0.len(), other.len(), "state length mismatch");
        State(self.0.iter().zip(other).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, c: f64) -> State {
        self.map(|v| c * v)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.0)
    }
}

impl Deref for State {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for State {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl From<State> for Vec<f64> {
    fn from(s: State) -> Self {
        s.0
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Discrete `L^p` norm; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(v: &[f64], p: f64, dx: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid("p", format!("need p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(sup_norm(v));
    }
    if p == 1.0 {
        return Ok(summation::sum(v.iter().map(|x| x.abs() * dx)));
    }
    if p == 2.0 {
        return Ok(norm_sq(v, dx).sqrt());
    }
    Ok(summation::sum(v.iter().map(|x| x.abs().powf(p) * dx)).powf(1.0 / p))
}

/// `Σ v_k w_k dx`.
pub fn inner_product(v: &[f64], w: &[f64], dx: f64) -> Result<f64> {
    check_len(v.len(), w.len())?;
    Ok(dot(v, w, dx))
}

pub(crate) fn dot(v: &[f64], w: &[f64], dx: f64) -> f64 {
    summation::sum(v.iter().zip(w).map(|(a, b)| a * b)) * dx
}

/// `‖v‖² = Σ v_k² dx`.
pub fn norm_sq(v: &[f64], dx: f64) -> f64 {
    summation::sum(v.iter().map(|a| a * a)) * dx
}

/// `(‖v‖² + ‖δ⁺_x v‖²)^{1/2}`.
pub fn h1_norm(v: &[f64], dx: f64) -> f64 {
    let dv = stencil_apply(Stencil::FwdDiff, v, dx);
    (norm_sq(v, dx) + norm_sq(&dv, dx)).sqrt()
}

/// Constant of the discrete Sobolev inequality `‖v‖_∞ ≤ L̂ ‖v‖_{H¹}`.
pub fn sobolev_constant(length: f64) -> f64 {
    std::f64::consts::SQRT_2 * length.sqrt().max(1.0 / length.sqrt())
}
