//! Fixtures shared by the benchmarks.

use dvdm_core::analysis::ExactSolution;
use dvdm_core::schemes::step_size_bounds;
use dvdm_core::{EquationSpec, Grid, State};

/// One-step problem: equation, grid with `M = 1` and an initial state.
pub struct Fixture {
    pub spec: EquationSpec,
    pub grid: Grid,
    pub u0: State,
}

/// Largest step inside the KdV contraction bounds for `q = 2`, `r = 1`.
pub fn contractive_dt(nodes: usize, length: f64, alpha: f64, beta: f64) -> f64 {
    let b = step_size_bounds(2.0, 1.0, length / nodes as f64, alpha, beta).expect("valid bounds");
    0.99 * b.min()
}

/// Unit-speed KdV soliton on `[0, 40)` with `K` nodes and the given `dt`.
pub fn kdv_soliton(nodes: usize, dt: f64) -> Fixture {
    let spec = EquationSpec::kdv(6.0, -1.0).expect("valid coefficients");
    let grid = Grid::new(40.0, nodes, dt, 1).expect("valid grid");
    let exact = ExactSolution::kdv_soliton(&spec, 1.0, 20.0, 40.0).expect("soliton");
    let u0 = exact.sample(&grid, 0.0);
    Fixture { spec, grid, u0 }
}

/// Smooth two-mode profile under the Ostrovsky equation.
pub fn ostrovsky_wave(nodes: usize, dt: f64) -> Fixture {
    let spec = EquationSpec::ostrovsky(1.0, -1.0, 0.5).expect("valid coefficients");
    let grid = Grid::new(20.0, nodes, dt, 1).expect("valid grid");
    let values = (0..nodes)
        .map(|i| {
            let x = 2.0 * std::f64::consts::PI * i as f64 / nodes as f64;
            0.4 * x.cos() + 0.1 * (2.0 * x).sin()
        })
        .collect();
    let u0 = State::new(values).expect("non-empty");
    Fixture { spec, grid, u0 }
}
