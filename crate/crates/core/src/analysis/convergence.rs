use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{h1_error, trig_resample, ExactSolution, SpectralEvolver};
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, State};
use crate::solver::{simulate, SolverConfig};

/// What the discrete solution is compared against at the final time.
#[derive(Clone)]
pub enum Reference {
    Exact(ExactSolution),
    /// Initial profile `u₀(x)` evolved by the pseudospectral solver on
    /// `fine_nodes` nodes (at least 4x the finest level).
    Spectral {
        initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        fine_nodes: usize,
    },
}

impl fmt::Debug for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Exact(e) => f.debug_tuple("Exact").field(e).finish(),
            Reference::Spectral { fine_nodes, .. } => f
                .debug_struct("Spectral")
                .field("fine_nodes", fine_nodes)
                .finish_non_exhaustive(),
        }
    }
}

impl Reference {
    pub fn spectral(
        initial: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fine_nodes: usize,
    ) -> Self {
        Reference::Spectral {
            initial: Arc::new(initial),
            fine_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevelStatus {
    Converged,
    Failed { step: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub steps: usize,
    pub dx: f64,
    pub dt: f64,
    /// Final-time `‖e‖_{H¹}`; NaN for failed levels.
    pub h1_error: f64,
    /// `log₂(error_{j-1} / error_j)`; NaN on the first row or when undefined.
    pub order: f64,
    /// `max_m ‖uᵐ‖_∞` over the computed levels.
    pub max_sup: f64,
    pub status: LevelStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.status == LevelStatus::Converged)
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.order).collect()
    }
}

/// Runs `levels` simulations, halving `Δx` and `Δt` together from `base`,
/// and measures the final-time H¹ error. Levels run on the current rayon
/// pool.
pub fn convergence_study(
    spec: &EquationSpec,
    reference: &Reference,
    base: &Grid,
    levels: usize,
    cfg: &SolverConfig,
) -> Result<ConvergenceTable> {
    if levels < 2 {
        return Err(Error::invalid(
            "levels",
            format!("need at least 2, got {levels}"),
        ));
    }
    if base.dt() > base.dx() {
        return Err(Error::invalid(
            "dt",
            format!(
                "need dt <= dx, got dt = {} and dx = {}",
                base.dt(),
                base.dx()
            ),
        ));
    }
    cfg.validate()?;
    let grids: Vec<Grid> = (0..levels)
        .map(|j| {
            Grid::new(
                base.length(),
                base.nodes() << j,
                base.final_time(),
                base.steps() << j,
            )
        })
        .collect::<Result<_>>()?;
    let finest = grids[levels - 1].nodes();
    let t_final = base.final_time();

    // per-level (initial data, reference at T)
    let data: Vec<(State, State)> = match reference {
        Reference::Exact(exact) => {
            exact.validate_for(spec)?;
            grids
                .iter()
                .map(|g| (exact.sample(g, 0.0), exact.sample(g, t_final)))
                .collect()
        }
        Reference::Spectral {
            initial,
            fine_nodes,
        } => {
            if *fine_nodes < 4 * finest {
                return Err(Error::invalid(
                    "K_fine",
                    format!("need at least {} nodes, got {fine_nodes}", 4 * finest),
                ));
            }
            let fine = Grid::new(base.length(), *fine_nodes, t_final, 1)?;
            let evolver = SpectralEvolver::new(*spec, base.length(), *fine_nodes)?;
            let end = evolver.evolve(&fine.sample(|x| initial(x)), t_final)?;
            grids
                .iter()
                .map(|g| {
                    (
                        g.sample(|x| initial(x)),
                        State(trig_resample(&end, g.nodes())),
                    )
                })
                .collect()
        }
    };

    let mut rows: Vec<ConvergenceRow> = grids
        .par_iter()
        .zip(data.par_iter())
        .map(|(grid, (u0, target))| {
            let (h1, max_sup, status) = match simulate(spec, grid, u0, cfg) {
                Ok(ts) => (
                    h1_error(ts.final_state(), target, grid.dx()).unwrap_or(f64::NAN),
                    ts.max_sup_norm(),
                    LevelStatus::Converged,
                ),
                Err(e) => (
                    f64::NAN,
                    e.partial.max_sup_norm(),
                    LevelStatus::Failed {
                        step: e.step,
                        reason: e.source.to_string(),
                    },
                ),
            };
            ConvergenceRow {
                nodes: grid.nodes(),
                steps: grid.steps(),
                dx: grid.dx(),
                dt: grid.dt(),
                h1_error: h1,
                order: f64::NAN,
                max_sup,
                status,
            }
        })
        .collect();
    for j in 1..rows.len() {
        let (prev, curr) = (rows[j - 1].h1_error, rows[j].h1_error);
        rows[j].order = if prev > 0.0 && curr > 0.0 {
            (prev / curr).log2()
        } else {
            f64::NAN
        };
    }
    Ok(ConvergenceTable { rows })
}
