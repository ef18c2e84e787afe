//! JSON run configuration. Unknown keys are rejected at every level.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use dvdm_core::analysis::ExactSolution;
use dvdm_core::{EquationSpec, Grid, Guard, Method, SolverConfig, State};

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Kdv,
    Gkdv,
    Ostrovsky,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    pub family: FamilyName,
    pub alpha: f64,
    pub beta: f64,
    /// Exponent, generalized KdV only.
    pub p: Option<u32>,
    /// Rotation coefficient, Ostrovsky only.
    pub gamma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "T")]
    pub final_time: f64,
    #[serde(rename = "M")]
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Exact KdV soliton; `x0` defaults to the middle of the period.
    Soliton { c: f64, x0: Option<f64> },
    /// Node values `u(x_k)`, `k = 0..K`.
    Samples(Vec<f64>),
    /// JSON file holding an array of node values.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    FixedPoint,
    Newton,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardConfig {
    pub q: f64,
    pub r: f64,
    #[serde(default = "yes")]
    pub enforce: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub method: MethodName,
    pub tol: f64,
    pub max_iter: usize,
    pub guard: Option<GuardConfig>,
    pub extrapolate: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            method: MethodName::FixedPoint,
            tol: d.tol,
            max_iter: d.max_iter,
            guard: None,
            extrapolate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Per-step diagnostics (`run`).
    pub diagnostics_path: Option<PathBuf>,
    /// JSON state snapshots every `state_stride` steps (`run`).
    pub timeseries_path: Option<PathBuf>,
    /// Convergence table (`sweep`); stdout when absent.
    pub table_path: Option<PathBuf>,
    pub format: Format,
    pub state_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            diagnostics_path: None,
            timeseries_path: None,
            table_path: None,
            format: Format::Csv,
            state_stride: 1,
        }
    }
}

/// A parsed and validated configuration with paths resolved against the
/// config file's directory.
#[derive(Debug)]
pub struct Setup {
    pub spec: EquationSpec,
    pub grid: Grid,
    pub initial: State,
    /// Set when the initial data is the exact soliton.
    pub exact: Option<ExactSolution>,
    pub solver: SolverConfig,
    pub outputs: OutputConfig,
}

impl Setup {
    pub fn load(path: &Path) -> Result<Setup, Failure> {
        let text = fs::read_to_string(path).map_err(|e| {
            Failure::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Failure::config("config", e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base)
    }
}

impl RunConfig {
    pub fn resolve(self, base: &Path) -> Result<Setup, Failure> {
        let spec = self.equation.spec()?;
        let g = &self.grid;
        let grid = Grid::new(g.length, g.nodes, g.final_time, g.steps)?;

        let (initial, exact) = match self.initial {
            InitialConfig::Soliton { c, x0 } => {
                let x0 = x0.unwrap_or(grid.length() / 2.0);
                let exact = ExactSolution::kdv_soliton(&spec, c, x0, grid.length())?;
                (exact.sample(&grid, 0.0), Some(exact))
            }
            InitialConfig::Samples(v) => (State::new(v)?, None),
            InitialConfig::File(p) => {
                let p = base.join(p);
                let text = fs::read_to_string(&p).map_err(|e| {
                    Failure::config("initial.file", format!("cannot read {}: {e}", p.display()))
                })?;
                let v: Vec<f64> = serde_json::from_str(&text).map_err(|e| {
                    Failure::config(
                        "initial.file",
                        format!("{}: expected a JSON array of numbers: {e}", p.display()),
                    )
                })?;
                (State::new(v)?, None)
            }
        };
        if initial.len() != grid.nodes() {
            return Err(Failure::config(
                "initial",
                format!("got {} values for K = {}", initial.len(), grid.nodes()),
            ));
        }

        let s = &self.solver;
        let solver = SolverConfig {
            method: match s.method {
                MethodName::FixedPoint => Method::FixedPoint,
                MethodName::Newton => Method::Newton,
            },
            tol: s.tol,
            max_iter: s.max_iter,
            guard: s.guard.as_ref().map(|g| Guard {
                q: g.q,
                r: g.r,
                enforce: g.enforce,
            }),
            extrapolate: s.extrapolate,
        };
        solver.validate()?;

        let mut outputs = self.outputs;
        if outputs.state_stride == 0 {
            return Err(Failure::config(
                "outputs.state_stride",
                "must be at least 1",
            ));
        }
        for p in [
            &mut outputs.diagnostics_path,
            &mut outputs.timeseries_path,
            &mut outputs.table_path,
        ]
        .into_iter()
        .flatten()
        {
            *p = base.join(&*p);
        }
        Ok(Setup {
            spec,
            grid,
            initial,
            exact,
            solver,
            outputs,
        })
    }
}

impl EquationConfig {
    fn spec(&self) -> Result<EquationSpec, Failure> {
        let (a, b) = (self.alpha, self.beta);
        let spec = match self.family {
            FamilyName::Kdv => {
                self.reject_p()?;
                self.reject_gamma()?;
                EquationSpec::kdv(a, b)
            }
            FamilyName::Gkdv => {
                self.reject_gamma()?;
                let p = self
                    .p
                    .ok_or_else(|| Failure::config("equation.p", "required for family gkdv"))?;
                EquationSpec::generalized_kdv(a, b, p)
            }
            FamilyName::Ostrovsky => {
                self.reject_p()?;
                let gamma = self.gamma.ok_or_else(|| {
                    Failure::config("equation.gamma", "required for family ostrovsky")
                })?;
                EquationSpec::ostrovsky(a, b, gamma)
            }
        };
        Ok(spec?)
    }

    fn reject_p(&self) -> Result<(), Failure> {
        match self.p {
            Some(_) => Err(Failure::config("equation.p", "only valid for family gkdv")),
            None => Ok(()),
        }
    }

    fn reject_gamma(&self) -> Result<(), Failure> {
        match self.gamma {
            Some(_) => Err(Failure::config(
                "equation.gamma",
                "only valid for family ostrovsky",
            )),
            None => Ok(()),
        }
    }
}
