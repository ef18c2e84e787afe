//! One-step solvers for the implicit scheme and full time integration.
//!
//! [`Method::FixedPoint`] iterates the map `φ` from `w₀ = uᵐ`; it is a
//! contraction on `‖w‖_∞ ≤ qr` when `Δt < min(ε₁, ε₂)`. [`Method::Newton`]
//! applies damped Newton to the residual with an exact Jacobian and a direct
//! linear solve. Both stop when `‖w_{i+1} - w_i‖_∞ ≤ tol`.

use crate::equation::{EquationSpec, Family};
use crate::error::{check_len, Error, Result};
use crate::grid::{sup_norm, Grid, State};
use crate::invariants::InvariantReport;
use crate::linalg::{dense_solve, CyclicBanded};
use crate::operators::{stencil_apply, Stencil};
use crate::schemes::{flux_derivative, step_size_bounds, Scheme, StepBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FixedPoint,
    Newton,
}

/// Ball parameters `(q, r)` of the local existence argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guard {
    pub q: f64,
    pub r: f64,
    /// Refuse to step when `Δt ≥ min(ε₁, ε₂)` (KdV only).
    pub enforce: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub guard: Option<Guard>,
    /// Start from `2uᵐ - uᵐ⁻¹` instead of `uᵐ` (simulations only).
    pub extrapolate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::FixedPoint,
            tol: 1e-12,
            max_iter: 50,
            guard: None,
            extrapolate: false,
        }
    }
}

impl SolverConfig {
    pub fn fixed_point(tol: f64, max_iter: usize) -> Self {
        SolverConfig {
            method: Method::FixedPoint,
            tol,
            max_iter,
            ..Default::default()
        }
    }

    pub fn newton(tol: f64, max_iter: usize) -> Self {
        SolverConfig {
            method: Method::Newton,
            tol,
            max_iter,
            ..Default::default()
        }
    }

    pub fn with_guard(mut self, q: f64, r: f64, enforce: bool) -> Self {
        self.guard = Some(Guard { q, r, enforce });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(
                "tol",
                format!("must be positive, got {}", self.tol),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        if let Some(g) = self.guard {
            if !(g.q > 1.0) {
                return Err(Error::invalid(
                    "guard.q",
                    format!("need q > 1, got {}", g.q),
                ));
            }
            if !(g.r > 0.0) {
                return Err(Error::invalid(
                    "guard.r",
                    format!("need r > 0, got {}", g.r),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardStatus {
    Inactive,
    /// `Δt < min(ε₁, ε₂)`.
    Satisfied(StepBounds),
    /// Step taken anyway: either not enforced, or the family is not KdV and
    /// the bounds are only heuristic.
    Warning(StepBounds),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub iterations: usize,
    pub final_update_norm: f64,
    /// Ratio of the last two update norms; 0 when one iteration sufficed.
    pub contraction_estimate: f64,
    pub sup_norm: f64,
    pub mass: f64,
    pub energy: f64,
    pub l2: f64,
    /// `‖R‖_∞` at the accepted state; logged, not used for stopping.
    pub residual_norm: f64,
    pub guard: GuardStatus,
    /// `‖uᵐ⁺¹‖_∞ ≤ qr`, checked when the guard is satisfied and the history
    /// stays inside `‖·‖_∞ ≤ r`.
    pub local_bound_ok: Option<bool>,
}

/// Reusable one-step solver for a fixed equation, grid and configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    cfg: SolverConfig,
    guard: GuardStatus,
    /// First column of `-(γ/2) δ⟨1⟩ (δ_FD⁻¹)²` (circulant), Ostrovsky only.
    nonlocal_column: Option<Vec<f64>>,
}

impl Stepper {
    pub fn new(spec: EquationSpec, grid: Grid, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let guard = match cfg.guard {
            None => GuardStatus::Inactive,
            Some(g) => {
                let bounds = step_size_bounds(g.q, g.r, grid.dx(), spec.alpha(), spec.beta())?;
                let is_kdv = matches!(spec.family(), Family::Kdv);
                if bounds.admits(grid.dt()) {
                    GuardStatus::Satisfied(bounds)
                } else if g.enforce && is_kdv {
                    return Err(Error::GuardViolation {
                        dt: grid.dt(),
                        eps1: bounds.eps1,
                        eps2: bounds.eps2,
                    });
                } else {
                    GuardStatus::Warning(bounds)
                }
            }
        };
        let scheme = Scheme::new(spec, grid);
        let nonlocal_column = scheme.fd_inverse().map(|inv| {
            let n = grid.nodes();
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            let col = stencil_apply(Stencil::CDiff1, &inv.apply_twice(&e), grid.dx());
            col.iter().map(|v| -0.5 * spec.gamma() * v).collect()
        });
        Ok(Stepper {
            scheme,
            cfg,
            guard,
            nonlocal_column,
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn guard_status(&self) -> GuardStatus {
        self.guard
    }

    /// Advances `curr` by one step. `guess` overrides the initial iterate;
    /// `history_sup` is `max_{m' ≤ m} ‖u^{m'}‖_∞` when known.
    pub fn step(
        &self,
        curr: &[f64],
        guess: Option<&[f64]>,
        history_sup: Option<f64>,
    ) -> Result<(State, StepDiagnostics)> {
        let grid = self.scheme.grid();
        check_len(curr.len(), grid.nodes())?;
        let start = match guess {
            Some(g) => {
                check_len(g.len(), curr.len())?;
                g.to_vec()
            }
            None => curr.to_vec(),
        };
        let outcome = match self.cfg.method {
            Method::FixedPoint => self.fixed_point(curr, start)?,
            Method::Newton => self.newton(curr, start)?,
        };
        let next = outcome.state;
        let residual_norm = sup_norm(&self.scheme.residual(&next, curr)?);
        let report = InvariantReport::with_inverse(
            self.scheme.spec(),
            &next,
            grid.dx(),
            self.scheme.fd_inverse(),
        );
        let local_bound_ok = match (self.guard, self.cfg.guard) {
            (GuardStatus::Satisfied(_), Some(g)) => {
                let hist = history_sup
                    .unwrap_or_else(|| sup_norm(curr))
                    .max(sup_norm(curr));
                (hist <= g.r).then_some(report.sup <= g.q * g.r)
            }
            _ => None,
        };
        let diag = StepDiagnostics {
            iterations: outcome.iterations,
            final_update_norm: outcome.update_norm,
            contraction_estimate: outcome.contraction,
            sup_norm: report.sup,
            mass: report.mass,
            energy: report.energy,
            l2: report.l2,
            residual_norm,
            guard: self.guard,
            local_bound_ok,
        };
        Ok((next, diag))
    }

    fn fixed_point(&self, curr: &[f64], mut w: Vec<f64>) -> Result<IterationOutcome> {
        let mut prev_update: Option<f64> = None;
        let mut contraction = 0.0;
        let mut update = f64::INFINITY;
        for it in 1..=self.cfg.max_iter {
            let next = self.scheme.phi(curr, &w)?;
            update = next
                .iter()
                .zip(&w)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            if !update.is_finite() {
                break;
            }
            if let Some(prev) = prev_update {
                contraction = if prev > 0.0 { update / prev } else { 0.0 };
            }
            prev_update = Some(update);
            w = next.0;
            if update <= self.cfg.tol {
                return Ok(IterationOutcome {
                    state: State(w),
                    iterations: it,
                    update_norm: update,
                    contraction,
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: self.cfg.max_iter,
            last_update_norm: update,
        })
    }

    fn newton(&self, curr: &[f64], mut w: Vec<f64>) -> Result<IterationOutcome> {
        const MAX_HALVINGS: usize = 12;
        let mut r = self.scheme.residual(&w, curr)?.0;
        let mut r_norm = sup_norm(&r);
        let mut prev_update: Option<f64> = None;
        let mut contraction = 0.0;
        let mut update = f64::INFINITY;
        for it in 1..=self.cfg.max_iter {
            let delta = self.newton_direction(curr, &w, &r)?;
            let full = sup_norm(&delta);
            // below this an update is rounding noise and is always accepted
            let noise = 1e-10 * (1.0 + sup_norm(&w));
            let mut lambda = 1.0;
            let mut halvings = 0;
            let (w_try, r_try) = loop {
                let w_try: Vec<f64> = w.iter().zip(&delta).map(|(a, d)| a - lambda * d).collect();
                let r_try = self.scheme.residual(&w_try, curr)?.0;
                let r_try_norm = sup_norm(&r_try);
                let finite = r_try_norm.is_finite();
                if finite && (r_try_norm <= r_norm || lambda * full <= noise)
                    || halvings == MAX_HALVINGS
                {
                    break (w_try, r_try);
                }
                lambda *= 0.5;
                halvings += 1;
            };
            update = lambda * full;
            if !update.is_finite() || w_try.iter().any(|v| !v.is_finite()) {
                break;
            }
            if let Some(prev) = prev_update {
                contraction = if prev > 0.0 { update / prev } else { 0.0 };
            }
            prev_update = Some(update);
            w = w_try;
            r_norm = sup_norm(&r_try);
            r = r_try;
            if update <= self.cfg.tol && lambda == 1.0 {
                return Ok(IterationOutcome {
                    state: State(w),
                    iterations: it,
                    update_norm: update,
                    contraction,
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: self.cfg.max_iter,
            last_update_norm: update,
        })
    }

    /// Solves `J(w) δ = R(w)` with
    /// `J = I/Δt + c δ⟨1⟩ diag(∂F/∂w) - (β/2) δ⟨1⟩δ⟨2⟩ - (γ/2) δ⟨1⟩ (δ_FD⁻¹)²`.
    fn newton_direction(&self, curr: &[f64], w: &[f64], r: &[f64]) -> Result<Vec<f64>> {
        let grid = self.scheme.grid();
        let spec = self.scheme.spec();
        let n = grid.nodes();
        let dx = grid.dx();
        let c = spec.flux_coefficient();
        let half_beta = 0.5 * spec.beta();
        let d3 = 1.0 / (dx * dx * dx);
        let family = spec.family();
        let g: Vec<f64> = w
            .iter()
            .zip(curr)
            .map(|(&a, &b)| flux_derivative(family, a, b))
            .collect();

        let mut jac = CyclicBanded::zeros(n, 2);
        for k in 0..n {
            jac.add(k, 0, 1.0 / grid.dt());
            jac.add(k, 1, c * g[(k + 1) % n] / (2.0 * dx));
            jac.add(k, -1, -c * g[(k + n - 1) % n] / (2.0 * dx));
            jac.add(k, 2, -half_beta * 0.5 * d3);
            jac.add(k, 1, half_beta * d3);
            jac.add(k, -1, -half_beta * d3);
            jac.add(k, -2, half_beta * 0.5 * d3);
        }
        match &self.nonlocal_column {
            None => jac.solve(r),
            Some(col) => {
                let mut dense = jac.to_dense();
                for i in 0..n {
                    for j in 0..n {
                        dense[(i, j)] += col[(i + n - j) % n];
                    }
                }
                dense_solve(dense, r)
            }
        }
    }
}

struct IterationOutcome {
    state: State,
    iterations: usize,
    update_norm: f64,
    contraction: f64,
}

/// One step of the scheme from `curr`.
pub fn advance(
    spec: &EquationSpec,
    grid: &Grid,
    curr: &[f64],
    cfg: &SolverConfig,
) -> Result<(State, StepDiagnostics)> {
    Stepper::new(*spec, *grid, *cfg)?.step(curr, None, None)
}

#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub grid: Grid,
    pub spec: EquationSpec,
    /// `states[0]` is the initial condition; a complete run has `M + 1` levels.
    pub states: Vec<State>,
    pub diags: Vec<StepDiagnostics>,
}

impl TimeSeries {
    pub fn is_complete(&self) -> bool {
        self.diags.len() == self.grid.steps()
    }

    pub fn final_state(&self) -> &State {
        self.states
            .last()
            .expect("time series always holds the initial state")
    }

    pub fn initial_report(&self) -> InvariantReport {
        InvariantReport::new(&self.spec, &self.states[0], self.grid.dx())
    }

    /// `max_m |𝓜(uᵐ) - 𝓜(u⁰)| / |𝓜(u⁰)|` (absolute when `𝓜(u⁰) = 0`).
    pub fn mass_drift(&self) -> f64 {
        relative_drift(
            self.initial_report().mass,
            self.diags.iter().map(|d| d.mass),
        )
    }

    pub fn energy_drift(&self) -> f64 {
        relative_drift(
            self.initial_report().energy,
            self.diags.iter().map(|d| d.energy),
        )
    }

    /// `max_m ‖uᵐ‖_∞`, including the initial state.
    pub fn max_sup_norm(&self) -> f64 {
        self.diags
            .iter()
            .map(|d| d.sup_norm)
            .fold(sup_norm(&self.states[0]), f64::max)
    }
}

fn relative_drift(initial: f64, values: impl Iterator<Item = f64>) -> f64 {
    let worst = values.fold(0.0_f64, |m, v| m.max((v - initial).abs()));
    if initial == 0.0 {
        worst
    } else {
        worst / initial.abs()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("simulation stopped at step {step}: {source}")]
pub struct SimulationError {
    /// Index `m` of the failed step `uᵐ → uᵐ⁺¹`.
    pub step: usize,
    pub source: Error,
    /// Everything computed before the failure.
    pub partial: Box<TimeSeries>,
}

/// Runs all `M` steps from `u0`, keeping every level.
pub fn simulate(
    spec: &EquationSpec,
    grid: &Grid,
    u0: &[f64],
    cfg: &SolverConfig,
) -> std::result::Result<TimeSeries, SimulationError> {
    simulate_with(spec, grid, u0, cfg, |_, _| {})
}

/// Like [`simulate`], calling `observe(m, diag)` after each accepted step.
pub fn simulate_with(
    spec: &EquationSpec,
    grid: &Grid,
    u0: &[f64],
    cfg: &SolverConfig,
    mut observe: impl FnMut(usize, &StepDiagnostics),
) -> std::result::Result<TimeSeries, SimulationError> {
    let mut series = TimeSeries {
        grid: *grid,
        spec: *spec,
        states: vec![State(u0.to_vec())],
        diags: Vec::with_capacity(grid.steps()),
    };
    let fail = |step: usize, source: Error, series: TimeSeries| SimulationError {
        step,
        source,
        partial: Box::new(series),
    };
    if let Err(e) = check_len(u0.len(), grid.nodes()) {
        return Err(fail(0, e, series));
    }
    if !series.states[0].is_finite() {
        return Err(fail(
            0,
            Error::invalid("u0", "initial data must be finite"),
            series,
        ));
    }
    let stepper = match Stepper::new(*spec, *grid, *cfg) {
        Ok(s) => s,
        Err(e) => return Err(fail(0, e, series)),
    };
    let mut history_sup = sup_norm(u0);
    for m in 0..grid.steps() {
        let curr = &series.states[m];
        let guess = (cfg.extrapolate && m > 0).then(|| {
            let prev = &series.states[m - 1];
            curr.zip_map(prev, |a, b| 2.0 * a - b)
        });
        match stepper.step(curr, guess.as_deref(), Some(history_sup)) {
            Ok((next, diag)) => {
                history_sup = history_sup.max(diag.sup_norm);
                observe(m, &diag);
                series.states.push(next);
                series.diags.push(diag);
            }
            Err(e) => return Err(fail(m, e, series)),
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soliton(grid: &Grid) -> State {
        let l = grid.length();
        grid.sample(|x| 0.5 / ((x - 0.5 * l) * 0.5).cosh().powi(2))
    }

    #[test]
    fn constant_state_converges_immediately() {
        let grid = Grid::new(10.0, 20, 1.0, 10).unwrap();
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let u = State::constant(20, 0.7);
        for cfg in [
            SolverConfig::fixed_point(1e-14, 50),
            SolverConfig::newton(1e-14, 50),
        ] {
            let (next, diag) = advance(&spec, &grid, &u, &cfg).unwrap();
            assert_eq!(diag.iterations, 1);
            assert_eq!(next, u);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid::new(10.0, 16, 0.5, 5).unwrap();
        for spec in [
            EquationSpec::kdv(6.0, -1.0).unwrap(),
            EquationSpec::generalized_kdv(1.0, 1.0, 3).unwrap(),
            EquationSpec::ostrovsky(1.0, -1.0, 0.5).unwrap(),
        ] {
            let ts = simulate(&spec, &grid, &[0.0; 16], &SolverConfig::newton(1e-14, 20)).unwrap();
            assert_eq!(ts.states.len(), 6);
            assert!(ts.states.iter().all(|s| s.iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn single_step_series() {
        let grid = Grid::new(40.0, 64, 1e-4, 1).unwrap();
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let ts = simulate(
            &spec,
            &grid,
            &soliton(&grid),
            &SolverConfig::newton(1e-14, 20),
        )
        .unwrap();
        assert_eq!(ts.states.len(), 2);
        assert_eq!(ts.diags.len(), 1);
        assert!(ts.is_complete());
    }

    #[test]
    fn guarded_fixed_point_contracts() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let base = Grid::new(40.0, 100, 1.0, 1).unwrap();
        let bounds = step_size_bounds(2.0, 1.0, base.dx(), 6.0, -1.0).unwrap();
        let steps = (1.0 / (0.9 * bounds.min())).ceil() as usize;
        let grid = base.with_time(1.0, steps).unwrap();
        let u = soliton(&grid);
        let cfg = SolverConfig::fixed_point(1e-14, 200).with_guard(2.0, 1.0, true);
        let (_, diag) = advance(&spec, &grid, &u, &cfg).unwrap();
        assert!(matches!(diag.guard, GuardStatus::Satisfied(_)));
        assert!(diag.contraction_estimate < 1.0);
        assert_eq!(diag.local_bound_ok, Some(true));
    }

    #[test]
    fn enforced_guard_rejects_large_steps() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let grid = Grid::new(40.0, 100, 1.0, 10).unwrap();
        let cfg = SolverConfig::fixed_point(1e-12, 50).with_guard(2.0, 1.0, true);
        let err = advance(&spec, &grid, &soliton(&grid), &cfg).unwrap_err();
        assert!(matches!(err, Error::GuardViolation { .. }));

        // heuristic only for other families
        let gk = EquationSpec::generalized_kdv(6.0, -1.0, 3).unwrap();
        let cfg = SolverConfig::newton(1e-12, 50).with_guard(2.0, 1.0, true);
        let (_, diag) = advance(&gk, &grid, &soliton(&grid), &cfg).unwrap();
        assert!(matches!(diag.guard, GuardStatus::Warning(_)));
    }

    #[test]
    fn divergent_fixed_point_reports_non_convergence_with_partial_series() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let grid = Grid::new(40.0, 400, 1.0, 100).unwrap();
        let err = simulate(
            &spec,
            &grid,
            &soliton(&grid),
            &SolverConfig::fixed_point(1e-14, 30),
        )
        .unwrap_err();
        assert_eq!(err.step, 0);
        assert!(matches!(
            err.source,
            Error::NonConvergence { iterations: 30, .. }
        ));
        assert_eq!(err.partial.states.len(), 1);
    }

    #[test]
    fn newton_agrees_with_fixed_point() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let base = Grid::new(40.0, 80, 1.0, 1).unwrap();
        let bounds = step_size_bounds(2.0, 1.0, base.dx(), 6.0, -1.0).unwrap();
        let grid = base.with_time(0.5 * bounds.min(), 1).unwrap();
        let u = soliton(&grid);
        let tol = 1e-14;
        let (a, _) = advance(&spec, &grid, &u, &SolverConfig::fixed_point(tol, 500)).unwrap();
        let (b, _) = advance(&spec, &grid, &u, &SolverConfig::newton(tol, 50)).unwrap();
        let diff = a
            .iter()
            .zip(b.iter())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff <= 10.0 * tol, "{diff}");
    }

    #[test]
    fn newton_ostrovsky_conserves() {
        let spec = EquationSpec::ostrovsky(6.0, -1.0, 0.5).unwrap();
        let grid = Grid::new(20.0, 48, 0.5, 50).unwrap();
        let u0 = grid.sample(|x| 0.4 * (2.0 * std::f64::consts::PI * x / 20.0).sin() + 0.1);
        let ts = simulate(&spec, &grid, &u0, &SolverConfig::newton(1e-14, 30)).unwrap();
        assert!(ts.mass_drift() < 1e-12, "{}", ts.mass_drift());
        assert!(ts.energy_drift() < 1e-10, "{}", ts.energy_drift());
    }

    #[test]
    fn extrapolated_start_reaches_same_solution() {
        let spec = EquationSpec::kdv(6.0, -1.0).unwrap();
        let grid = Grid::new(40.0, 200, 0.2, 40).unwrap();
        let u0 = soliton(&grid);
        let plain = simulate(&spec, &grid, &u0, &SolverConfig::newton(1e-14, 30)).unwrap();
        let mut cfg = SolverConfig::newton(1e-14, 30);
        cfg.extrapolate = true;
        let extra = simulate(&spec, &grid, &u0, &cfg).unwrap();
        let diff = plain
            .final_state()
            .iter()
            .zip(extra.final_state().iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn deterministic() {
        let spec = EquationSpec::generalized_kdv(1.0, -1.0, 3).unwrap();
        let grid = Grid::new(20.0, 64, 0.2, 20).unwrap();
        let u0 = grid.sample(|x| (x * 0.3).sin());
        let cfg = SolverConfig::newton(1e-13, 30);
        let a = simulate(&spec, &grid, &u0, &cfg).unwrap();
        let b = simulate(&spec, &grid, &u0, &cfg).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn invalid_configs() {
        assert!(SolverConfig::newton(0.0, 5).validate().is_err());
        assert!(SolverConfig::newton(1e-8, 0).validate().is_err());
        assert!(SolverConfig::newton(1e-8, 5)
            .with_guard(1.0, 1.0, false)
            .validate()
            .is_err());
    }
}
