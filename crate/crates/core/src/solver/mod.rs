//! Method-of-lines time integration with nonlocal boundary closure.
//!
//! Interior nodes advance by explicit Heun. After each stage the boundary
//! value is recomputed from the kernel integral by fixed-point iteration, so
//! every stage sees a boundary consistent with its interior.

mod compare;
mod functionals;
mod oracle;

pub use compare::{compare_runs, CompareReport};
pub use functionals::{fit_lower_bound_d, functional_i, functional_j};
pub use oracle::{ode_oracle_values, ode_reduction_oracle, OdeOracle};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{laplacian_into, Field, Grid};
use crate::model::{check_compatibility, DiscreteProblem, InitialDatum, ModelError, ProblemSpec};
use crate::numerics::pow_nonneg;
use crate::spectral::{first_eigenpair, EigenPair, Normalization, SpectralError};

/// Sup-norm below which a run is declared decayed immediately.
pub const DECAY_FLOOR: f64 = 1e-12;
const CLOSURE_MAX_ITER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("initial datum violates the boundary compatibility condition (residual {residual:e} > {tolerance:e})")]
    Incompatible { residual: f64, tolerance: f64 },
    #[error("boundary fixed point did not converge at t = {t} after {iterations} iterations (last change {last_change:e}); refine the grid")]
    BoundaryClosure { t: f64, iterations: usize, last_change: f64 },
    #[error("step size collapsed to {dt:e} at t = {t} while sup u = {sup} is not growing (stiff sink)")]
    StiffnessFailure { t: f64, dt: f64, sup: f64 },
    #[error("invalid solver controls: {0}")]
    InvalidControls(String),
    #[error("eigenpair normalization {got:?} given where {expected:?} is required")]
    NormalizationMismatch { expected: Normalization, got: Normalization },
    #[error("configuration is not spatially flat: {0}")]
    NotFlat(String),
    #[error("no snapshots recorded at or after t0 = {0}")]
    NoSnapshots(f64),
    #[error("comparison precondition violated: {0}")]
    ComparePrecondition(String),
}

fn default_cfl() -> f64 {
    0.45
}
fn default_reaction() -> f64 {
    0.1
}
fn default_umax() -> f64 {
    1e8
}
fn default_dt_min() -> f64 {
    1e-12
}
fn default_fp_tol() -> f64 {
    1e-12
}
fn default_stride() -> usize {
    50
}
fn default_decay_ratio() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveControls {
    pub t_end: f64,
    /// Upper bound on the first step; `None` lets the limiter decide.
    #[serde(default)]
    pub dt_init: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_reaction")]
    pub reaction_safety: f64,
    #[serde(default = "default_umax")]
    pub blowup_threshold: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_fp_tol")]
    pub boundary_fixedpoint_tol: f64,
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
    /// Times the integration lands on exactly and always records.
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub record_snapshots: bool,
    #[serde(default)]
    pub waive_compatibility: bool,
    /// A run reaching `t_end` with `sup u ≤ decay_ratio · sup u₀` is Decayed.
    #[serde(default = "default_decay_ratio")]
    pub decay_ratio: f64,
}

impl SolveControls {
    pub fn new(t_end: f64) -> Self {
        SolveControls {
            t_end,
            dt_init: None,
            cfl_safety: default_cfl(),
            reaction_safety: default_reaction(),
            blowup_threshold: default_umax(),
            dt_min: default_dt_min(),
            boundary_fixedpoint_tol: default_fp_tol(),
            trace_stride: default_stride(),
            output_times: Vec::new(),
            record_snapshots: false,
            waive_compatibility: false,
            decay_ratio: default_decay_ratio(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidControls(m.to_string()));
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be positive and finite");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 0.5) {
            return bad("cfl_safety must lie in (0, 0.5)");
        }
        if !(self.reaction_safety > 0.0) || !(self.blowup_threshold > 0.0) || !(self.dt_min > 0.0) {
            return bad("reaction_safety, blowup_threshold and dt_min must be positive");
        }
        if !(self.boundary_fixedpoint_tol > 0.0) || self.trace_stride == 0 {
            return bad("boundary_fixedpoint_tol and trace_stride must be positive");
        }
        if matches!(self.dt_init, Some(d) if !(d > 0.0)) {
            return bad("dt_init must be positive");
        }
        if !(self.decay_ratio >= 0.0 && self.decay_ratio < 1.0) {
            return bad("decay_ratio must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub last_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpCause {
    ThresholdCrossed,
    BoundaryClosureLost,
    StepCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowUp { t_bracket: [f64; 2], cause: BlowUpCause },
    Decayed { below: f64 },
}

impl Outcome {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Outcome::BlowUp { .. })
    }
    /// Completed or Decayed.
    pub fn is_global(&self) -> bool {
        !self.is_blow_up()
    }
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Completed => "Completed",
            Outcome::BlowUp { .. } => "BlowUp",
            Outcome::Decayed { .. } => "Decayed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub sup_norm: f64,
    pub mass: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "I")]
    pub i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub traces: Vec<TraceRow>,
    pub final_state: State,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<State>,
    pub steps: usize,
    pub lambda1: f64,
    /// Accumulated a-posteriori time shift; blow-up brackets are widened by it.
    pub time_shift_estimate: f64,
}

/// Why a single step could not be taken.
#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    Closure { iterations: usize, last_change: f64 },
    NonFinite,
}

/// Stateless stepping engine for one problem on one grid.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub prob: DiscreteProblem,
    pub controls: SolveControls,
    dim: f64,
    scratch: std::cell::RefCell<Scratch>,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    stage: Vec<f64>,
}

impl Integrator {
    pub fn new(spec: &ProblemSpec, grid: &Grid, controls: &SolveControls) -> Result<Self, SolverError> {
        controls.validate()?;
        let prob = DiscreteProblem::new(spec, grid)?;
        let n = grid.len();
        Ok(Integrator {
            dim: grid.descriptor.dim() as f64,
            prob,
            controls: controls.clone(),
            scratch: std::cell::RefCell::new(Scratch { k1: vec![0.0; n], k2: vec![0.0; n], stage: vec![0.0; n] }),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.prob.grid
    }

    /// `∫ u^p` by grid quadrature.
    fn nonlocal_integral(&self, u: &[f64]) -> f64 {
        let p = self.prob.p;
        self.prob.grid.quad_weights.iter().zip(u).map(|(w, &v)| w * pow_nonneg(v, p)).sum()
    }

    /// Right-hand side `Δu + a u^r ∫u^p − b u^q` at interior nodes.
    pub fn rhs(&self, u: &[f64], t: f64, out: &mut [f64]) {
        let pr = &self.prob;
        laplacian_into(&pr.grid, u, out);
        let ip = if pr.a_law.is_zero() { 0.0 } else { self.nonlocal_integral(u) };
        let at = pr.a_time(t) * ip;
        let bt = pr.b_time(t);
        for &i in &pr.grid.interior_idx {
            let v = u[i];
            let mut f = out[i];
            if at != 0.0 {
                f += pr.a_nodal[i] * at * pow_nonneg(v, pr.r);
            }
            if bt != 0.0 && pr.b_nodal[i] != 0.0 {
                f -= pr.b_nodal[i] * bt * pow_nonneg(v, pr.q);
            }
            out[i] = f;
        }
        for &i in &pr.grid.boundary_idx {
            out[i] = 0.0;
        }
    }

    /// Fixed point `g = ∫ k(·, y, t) u^l dy` with the boundary entries of `u`
    /// replaced by `g`; writes `g` into the boundary entries.
    pub fn close_boundary(&self, u: &mut [f64], t: f64) -> Result<f64, StepFailure> {
        let pr = &self.prob;
        let bidx = &pr.grid.boundary_idx;
        if pr.kernel_is_zero() {
            for &i in bidx {
                u[i] = 0.0;
            }
            return Ok(0.0);
        }
        let kt = pr.k_time(t);
        let l = pr.l;
        let interior: f64 = pr.grid.interior_idx.iter().map(|&j| pr.k_weighted[j] * pow_nonneg(u[j], l)).sum::<f64>() * kt;
        let self_weight: f64 = bidx.iter().map(|&j| pr.k_weighted[j]).sum::<f64>() * kt;
        let mut g = u[bidx[0]].max(0.0);
        let tol = self.controls.boundary_fixedpoint_tol;
        let mut change = f64::INFINITY;
        for it in 1..=CLOSURE_MAX_ITER {
            let next = interior + self_weight * pow_nonneg(g, l);
            if !next.is_finite() {
                return Err(StepFailure::Closure { iterations: it, last_change: f64::INFINITY });
            }
            change = (next - g).abs();
            g = next;
            if change <= tol * g.abs().max(1.0) {
                // one more sweep pins the value to rounding level
                g = interior + self_weight * pow_nonneg(g, l);
                for &i in bidx {
                    u[i] = g;
                }
                return Ok(g);
            }
        }
        Err(StepFailure::Closure { iterations: CLOSURE_MAX_ITER, last_change: change })
    }

    /// Step size from the diffusion and reaction limiters.
    pub fn suggest_dt(&self, u: &[f64], t: f64) -> f64 {
        let pr = &self.prob;
        let h = pr.grid.h;
        let cfl = self.controls.cfl_safety * h * h / (2.0 * self.dim);
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ip = if pr.a_law.is_zero() { 0.0 } else { self.nonlocal_integral(u) };
        let at = pr.a_time(t) * ip;
        let bt = pr.b_time(t);
        let floor = 1e-3 * sup;
        let mut rate = 0.0f64;
        for &i in &pr.grid.interior_idx {
            let v = u[i];
            if v > floor && v > 0.0 {
                let src = (pr.a_nodal[i] * at * pow_nonneg(v, pr.r)).abs();
                let snk = (pr.b_nodal[i] * bt * pow_nonneg(v, pr.q)).abs();
                rate = rate.max((src + snk) / v);
            }
        }
        cfl.min(self.controls.reaction_safety / (1.0 + rate))
    }

    /// One Heun step of size `dt` from `(t, u)`.
    pub fn advance(&self, state: &State, dt: f64) -> Result<State, StepFailure> {
        self.advance_estimated(state, dt).map(|(s, _)| s)
    }

    /// Heun step plus the time shift `‖u_Heun − u_Euler‖ / ‖∂ₜu‖` that would
    /// explain its local error, capped at `dt`.
    pub fn advance_estimated(&self, state: &State, dt: f64) -> Result<(State, f64), StepFailure> {
        let mut s = self.scratch.borrow_mut();
        let Scratch { k1, k2, stage } = &mut *s;
        let t = state.t;
        let u = &state.u;
        self.rhs(u, t, k1);
        for i in 0..u.len() {
            stage[i] = (u[i] + dt * k1[i]).max(0.0);
        }
        self.close_boundary(stage, t + dt)?;
        self.rhs(stage, t + dt, k2);
        let mut next = Field::zeros(u.len());
        for i in 0..u.len() {
            next[i] = (u[i] + 0.5 * dt * (k1[i] + k2[i])).max(0.0);
        }
        self.close_boundary(&mut next, t + dt)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(StepFailure::NonFinite);
        }
        let (mut diff, mut rate) = (0.0f64, 0.0f64);
        for &i in &self.prob.grid.interior_idx {
            diff = diff.max((k2[i] - k1[i]).abs());
            rate = rate.max((0.5 * (k1[i] + k2[i])).abs());
        }
        let shift = if rate > 0.0 { (0.5 * dt * diff / rate).min(dt) } else { 0.0 };
        Ok((State { t: t + dt, u: next, last_dt: dt }, shift))
    }
}

/// Per-boundary-node values of the nonlocal boundary condition for `u` at `t`.
pub fn boundary_close(grid: &Grid, spec: &ProblemSpec, u: &[f64], t: f64) -> Result<Vec<f64>, SolverError> {
    let integ = Integrator::new(spec, grid, &SolveControls::new(1.0))?;
    let mut w = u.to_vec();
    integ
        .close_boundary(&mut w, t)
        .map_err(|f| closure_error(f, t))?;
    Ok(grid.boundary_idx.iter().map(|&i| w[i]).collect())
}

/// `spec.u0` on `grid` with its boundary entries replaced by the closure at
/// `t = 0`, so the result satisfies the compatibility condition exactly.
pub fn compatible_datum(spec: &ProblemSpec, grid: &Grid) -> Result<InitialDatum, SolverError> {
    let mut u = spec.u0.eval(grid)?.into_inner();
    let g = boundary_close(grid, spec, &u, 0.0)?;
    for (&i, v) in grid.boundary_idx.iter().zip(g) {
        u[i] = v;
    }
    Ok(InitialDatum::Nodal { values: u })
}

fn closure_error(f: StepFailure, t: f64) -> SolverError {
    match f {
        StepFailure::Closure { iterations, last_change } => SolverError::BoundaryClosure { t, iterations, last_change },
        StepFailure::NonFinite => SolverError::BoundaryClosure { t, iterations: 0, last_change: f64::NAN },
    }
}

/// One step with the limiter-chosen size.
pub fn step(state: &State, spec: &ProblemSpec, grid: &Grid, controls: &SolveControls) -> Result<State, SolverError> {
    let integ = Integrator::new(spec, grid, controls)?;
    let dt = integ.suggest_dt(&state.u, state.t);
    integ.advance(state, dt).map_err(|f| closure_error(f, state.t))
}

/// Scalar diagnostics of a state.
pub(crate) fn trace_row(integ: &Integrator, eig: &EigenPair, state: &State) -> TraceRow {
    let grid = integ.grid();
    TraceRow {
        t: state.t,
        sup_norm: state.u.sup_norm(),
        mass: grid.quadrature(&state.u),
        j: functionals::j_unchecked(grid, state, eig),
        i: functionals::i_unchecked(&integ.prob, state, eig),
    }
}

/// Integrate from `u₀` until `t_end`, blow-up, or decay.
pub fn solve(spec: &ProblemSpec, grid: &Grid, controls: &SolveControls) -> Result<SolveResult, SolverError> {
    if !controls.waive_compatibility {
        let rep = check_compatibility(spec, grid)?;
        if !rep.passed {
            return Err(SolverError::Incompatible { residual: rep.residual, tolerance: rep.tolerance });
        }
    }
    let integ = Integrator::new(spec, grid, controls)?;
    let eig = first_eigenpair(grid, Normalization::IntegralOne)?;
    let u0 = spec.u0.eval(grid)?;
    run(&integ, &eig, State { t: 0.0, u: u0, last_dt: 0.0 })
}

pub(crate) fn run(integ: &Integrator, eig: &EigenPair, init: State) -> Result<SolveResult, SolverError> {
    let c = &integ.controls;
    let mut outputs: Vec<f64> = c.output_times.iter().copied().filter(|&t| t > init.t && t < c.t_end).collect();
    outputs.sort_by(f64::total_cmp);
    outputs.dedup();
    let mut next_out = 0usize;

    let mut state = init;
    let sup0 = state.u.sup_norm();
    let mut traces = vec![trace_row(integ, eig, &state)];
    let mut snapshots = if c.record_snapshots { vec![state.clone()] } else { Vec::new() };
    let mut prev_sup = sup0;
    let mut steps = 0usize;
    let mut lag = 0.0f64;
    let t_eps = 1e-14 * c.t_end.max(1.0);
    // the crossing time carries the accumulated time-discretization shift on either side
    let bracket = |t: f64, width: f64, lag: f64| [(t - lag).max(0.0), t + width + lag];

    let finish = |outcome: Outcome, state: State, mut traces: Vec<TraceRow>, mut snapshots: Vec<State>, steps: usize, lag: f64| {
        if traces.last().map(|r| r.t < state.t).unwrap_or(true) {
            traces.push(trace_row(integ, eig, &state));
            if c.record_snapshots {
                snapshots.push(state.clone());
            }
        }
        Ok(SolveResult { outcome, traces, final_state: state, snapshots, steps, lambda1: eig.lambda1, time_shift_estimate: lag })
    };

    if sup0 < DECAY_FLOOR {
        return finish(Outcome::Decayed { below: sup0 }, state, traces, snapshots, steps, lag);
    }

    loop {
        if state.t >= c.t_end - t_eps {
            let sup = state.u.sup_norm();
            let outcome = if sup <= c.decay_ratio * sup0 { Outcome::Decayed { below: sup } } else { Outcome::Completed };
            return finish(outcome, state, traces, snapshots, steps, lag);
        }
        let mut dt = integ.suggest_dt(&state.u, state.t);
        if steps == 0 {
            if let Some(d0) = c.dt_init {
                dt = dt.min(d0);
            }
        }
        let sup = state.u.sup_norm();
        let rising = sup > prev_sup || (steps == 0 && sup > 0.0);
        if dt < c.dt_min {
            if rising {
                let t = state.t;
                let width = 20.0 * dt.max(state.last_dt);
                let out = Outcome::BlowUp { t_bracket: bracket(t, width, lag), cause: BlowUpCause::StepCollapse };
                return finish(out, state, traces, snapshots, steps, lag);
            }
            return Err(SolverError::StiffnessFailure { t: state.t, dt, sup });
        }
        let mut hit_output = false;
        let mut target = c.t_end;
        if next_out < outputs.len() {
            target = outputs[next_out];
        }
        if state.t + dt >= target - t_eps {
            dt = target - state.t;
            hit_output = target < c.t_end;
        }
        let next = match integ.advance_estimated(&state, dt) {
            Ok((s, shift)) => {
                lag += shift;
                s
            }
            Err(f) => {
                if rising || sup > 1e-3 * c.blowup_threshold {
                    let t = state.t;
                    let cause = BlowUpCause::BoundaryClosureLost;
                    let out = Outcome::BlowUp { t_bracket: bracket(t, 20.0 * dt, lag), cause };
                    return finish(out, state, traces, snapshots, steps, lag);
                }
                return Err(closure_error(f, state.t));
            }
        };
        steps += 1;
        prev_sup = sup;
        state = if hit_output {
            next_out += 1;
            State { t: target, ..next }
        } else {
            next
        };
        let new_sup = state.u.sup_norm();
        if new_sup > c.blowup_threshold {
            let t = state.t;
            let width = 20.0 * state.last_dt;
            let out = Outcome::BlowUp { t_bracket: bracket(t, width, lag), cause: BlowUpCause::ThresholdCrossed };
            return finish(out, state, traces, snapshots, steps, lag);
        }
        if new_sup < DECAY_FLOOR {
            return finish(Outcome::Decayed { below: new_sup }, state, traces, snapshots, steps, lag);
        }
        if hit_output || steps % c.trace_stride == 0 {
            traces.push(trace_row(integ, eig, &state));
            if c.record_snapshots {
                snapshots.push(state.clone());
            }
        }
    }
}
