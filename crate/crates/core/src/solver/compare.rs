//! Two runs from ordered data, stepped with a shared time step.

use serde::{Deserialize, Serialize};

use crate::domain::Grid;
use crate::model::{check_compatibility, ProblemSpec};

use super::{Integrator, SolveControls, SolverError, State, DECAY_FLOOR};

/// Relative tolerance on `max(u − v)` against `‖v‖_∞`.
pub const ORDERING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// `max_t max_x (u − v)`, never below 0.
    pub max_violation: f64,
    /// `max_t max_x (u − v) / ‖v(·, t)‖_∞`.
    pub max_relative_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub steps: usize,
    pub t_final: f64,
    /// Why the lockstep run ended before `t_end`, if it did.
    pub stopped_early: Option<String>,
}

fn ordering_gap(lo: &State, hi: &State) -> (f64, f64) {
    let gap = lo.u.iter().zip(hi.u.iter()).map(|(a, b)| a - b).fold(0.0f64, f64::max);
    let vs = hi.u.sup_norm();
    (gap, if vs > 0.0 { gap / vs } else if gap > 0.0 { f64::INFINITY } else { 0.0 })
}

/// Runs `lower` and `upper` (identical except for `u₀`) side by side and
/// measures the ordering after every step.
pub fn compare_runs(
    lower: &ProblemSpec,
    upper: &ProblemSpec,
    grid: &Grid,
    controls: &SolveControls,
) -> Result<CompareReport, SolverError> {
    if lower.with_u0(upper.u0.clone()) != *upper {
        return Err(SolverError::ComparePrecondition("the two problems must differ only in the initial datum".into()));
    }
    let u0 = lower.u0.eval(grid)?;
    let v0 = upper.u0.eval(grid)?;
    if let Some(i) = (0..grid.len()).find(|&i| u0[i] > v0[i]) {
        return Err(SolverError::ComparePrecondition(format!(
            "lower datum exceeds upper datum at node {i} ({} > {})",
            u0[i], v0[i]
        )));
    }
    if lower.exponents.needs_positive_data() && (u0.min() <= 0.0 || v0.min() <= 0.0) {
        return Err(SolverError::ComparePrecondition(
            "min(r, p, l) < 1: ordering is only guaranteed for strictly positive data".into(),
        ));
    }
    if !controls.waive_compatibility {
        for spec in [lower, upper] {
            let rep = check_compatibility(spec, grid)?;
            if !rep.passed {
                return Err(SolverError::Incompatible { residual: rep.residual, tolerance: rep.tolerance });
            }
        }
    }
    let integ = Integrator::new(lower, grid, controls)?;
    let c = &integ.controls;
    let mut lo = State { t: 0.0, u: u0, last_dt: 0.0 };
    let mut hi = State { t: 0.0, u: v0, last_dt: 0.0 };
    let (mut max_gap, mut max_rel) = ordering_gap(&lo, &hi);
    let mut steps = 0usize;
    let mut stopped_early = None;
    let t_eps = 1e-14 * c.t_end.max(1.0);
    while lo.t < c.t_end - t_eps {
        let mut dt = integ.suggest_dt(&lo.u, lo.t).min(integ.suggest_dt(&hi.u, hi.t));
        if steps == 0 {
            if let Some(d0) = c.dt_init {
                dt = dt.min(d0);
            }
        }
        if dt < c.dt_min {
            stopped_early = Some(format!("step size collapsed to {dt:e} at t = {}", lo.t));
            break;
        }
        dt = dt.min(c.t_end - lo.t);
        let (Ok(nlo), Ok(nhi)) = (integ.advance(&lo, dt), integ.advance(&hi, dt)) else {
            stopped_early = Some(format!("boundary closure lost at t = {}", lo.t));
            break;
        };
        lo = nlo;
        hi = nhi;
        steps += 1;
        let (gap, rel) = ordering_gap(&lo, &hi);
        max_gap = max_gap.max(gap);
        max_rel = max_rel.max(rel);
        if hi.u.sup_norm() > c.blowup_threshold {
            stopped_early = Some(format!("upper run crossed the blow-up threshold at t = {}", hi.t));
            break;
        }
        // past this point the lower run stays at the floor and the ordering is trivial
        if lo.u.sup_norm() < DECAY_FLOOR {
            stopped_early = Some(format!("lower run decayed below {DECAY_FLOOR:e} at t = {}", lo.t));
            break;
        }
    }
    Ok(CompareReport {
        max_violation: max_gap,
        max_relative_violation: max_rel,
        tolerance: ORDERING_TOL,
        passed: max_rel <= ORDERING_TOL,
        steps,
        t_final: lo.t,
        stopped_early,
    })
}
