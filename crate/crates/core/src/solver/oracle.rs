//! Scalar reduction for spatially flat configurations.
//!
//! With `a`, `b` constant in space, `l = 1` and `∫ k(x, y, t) dy = 1`, a flat
//! datum stays flat and solves `u' = a(t)|Ω|u^{r+p} − b(t)u^q`.

use crate::model::{Exponent, ProblemSpec, TemporalForm};
use crate::numerics::{adaptive_simpson, integrate_scalar_ode, pow_nonneg, ScalarOdeTrace};

use super::SolverError;

const ODE_TOL: f64 = 1e-10;
const ESCAPE: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOracle {
    pub trace: ScalarOdeTrace,
    /// Closed-form quadrature when the coefficients are time independent,
    /// otherwise the escape time of the adaptive integration.
    pub blowup_time: Option<f64>,
    pub by_quadrature: bool,
}

struct Flat {
    a: Box<dyn Fn(f64) -> f64>,
    b: Box<dyn Fn(f64) -> f64>,
    a_const: bool,
    b_const: bool,
    kappa: f64,
    q: f64,
    measure: f64,
}

fn flat_reduction(spec: &ProblemSpec, horizon: f64) -> Result<Flat, SolverError> {
    let (a, b, k) = spec.laws()?;
    let desc = spec.domain;
    let measure = desc.measure();
    if !a.is_spatially_constant() || !b.is_spatially_constant() {
        return Err(SolverError::NotFlat("a and b must be constant in space".into()));
    }
    if spec.exponents.l != Exponent::integer(1) {
        return Err(SolverError::NotFlat(format!("l = {} but the reduction needs l = 1", spec.exponents.l)));
    }
    if !k.is_spatially_constant() {
        return Err(SolverError::NotFlat("kernel must be constant in space".into()));
    }
    let (lo, hi) = desc.coordinate_range();
    let x0 = 0.5 * (lo + hi);
    // T is monotone, so the endpoints bound the row integral on [0, horizon]
    for t in [0.0, horizon] {
        let mass = k.eval(&desc, x0, t) * measure;
        if (mass - 1.0).abs() > 1e-12 {
            return Err(SolverError::NotFlat(format!("kernel row integral is {mass} at t = {t}, not 1")));
        }
    }
    let a_const = a.is_zero() || a.temporal == TemporalForm::Constant;
    let b_const = b.is_zero() || b.temporal == TemporalForm::Constant;
    Ok(Flat {
        a: Box::new(move |t| a.eval(&desc, x0, t)),
        b: Box::new(move |t| b.eval(&desc, x0, t)),
        a_const,
        b_const,
        kappa: spec.exponents.rp(),
        q: spec.exponents.q(),
        measure,
    })
}

/// `∫_{u₀}^∞ du / (a|Ω|u^κ − b u^q)` via `u = u₀ σ^{−1/(κ−1)}`, which maps the
/// tail onto `σ ∈ (0, 1]` with a bounded integrand when `κ > q`.
fn quadrature_blowup_time(a: f64, b: f64, kappa: f64, q: f64, measure: f64, u0: f64) -> Option<f64> {
    if !(a > 0.0 && kappa > 1.0 && u0 > 0.0) {
        return None;
    }
    let lead = a * measure * u0.powf(kappa);
    if b != 0.0 && !(kappa > q && lead > b * u0.powf(q)) {
        return None;
    }
    let expo = (kappa - q) / (kappa - 1.0);
    let sink = b * pow_nonneg(u0, q);
    let f = |s: f64| (u0 / (kappa - 1.0)) / (lead - sink * pow_nonneg(s, expo));
    Some(adaptive_simpson(f, 0.0, 1.0, 1e-13))
}

pub fn ode_reduction_oracle(spec: &ProblemSpec, u0_const: f64, horizon: f64) -> Result<OdeOracle, SolverError> {
    let flat = flat_reduction(spec, horizon)?;
    let Flat { a, b, kappa, q, measure, .. } = &flat;
    let rhs = |t: f64, u: f64| a(t) * measure * pow_nonneg(u, *kappa) - b(t) * pow_nonneg(u, *q);
    let trace = integrate_scalar_ode(rhs, 0.0, u0_const, horizon, ODE_TOL, ESCAPE);
    if flat.a_const && flat.b_const {
        let t = quadrature_blowup_time(a(0.0), b(0.0), *kappa, *q, *measure, u0_const);
        return Ok(OdeOracle { trace, blowup_time: t, by_quadrature: true });
    }
    let blowup_time = trace.escaped_at;
    Ok(OdeOracle { trace, blowup_time, by_quadrature: false })
}

/// Oracle values at ascending `times`; `NaN` past an escape.
pub fn ode_oracle_values(spec: &ProblemSpec, u0_const: f64, times: &[f64]) -> Result<Vec<f64>, SolverError> {
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let flat = flat_reduction(spec, horizon)?;
    let Flat { a, b, kappa, q, measure, .. } = &flat;
    let rhs = |t: f64, u: f64| a(t) * measure * pow_nonneg(u, *kappa) - b(t) * pow_nonneg(u, *q);
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut y) = (0.0, u0_const);
    for &target in times {
        if !y.is_finite() {
            out.push(f64::NAN);
            continue;
        }
        if target > t {
            let tr = integrate_scalar_ode(rhs, t, y, target, ODE_TOL, ESCAPE);
            if tr.escaped_at.is_some() {
                y = f64::NAN;
                out.push(f64::NAN);
                continue;
            }
            y = *tr.values.last().unwrap_or(&y);
            t = target;
        }
        out.push(y);
    }
    Ok(out)
}
