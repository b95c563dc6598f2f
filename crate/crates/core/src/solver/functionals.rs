use crate::domain::Grid;
use crate::model::{DiscreteProblem, ProblemSpec};
use crate::numerics::pow_nonneg;
use crate::spectral::{EigenPair, Normalization};

use super::{SolveResult, SolverError, State};

pub(crate) fn j_unchecked(grid: &Grid, state: &State, eig: &EigenPair) -> f64 {
    let m: f64 = grid.quad_weights.iter().zip(state.u.iter()).zip(eig.phi.iter()).map(|((w, u), p)| w * u * p).sum();
    (eig.lambda1 * state.t).exp() * m
}

pub(crate) fn i_unchecked(prob: &DiscreteProblem, state: &State, eig: &EigenPair) -> f64 {
    let grid = &prob.grid;
    let u = &state.u;
    let ip: f64 = grid.quad_weights.iter().zip(u.iter()).map(|(w, &v)| w * pow_nonneg(v, prob.p)).sum();
    let a_lo = prob.a_inf(state.t);
    let b_hi = prob.b_sup(state.t);
    grid.quad_weights
        .iter()
        .zip(u.iter())
        .zip(eig.phi.iter())
        .map(|((w, &v), phi)| w * phi * (0.5 * a_lo * pow_nonneg(v, prob.r) * ip - b_hi * pow_nonneg(v, prob.q)))
        .sum()
}

/// `J(t) = e^{λ₁t} ∫ u φ` with `∫ φ = 1`.
pub fn functional_j(grid: &Grid, state: &State, eig: &EigenPair) -> Result<f64, SolverError> {
    if eig.normalization != Normalization::IntegralOne {
        return Err(SolverError::NormalizationMismatch { expected: Normalization::IntegralOne, got: eig.normalization });
    }
    Ok(j_unchecked(grid, state, eig))
}

/// `I(t) = ∫ {½ a̲(t) u^r ∫u^p − b̄(t) u^q} φ`.
pub fn functional_i(state: &State, spec: &ProblemSpec, grid: &Grid, eig: &EigenPair) -> Result<f64, SolverError> {
    let prob = DiscreteProblem::new(spec, grid)?;
    Ok(i_unchecked(&prob, state, eig))
}

/// Largest `d` with `u ≥ d φ e^{−λ₁t}` over recorded snapshots at `t ≥ t0`
/// and nodes where `φ > 0`.
pub fn fit_lower_bound_d(result: &SolveResult, eig: &EigenPair, t0: f64) -> Result<f64, SolverError> {
    let snaps: Vec<&State> = result.snapshots.iter().filter(|s| s.t >= t0).collect();
    if snaps.is_empty() {
        return Err(SolverError::NoSnapshots(t0));
    }
    let mut d = f64::INFINITY;
    for s in snaps {
        let decay = (-eig.lambda1 * s.t).exp();
        for (u, phi) in s.u.iter().zip(eig.phi.iter()) {
            if *phi > 0.0 {
                d = d.min(u / (phi * decay));
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, Field};
    use crate::model::tests::unit;
    use crate::model::{CoefficientDescriptor, Exponents, InitialDatum, KernelDescriptor};
    use crate::solver::Outcome;
    use crate::spectral::first_eigenpair;
    use std::f64::consts::PI;

    fn state(t: f64, u: Field) -> State {
        State { t, u, last_dt: 0.0 }
    }

    #[test]
    fn j_examples() {
        let g = build_grid(unit(), 401).unwrap();
        let eig = first_eigenpair(&g, Normalization::IntegralOne).unwrap();
        let one = Field(vec![1.0; g.len()]);
        assert!((functional_j(&g, &state(0.0, one), &eig).unwrap() - 1.0).abs() < 1e-12);
        let jj = functional_j(&g, &state(0.0, eig.phi.clone()), &eig).unwrap();
        assert!((jj - PI * PI / 8.0).abs() < 1e-3, "{jj}");
        let later = eig.phi.map(|v| v * (-eig.lambda1 * 0.7).exp());
        assert!((functional_j(&g, &state(0.7, later), &eig).unwrap() - jj).abs() < 1e-12);
        let sup = eig.renormalized(&g, Normalization::SupOne);
        assert!(matches!(
            functional_j(&g, &state(0.0, sup.phi.clone()), &sup),
            Err(SolverError::NormalizationMismatch { .. })
        ));
    }

    #[test]
    fn i_examples() {
        let g = build_grid(unit(), 101).unwrap();
        let eig = first_eigenpair(&g, Normalization::IntegralOne).unwrap();
        let spec = ProblemSpec {
            exponents: Exponents::from_f64(1.0, 1.0, 1.0, 1.0).unwrap(),
            a: CoefficientDescriptor::Constant { c: 2.0 },
            b: CoefficientDescriptor::Constant { c: 1.0 },
            k: KernelDescriptor::Zero,
            u0: InitialDatum::Constant { c: 1.0 },
            domain: unit(),
        };
        let zero = Field::zeros(g.len());
        assert_eq!(functional_i(&state(0.0, zero), &spec, &g, &eig).unwrap(), 0.0);
        let one = Field(vec![1.0; g.len()]);
        assert!(functional_i(&state(0.0, one), &spec, &g, &eig).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lower_bound_examples() {
        let g = build_grid(unit(), 101).unwrap();
        let eig = first_eigenpair(&g, Normalization::IntegralOne).unwrap();
        let snaps: Vec<State> = [0.0, 0.1, 0.5]
            .iter()
            .map(|&t| state(t, eig.phi.map(|v| 2.0 * v * (-eig.lambda1 * t).exp())))
            .collect();
        let res = SolveResult {
            outcome: Outcome::Completed,
            traces: vec![],
            final_state: snaps[2].clone(),
            snapshots: snaps,
            steps: 0,
            lambda1: eig.lambda1,
            time_shift_estimate: 0.0,
        };
        assert!((fit_lower_bound_d(&res, &eig, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(fit_lower_bound_d(&res, &eig, 1.0), Err(SolverError::NoSnapshots(_))));
    }
}
