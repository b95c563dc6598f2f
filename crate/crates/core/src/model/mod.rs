//! Problem description: exponents, coefficients `a`, `b`, kernel `k`, initial
//! datum `u₀` and the domain, plus the grid-bound view the solver consumes.

mod coefficients;
mod exponents;
pub mod profile;

pub use coefficients::{
    CoefficientDescriptor, FixtureContext, FixtureTag, KernelDescriptor, Role, SeparableLaw, SpatialForm,
    TemporalForm,
};
pub use exponents::{Exponent, Exponents};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainDescriptor, DomainError, Field, Grid};
use crate::numerics::pow_nonneg;
use crate::spectral::{first_eigenpair, Normalization, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("exponent {name} = {value} is not positive; r, p, q, l must be positive constants")]
    NonpositiveExponent { name: &'static str, value: String },
    #[error("exponent {name}: {reason}")]
    BadExponent { name: &'static str, reason: String },
    #[error("coefficient {which} takes the negative value {value}; a, b and k must be nonnegative")]
    NegativeCoefficient { which: &'static str, value: f64 },
    #[error("initial datum is negative ({value}) at node {index}; u₀ must be nonnegative")]
    NegativeInitialDatum { index: usize, value: f64 },
    #[error("nodal initial datum has {got} values for {expected} nodes")]
    NodalLength { expected: usize, got: usize },
    #[error("{0}")]
    FixtureMisuse(String),
    #[error("unknown hypothesis {0:?}")]
    UnknownHypothesis(String),
    #[error("profile horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn sup_one() -> Normalization {
    Normalization::SupOne
}

/// Initial datum `u₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum InitialDatum {
    Constant { c: f64 },
    /// `β φ` with φ the discrete first eigenfunction.
    ScaledEigen {
        beta: f64,
        #[serde(default = "sup_one")]
        normalization: Normalization,
    },
    /// `c ψ` with ψ the closed-form sup-normalized first mode.
    SineMode { c: f64 },
    /// `(A² − |x − x₀|²/T)₊`
    Bump {
        #[serde(rename = "amp")]
        a: f64,
        t: f64,
    },
    Nodal { values: Vec<f64> },
    Scaled { factor: f64, base: Box<InitialDatum> },
}

impl InitialDatum {
    /// Nodal data carry quadrature error into the compatibility check.
    pub fn is_nodal(&self) -> bool {
        match self {
            InitialDatum::Nodal { .. } => true,
            InitialDatum::Scaled { base, .. } => base.is_nodal(),
            _ => false,
        }
    }

    pub fn eval(&self, grid: &Grid) -> Result<Field, ModelError> {
        let desc = grid.descriptor;
        let f = match self {
            InitialDatum::Constant { c } => Field(vec![*c; grid.len()]),
            InitialDatum::ScaledEigen { beta, normalization } => {
                let e = first_eigenpair(grid, *normalization)?;
                e.phi.map(|v| beta * v)
            }
            InitialDatum::SineMode { c } => Field::from_fn(grid, |x| c * desc.analytic_mode(x)),
            InitialDatum::Bump { a, t } => Field::from_fn(grid, |x| {
                let rho = desc.radius_from_center(x);
                (a * a - rho * rho / t).max(0.0)
            }),
            InitialDatum::Nodal { values } => {
                if values.len() != grid.len() {
                    return Err(ModelError::NodalLength { expected: grid.len(), got: values.len() });
                }
                Field(values.clone())
            }
            InitialDatum::Scaled { factor, base } => base.eval(grid)?.map(|v| factor * v),
        };
        if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(ModelError::NegativeInitialDatum { index, value });
        }
        Ok(f)
    }

    pub fn scaled(&self, factor: f64) -> InitialDatum {
        InitialDatum::Scaled { factor, base: Box::new(self.clone()) }
    }
}

/// Complete problem: exponents, coefficients, kernel, initial datum, domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub exponents: Exponents,
    pub a: CoefficientDescriptor,
    pub b: CoefficientDescriptor,
    pub k: KernelDescriptor,
    pub u0: InitialDatum,
    pub domain: DomainDescriptor,
}

impl ProblemSpec {
    /// λ₁ used by fixtures and hypotheses: a fixture override if any, else
    /// the closed-form value for the domain.
    pub fn lambda1(&self) -> f64 {
        [self.a.fixture_tag(), self.b.fixture_tag(), self.k.fixture_tag()]
            .into_iter()
            .flatten()
            .find_map(|t| t.lambda1_override())
            .unwrap_or_else(|| self.domain.analytic_lambda1())
    }

    pub fn fixture_context(&self) -> FixtureContext {
        FixtureContext { exponents: self.exponents, measure: self.domain.measure(), lambda1: self.lambda1() }
    }

    pub fn laws(&self) -> Result<(SeparableLaw, SeparableLaw, SeparableLaw), ModelError> {
        let ctx = self.fixture_context();
        let a = self.a.law(Role::Source, &ctx)?;
        let b = self.b.law(Role::Sink, &ctx)?;
        let k = self.k.law(&ctx)?;
        a.check_nonnegative("a")?;
        b.check_nonnegative("b")?;
        k.check_nonnegative("k")?;
        Ok((a, b, k))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.exponents.validate()?;
        self.domain.validate()?;
        self.laws()?;
        Ok(())
    }

    pub fn with_u0(&self, u0: InitialDatum) -> ProblemSpec {
        ProblemSpec { u0, ..self.clone() }
    }

    /// Closed-form solution when this problem is the exact-solution fixture with
    /// `u₀ ≡ 1`: returns the decay rate `c` of `u = e^{−ct}`.
    pub fn exact_solution_rate(&self) -> Option<f64> {
        let tag = self.a.fixture_tag()?;
        if self.b.fixture_tag()? != tag || self.k.fixture_tag()? != tag {
            return None;
        }
        if self.u0 != (InitialDatum::Constant { c: 1.0 }) {
            return None;
        }
        match tag {
            FixtureTag::Remark310 { sigma, .. } => FixtureTag::remark310_rate(sigma, self.lambda1(), self.exponents.q()).ok(),
            _ => None,
        }
    }
}

/// Sup/inf of a separable law over Ω̄ × [0, T]; temporal factors are
/// monotone so the extremes sit at the endpoints of the time interval.
fn time_extremes(law: &SeparableLaw, horizon: f64) -> (f64, f64) {
    let a = law.temporal.eval(0.0);
    let b = law.temporal.eval(horizon);
    (a.min(b), a.max(b))
}

/// Problem bound to a grid: nodal spatial profiles, quadrature-weighted
/// kernel row, and envelope constants sampled on a 4× refinement.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub grid: Grid,
    pub r: f64,
    pub p: f64,
    pub q: f64,
    pub l: f64,
    pub lambda1: f64,
    pub measure: f64,
    pub a_law: SeparableLaw,
    pub b_law: SeparableLaw,
    pub k_law: SeparableLaw,
    /// `factor · S_a(x_i)`
    pub a_nodal: Vec<f64>,
    pub b_nodal: Vec<f64>,
    /// `factor · W(y_j) · w_j`
    pub k_weighted: Vec<f64>,
    a_range: (f64, f64),
    b_range: (f64, f64),
    k_range: (f64, f64),
    k_mass: f64,
}

impl DiscreteProblem {
    pub fn new(spec: &ProblemSpec, grid: &Grid) -> Result<Self, ModelError> {
        spec.exponents.validate()?;
        let (a_law, b_law, k_law) = spec.laws()?;
        let desc = grid.descriptor;
        let nodal = |law: &SeparableLaw| grid.nodes.iter().map(|&x| law.spatial_at(&desc, x)).collect::<Vec<_>>();
        let fine = grid.refined(4);
        let range = |law: &SeparableLaw| {
            fine.nodes.iter().map(|&x| law.spatial_at(&desc, x)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
        };
        let k_nodal = nodal(&k_law);
        let k_weighted: Vec<f64> = k_nodal.iter().zip(&grid.quad_weights).map(|(k, w)| k * w).collect();
        Ok(DiscreteProblem {
            r: spec.exponents.r(),
            p: spec.exponents.p(),
            q: spec.exponents.q(),
            l: spec.exponents.l(),
            lambda1: spec.lambda1(),
            measure: desc.measure(),
            a_nodal: nodal(&a_law),
            b_nodal: nodal(&b_law),
            k_mass: k_weighted.iter().sum(),
            k_weighted,
            a_range: range(&a_law),
            b_range: range(&b_law),
            k_range: range(&k_law),
            a_law,
            b_law,
            k_law,
            grid: grid.clone(),
        })
    }

    pub fn a_time(&self, t: f64) -> f64 {
        self.a_law.temporal.eval(t)
    }
    pub fn b_time(&self, t: f64) -> f64 {
        self.b_law.temporal.eval(t)
    }
    pub fn k_time(&self, t: f64) -> f64 {
        self.k_law.temporal.eval(t)
    }

    /// ā(t) = sup_Ω a(·, t)
    pub fn a_sup(&self, t: f64) -> f64 {
        self.a_range.1 * self.a_time(t)
    }
    /// a̲(t) = inf_Ω a(·, t)
    pub fn a_inf(&self, t: f64) -> f64 {
        self.a_range.0 * self.a_time(t)
    }
    pub fn b_sup(&self, t: f64) -> f64 {
        self.b_range.1 * self.b_time(t)
    }
    pub fn b_inf(&self, t: f64) -> f64 {
        self.b_range.0 * self.b_time(t)
    }
    /// k̲(t) = inf over ∂Ω × Ω of k(·, ·, t)
    pub fn k_inf(&self, t: f64) -> f64 {
        self.k_range.0 * self.k_time(t)
    }
    pub fn k_sup(&self, t: f64) -> f64 {
        self.k_range.1 * self.k_time(t)
    }
    /// `∫_Ω k(x, y, t) dy` (the same for every boundary point).
    pub fn k_row_integral(&self, t: f64) -> f64 {
        self.k_mass * self.k_time(t)
    }

    /// `∫₀ᵗ b̲` and `∫₀ᵗ b̄` in closed form.
    pub fn b_inf_integral(&self, t: f64) -> f64 {
        self.b_range.0 * self.b_law.temporal.integral(t)
    }
    pub fn b_sup_integral(&self, t: f64) -> f64 {
        self.b_range.1 * self.b_law.temporal.integral(t)
    }

    /// `sup_{Q_T} a`
    pub fn a_sup_horizon(&self, horizon: f64) -> f64 {
        self.a_range.1.max(0.0) * time_extremes(&self.a_law, horizon).1
    }
    /// `sup_{∂Ω×Q_T} k`
    pub fn k_sup_horizon(&self, horizon: f64) -> f64 {
        self.k_range.1.max(0.0) * time_extremes(&self.k_law, horizon).1
    }
    /// `inf_{Q_T} b`
    pub fn b_inf_horizon(&self, horizon: f64) -> f64 {
        self.b_range.0 * time_extremes(&self.b_law, horizon).0
    }
    pub fn b_sup_horizon(&self, horizon: f64) -> f64 {
        self.b_range.1 * time_extremes(&self.b_law, horizon).1
    }

    pub fn kernel_is_zero(&self) -> bool {
        self.k_law.is_zero()
    }

    /// `Σ_j k(·, y_j, t) u_j^l w_j`
    pub fn boundary_integral(&self, u: &[f64], t: f64) -> f64 {
        if self.kernel_is_zero() {
            return 0.0;
        }
        let l = self.l;
        self.k_time(t) * self.k_weighted.iter().zip(u).map(|(k, &v)| k * pow_nonneg(v, l)).sum::<f64>()
    }
}

/// Pointwise coefficient samples at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSample {
    pub a: Field,
    pub b: Field,
    /// `kernel_rows[i][j] = k(x_i, y_j, t)` for the i-th boundary node.
    pub kernel_rows: Vec<Vec<f64>>,
}

pub fn eval_coefficients(spec: &ProblemSpec, grid: &Grid, t: f64) -> Result<CoefficientSample, ModelError> {
    let (a, b, k) = spec.laws()?;
    let desc = grid.descriptor;
    let field = |law: &SeparableLaw| Field::from_fn(grid, |x| law.eval(&desc, x, t));
    let row: Vec<f64> = grid.nodes.iter().map(|&y| k.eval(&desc, y, t)).collect();
    Ok(CoefficientSample { a: field(&a), b: field(&b), kernel_rows: vec![row; grid.boundary_idx.len()] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `max_{x∈∂Ω} |u₀(x) − ∫ k(x, y, 0) u₀(y)^l dy|`.
pub fn check_compatibility(spec: &ProblemSpec, grid: &Grid) -> Result<CompatibilityReport, ModelError> {
    let prob = DiscreteProblem::new(spec, grid)?;
    let u0 = spec.u0.eval(grid)?;
    let g = prob.boundary_integral(&u0, 0.0);
    let residual = grid.boundary_idx.iter().map(|&i| (u0[i] - g).abs()).fold(0.0, f64::max);
    let tolerance = if spec.u0.is_nodal() { 1e-3 } else { 1e-8 };
    Ok(CompatibilityReport { residual, tolerance, passed: residual <= tolerance })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::domain::build_grid;
    use std::f64::consts::PI;

    pub(crate) fn unit() -> DomainDescriptor {
        DomainDescriptor::Interval { a: 0.0, b: 1.0 }
    }

    pub(crate) fn remark310_spec() -> ProblemSpec {
        let tag = FixtureTag::Remark310 { sigma: 1.0, lambda1: None };
        ProblemSpec {
            exponents: Exponents::from_f64(1.0, 1.0, 2.0, 2.0).unwrap(),
            a: CoefficientDescriptor::Fixture { tag },
            b: CoefficientDescriptor::Fixture { tag },
            k: KernelDescriptor::Fixture { tag },
            u0: InitialDatum::Constant { c: 1.0 },
            domain: unit(),
        }
    }

    #[test]
    fn remark310_coefficients_at_zero() {
        let s = remark310_spec();
        let g = build_grid(s.domain, 50).unwrap();
        let c = eval_coefficients(&s, &g, 0.0).unwrap();
        assert!(c.b.iter().all(|v| (v - 2.0 * (PI * PI + 1.0)).abs() < 1e-12));
        assert_eq!(c.kernel_rows.len(), 2);
        assert!((s.exact_solution_rate().unwrap() - (PI * PI + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_and_exp_coefficients() {
        let mut s = remark310_spec();
        s.a = CoefficientDescriptor::Constant { c: 0.0 };
        s.b = CoefficientDescriptor::ExpInTime { c: 1.0, rho: 0.5 };
        s.k = KernelDescriptor::Zero;
        let g = build_grid(s.domain, 20).unwrap();
        let c = eval_coefficients(&s, &g, 2.0).unwrap();
        assert!(c.a.iter().all(|&v| v == 0.0));
        assert!(c.b.iter().all(|&v| (v - 1f64.exp()).abs() < 1e-14));
        assert!(c.kernel_rows.iter().flatten().all(|&v| v == 0.0));
        assert!(s.exact_solution_rate().is_none());
    }

    #[test]
    fn negative_coefficient_rejected() {
        let mut s = remark310_spec();
        s.b = CoefficientDescriptor::Constant { c: -1.0 };
        let g = build_grid(s.domain, 20).unwrap();
        assert!(matches!(eval_coefficients(&s, &g, 0.0), Err(ModelError::NegativeCoefficient { which: "b", .. })));
    }

    #[test]
    fn compatibility_cases() {
        let g = build_grid(unit(), 101).unwrap();
        let s = remark310_spec();
        let rep = check_compatibility(&s, &g).unwrap();
        assert!(rep.residual <= 1e-10 && rep.passed);

        let mut heat = s.clone();
        heat.a = CoefficientDescriptor::Constant { c: 0.0 };
        heat.b = CoefficientDescriptor::Constant { c: 0.0 };
        heat.k = KernelDescriptor::Zero;
        heat.u0 = InitialDatum::SineMode { c: 1.0 };
        assert!(check_compatibility(&heat, &g).unwrap().residual < 1e-15);

        let mut mean = heat.clone();
        mean.exponents = Exponents::from_f64(1.0, 1.0, 2.0, 1.0).unwrap();
        mean.k = KernelDescriptor::UniformConstant { k0: 1.0 };
        mean.u0 = InitialDatum::Constant { c: 3.0 };
        assert!(check_compatibility(&mean, &g).unwrap().residual < 1e-13);

        mean.u0 = InitialDatum::Constant { c: 0.0 };
        mean.k = KernelDescriptor::UniformConstant { k0: 2.0 };
        assert!(check_compatibility(&mean, &g).unwrap().passed);
        mean.u0 = InitialDatum::Constant { c: 1.0 };
        assert!(!check_compatibility(&mean, &g).unwrap().passed);
    }

    #[test]
    fn initial_data_forms() {
        let g = build_grid(DomainDescriptor::Interval { a: -1.0, b: 1.0 }, 21).unwrap();
        let bump = InitialDatum::Bump { a: 1.0, t: 0.25 }.eval(&g).unwrap();
        assert!((bump[10] - 1.0).abs() < 1e-15);
        assert_eq!(bump[0], 0.0);
        let eig = InitialDatum::ScaledEigen { beta: 0.5, normalization: Normalization::SupOne }.eval(&g).unwrap();
        assert!((eig.sup_norm() - 0.5).abs() < 1e-12);
        let sc = InitialDatum::Constant { c: 2.0 }.scaled(1.5).eval(&g).unwrap();
        assert!(sc.iter().all(|&v| v == 3.0));
        assert!(InitialDatum::Nodal { values: vec![1.0; 3] }.eval(&g).is_err());
        assert!(InitialDatum::Constant { c: -1.0 }.eval(&g).is_err());
    }

    #[test]
    fn envelopes_and_time_integrals() {
        let mut s = remark310_spec();
        s.a = CoefficientDescriptor::SeparableProduct {
            spatial: SpatialForm::AffineBump { base: 1.0, amp: 1.0 },
            temporal: TemporalForm::Exp { rho: -1.0 },
        };
        s.b = CoefficientDescriptor::ExpInTime { c: 2.0, rho: 1.0 };
        s.k = KernelDescriptor::UniformConstant { k0: 0.5 };
        let g = build_grid(unit(), 41).unwrap();
        let d = DiscreteProblem::new(&s, &g).unwrap();
        assert!((d.a_sup(0.0) - 2.0).abs() < 1e-12);
        assert!((d.a_inf(1.0) - (-1f64).exp()).abs() < 1e-12);
        assert!((d.b_inf_integral(1.0) - 2.0 * (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!((d.k_row_integral(3.0) - 0.5).abs() < 1e-12);
        assert!((d.a_sup_horizon(5.0) - 2.0).abs() < 1e-12);
        assert!((d.b_inf_horizon(5.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spec_json_round_trip() {
        let s = remark310_spec();
        let text = serde_json::to_string(&s).unwrap();
        let back: ProblemSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn coefficients_continuous_in_time() {
        let s = remark310_spec();
        let g = build_grid(unit(), 16).unwrap();
        let c0 = eval_coefficients(&s, &g, 0.3).unwrap();
        let c1 = eval_coefficients(&s, &g, 0.3 + 1e-9).unwrap();
        let diff = c0.a.iter().zip(c1.a.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6 * c0.a.sup_norm());
    }
}
