//! Explicit comparison functions and the machinery to trust them.
//!
//! A [`Candidate`] is a closed-form (or eigenfunction-based) function of
//! `(x, t)` claimed to be a supersolution, subsolution or exact solution on a
//! time region `[0, region_end]`. [`make_recipe`] builds one from a problem by
//! following the construction of the corresponding existence or blow-up
//! argument, and [`verify_candidate`] checks the defining inequalities at every
//! grid node and sample time:
//!
//! * interior: `v_t − Δv − a v^r ∫v^p + b v^q ≥ 0` (supersolution),
//! * boundary: `v ≥ ∫ k v^l`,
//! * initial: `v(·, 0) ≥ u₀`,
//!
//! with all three reversed for subsolutions.
//!
//! Families built on an analytic profile use exact derivatives and adaptive
//! quadrature for the nonlocal integrals. Families built on a discrete
//! eigenfunction carry nodal values, use the grid Laplacian and grid
//! quadrature, and can only be verified on the grid they were built for.

mod constants;
mod recipes;
mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{laplacian_apply, DomainDescriptor, DomainError, Grid};
use crate::model::{ModelError, TemporalForm};
use crate::numerics::{adaptive_simpson, integrate_scalar_ode, pow_nonneg};
use crate::solver::SolverError;
use crate::spectral::{interpolate, SpectralError};

pub use constants::{const_c_a, const_c_eps, layer_d, layer_s_bar, lower_bound_c1, LowerBound, MIN_HEAT_INF};
pub use recipes::{make_recipe, RecipeOptions};
pub use verify::{check_domination, default_time_grid, verify_candidate, DominationReport, ResidualReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("{family:?} needs {requirement}")]
    Hypothesis { family: Family, requirement: String },
    #[error("empty parameter window: {0}")]
    InfeasibleWindow(String),
    #[error("{family:?}: no admissible parameters after {steps} search steps ({last})")]
    SearchExhausted { family: Family, steps: usize, last: String },
    #[error("candidate carries {expected} nodal values but the grid has {got} nodes")]
    GridMismatch { expected: usize, got: usize },
    #[error("t = {t} lies outside the candidate region [0, {region_end}]")]
    OutsideRegion { t: f64, region_end: f64 },
    #[error("heat-flow lower bound unresolved: inf y = {inf_y:e}")]
    ThinMargin { inf_y: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    EigenQuotient,
    LayerPower,
    TemporalPower,
    LayerLinearPower,
    SelfSimilar,
    EnlargedEigenExp,
    EnlargedEigenF,
    FlatExp,
    EigenExp,
    EigenOde,
    ExactRemark310,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::EigenQuotient,
        Family::LayerPower,
        Family::TemporalPower,
        Family::LayerLinearPower,
        Family::SelfSimilar,
        Family::EnlargedEigenExp,
        Family::EnlargedEigenF,
        Family::FlatExp,
        Family::EigenExp,
        Family::EigenOde,
        Family::ExactRemark310,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Supersolution,
    Subsolution,
    ExactSolution,
}

/// Family parameters. Nodal profiles (`phi`) are already scaled as they
/// enter the candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    /// `η e^{μt} / (φ + ε)`
    EigenQuotient { eta: f64, mu: f64, eps: f64, phi: Vec<f64> },
    /// `[(s+ε)^{−γ} − ω^{−γ}]₊^{β/γ} + A`; `c_bar` and `j_bar` are the
    /// collar constants of the depth-`δ` chart.
    LayerPower { eps: f64, omega: f64, beta: f64, gamma: f64, amp: f64, delta: f64, c_bar: f64, j_bar: f64 },
    /// `β (T − t)₊^{1/(1−q)} + ε`
    TemporalPower { beta: f64, eps: f64, t_star: f64, q: f64 },
    /// `(δ − s − t)₊^γ + ε` on `t ≤ t0`
    LayerLinearPower { delta: f64, eps: f64, gamma: f64, t0: f64 },
    /// `(T − t)^{−γ} (A² − |x − x₀|²/(T − t))₊`; `c_a` is `∫(A² − |z|²)₊^p dz`.
    SelfSimilar { gamma: f64, amp: f64, theta2: f64, t_star: f64, c_a: f64, dim: usize },
    /// `β e^{−λ̃t} φ̃` with `φ̃` the sup-one mode of an enlarged domain.
    EnlargedEigenExp { beta: f64, lambda_t: f64, d: f64, phi: Vec<f64> },
    /// `φ̃ f(t) e^{−∫₀ᵗ b̲}` with
    /// `f = e^{−λ̃t} (B − κN ∫₀ᵗ ā e^{−κ(λ̃τ + ∫₀^τ b̲)} dτ)^{−1/κ}`, `κ = r + p − 1`.
    EnlargedEigenF {
        lambda_t: f64,
        eps: f64,
        d: f64,
        n_const: f64,
        b_const: f64,
        kappa: f64,
        a_sup: f64,
        a_time: TemporalForm,
        b_low: f64,
        b_time: TemporalForm,
        phi: Vec<f64>,
    },
    /// `c e^{−λt}`
    FlatExp { c: f64, lambda: f64 },
    /// `β φ e^{−λt}` with `∫φ = 1`.
    EigenExp { beta: f64, lambda: f64, phi: Vec<f64> },
    /// `φ f(t)` with `sup φ = 1` and `f' = −λf + |Ω| a̲(t) f^{r+p}`.
    EigenOde { f0: f64, lambda: f64, rp: f64, measure: f64, a_low: f64, a_time: TemporalForm, phi: Vec<f64> },
    /// `e^{−ct}`
    ExactRemark310 { rate: f64 },
}

impl Params {
    pub fn family(&self) -> Family {
        match self {
            Params::EigenQuotient { .. } => Family::EigenQuotient,
            Params::LayerPower { .. } => Family::LayerPower,
            Params::TemporalPower { .. } => Family::TemporalPower,
            Params::LayerLinearPower { .. } => Family::LayerLinearPower,
            Params::SelfSimilar { .. } => Family::SelfSimilar,
            Params::EnlargedEigenExp { .. } => Family::EnlargedEigenExp,
            Params::EnlargedEigenF { .. } => Family::EnlargedEigenF,
            Params::FlatExp { .. } => Family::FlatExp,
            Params::EigenExp { .. } => Family::EigenExp,
            Params::EigenOde { .. } => Family::EigenOde,
            Params::ExactRemark310 { .. } => Family::ExactRemark310,
        }
    }

    fn nodal_profile(&self) -> Option<&[f64]> {
        match self {
            Params::EigenQuotient { phi, .. }
            | Params::EnlargedEigenExp { phi, .. }
            | Params::EnlargedEigenF { phi, .. }
            | Params::EigenExp { phi, .. }
            | Params::EigenOde { phi, .. } => Some(phi),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    /// The inequalities are claimed on `[0, region_end]` (open at the end for
    /// the self-similar family).
    pub region_end: f64,
    pub params: Params,
}

/// Value, time derivative and Laplacian at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub v_t: f64,
    pub lap: f64,
}

impl Candidate {
    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn is_nodal(&self) -> bool {
        self.params.nodal_profile().is_some()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<(), CertificateError> {
        match self.params.nodal_profile() {
            Some(phi) if phi.len() != grid.len() => Err(CertificateError::GridMismatch { expected: phi.len(), got: grid.len() }),
            _ => Ok(()),
        }
    }

    fn check_time(&self, t: f64) -> Result<(), CertificateError> {
        let open_end = matches!(self.params, Params::SelfSimilar { .. });
        let beyond = if open_end { t >= self.region_end } else { t > self.region_end * (1.0 + 1e-12) };
        if t < 0.0 || beyond {
            return Err(CertificateError::OutsideRegion { t, region_end: self.region_end });
        }
        Ok(())
    }

    /// Jets at every grid node.
    pub fn jets(&self, grid: &Grid, t: f64) -> Result<Vec<Jet>, CertificateError> {
        self.check_grid(grid)?;
        self.check_time(t)?;
        let desc = &grid.descriptor;
        match &self.params {
            Params::EigenQuotient { eta, mu, eps, phi } => {
                let amp = eta * (mu * t).exp();
                let v: Vec<f64> = phi.iter().map(|p| amp / (p + eps)).collect();
                nodal_jets(grid, v, |v, _| mu * v)
            }
            Params::EnlargedEigenExp { beta, lambda_t, phi, .. } => {
                let amp = beta * (-lambda_t * t).exp();
                nodal_jets(grid, phi.iter().map(|p| amp * p).collect(), |v, _| -lambda_t * v)
            }
            Params::EigenExp { beta, lambda, phi } => {
                let amp = beta * (-lambda * t).exp();
                nodal_jets(grid, phi.iter().map(|p| amp * p).collect(), |v, _| -lambda * v)
            }
            Params::EnlargedEigenF { phi, .. } => {
                let (f, fp) = self.eigen_f(t);
                let (damp, rate) = self.sink_damping(t);
                let v = phi.iter().map(|p| p * f * damp).collect();
                nodal_jets(grid, v, |_, i| phi[i] * damp * (fp - rate * f))
            }
            Params::EigenOde { phi, .. } => {
                let (f, fp) = self.ode_f(t)?;
                nodal_jets(grid, phi.iter().map(|p| p * f).collect(), |_, i| phi[i] * fp)
            }
            _ => grid.nodes.iter().map(|&x| self.point(desc, x, t)).collect(),
        }
    }

    /// Value at an arbitrary point of Ω̄; nodal profiles are interpolated
    /// linearly on `grid`.
    pub fn value_at(&self, grid: &Grid, x: f64, t: f64) -> Result<f64, CertificateError> {
        if let Some(phi) = self.params.nodal_profile() {
            self.check_grid(grid)?;
            self.check_time(t)?;
            let xi = interpolate(&grid.nodes, phi, x);
            return Ok(match &self.params {
                Params::EigenQuotient { eta, mu, eps, .. } => eta * (mu * t).exp() / (xi + eps),
                Params::EnlargedEigenExp { beta, lambda_t, .. } => beta * (-lambda_t * t).exp() * xi,
                Params::EigenExp { beta, lambda, .. } => beta * (-lambda * t).exp() * xi,
                Params::EnlargedEigenF { .. } => xi * self.eigen_f(t).0 * self.sink_damping(t).0,
                Params::EigenOde { .. } => xi * self.ode_f(t)?.0,
                _ => unreachable!("nodal profile families are listed above"),
            });
        }
        self.check_time(t)?;
        Ok(self.point(&grid.descriptor, x, t)?.v)
    }

    /// Nodal values at time `t`.
    pub fn values(&self, grid: &Grid, t: f64) -> Result<Vec<f64>, CertificateError> {
        Ok(self.jets(grid, t)?.into_iter().map(|j| j.v).collect())
    }

    /// `∫_Ω w(y) v(y, t)^e dy`. Nodal families use grid quadrature with
    /// `w` at the nodes; analytic families use adaptive quadrature split at
    /// the profile's kinks.
    pub fn weighted_power_integral(
        &self,
        grid: &Grid,
        t: f64,
        e: f64,
        w: &dyn Fn(f64) -> f64,
    ) -> Result<f64, CertificateError> {
        if self.is_nodal() {
            let v = self.values(grid, t)?;
            return Ok(grid.nodes.iter().zip(&grid.quad_weights).zip(&v).map(|((&x, q), &vi)| q * w(x) * pow_nonneg(vi, e)).sum());
        }
        self.check_time(t)?;
        let desc = grid.descriptor;
        let f = |x: f64| match self.point(&desc, x, t) {
            Ok(j) => w(x) * pow_nonneg(j.v, e),
            Err(_) => f64::NAN,
        };
        let out = profile_integral(&desc, &f, &self.kinks(&desc, t));
        if out.is_finite() {
            Ok(out)
        } else {
            Err(CertificateError::InvalidArgument(format!("{:?} is not integrable at t = {t}", self.family())))
        }
    }

    /// Kink locations in the coordinate, used as quadrature breakpoints.
    fn kinks(&self, desc: &DomainDescriptor, t: f64) -> Vec<f64> {
        let (lo, hi) = desc.coordinate_range();
        let depth = match self.params {
            Params::LayerPower { eps, omega, .. } => Some(omega - eps),
            Params::LayerLinearPower { delta, .. } => Some(delta - t),
            _ => None,
        };
        let mut out = Vec::new();
        if let Some(s) = depth.filter(|s| *s > 0.0) {
            match desc {
                DomainDescriptor::Interval { .. } => out.extend([lo + s, hi - s]),
                DomainDescriptor::Disc { .. } => out.push(hi - s),
            }
        }
        if let Params::SelfSimilar { amp, t_star, .. } = self.params {
            let rho = amp * (t_star - t).max(0.0).sqrt();
            match desc {
                DomainDescriptor::Interval { a, b } => {
                    let c = 0.5 * (a + b);
                    out.extend([c - rho, c + rho]);
                }
                DomainDescriptor::Disc { .. } => out.push(rho),
            }
        }
        out.retain(|x| *x > lo && *x < hi);
        out.sort_by(f64::total_cmp);
        out
    }

    /// Analytic jet for the families that have one.
    fn point(&self, desc: &DomainDescriptor, x: f64, t: f64) -> Result<Jet, CertificateError> {
        let s = desc.distance_to_boundary(x);
        Ok(match self.params {
            Params::LayerPower { eps, omega, beta, gamma, amp, .. } => {
                let z = s + eps;
                if z >= omega {
                    Jet { v: amp, v_t: 0.0, lap: 0.0 }
                } else {
                    let kappa = beta / gamma;
                    let w = z.powf(-gamma) - omega.powf(-gamma);
                    let w1 = -gamma * z.powf(-gamma - 1.0);
                    let w2 = gamma * (gamma + 1.0) * z.powf(-gamma - 2.0);
                    let g = w.powf(kappa);
                    let g1 = kappa * w.powf(kappa - 1.0) * w1;
                    let g2 = kappa * (kappa - 1.0) * w.powf(kappa - 2.0) * w1 * w1 + kappa * w.powf(kappa - 1.0) * w2;
                    Jet { v: g + amp, v_t: 0.0, lap: crate::domain::layer_laplacian(g2, g1, s, desc)? }
                }
            }
            Params::TemporalPower { beta, eps, t_star, q } => {
                let tau = (t_star - t).max(0.0);
                let e = 1.0 / (1.0 - q);
                let v_t = if tau > 0.0 { -beta * e * tau.powf(e - 1.0) } else { 0.0 };
                Jet { v: beta * tau.powf(e) + eps, v_t, lap: 0.0 }
            }
            Params::LayerLinearPower { delta, eps, gamma, .. } => {
                let z = delta - s - t;
                if z <= 0.0 {
                    Jet { v: eps, v_t: 0.0, lap: 0.0 }
                } else {
                    let g1 = -gamma * z.powf(gamma - 1.0);
                    let g2 = gamma * (gamma - 1.0) * z.powf(gamma - 2.0);
                    Jet { v: z.powf(gamma) + eps, v_t: g1, lap: crate::domain::layer_laplacian(g2, g1, s, desc)? }
                }
            }
            Params::SelfSimilar { gamma, amp, t_star, dim, .. } => {
                let tau = t_star - t;
                let xi2 = desc.radius_from_center(x).powi(2) / tau;
                let profile = amp * amp - xi2;
                if profile <= 0.0 {
                    Jet::default()
                } else {
                    let scale = tau.powf(-gamma - 1.0);
                    Jet {
                        v: tau.powf(-gamma) * profile,
                        v_t: scale * (gamma * profile - xi2),
                        lap: -2.0 * dim as f64 * scale,
                    }
                }
            }
            Params::FlatExp { c, lambda } => {
                let v = c * (-lambda * t).exp();
                Jet { v, v_t: -lambda * v, lap: 0.0 }
            }
            Params::ExactRemark310 { rate } => {
                let v = (-rate * t).exp();
                Jet { v, v_t: -rate * v, lap: 0.0 }
            }
            _ => return Err(CertificateError::InvalidArgument(format!("{:?} has no closed-form profile", self.family()))),
        })
    }

    /// `(e^{−∫₀ᵗ b̲}, b̲(t))` for the enlarged-eigenfunction family.
    fn sink_damping(&self, t: f64) -> (f64, f64) {
        match self.params {
            Params::EnlargedEigenF { b_low, b_time, .. } => ((-b_low * b_time.integral(t)).exp(), b_low * b_time.eval(t)),
            _ => (1.0, 0.0),
        }
    }

    /// `f(t)` and `f'(t)` of the enlarged-eigenfunction family.
    fn eigen_f(&self, t: f64) -> (f64, f64) {
        let Params::EnlargedEigenF { lambda_t, n_const, b_const, kappa, a_sup, a_time, b_low, b_time, .. } = self.params else {
            return (f64::NAN, f64::NAN);
        };
        let weight = |tau: f64| a_sup * a_time.eval(tau) * (-kappa * (lambda_t * tau + b_low * b_time.integral(tau))).exp();
        let integral = if t > 0.0 { adaptive_simpson(weight, 0.0, t, 1e-13) } else { 0.0 };
        let base = b_const - kappa * n_const * integral;
        let decay = (-lambda_t * t).exp();
        let f = decay * base.powf(-1.0 / kappa);
        let fp = -lambda_t * f + decay * n_const * weight(t) * base.powf(-1.0 / kappa - 1.0);
        (f, fp)
    }

    /// `f(t)` and `f'(t)` from the scalar equation of the eigen-ODE family.
    fn ode_f(&self, t: f64) -> Result<(f64, f64), CertificateError> {
        let Params::EigenOde { f0, lambda, rp, measure, a_low, a_time, .. } = self.params else {
            return Err(CertificateError::InvalidArgument("not an eigen-ODE candidate".into()));
        };
        let rhs = move |s: f64, f: f64| -lambda * f + measure * a_low * a_time.eval(s) * pow_nonneg(f, rp);
        let f = if t > 0.0 {
            let tr = integrate_scalar_ode(rhs, 0.0, f0, t, 1e-12, 1e12);
            if let Some(te) = tr.escaped_at {
                return Err(CertificateError::OutsideRegion { t: te, region_end: self.region_end });
            }
            *tr.values.last().unwrap_or(&f0)
        } else {
            f0
        };
        Ok((f, rhs(t, f)))
    }
}

fn nodal_jets(grid: &Grid, v: Vec<f64>, v_t: impl Fn(f64, usize) -> f64) -> Result<Vec<Jet>, CertificateError> {
    let lap = laplacian_apply(grid, &v)?;
    Ok(v.iter().zip(lap.iter()).enumerate().map(|(i, (&v, &lap))| Jet { v, v_t: v_t(v, i), lap }).collect())
}

/// `∫_Ω f` for a function of the coordinate (radial on the disc), split at
/// `breaks`. The tolerance is relative to a coarse trapezoid estimate.
fn profile_integral(desc: &DomainDescriptor, f: &dyn Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    let (lo, hi) = desc.coordinate_range();
    let g = |x: f64| match desc {
        DomainDescriptor::Interval { .. } => f(x),
        DomainDescriptor::Disc { .. } => 2.0 * std::f64::consts::PI * x * f(x),
    };
    let mut pts = vec![lo];
    pts.extend_from_slice(breaks);
    pts.push(hi);
    // breakpoints often sit where the profile vanishes, so sample inside too
    let coarse: f64 = pts
        .windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / 64.0;
            (0..=64).map(|k| g(w[0] + k as f64 * h).abs()).sum::<f64>() * h
        })
        .sum();
    let tol = 1e-12 * coarse.max(1e-300) / pts.len() as f64;
    pts.windows(2).map(|w| adaptive_simpson(g, w[0], w[1], tol)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use crate::model::tests::unit;

    #[test]
    fn candidate_json_round_trip() {
        let c = Candidate {
            kind: CandidateKind::Supersolution,
            region_end: 1.0,
            params: Params::FlatExp { c: 2.0, lambda: 3.0 },
        };
        let js = serde_json::to_string(&c).unwrap();
        assert!(js.contains("\"family\":\"flat_exp\""), "{js}");
        let back: Candidate = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.family(), Family::FlatExp);
    }

    #[test]
    fn analytic_integral_of_self_similar_profile() {
        // ∫(T−t)^{−γp}(A² − x²/(T−t))₊^p dx = (T−t)^{1/2 − γp} C(A)
        let g = build_grid(unit(), 101).unwrap();
        let (gamma, amp, t_star, p) = (0.8, 0.3, 0.5, 1.5);
        let c = Candidate {
            kind: CandidateKind::Subsolution,
            region_end: t_star,
            params: Params::SelfSimilar { gamma, amp, theta2: 0.5, t_star, c_a: const_c_a(p, amp, 1).unwrap(), dim: 1 },
        };
        let t = 0.3;
        let got = c.weighted_power_integral(&g, t, p, &|_| 1.0).unwrap();
        let tau: f64 = t_star - t;
        let want = tau.powf(0.5 - gamma * p) * const_c_a(p, amp, 1).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
        assert!(matches!(c.jets(&g, t_star), Err(CertificateError::OutsideRegion { .. })));
    }

    #[test]
    fn layer_power_jet_matches_finite_differences() {
        let c = Candidate {
            kind: CandidateKind::Supersolution,
            region_end: 1.0,
            params: Params::LayerPower {
                eps: 0.01,
                omega: 0.2,
                beta: 1.2,
                gamma: 0.3,
                amp: 1.0,
                delta: 0.25,
                c_bar: 0.0,
                j_bar: 2.0,
            },
        };
        for desc in [unit(), DomainDescriptor::Disc { radius: 1.0 }] {
            let hi = desc.coordinate_range().1;
            let x = hi - 0.05;
            let h = 1e-4;
            let v = |x: f64| c.point(&desc, x, 0.0).unwrap().v;
            let mut fd = (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h);
            if let DomainDescriptor::Disc { .. } = desc {
                fd += (v(x + h) - v(x - h)) / (2.0 * h) / x;
            }
            let lap = c.point(&desc, x, 0.0).unwrap().lap;
            assert!((lap - fd).abs() < 1e-5 * lap.abs(), "{desc:?}: {lap} vs {fd}");
        }
    }
}
