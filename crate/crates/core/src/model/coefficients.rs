//! Closed coefficient language. Every coefficient, kernel and fixture reduces
//! to a separable law `factor · S(x) · T(t)` with `T > 0`, which keeps
//! envelopes (`sup_x`, `inf_x`) and time integrals analytic.

use serde::{Deserialize, Serialize};

use crate::domain::DomainDescriptor;

use super::exponents::Exponents;
use super::ModelError;

fn one() -> f64 {
    1.0
}

/// Time factor `T(t)`, always positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalForm {
    #[default]
    Constant,
    /// `e^{ρt}`
    Exp { rho: f64 },
    /// `(1 + t)^α`
    Power { alpha: f64 },
}

impl TemporalForm {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TemporalForm::Constant => 1.0,
            TemporalForm::Exp { rho } => (rho * t).exp(),
            TemporalForm::Power { alpha } => (1.0 + t).powf(alpha),
        }
    }

    /// `∫₀ᵗ T(τ) dτ` in closed form.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            TemporalForm::Constant => t,
            TemporalForm::Exp { rho } if rho.abs() < 1e-14 => t,
            TemporalForm::Exp { rho } => (rho * t).exp_m1() / rho,
            TemporalForm::Power { alpha } if (alpha + 1.0).abs() < 1e-14 => t.ln_1p(),
            TemporalForm::Power { alpha } => ((1.0 + t).powf(alpha + 1.0) - 1.0) / (alpha + 1.0),
        }
    }

    /// `T'(t) / T(t)`.
    pub fn log_rate(&self, t: f64) -> f64 {
        match *self {
            TemporalForm::Constant => 0.0,
            TemporalForm::Exp { rho } => rho,
            TemporalForm::Power { alpha } => alpha / (1.0 + t),
        }
    }
}

/// Spatial factor `S(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialForm {
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// Tent `base + amp·(1 − |x − x₀|/ρ)₊`, peaked at the centre `x₀` and
    /// reaching `base` on ∂Ω (ρ is the inradius).
    AffineBump { base: f64, amp: f64 },
    /// `c · ψ(x)^power` with ψ the sup-normalized closed-form first mode.
    EigenPower {
        #[serde(default = "one")]
        c: f64,
        power: f64,
    },
}

impl Default for SpatialForm {
    fn default() -> Self {
        SpatialForm::Constant { c: 1.0 }
    }
}

impl SpatialForm {
    pub fn eval(&self, desc: &DomainDescriptor, x: f64) -> f64 {
        match *self {
            SpatialForm::Constant { c } => c,
            SpatialForm::AffineBump { base, amp } => {
                let z = desc.radius_from_center(x) / desc.inradius();
                base + amp * (1.0 - z).max(0.0)
            }
            SpatialForm::EigenPower { c, power } => {
                let m = desc.analytic_mode(x);
                if power == 0.0 {
                    c
                } else {
                    c * m.powf(power)
                }
            }
        }
    }

    /// Exact infimum over Ω̄.
    pub fn inf(&self) -> f64 {
        match *self {
            SpatialForm::Constant { c } => c,
            SpatialForm::AffineBump { base, amp } => base.min(base + amp),
            SpatialForm::EigenPower { c, power } if power == 0.0 => c,
            SpatialForm::EigenPower { c, .. } => c.min(0.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            SpatialForm::Constant { .. } => true,
            SpatialForm::AffineBump { amp, .. } => amp == 0.0,
            SpatialForm::EigenPower { c, power } => power == 0.0 || c == 0.0,
        }
    }

    fn scaled(&self, f: f64) -> SpatialForm {
        match *self {
            SpatialForm::Constant { c } => SpatialForm::Constant { c: c * f },
            SpatialForm::AffineBump { base, amp } => SpatialForm::AffineBump { base: base * f, amp: amp * f },
            SpatialForm::EigenPower { c, power } => SpatialForm::EigenPower { c: c * f, power },
        }
    }
}

/// `factor · S(x) · T(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableLaw {
    pub factor: f64,
    pub spatial: SpatialForm,
    pub temporal: TemporalForm,
}

impl SeparableLaw {
    pub fn zero() -> Self {
        SeparableLaw { factor: 0.0, spatial: SpatialForm::default(), temporal: TemporalForm::Constant }
    }

    pub fn constant(c: f64) -> Self {
        SeparableLaw { factor: c, spatial: SpatialForm::default(), temporal: TemporalForm::Constant }
    }

    pub fn exp(c: f64, rho: f64) -> Self {
        SeparableLaw { factor: c, spatial: SpatialForm::default(), temporal: TemporalForm::Exp { rho } }
    }

    pub fn eval(&self, desc: &DomainDescriptor, x: f64, t: f64) -> f64 {
        self.spatial_at(desc, x) * self.temporal.eval(t)
    }

    /// `factor · S(x)`.
    pub fn spatial_at(&self, desc: &DomainDescriptor, x: f64) -> f64 {
        if self.factor == 0.0 {
            0.0
        } else {
            self.factor * self.spatial.eval(desc, x)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.factor == 0.0
    }

    pub fn is_spatially_constant(&self) -> bool {
        self.is_zero() || self.spatial.is_constant()
    }

    pub fn check_nonnegative(&self, which: &'static str) -> Result<(), ModelError> {
        let inf = match self.factor {
            f if f > 0.0 => f * self.spatial.inf(),
            f if f < 0.0 => f * self.spatial.eval_sup_bound(),
            _ => 0.0,
        };
        if inf < 0.0 || !self.factor.is_finite() {
            return Err(ModelError::NegativeCoefficient { which, value: inf });
        }
        Ok(())
    }
}

impl SpatialForm {
    /// Crude upper bound on `S`, used only to sign-check negative factors.
    fn eval_sup_bound(&self) -> f64 {
        match *self {
            SpatialForm::Constant { c } => c,
            SpatialForm::AffineBump { base, amp } => base.max(base + amp),
            SpatialForm::EigenPower { c, .. } => c.max(0.0),
        }
    }
}

/// Which coefficient a fixture is asked to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Sink,
    Kernel,
}

/// Closed-form coefficient families used as test fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum FixtureTag {
    /// `a ≡ 0`, `b = b₀ e^{λ₁(q−1)t}`, `k = k₀ e^{λ₁(l−1)t}`.
    Remark36 {
        b: f64,
        k: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda1: Option<f64>,
    },
    /// Coefficients for which `e^{−ct}`, `c = λ₁ + σ/(q−1)`, solves the
    /// problem exactly with `u₀ ≡ 1`.
    Remark310 {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda1: Option<f64>,
    },
    /// `a = a₀ e^{λ₁(r+p−1)t}`, `b = B a₀ e^{(λ₁(r+p−1)−ω)t}`, so that
    /// `b = B a e^{−ωt}` exactly; the kernel is supplied separately.
    #[serde(rename = "remark311family")]
    Remark311Family {
        a0: f64,
        b_coef: f64,
        omega: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda1: Option<f64>,
    },
}

impl FixtureTag {
    pub fn lambda1_override(&self) -> Option<f64> {
        match *self {
            FixtureTag::Remark36 { lambda1, .. }
            | FixtureTag::Remark310 { lambda1, .. }
            | FixtureTag::Remark311Family { lambda1, .. } => lambda1,
        }
    }

    /// Decay rate `c = λ₁ + σ/(q−1)` of the exact solution.
    pub fn remark310_rate(sigma: f64, lambda1: f64, q: f64) -> Result<f64, ModelError> {
        if q == 1.0 {
            return Err(ModelError::FixtureMisuse("the exact-solution fixture needs q ≠ 1".into()));
        }
        Ok(lambda1 + sigma / (q - 1.0))
    }

    pub fn law(&self, role: Role, ctx: &FixtureContext) -> Result<SeparableLaw, ModelError> {
        let (r, p, q, l) = (ctx.exponents.r(), ctx.exponents.p(), ctx.exponents.q(), ctx.exponents.l());
        let lam = self.lambda1_override().unwrap_or(ctx.lambda1);
        let m = ctx.measure;
        Ok(match (*self, role) {
            (FixtureTag::Remark36 { .. }, Role::Source) => SeparableLaw::zero(),
            (FixtureTag::Remark36 { b, .. }, Role::Sink) => SeparableLaw::exp(b, lam * (q - 1.0)),
            (FixtureTag::Remark36 { k, .. }, Role::Kernel) => SeparableLaw::exp(k, lam * (l - 1.0)),
            (FixtureTag::Remark310 { sigma, .. }, role) => {
                let c = Self::remark310_rate(sigma, lam, q)?;
                match role {
                    Role::Source => SeparableLaw::exp(c / m, (r + p - 1.0) * c),
                    Role::Sink => SeparableLaw::exp(2.0 * c, (q - 1.0) * c),
                    Role::Kernel => SeparableLaw::exp(1.0 / m, (l - 1.0) * c),
                }
            }
            (FixtureTag::Remark311Family { a0, .. }, Role::Source) => SeparableLaw::exp(a0, lam * (r + p - 1.0)),
            (FixtureTag::Remark311Family { a0, b_coef, omega, .. }, Role::Sink) => {
                SeparableLaw::exp(b_coef * a0, lam * (r + p - 1.0) - omega)
            }
            (FixtureTag::Remark311Family { .. }, Role::Kernel) => {
                return Err(ModelError::FixtureMisuse(
                    "the remark311family fixture defines a and b only; give the kernel explicitly".into(),
                ))
            }
        })
    }
}

/// What a fixture needs to know about the problem it is embedded in.
#[derive(Debug, Clone, Copy)]
pub struct FixtureContext {
    pub exponents: Exponents,
    pub measure: f64,
    pub lambda1: f64,
}

/// Source `a(x,t)` or sink `b(x,t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CoefficientDescriptor {
    Constant { c: f64 },
    /// `c · e^{ρt}`
    ExpInTime { c: f64, rho: f64 },
    SeparableProduct {
        #[serde(default)]
        spatial: SpatialForm,
        #[serde(default)]
        temporal: TemporalForm,
    },
    Fixture { tag: FixtureTag },
}

impl CoefficientDescriptor {
    pub fn law(&self, role: Role, ctx: &FixtureContext) -> Result<SeparableLaw, ModelError> {
        Ok(match *self {
            CoefficientDescriptor::Constant { c } => SeparableLaw::constant(c),
            CoefficientDescriptor::ExpInTime { c, rho } => SeparableLaw::exp(c, rho),
            CoefficientDescriptor::SeparableProduct { spatial, temporal } => {
                SeparableLaw { factor: 1.0, spatial, temporal }
            }
            CoefficientDescriptor::Fixture { tag } => tag.law(role, ctx)?,
        })
    }

    /// Same form multiplied by `f`; fixtures have no free amplitude.
    pub fn scaled(&self, f: f64) -> Result<CoefficientDescriptor, ModelError> {
        Ok(match *self {
            CoefficientDescriptor::Constant { c } => CoefficientDescriptor::Constant { c: c * f },
            CoefficientDescriptor::ExpInTime { c, rho } => CoefficientDescriptor::ExpInTime { c: c * f, rho },
            CoefficientDescriptor::SeparableProduct { spatial, temporal } => {
                CoefficientDescriptor::SeparableProduct { spatial: spatial.scaled(f), temporal }
            }
            CoefficientDescriptor::Fixture { .. } => {
                return Err(ModelError::FixtureMisuse("fixture coefficients cannot be rescaled".into()))
            }
        })
    }

    pub fn fixture_tag(&self) -> Option<FixtureTag> {
        match *self {
            CoefficientDescriptor::Fixture { tag } => Some(tag),
            _ => None,
        }
    }
}

/// Boundary kernel `k(x, y, t)`. All forms are independent of the boundary
/// point `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum KernelDescriptor {
    Zero,
    /// `k ≡ k₀`
    UniformConstant { k0: f64 },
    /// `c · T(t) · w(y)`
    SeparableTime {
        #[serde(default = "one")]
        c: f64,
        #[serde(default)]
        temporal: TemporalForm,
        #[serde(default)]
        weight: SpatialForm,
    },
    Fixture { tag: FixtureTag },
}

impl KernelDescriptor {
    pub fn law(&self, ctx: &FixtureContext) -> Result<SeparableLaw, ModelError> {
        Ok(match *self {
            KernelDescriptor::Zero => SeparableLaw::zero(),
            KernelDescriptor::UniformConstant { k0 } => SeparableLaw::constant(k0),
            KernelDescriptor::SeparableTime { c, temporal, weight } => SeparableLaw { factor: c, spatial: weight, temporal },
            KernelDescriptor::Fixture { tag } => tag.law(Role::Kernel, ctx)?,
        })
    }

    pub fn scaled(&self, f: f64) -> Result<KernelDescriptor, ModelError> {
        Ok(match *self {
            KernelDescriptor::Zero => KernelDescriptor::Zero,
            KernelDescriptor::UniformConstant { k0 } => KernelDescriptor::UniformConstant { k0: k0 * f },
            KernelDescriptor::SeparableTime { c, temporal, weight } => {
                KernelDescriptor::SeparableTime { c: c * f, temporal, weight }
            }
            KernelDescriptor::Fixture { .. } => {
                return Err(ModelError::FixtureMisuse("fixture kernels cannot be rescaled".into()))
            }
        })
    }

    pub fn fixture_tag(&self) -> Option<FixtureTag> {
        match *self {
            KernelDescriptor::Fixture { tag } => Some(tag),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ctx(r: f64, p: f64, q: f64, l: f64) -> FixtureContext {
        FixtureContext { exponents: Exponents::from_f64(r, p, q, l).unwrap(), measure: 1.0, lambda1: PI * PI }
    }

    #[test]
    fn temporal_integrals() {
        let t = 0.7;
        for form in [TemporalForm::Constant, TemporalForm::Exp { rho: -1.3 }, TemporalForm::Power { alpha: 2.5 }, TemporalForm::Power { alpha: -1.0 }] {
            let num = crate::numerics::adaptive_simpson(|s| form.eval(s), 0.0, t, 1e-13);
            assert!((form.integral(t) - num).abs() < 1e-11, "{form:?}");
        }
    }

    #[test]
    fn remark310_sink_at_zero() {
        let c = ctx(1.0, 1.0, 2.0, 2.0);
        let tag = FixtureTag::Remark310 { sigma: 1.0, lambda1: None };
        let b = tag.law(Role::Sink, &c).unwrap();
        let d = DomainDescriptor::Interval { a: 0.0, b: 1.0 };
        assert!((b.eval(&d, 0.3, 0.0) - 2.0 * (PI * PI + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn remark310_source_identity() {
        // a(t) e^{−(r+p−1)ct} = c/|Ω| for every t
        for (r, p, q, sigma) in [(1.0, 1.0, 2.0, 1.0), (0.5, 2.0, 3.0, 0.3), (2.0, 0.25, 1.5, 4.0)] {
            let cx = ctx(r, p, q, 2.0);
            let tag = FixtureTag::Remark310 { sigma, lambda1: None };
            let a = tag.law(Role::Source, &cx).unwrap();
            let d = DomainDescriptor::Interval { a: 0.0, b: 1.0 };
            let c = PI * PI + sigma / (q - 1.0);
            for t in [0.0, 0.1, 0.5, 1.0] {
                let lhs = a.eval(&d, 0.5, t) * (-(r + p - 1.0) * c * t).exp();
                let rhs = (PI * PI * (q - 1.0) + sigma) / (q - 1.0);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{lhs} {rhs}");
            }
        }
    }

    #[test]
    fn remark310_rejects_q_one() {
        let tag = FixtureTag::Remark310 { sigma: 1.0, lambda1: None };
        assert!(tag.law(Role::Sink, &ctx(1.0, 1.0, 1.0, 2.0)).is_err());
    }

    #[test]
    fn family_sink_matches_source() {
        let cx = ctx(1.0, 1.0, 1.5, 2.0);
        let tag = FixtureTag::Remark311Family { a0: 2.0, b_coef: 3.0, omega: 0.7, lambda1: None };
        let a = tag.law(Role::Source, &cx).unwrap();
        let b = tag.law(Role::Sink, &cx).unwrap();
        let d = DomainDescriptor::Interval { a: 0.0, b: 1.0 };
        for t in [0.0, 0.4, 2.0] {
            let want = 3.0 * a.eval(&d, 0.2, t) * (-0.7 * t).exp();
            assert!((b.eval(&d, 0.2, t) - want).abs() <= 1e-12 * want);
        }
        assert!(tag.law(Role::Kernel, &cx).is_err());
    }

    #[test]
    fn spatial_forms() {
        let d = DomainDescriptor::Interval { a: 0.0, b: 2.0 };
        let bump = SpatialForm::AffineBump { base: 1.0, amp: 2.0 };
        assert_eq!(bump.eval(&d, 1.0), 3.0);
        assert_eq!(bump.eval(&d, 0.0), 1.0);
        let e = SpatialForm::EigenPower { c: 1.0, power: 2.0 };
        assert!((e.eval(&d, 0.5) - 0.5).abs() < 1e-15);
        assert!(SeparableLaw { factor: 1.0, spatial: SpatialForm::AffineBump { base: 1.0, amp: -2.0 }, temporal: TemporalForm::Constant }
            .check_nonnegative("a")
            .is_err());
        assert!(SeparableLaw::constant(-1.0).check_nonnegative("b").is_err());
        assert!(SeparableLaw::constant(0.0).check_nonnegative("b").is_ok());
    }

    #[test]
    fn descriptors_parse() {
        let c: CoefficientDescriptor = serde_json::from_str(r#"{"form":"exp_in_time","c":1,"rho":2}"#).unwrap();
        assert_eq!(c, CoefficientDescriptor::ExpInTime { c: 1.0, rho: 2.0 });
        let f: CoefficientDescriptor =
            serde_json::from_str(r#"{"form":"fixture","tag":{"tag":"remark310","sigma":1}}"#).unwrap();
        assert!(matches!(f, CoefficientDescriptor::Fixture { tag: FixtureTag::Remark310 { .. } }));
        let s: CoefficientDescriptor = serde_json::from_str(
            r#"{"form":"separable_product","spatial":{"kind":"eigen_power","power":1},"temporal":{"kind":"power","alpha":-0.5}}"#,
        )
        .unwrap();
        assert!(matches!(s, CoefficientDescriptor::SeparableProduct { .. }));
        let k: KernelDescriptor = serde_json::from_str(r#"{"form":"uniform_constant","k0":0.5}"#).unwrap();
        assert_eq!(k, KernelDescriptor::UniformConstant { k0: 0.5 });
        let z: KernelDescriptor = serde_json::from_str(r#"{"form":"zero"}"#).unwrap();
        assert_eq!(z, KernelDescriptor::Zero);
        let fam: FixtureTag =
            serde_json::from_str(r#"{"tag":"remark311family","a0":1,"b_coef":2,"omega":0.5}"#).unwrap();
        assert!(matches!(fam, FixtureTag::Remark311Family { .. }));
    }
}
