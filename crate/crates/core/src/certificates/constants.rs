//! Scalar constants used by the recipes, and the positivity lower bound
//! obtained from an auxiliary heat problem on a subdomain.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::{build_grid, DomainDescriptor, Field};
use crate::model::{CoefficientDescriptor, Exponents, InitialDatum, KernelDescriptor, ProblemSpec};
use crate::numerics::{adaptive_simpson, smooth_step};
use crate::solver::{solve, SolveControls};

use super::CertificateError;

/// Smallest admissible `inf y` before the bound is declared unresolved.
pub const MIN_HEAT_INF: f64 = 1e-12;

/// `∫_ε^ω s^{−βl} ds` bounded above by its dominant part.
pub fn const_c_eps(beta: f64, l: f64, eps: f64, omega: f64) -> f64 {
    let bl = beta * l;
    if (bl - 1.0).abs() < 1e-12 {
        -eps.ln()
    } else if bl > 1.0 {
        eps.powf(1.0 - bl) / (bl - 1.0)
    } else {
        omega.powf(1.0 - bl) / (1.0 - bl)
    }
}

/// `∫_{|z| ≤ A} (A² − |z|²)^p dz` in one or two dimensions.
pub fn const_c_a(p: f64, amp: f64, dim: usize) -> Result<f64, CertificateError> {
    if !(amp > 0.0) || p < 0.0 {
        return Err(CertificateError::InvalidArgument(format!("C(A) needs A > 0 and p ≥ 0, got A = {amp}, p = {p}")));
    }
    match dim {
        // z = A sin θ turns the integrand into A^{2p+1} cos^{2p+1} θ
        1 => {
            let f = |th: f64| th.cos().max(0.0).powf(2.0 * p + 1.0);
            Ok(amp.powf(2.0 * p + 1.0) * adaptive_simpson(f, -0.5 * PI, 0.5 * PI, 1e-13))
        }
        2 => Ok(PI * amp.powf(2.0 * p + 2.0) / (p + 1.0)),
        _ => Err(CertificateError::InvalidArgument(format!("C(A) is implemented for n ∈ {{1, 2}}, got {dim}"))),
    }
}

/// `D(s) = (s+ε)^{−γ} / [(s+ε)^{−γ} − ω^{−γ}]` on `0 ≤ s < ω − ε`.
pub fn layer_d(s: f64, eps: f64, gamma: f64, omega: f64) -> f64 {
    let w = (s + eps).powf(-gamma);
    w / (w - omega.powf(-gamma))
}

/// Largest `s̄` with `D(s̄) ≤ 1 + ε̄`.
pub fn layer_s_bar(eps_bar: f64, eps: f64, gamma: f64, omega: f64) -> f64 {
    (eps_bar / (1.0 + eps_bar)).powf(1.0 / gamma) * omega - eps
}

/// Output of [`lower_bound_c1`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub c1: f64,
    /// `inf_{Ω₀ × (0, T]} y`
    pub inf_y: f64,
    /// Exponential rate used: `m^q` when `q ≥ 1`, else `m`.
    pub rate: f64,
}

fn strictly_inside(inner: &DomainDescriptor, outer: &DomainDescriptor) -> bool {
    match (*inner, *outer) {
        (DomainDescriptor::Interval { a: a0, b: b0 }, DomainDescriptor::Interval { a: a1, b: b1 }) => a1 < a0 && b0 < b1,
        (DomainDescriptor::Disc { radius: r0 }, DomainDescriptor::Disc { radius: r1 }) => r0 < r1,
        _ => false,
    }
}

/// Cutoff that is 1 on Ω₀ and vanishes outside Ω₁.
fn cutoff(omega0: &DomainDescriptor, omega1: &DomainDescriptor, x: f64) -> f64 {
    match (*omega0, *omega1) {
        (DomainDescriptor::Interval { a: a0, b: b0 }, DomainDescriptor::Interval { a: a1, b: b1 }) => {
            smooth_step((x - a1) / (a0 - a1)) * smooth_step((b1 - x) / (b1 - b0))
        }
        (DomainDescriptor::Disc { radius: r0 }, DomainDescriptor::Disc { radius: r1 }) => smooth_step((r1 - x) / (r1 - r0)),
        _ => 0.0,
    }
}

fn inside(desc: &DomainDescriptor, x: f64) -> bool {
    match *desc {
        DomainDescriptor::Interval { a, b } => a <= x && x <= b,
        DomainDescriptor::Disc { radius } => x <= radius,
    }
}

/// Positivity bound `u ≥ c₁⁻¹`-style constant from the Dirichlet heat flow of
/// a cutoff on Ω₁, observed on Ω₀. `m` bounds `sup u` on the horizon.
#[allow(clippy::too_many_arguments)]
pub fn lower_bound_c1(
    spec: &ProblemSpec,
    omega0: DomainDescriptor,
    omega1: DomainDescriptor,
    c: f64,
    horizon: f64,
    m: f64,
    nodes: usize,
) -> Result<LowerBound, CertificateError> {
    if !strictly_inside(&omega0, &omega1) || !strictly_inside(&omega1, &spec.domain) {
        return Err(CertificateError::InvalidArgument("need Ω₀ ⊂⊂ Ω₁ ⊂⊂ Ω with positive margins".into()));
    }
    if !(horizon > 0.0) || c < 0.0 || m < 0.0 {
        return Err(CertificateError::InvalidArgument(format!("need T > 0, C ≥ 0, m ≥ 0; got T = {horizon}, C = {c}, m = {m}")));
    }
    let grid = build_grid(omega1, nodes)?;
    let chi = Field::from_fn(&grid, |x| cutoff(&omega0, &omega1, x));
    let heat = ProblemSpec {
        exponents: Exponents::from_f64(1.0, 1.0, 1.0, 1.0)?,
        a: CoefficientDescriptor::Constant { c: 0.0 },
        b: CoefficientDescriptor::Constant { c: 0.0 },
        k: KernelDescriptor::Zero,
        u0: InitialDatum::Nodal { values: chi.into_inner() },
        domain: omega1,
    };
    let mut controls = SolveControls::new(horizon);
    controls.record_snapshots = true;
    controls.trace_stride = 1;
    let run = solve(&heat, &grid, &controls)?;
    let inf_y = run
        .snapshots
        .iter()
        .filter(|s| s.t > 0.0)
        .flat_map(|s| grid.nodes.iter().zip(s.u.iter()).filter(|(x, _)| inside(&omega0, **x)).map(|(_, &v)| v))
        .fold(f64::INFINITY, f64::min);
    if !(inf_y >= MIN_HEAT_INF) {
        return Err(CertificateError::ThinMargin { inf_y });
    }
    let q = spec.exponents.q();
    let (rate, c1) = if q >= 1.0 {
        let rate = m.powf(q);
        (rate, c * (rate * horizon).exp() / inf_y)
    } else {
        (m, (c + 1.0) * (m * horizon).exp() / inf_y)
    };
    Ok(LowerBound { c1, inf_y, rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::remark310_spec;
    use proptest::prelude::*;

    #[test]
    fn c_eps_cases() {
        assert!((const_c_eps(2.0, 1.0, 0.1, 0.5) - 10.0).abs() < 1e-12);
        assert!((const_c_eps(1.0, 1.0, (-1.0f64).exp(), 0.5) - 1.0).abs() < 1e-12);
        assert!((const_c_eps(0.5, 1.0, 0.1, 0.8) - 0.8f64.sqrt() / 0.5).abs() < 1e-12);
    }

    #[test]
    fn c_a_values() {
        assert!((const_c_a(1.0, 1.0, 1).unwrap() - 4.0 / 3.0).abs() < 1e-10);
        assert!((const_c_a(0.0, 1.0, 1).unwrap() - 2.0).abs() < 1e-10);
        // polar quadrature: 2π ∫₀¹ (1 − ρ²)² ρ dρ
        let oracle = 2.0 * PI * adaptive_simpson(|r| (1.0 - r * r).powi(2) * r, 0.0, 1.0, 1e-14);
        assert!((const_c_a(2.0, 1.0, 2).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - PI / 3.0).abs() < 1e-12);
        // z ↦ Az scaling
        let scaled = const_c_a(1.5, 3.0, 1).unwrap() / const_c_a(1.5, 1.0, 1).unwrap();
        assert!((scaled - 3f64.powf(4.0)).abs() < 1e-8 * scaled);
        assert!(const_c_a(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn c1_examples() {
        let spec = remark310_spec();
        let o1 = DomainDescriptor::Interval { a: 0.1, b: 0.9 };
        let o0 = DomainDescriptor::Interval { a: 0.3, b: 0.7 };
        let lb = lower_bound_c1(&spec, o0, o1, 1.0, 0.1, 0.0, 161).unwrap();
        assert!(lb.inf_y > 0.0 && lb.inf_y < 1.0, "{lb:?}");
        assert!((lb.c1 - 1.0 / lb.inf_y).abs() < 1e-12);
        assert_eq!(lower_bound_c1(&spec, o0, o1, 0.0, 0.1, 0.0, 161).unwrap().c1, 0.0);
        let twice = lower_bound_c1(&spec, o0, o1, 2.0, 0.1, 0.0, 161).unwrap();
        assert!((twice.c1 - 2.0 * lb.c1).abs() < 1e-12 * twice.c1);
        assert!(lower_bound_c1(&spec, o1, o0, 1.0, 0.1, 0.0, 161).is_err());
    }

    proptest! {
        #[test]
        fn d_is_increasing_and_bounded(
            gamma in 0.05f64..2.0,
            omega in 0.1f64..1.0,
            eps_frac in 0.01f64..0.5,
            eps_bar in 0.01f64..2.0,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let eps = eps_frac * omega;
            let top = omega - eps;
            let (s1, s2) = (a.min(b) * top * 0.999, a.max(b) * top * 0.999);
            if s2 > s1 {
                prop_assert!(layer_d(s2, eps, gamma, omega) > layer_d(s1, eps, gamma, omega));
            }
            let s_bar = layer_s_bar(eps_bar, eps, gamma, omega);
            if s_bar > 0.0 {
                for s in [0.0, 0.5 * s_bar, s_bar] {
                    let d = layer_d(s, eps, gamma, omega);
                    prop_assert!(d >= 1.0 && d <= (1.0 + eps_bar) * (1.0 + 1e-12), "D({s}) = {d}");
                }
            }
        }
    }
}
