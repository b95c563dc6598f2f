//! First Dirichlet eigenpair of −Δ by inverse power iteration.
//!
//! The interior operator is tridiagonal on both domain kinds (radial reduction
//! on the disc), so every inverse application is a Thomas solve against a
//! factorization computed once.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{build_grid, DomainDescriptor, DomainError, Field, Grid};
use crate::numerics::bisect;

const MAX_ITERATIONS: usize = 20_000;
const REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("inverse iteration did not converge after {iterations} iterations (last relative change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("enlargement margin must be positive, got {0}")]
    NonpositiveMargin(f64),
    #[error("no enlargement puts the first eigenvalue inside ({lo}, {hi}); λ₁ = {lambda1}")]
    EmptyWindow { lo: f64, hi: f64, lambda1: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `∫φ = 1` over the domain the eigenproblem lives on.
    IntegralOne,
    /// `sup φ = 1`.
    SupOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda1: f64,
    pub phi: Field,
    pub normalization: Normalization,
    pub iterations: usize,
}

impl EigenPair {
    /// Same eigenfunction rescaled to another normalization on `grid`.
    pub fn renormalized(&self, grid: &Grid, normalization: Normalization) -> EigenPair {
        let mut phi = self.phi.clone();
        normalize(grid, &mut phi, normalization);
        EigenPair { lambda1: self.lambda1, phi, normalization, iterations: self.iterations }
    }
}

/// Eigenpair of an enlarged domain Ω̃ ⊃⊃ Ω sampled on Ω's nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargedEigenPair {
    /// `lambda1` is λ̃ and `phi` is φ̃ restricted to Ω's nodes; the
    /// normalization refers to Ω̃.
    pub pair: EigenPair,
    pub margin: f64,
    pub enlarged: DomainDescriptor,
    pub sup_enlarged: f64,
    pub inf_on_omega: f64,
    /// `sup_Ω̃ φ̃ / inf_Ω φ̃`.
    pub d: f64,
}

/// Tridiagonal rows `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1]` of −Δ on
/// the unknown nodes, together with the node indices they refer to.
fn interior_operator(grid: &Grid) -> (Vec<usize>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let unknowns: Vec<usize> = grid.interior_idx.clone();
    let m = unknowns.len();
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    match grid.descriptor {
        DomainDescriptor::Interval { .. } => {
            for k in 0..m {
                lower[k] = -inv_h2;
                diag[k] = 2.0 * inv_h2;
                upper[k] = -inv_h2;
            }
        }
        DomainDescriptor::Disc { .. } => {
            diag[0] = 4.0 * inv_h2;
            upper[0] = -4.0 * inv_h2;
            for k in 1..m {
                let drift = 0.5 * grid.h / grid.nodes[unknowns[k]];
                lower[k] = -(1.0 - drift) * inv_h2;
                diag[k] = 2.0 * inv_h2;
                upper[k] = -(1.0 + drift) * inv_h2;
            }
        }
    }
    (unknowns, lower, diag, upper)
}

/// LU factors of a tridiagonal matrix for repeated Thomas solves.
struct Thomas {
    lower: Vec<f64>,
    upper: Vec<f64>,
    pivots: Vec<f64>,
}

impl Thomas {
    fn factor(lower: Vec<f64>, diag: &[f64], upper: Vec<f64>) -> Self {
        let m = diag.len();
        let mut pivots = vec![0.0; m];
        pivots[0] = diag[0];
        for i in 1..m {
            pivots[i] = diag[i] - lower[i] * upper[i - 1] / pivots[i - 1];
        }
        Thomas { lower, upper, pivots }
    }

    fn solve(&self, rhs: &[f64], out: &mut [f64]) {
        let m = rhs.len();
        out[0] = rhs[0];
        for i in 1..m {
            out[i] = rhs[i] - self.lower[i] * out[i - 1] / self.pivots[i - 1];
        }
        out[m - 1] /= self.pivots[m - 1];
        for i in (0..m - 1).rev() {
            out[i] = (out[i] - self.upper[i] * out[i + 1]) / self.pivots[i];
        }
    }
}

fn normalize(grid: &Grid, phi: &mut Field, normalization: Normalization) {
    let scale = match normalization {
        Normalization::IntegralOne => grid.quadrature(phi),
        Normalization::SupOne => phi.sup_norm(),
    };
    for v in phi.iter_mut() {
        *v /= scale;
    }
}

/// Smallest eigenvalue of the discrete Dirichlet −Δ and its positive
/// eigenvector, extended by zero to the boundary nodes.
pub fn first_eigenpair(grid: &Grid, normalization: Normalization) -> Result<EigenPair, SpectralError> {
    let (unknowns, lower, diag, upper) = interior_operator(grid);
    let m = unknowns.len();
    let thomas = Thomas::factor(lower, &diag, upper);
    let mut x = vec![1.0; m];
    let mut y = vec![0.0; m];
    let mut lambda = f64::NAN;
    let mut last_change = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        thomas.solve(&x, &mut y);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let estimate = xx / xy;
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut vec_change = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(&y) {
            let next = yi / ynorm;
            vec_change = vec_change.max((next - *xi).abs());
            *xi = next;
        }
        last_change = ((estimate - lambda) / estimate).abs();
        lambda = estimate;
        if last_change < REL_TOL && vec_change < 1e-11 {
            let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            let mut phi = Field::zeros(grid.len());
            for (k, &i) in unknowns.iter().enumerate() {
                phi[i] = sign * x[k];
            }
            normalize(grid, &mut phi, normalization);
            return Ok(EigenPair { lambda1: lambda, phi, normalization, iterations: it });
        }
    }
    Err(SpectralError::NoConvergence { iterations: MAX_ITERATIONS, last_change })
}

/// Rayleigh quotient `−⟨Δφ, φ⟩ / ⟨φ, φ⟩` with nodal (unit) weights on the
/// unknown nodes. For an exact discrete eigenvector this equals λ.
pub fn rayleigh_quotient(grid: &Grid, phi: &[f64]) -> f64 {
    let lap = crate::domain::laplacian_apply(grid, phi).expect("matching lengths");
    let num: f64 = grid.interior_idx.iter().map(|&i| -lap[i] * phi[i]).sum();
    let den: f64 = grid.interior_idx.iter().map(|&i| phi[i] * phi[i]).sum();
    num / den
}

/// Linear interpolation of nodal values `(xs, ys)` at `x`; `xs` ascending.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let h = xs[1] - xs[0];
    let k = (((x - xs[0]) / h).floor() as usize).min(n - 2);
    let w = (x - xs[k]) / h;
    ys[k] * (1.0 - w) + ys[k + 1] * w
}

/// Eigenpair of Ω̃ (Ω enlarged by `margin` on every side), resolved on a grid
/// about twice as fine as `grid` and interpolated to Ω's nodes.
pub fn enlarged_eigenpair(
    grid: &Grid,
    margin: f64,
    normalization: Normalization,
) -> Result<EnlargedEigenPair, SpectralError> {
    if !(margin > 0.0) {
        return Err(SpectralError::NonpositiveMargin(margin));
    }
    let enlarged = grid.descriptor.enlarged(margin);
    let (lo, hi) = enlarged.coordinate_range();
    let count = (((hi - lo) / (0.5 * grid.h)).ceil() as usize + 1).max(16);
    let big = build_grid(enlarged, count)?;
    let pair = first_eigenpair(&big, normalization)?;
    let sup_enlarged = pair.phi.sup_norm();
    let phi: Field = grid.nodes.iter().map(|&x| interpolate(&big.nodes, &pair.phi, x)).collect();
    let inf_on_omega = phi.min();
    Ok(EnlargedEigenPair {
        d: sup_enlarged / inf_on_omega,
        pair: EigenPair { lambda1: pair.lambda1, phi, normalization, iterations: pair.iterations },
        margin,
        enlarged,
        sup_enlarged,
        inf_on_omega,
    })
}

/// Enlargement whose first eigenvalue falls at `lo + fraction·(hi − lo)`,
/// with the margin found by bisection on the closed-form eigenvalue and then
/// confirmed on the discrete operator.
pub fn enlarged_for_window(
    grid: &Grid,
    lo: f64,
    hi: f64,
    fraction: f64,
    normalization: Normalization,
) -> Result<EnlargedEigenPair, SpectralError> {
    let desc = grid.descriptor;
    let lambda1 = desc.analytic_lambda1();
    let hi = hi.min(lambda1);
    if !(lo < hi) || lo < 0.0 {
        return Err(SpectralError::EmptyWindow { lo, hi, lambda1 });
    }
    let target = lo + fraction.clamp(0.05, 0.95) * (hi - lo);
    let scale = desc.inradius();
    let mut upper = scale;
    while desc.enlarged(upper).analytic_lambda1() > target {
        upper *= 2.0;
        if upper > 1e6 * scale {
            return Err(SpectralError::EmptyWindow { lo, hi, lambda1 });
        }
    }
    let margin = bisect(|m| desc.enlarged(m).analytic_lambda1() - target, 1e-12 * scale, upper, 200)
        .ok_or(SpectralError::EmptyWindow { lo, hi, lambda1 })?;
    let out = enlarged_eigenpair(grid, margin, normalization)?;
    if !(out.pair.lambda1 > lo && out.pair.lambda1 < hi) {
        return Err(SpectralError::EmptyWindow { lo, hi, lambda1 });
    }
    Ok(out)
}

/// Eigenpair of Ω enlarged by `extra` whole node spacings on every side.
/// Ω's nodes are nodes of the enlarged grid and the stencils agree there, so
/// the discrete Laplacian of the restricted `φ̃` equals `−λ̃ φ̃` on Ω's
/// interior nodes up to rounding.
pub fn aligned_enlarged_eigenpair(
    grid: &Grid,
    extra: usize,
    normalization: Normalization,
) -> Result<EnlargedEigenPair, SpectralError> {
    if extra == 0 {
        return Err(SpectralError::NonpositiveMargin(0.0));
    }
    let margin = extra as f64 * grid.h;
    let enlarged = grid.descriptor.enlarged(margin);
    let n = grid.len();
    let (count, offset) = match grid.descriptor {
        DomainDescriptor::Interval { .. } => (n + 2 * extra, extra),
        DomainDescriptor::Disc { .. } => (n + extra, 0),
    };
    let big = build_grid(enlarged, count)?;
    let pair = first_eigenpair(&big, normalization)?;
    let sup_enlarged = pair.phi.sup_norm();
    let phi: Field = pair.phi[offset..offset + n].iter().copied().collect();
    let inf_on_omega = phi.min();
    Ok(EnlargedEigenPair {
        d: sup_enlarged / inf_on_omega,
        pair: EigenPair { lambda1: pair.lambda1, phi, normalization, iterations: pair.iterations },
        margin,
        enlarged,
        sup_enlarged,
        inf_on_omega,
    })
}

/// Node-aligned enlargement with `λ̃ ∈ (lo, hi)` closest to
/// `lo + fraction·(hi − lo)`; `hi` is capped by the grid's own `λ₁`.
pub fn aligned_for_window(
    grid: &Grid,
    lo: f64,
    hi: f64,
    fraction: f64,
    normalization: Normalization,
) -> Result<EnlargedEigenPair, SpectralError> {
    let lambda_h = first_eigenpair(grid, Normalization::SupOne)?.lambda1;
    let hi = hi.min(lambda_h);
    if !(lo < hi) {
        return Err(SpectralError::EmptyWindow { lo, hi, lambda1: lambda_h });
    }
    let target = lo + fraction.clamp(0.05, 0.95) * (hi - lo);
    let desc = grid.descriptor;
    // closed-form guess, then walk on the discrete eigenvalue
    let guess = if target > 0.0 {
        let mut upper = desc.inradius();
        while desc.enlarged(upper).analytic_lambda1() > target && upper < 1e6 {
            upper *= 2.0;
        }
        bisect(|m| desc.enlarged(m).analytic_lambda1() - target, 0.0, upper, 200).unwrap_or(upper)
    } else {
        desc.inradius()
    };
    // λ̃ decreases with the number of added nodes: walk to the pair
    // bracketing the target and keep whichever admissible one is closer
    let eval = |m: usize| aligned_enlarged_eigenpair(grid, m, normalization);
    let mut m = ((guess / grid.h).round() as usize).max(1);
    let mut cur = eval(m)?;
    let (above, below) = if cur.pair.lambda1 > target {
        loop {
            let next = eval(m + 1)?;
            if next.pair.lambda1 <= target || m > 100_000 {
                break (Some(cur), next);
            }
            m += 1;
            cur = next;
        }
    } else {
        loop {
            if m == 1 {
                break (None, cur);
            }
            let prev = eval(m - 1)?;
            if prev.pair.lambda1 > target {
                break (Some(prev), cur);
            }
            m -= 1;
            cur = prev;
        }
    };
    let admissible = |e: &EnlargedEigenPair| e.pair.lambda1 > lo && e.pair.lambda1 < hi;
    let mut options: Vec<EnlargedEigenPair> = above.into_iter().chain(std::iter::once(below)).filter(admissible).collect();
    options.sort_by(|x, y| (x.pair.lambda1 - target).abs().total_cmp(&(y.pair.lambda1 - target).abs()));
    options.into_iter().next().ok_or(SpectralError::EmptyWindow { lo, hi, lambda1: lambda_h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::integrate;
    use crate::numerics::BESSEL_J0_FIRST_ZERO;
    use std::f64::consts::PI;

    fn interval(n: usize) -> Grid {
        build_grid(DomainDescriptor::Interval { a: 0.0, b: 1.0 }, n).unwrap()
    }

    #[test]
    fn interval_eigenvalue() {
        let e = first_eigenpair(&interval(400), Normalization::SupOne).unwrap();
        assert!(((e.lambda1 - PI * PI) / (PI * PI)).abs() < 1e-4, "{}", e.lambda1);
        assert!((e.phi.sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integral_normalization_peak() {
        let g = interval(400);
        let e = first_eigenpair(&g, Normalization::IntegralOne).unwrap();
        assert!((integrate(&g, &e.phi).unwrap() - 1.0).abs() < 1e-10);
        assert!((e.phi.sup_norm() - PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn disc_eigenvalue() {
        let g = build_grid(DomainDescriptor::Disc { radius: 1.0 }, 400).unwrap();
        let e = first_eigenpair(&g, Normalization::SupOne).unwrap();
        let exact = BESSEL_J0_FIRST_ZERO.powi(2);
        assert!(((e.lambda1 - 5.7832) / 5.7832).abs() < 1e-3);
        assert!(((e.lambda1 - exact) / exact).abs() < 1e-4);
        assert!((e.phi[0] - 1.0).abs() < 1e-6, "peak at the centre");
    }

    #[test]
    fn positivity_and_boundary_values() {
        for g in [interval(64), build_grid(DomainDescriptor::Disc { radius: 2.0 }, 64).unwrap()] {
            let e = first_eigenpair(&g, Normalization::IntegralOne).unwrap();
            for &i in &g.interior_idx {
                assert!(e.phi[i] > 0.0);
            }
            for &i in &g.boundary_idx {
                assert_eq!(e.phi[i], 0.0);
            }
            // outward one-sided derivative at the last boundary node
            let n = g.len();
            assert!((e.phi[n - 1] - e.phi[n - 2]) / g.h <= 0.0);
        }
    }

    #[test]
    fn residual_and_rayleigh() {
        for g in [interval(200), build_grid(DomainDescriptor::Disc { radius: 1.0 }, 200).unwrap()] {
            let e = first_eigenpair(&g, Normalization::SupOne).unwrap();
            let lap = crate::domain::laplacian_apply(&g, &e.phi).unwrap();
            let res = g.interior_idx.iter().map(|&i| (lap[i] + e.lambda1 * e.phi[i]).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-8 * e.lambda1, "{res}");
            let rq = rayleigh_quotient(&g, &e.phi);
            assert!(((rq - e.lambda1) / e.lambda1).abs() < 1e-8);
        }
    }

    #[test]
    fn second_order_refinement() {
        let l = |n: usize| first_eigenpair(&interval(n), Normalization::SupOne).unwrap().lambda1;
        let (a, b, c) = (l(41), l(81), l(161));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn enlarged_interval() {
        let g = interval(200);
        let e = enlarged_eigenpair(&g, 0.25, Normalization::SupOne).unwrap();
        assert!((e.pair.lambda1 - (PI / 1.5).powi(2)).abs() < 1e-3);
        assert!(e.inf_on_omega > 0.0);
        assert!(e.pair.lambda1 < PI * PI);
        assert!((e.sup_enlarged - 1.0).abs() < 1e-12);
        assert!(e.d >= 1.0);
        assert!(enlarged_eigenpair(&g, 0.0, Normalization::SupOne).is_err());
    }

    #[test]
    fn window_search() {
        let g = interval(100);
        let e = enlarged_for_window(&g, 5.0, 8.0, 0.5, Normalization::SupOne).unwrap();
        assert!(e.pair.lambda1 > 5.0 && e.pair.lambda1 < 8.0);
        assert!(enlarged_for_window(&g, 12.0, 20.0, 0.5, Normalization::SupOne).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_affine() {
        let xs = crate::numerics::linspace(0.0, 2.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((interpolate(&xs, &ys, 1.37) - (3.0 * 1.37 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn aligned_enlargement_is_exact_on_omega() {
        let g = interval(81);
        let e = aligned_enlarged_eigenpair(&g, 10, Normalization::SupOne).unwrap();
        let lap = crate::domain::laplacian_apply(&g, &e.pair.phi).unwrap();
        for &i in &g.interior_idx {
            assert!((lap[i] + e.pair.lambda1 * e.pair.phi[i]).abs() < 1e-9, "{i}");
        }
        assert!(e.inf_on_omega > 0.0 && (e.sup_enlarged - 1.0).abs() < 1e-12);
        let exact = (PI / 1.25).powi(2);
        assert!((e.pair.lambda1 - exact).abs() / exact < 1e-3);
        let d = build_grid(DomainDescriptor::Disc { radius: 1.0 }, 81).unwrap();
        let e = aligned_enlarged_eigenpair(&d, 8, Normalization::SupOne).unwrap();
        let lap = crate::domain::laplacian_apply(&d, &e.pair.phi).unwrap();
        for &i in &d.interior_idx {
            assert!((lap[i] + e.pair.lambda1 * e.pair.phi[i]).abs() < 1e-8, "{i}");
        }
    }

    #[test]
    fn aligned_window() {
        let g = interval(101);
        let lam = PI * PI;
        let e = aligned_for_window(&g, 0.5 * lam, lam, 0.5, Normalization::SupOne).unwrap();
        assert!(e.pair.lambda1 > 0.5 * lam && e.pair.lambda1 < lam);
        assert!((e.pair.lambda1 - 0.75 * lam).abs() < 0.05 * lam, "{}", e.pair.lambda1);
        assert!(aligned_for_window(&g, lam - 1e-6, lam, 0.5, Normalization::SupOne).is_err());
    }
}
