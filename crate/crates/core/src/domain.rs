//! Spatial discretization on 1D intervals and radially symmetric 2D discs.
//!
//! Both domains reduce to a uniform 1D node set: the physical coordinate `x`
//! on an interval, the radius `r ∈ [0, R]` on a disc. Quadrature weights carry
//! the true measure of Ω (trapezoid rule, times `2πr` on the disc), so
//! `integrate` returns genuine domain integrals in both cases.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{bessel_j0, BESSEL_J0_FIRST_ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("grid needs at least 8 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("domain has nonpositive extent: {0}")]
    NonpositiveExtent(String),
    #[error("field length {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("boundary-layer chart breaks down at s = {s} (disc radius {radius})")]
    ChartBreakdown { s: f64, radius: f64 },
}

/// Physical domain Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainDescriptor {
    Interval { a: f64, b: f64 },
    /// Disc of the given radius centred at the origin; data are radial.
    Disc { radius: f64 },
}

impl DomainDescriptor {
    pub fn validate(&self) -> Result<(), DomainError> {
        match *self {
            DomainDescriptor::Interval { a, b } if !(a < b) || !a.is_finite() || !b.is_finite() => {
                Err(DomainError::NonpositiveExtent(format!("interval ({a}, {b})")))
            }
            DomainDescriptor::Disc { radius } if !(radius > 0.0) || !radius.is_finite() => {
                Err(DomainError::NonpositiveExtent(format!("disc radius {radius}")))
            }
            _ => Ok(()),
        }
    }

    /// Spatial dimension n of Ω.
    pub fn dim(&self) -> usize {
        match self {
            DomainDescriptor::Interval { .. } => 1,
            DomainDescriptor::Disc { .. } => 2,
        }
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        match *self {
            DomainDescriptor::Interval { a, b } => b - a,
            DomainDescriptor::Disc { radius } => PI * radius * radius,
        }
    }

    /// Extent of the node coordinate: `[a, b]` or `[0, R]`.
    pub fn coordinate_range(&self) -> (f64, f64) {
        match *self {
            DomainDescriptor::Interval { a, b } => (a, b),
            DomainDescriptor::Disc { radius } => (0.0, radius),
        }
    }

    /// Distance |x − x₀| from the domain centre (interval midpoint or disc origin).
    pub fn radius_from_center(&self, x: f64) -> f64 {
        match *self {
            DomainDescriptor::Interval { a, b } => (x - 0.5 * (a + b)).abs(),
            DomainDescriptor::Disc { .. } => x.abs(),
        }
    }

    /// Largest ball around the centre contained in Ω.
    pub fn inradius(&self) -> f64 {
        match *self {
            DomainDescriptor::Interval { a, b } => 0.5 * (b - a),
            DomainDescriptor::Disc { radius } => radius,
        }
    }

    /// Inward distance `s` from the boundary.
    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        match *self {
            DomainDescriptor::Interval { a, b } => (x - a).min(b - x).max(0.0),
            DomainDescriptor::Disc { radius } => (radius - x).max(0.0),
        }
    }

    /// Sum of principal-curvature drift terms `Σ H_j/(1 − s H_j)` at depth `s`.
    pub fn curvature_drift(&self, s: f64) -> Result<f64, DomainError> {
        match *self {
            DomainDescriptor::Interval { .. } => Ok(0.0),
            DomainDescriptor::Disc { radius } => {
                if s >= radius || s < 0.0 {
                    Err(DomainError::ChartBreakdown { s, radius })
                } else {
                    Ok(1.0 / (radius - s))
                }
            }
        }
    }

    /// Bound `c̄` on the curvature drift over the collar `0 ≤ s ≤ delta`.
    pub fn curvature_bound(&self, delta: f64) -> Result<f64, DomainError> {
        self.curvature_drift(delta)
    }

    /// `J̄ = sup_s ∫_∂Ω |J(ȳ, s)| dȳ` for the collar chart. On an interval the
    /// boundary is two points with unit Jacobian; on a disc the Jacobian is
    /// `1 − s/R` against arc length, maximal at `s = 0`.
    pub fn jacobian_bound(&self) -> f64 {
        match *self {
            DomainDescriptor::Interval { .. } => 2.0,
            DomainDescriptor::Disc { radius } => 2.0 * PI * radius,
        }
    }

    /// First Dirichlet eigenvalue of −Δ in closed form.
    pub fn analytic_lambda1(&self) -> f64 {
        match *self {
            DomainDescriptor::Interval { a, b } => (PI / (b - a)).powi(2),
            DomainDescriptor::Disc { radius } => (BESSEL_J0_FIRST_ZERO / radius).powi(2),
        }
    }

    /// First Dirichlet eigenfunction in closed form, normalized to sup = 1.
    pub fn analytic_mode(&self, x: f64) -> f64 {
        match *self {
            DomainDescriptor::Interval { a, b } => (PI * (x - a) / (b - a)).sin().max(0.0),
            DomainDescriptor::Disc { radius } => bessel_j0(BESSEL_J0_FIRST_ZERO * x / radius).max(0.0),
        }
    }

    /// Domain enlarged by `margin` on every side.
    pub fn enlarged(&self, margin: f64) -> DomainDescriptor {
        match *self {
            DomainDescriptor::Interval { a, b } => DomainDescriptor::Interval { a: a - margin, b: b + margin },
            DomainDescriptor::Disc { radius } => DomainDescriptor::Disc { radius: radius + margin },
        }
    }
}

/// Nodal values on a [`Grid`], in node order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Field(grid.nodes.iter().map(|&x| f(x)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

impl FromIterator<f64> for Field {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Field(iter.into_iter().collect())
    }
}

/// Uniform node set with quadrature weights and a boundary/interior split.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub descriptor: DomainDescriptor,
    pub nodes: Vec<f64>,
    pub h: f64,
    pub quad_weights: Vec<f64>,
    pub boundary_idx: Vec<usize>,
    pub interior_idx: Vec<usize>,
}

/// Uniform grid with `n` nodes. Intervals get trapezoid weights; discs get the
/// polar measure `2π r_i` times trapezoid weights in `r` (exact for the area).
pub fn build_grid(descriptor: DomainDescriptor, n: usize) -> Result<Grid, DomainError> {
    descriptor.validate()?;
    if n < 8 {
        return Err(DomainError::TooFewNodes(n));
    }
    let (lo, hi) = descriptor.coordinate_range();
    let h = (hi - lo) / (n - 1) as f64;
    let nodes = crate::numerics::linspace(lo, hi, n);
    let trap = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let (quad_weights, boundary_idx, interior_idx) = match descriptor {
        DomainDescriptor::Interval { .. } => {
            let w = (0..n).map(trap).collect();
            (w, vec![0, n - 1], (1..n - 1).collect())
        }
        DomainDescriptor::Disc { .. } => {
            let w = (0..n).map(|i| 2.0 * PI * nodes[i] * trap(i)).collect();
            (w, vec![n - 1], (0..n - 1).collect())
        }
    };
    Ok(Grid { descriptor, nodes, h, quad_weights, boundary_idx, interior_idx })
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary_idx.contains(&i)
    }

    /// Grid over the same domain with `factor` times as many intervals; every
    /// original node is also a node of the refinement.
    pub fn refined(&self, factor: usize) -> Grid {
        build_grid(self.descriptor, factor.max(1) * (self.len() - 1) + 1).expect("refinement of a valid grid")
    }

    fn check_len(&self, f: &[f64]) -> Result<(), DomainError> {
        if f.len() != self.len() {
            return Err(DomainError::LengthMismatch { expected: self.len(), got: f.len() });
        }
        Ok(())
    }

    /// Quadrature `Σ w_i f_i` without the length check (hot path).
    #[inline]
    pub fn quadrature(&self, f: &[f64]) -> f64 {
        self.quad_weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

/// `∫_Ω f dy` by the grid quadrature.
pub fn integrate(grid: &Grid, f: &[f64]) -> Result<f64, DomainError> {
    grid.check_len(f)?;
    Ok(grid.quadrature(f))
}

/// Discrete Laplacian at interior nodes; boundary entries of the result are 0.
///
/// Interval: the three-point stencil. Disc: the conservative radial form of
/// `u_rr + u_r / r`, with `Δu(0) ≈ 4(u₁ − u₀)/h²` at the centre.
pub fn laplacian_apply(grid: &Grid, u: &[f64]) -> Result<Field, DomainError> {
    grid.check_len(u)?;
    let mut out = vec![0.0; u.len()];
    laplacian_into(grid, u, &mut out);
    Ok(Field(out))
}

pub(crate) fn laplacian_into(grid: &Grid, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let inv_h2 = 1.0 / (grid.h * grid.h);
    match grid.descriptor {
        DomainDescriptor::Interval { .. } => {
            out[0] = 0.0;
            out[n - 1] = 0.0;
            for i in 1..n - 1 {
                out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
            }
        }
        DomainDescriptor::Disc { .. } => {
            out[0] = 4.0 * (u[1] - u[0]) * inv_h2;
            for i in 1..n - 1 {
                let r = grid.nodes[i];
                let drift = 0.5 * grid.h / r;
                out[i] = ((1.0 + drift) * (u[i + 1] - u[i]) - (1.0 - drift) * (u[i] - u[i - 1])) * inv_h2;
            }
            out[n - 1] = 0.0;
        }
    }
}

/// Laplacian of a function of the boundary distance `s` alone:
/// `g_ss − Σ_j H_j/(1 − s H_j) g_s`.
pub fn layer_laplacian(g_ss: f64, g_s: f64, s: f64, descriptor: &DomainDescriptor) -> Result<f64, DomainError> {
    Ok(g_ss - descriptor.curvature_drift(s)? * g_s)
}

/// Central-difference gradient magnitude at every node (one-sided at the ends,
/// zero at the disc centre by symmetry).
pub fn gradient_magnitude(grid: &Grid, u: &[f64]) -> Field {
    let n = u.len();
    let h = grid.h;
    (0..n)
        .map(|i| {
            if i == 0 {
                match grid.descriptor {
                    DomainDescriptor::Disc { .. } => 0.0,
                    DomainDescriptor::Interval { .. } => ((u[1] - u[0]) / h).abs(),
                }
            } else if i == n - 1 {
                ((u[n - 1] - u[n - 2]) / h).abs()
            } else {
                ((u[i + 1] - u[i - 1]) / (2.0 * h)).abs()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DomainDescriptor {
        DomainDescriptor::Interval { a: 0.0, b: 1.0 }
    }

    #[test]
    fn five_node_trapezoid() {
        // n = 5 is below the production minimum; check the weights on n = 9
        // and the node layout on the coarsened index set.
        let g = build_grid(unit(), 9).unwrap();
        assert_eq!(g.nodes[2], 0.25);
        assert_eq!(g.quad_weights[0], 0.0625);
        assert_eq!(g.quad_weights[1], 0.125);
        assert_eq!(g.boundary_idx, vec![0, 8]);
        assert_eq!(g.interior_idx.len(), 7);
    }

    #[test]
    fn rejects_small_and_degenerate() {
        assert_eq!(build_grid(unit(), 5), Err(DomainError::TooFewNodes(5)));
        assert!(matches!(
            build_grid(DomainDescriptor::Interval { a: 1.0, b: 1.0 }, 10),
            Err(DomainError::NonpositiveExtent(_))
        ));
        assert!(matches!(
            build_grid(DomainDescriptor::Disc { radius: -1.0 }, 10),
            Err(DomainError::NonpositiveExtent(_))
        ));
    }

    #[test]
    fn weights_sum_to_measure() {
        for n in [8, 13, 100, 401] {
            let g = build_grid(unit(), n).unwrap();
            assert!((g.quad_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let g = build_grid(DomainDescriptor::Disc { radius: 1.0 }, 101).unwrap();
        assert!((g.quad_weights.iter().sum::<f64>() - PI).abs() < 1e-3);
    }

    #[test]
    fn integrate_sine_and_constant() {
        let g = build_grid(unit(), 400).unwrap();
        let one = vec![1.0; g.len()];
        assert!((integrate(&g, &one).unwrap() - 1.0).abs() < 1e-12);
        let s = Field::from_fn(&g, |x| (PI * x).sin());
        assert!((integrate(&g, &s).unwrap() - 2.0 / PI).abs() < 1e-5);
        assert!(matches!(integrate(&g, &[1.0, 2.0]), Err(DomainError::LengthMismatch { .. })));
    }

    #[test]
    fn laplacian_of_quadratic_and_sine() {
        let g = build_grid(unit(), 41).unwrap();
        let u = Field::from_fn(&g, |x| x * (1.0 - x));
        let lap = laplacian_apply(&g, &u).unwrap();
        for &i in &g.interior_idx {
            assert!((lap[i] + 2.0).abs() < 1e-9, "{}", lap[i]);
        }
        let g = build_grid(unit(), 400).unwrap();
        let u = Field::from_fn(&g, |x| (PI * x).sin());
        let lap = laplacian_apply(&g, &u).unwrap();
        for &i in &g.interior_idx {
            let exact = -PI * PI * u[i];
            assert!((lap[i] - exact).abs() <= 1e-3 * PI * PI * u[i].abs().max(1e-300) + 1e-12);
        }
        let c = vec![3.5; g.len()];
        assert!(laplacian_apply(&g, &c).unwrap().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn layer_laplacian_curvature() {
        let d = DomainDescriptor::Disc { radius: 1.0 };
        // g = s², s = 0.25: g_ss = 2, g_s = 0.5
        let v = layer_laplacian(2.0, 0.5, 0.25, &d).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(layer_laplacian(2.0, 7.0, 0.3, &unit()).unwrap(), 2.0);
        assert!(layer_laplacian(2.0, 0.5, 1.0, &d).is_err());
    }

    #[test]
    fn layer_laplacian_agrees_with_radial_stencil() {
        // g(s) = cos(π s / 2) with s = R − r; compare at mid-radius nodes.
        let d = DomainDescriptor::Disc { radius: 1.0 };
        let g = build_grid(d, 2001).unwrap();
        let f = |s: f64| (0.5 * PI * s).cos();
        let u = Field::from_fn(&g, |r| f(1.0 - r));
        let lap = laplacian_apply(&g, &u).unwrap();
        for i in (200..1800).step_by(97) {
            let s = 1.0 - g.nodes[i];
            let g_s = -0.5 * PI * (0.5 * PI * s).sin();
            let g_ss = -0.25 * PI * PI * (0.5 * PI * s).cos();
            let exact = layer_laplacian(g_ss, g_s, s, &d).unwrap();
            assert!((lap[i] - exact).abs() < 1e-6 * exact.abs().max(1.0), "i={i}: {} vs {exact}", lap[i]);
        }
    }

    #[test]
    fn disc_centre_closure() {
        // u = r² has Δu = 4 everywhere in 2D.
        let g = build_grid(DomainDescriptor::Disc { radius: 1.0 }, 51).unwrap();
        let u = Field::from_fn(&g, |r| r * r);
        let lap = laplacian_apply(&g, &u).unwrap();
        for &i in &g.interior_idx {
            assert!((lap[i] - 4.0).abs() < 1e-9, "i={i}: {}", lap[i]);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn affine_integrands_are_exact(a in -3.0f64..3.0, len in 0.1f64..5.0, c0 in -10.0f64..10.0, c1 in -10.0f64..10.0, n in 8usize..300) {
                let d = DomainDescriptor::Interval { a, b: a + len };
                let g = build_grid(d, n).unwrap();
                let f = Field::from_fn(&g, |x| c0 + c1 * x);
                let exact = c0 * len + 0.5 * c1 * ((a + len).powi(2) - a * a);
                prop_assert!((integrate(&g, &f).unwrap() - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
            }

            #[test]
            fn laplacian_is_symmetric(vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6..80)) {
                let n = vals.len() + 2;
                let g = build_grid(DomainDescriptor::Interval { a: 0.0, b: 1.0 }, n).unwrap();
                let mut u = vec![0.0; n];
                let mut v = vec![0.0; n];
                for (i, (x, y)) in vals.iter().enumerate() {
                    u[i + 1] = *x;
                    v[i + 1] = *y;
                }
                let lu = laplacian_apply(&g, &u).unwrap();
                let lv = laplacian_apply(&g, &v).unwrap();
                let a: f64 = lu.iter().zip(&v).zip(&g.quad_weights).map(|((p, q), w)| p * q * w).sum();
                let b: f64 = lv.iter().zip(&u).zip(&g.quad_weights).map(|((p, q), w)| p * q * w).sum();
                let nu = Field(u).sup_norm();
                let nv = Field(v).sup_norm();
                prop_assert!((a - b).abs() <= 1e-10 * nu * nv);
            }
        }
    }
}
