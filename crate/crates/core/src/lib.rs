//! Numerical laboratory for semilinear parabolic equations with a nonlocal
//! source `a u^r ∫u^p` and a nonlocal boundary condition `u = ∫k u^l`.
//!
//! Modules build on each other bottom-up: [`domain`] discretizes Ω,
//! [`spectral`] supplies the first Dirichlet eigenpair, [`model`] describes a
//! problem, [`solver`] integrates it in time, [`certificates`] builds and checks
//! explicit comparison functions, and [`regimes`] maps exponents and verified
//! coefficient hypotheses to predicted long-time behavior.

pub mod domain;
pub mod numerics;
pub mod spectral;
pub mod model;
pub mod solver;
pub mod certificates;
pub mod regimes;
