use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Grid;
use crate::model::{DiscreteProblem, ProblemSpec};
use crate::numerics::{linspace, pow_nonneg};
use crate::solver::{solve, Outcome, SolveControls};

use super::{Candidate, CandidateKind, CertificateError, Family, Params};

/// Domination slack relative to `‖v(·, t)‖_∞`.
pub const DOMINATION_TOL: f64 = 1e-6;
/// Uniform times inside the region at which domination is always checked.
pub const DOMINATION_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub family: Family,
    pub kind: CandidateKind,
    /// Smallest oriented interior residual; `≥ 0` means the inequality holds.
    pub interior_min_residual: f64,
    /// Smallest oriented interior residual divided by the local magnitude
    /// `|v_t| + |Δv| + |a v^r ∫v^p| + |b v^q|`.
    pub interior_min_relative: f64,
    /// `(x, t)` of the smallest relative interior residual.
    pub worst_point: [f64; 2],
    pub boundary_min_residual: f64,
    pub boundary_min_relative: f64,
    pub boundary_worst_point: [f64; 2],
    pub initial_ordering: bool,
    /// Smallest oriented gap `v(·,0) − u₀` (reversed for subsolutions).
    pub initial_min_gap: f64,
    pub interior_samples: usize,
    pub boundary_samples: usize,
    pub time_samples: usize,
}

impl ResidualReport {
    pub fn interior_ok(&self, tol: f64) -> bool {
        self.interior_min_relative >= -tol
    }

    pub fn boundary_ok(&self, tol: f64) -> bool {
        self.boundary_min_relative >= -tol
    }

    /// Interior and boundary inequalities hold to relative tolerance `tol`.
    pub fn inequalities_hold(&self, tol: f64) -> bool {
        self.interior_ok(tol) && self.boundary_ok(tol)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.inequalities_hold(tol) && self.initial_ordering
    }
}

/// Uniform times over the candidate region; the self-similar family adds
/// times accumulating geometrically at its blow-up time.
pub fn default_time_grid(candidate: &Candidate, samples: usize) -> Vec<f64> {
    match candidate.params {
        Params::SelfSimilar { t_star, .. } => {
            let last = t_star * (1.0 - 2f64.powi(-10));
            let mut ts = linspace(0.0, last, samples.max(2));
            ts.extend((1..=10).map(|k| t_star * (1.0 - 2f64.powi(-k))));
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts
        }
        _ => linspace(0.0, candidate.region_end, samples.max(2)),
    }
}

#[derive(Debug, Clone, Copy)]
struct Worst {
    raw: f64,
    rel: f64,
    at: [f64; 2],
}

impl Worst {
    fn none() -> Self {
        Worst { raw: f64::INFINITY, rel: f64::INFINITY, at: [f64::NAN, f64::NAN] }
    }

    fn push(&mut self, oriented: f64, magnitude: f64, x: f64, t: f64) {
        self.raw = self.raw.min(oriented);
        let rel = if magnitude > 0.0 {
            oriented / magnitude
        } else if oriented < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        if rel < self.rel {
            self.rel = rel;
            self.at = [x, t];
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        self.raw = self.raw.min(other.raw);
        if other.rel < self.rel {
            self.rel = other.rel;
            self.at = other.at;
        }
        self
    }
}

fn orient(kind: CandidateKind, raw: f64) -> f64 {
    match kind {
        CandidateKind::Supersolution => raw,
        CandidateKind::Subsolution => -raw,
        CandidateKind::ExactSolution => -raw.abs(),
    }
}

/// Evaluates the interior, boundary and initial relations at every node of
/// `grid` and every time in `t_grid`.
pub fn verify_candidate(
    candidate: &Candidate,
    spec: &ProblemSpec,
    grid: &Grid,
    t_grid: &[f64],
) -> Result<ResidualReport, CertificateError> {
    candidate.check_grid(grid)?;
    let prob = DiscreteProblem::new(spec, grid)?;
    let desc = grid.descriptor;
    let kind = candidate.kind;
    let kernel_w = |y: f64| prob.k_law.spatial_at(&desc, y);
    let per_time = |&t: &f64| -> Result<(Worst, Worst), CertificateError> {
        let jets = candidate.jets(grid, t)?;
        let ip = if prob.a_law.is_zero() { 0.0 } else { candidate.weighted_power_integral(grid, t, prob.p, &|_| 1.0)? };
        let boundary = if prob.kernel_is_zero() {
            0.0
        } else {
            prob.k_time(t) * candidate.weighted_power_integral(grid, t, prob.l, &kernel_w)?
        };
        let (at, bt) = (prob.a_time(t), prob.b_time(t));
        let mut inner = Worst::none();
        for &i in &grid.interior_idx {
            let j = jets[i];
            let source = prob.a_nodal[i] * at * pow_nonneg(j.v, prob.r) * ip;
            let sink = prob.b_nodal[i] * bt * pow_nonneg(j.v, prob.q);
            let raw = j.v_t - j.lap - source + sink;
            let mag = j.v_t.abs() + j.lap.abs() + source.abs() + sink.abs();
            inner.push(orient(kind, raw), mag, grid.nodes[i], t);
        }
        let mut edge = Worst::none();
        for &i in &grid.boundary_idx {
            let v = jets[i].v;
            edge.push(orient(kind, v - boundary), v.abs() + boundary.abs(), grid.nodes[i], t);
        }
        Ok((inner, edge))
    };
    let parts: Vec<(Worst, Worst)> = t_grid.par_iter().map(per_time).collect::<Result<_, _>>()?;
    let (inner, edge) = parts.into_iter().fold((Worst::none(), Worst::none()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));

    let u0 = spec.u0.eval(grid)?;
    let v0 = candidate.values(grid, 0.0)?;
    let scale = v0.iter().chain(u0.iter()).fold(1.0f64, |m, v| m.max(v.abs()));
    let initial_min_gap = u0.iter().zip(&v0).map(|(u, v)| orient(kind, v - u)).fold(f64::INFINITY, f64::min);
    Ok(ResidualReport {
        family: candidate.family(),
        kind,
        interior_min_residual: inner.raw,
        interior_min_relative: inner.rel,
        worst_point: inner.at,
        boundary_min_residual: edge.raw,
        boundary_min_relative: edge.rel,
        boundary_worst_point: edge.at,
        initial_ordering: initial_min_gap >= -1e-12 * scale,
        initial_min_gap,
        interior_samples: grid.interior_idx.len() * t_grid.len(),
        boundary_samples: grid.boundary_idx.len() * t_grid.len(),
        time_samples: t_grid.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// Largest `(u − v)/‖v‖_∞` for a supersolution, `(v − u)/‖v‖_∞` for a
    /// subsolution, over recorded solver states inside the region.
    pub max_excess_relative: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub checked_until: f64,
    pub states_checked: usize,
    pub outcome: Outcome,
}

/// Runs the solver from `spec.u0` and compares it with the candidate at
/// every recorded state up to `min(controls.t_end, region_end)`.
pub fn check_domination(
    candidate: &Candidate,
    spec: &ProblemSpec,
    grid: &Grid,
    controls: &SolveControls,
) -> Result<DominationReport, CertificateError> {
    let mut c = controls.clone();
    c.t_end = c.t_end.min(candidate.region_end);
    c.record_snapshots = true;
    // short regions would otherwise see only a handful of stride snapshots
    let ts = linspace(0.0, c.t_end, DOMINATION_SAMPLES + 1);
    c.output_times.extend_from_slice(&ts[1..DOMINATION_SAMPLES]);
    let run = solve(spec, grid, &c)?;
    let inside = |t: f64| match candidate.params {
        Params::SelfSimilar { .. } => t < candidate.region_end,
        _ => t <= candidate.region_end,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut checked_until = 0.0f64;
    let mut states = 0usize;
    for s in run.snapshots.iter().filter(|s| inside(s.t)) {
        let v = candidate.values(grid, s.t)?;
        let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gap = s
            .u
            .iter()
            .zip(&v)
            .map(|(u, v)| match candidate.kind {
                CandidateKind::Subsolution => v - u,
                _ => u - v,
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(if norm > 0.0 {
            gap / norm
        } else if gap > 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
        checked_until = checked_until.max(s.t);
        states += 1;
    }
    Ok(DominationReport {
        max_excess_relative: worst,
        tolerance: DOMINATION_TOL,
        passed: states > 0 && worst <= DOMINATION_TOL,
        checked_until,
        states_checked: states,
        outcome: run.outcome,
    })
}
