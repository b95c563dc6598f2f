//! Regime classification from exponents and checked coefficient hypotheses,
//! plus small-versus-large data experiments.
//!
//! Exponent inequalities are evaluated on exact rationals. A hypothesis is
//! consumed only if the profile lists it as `HoldsOnHorizon` or
//! `AssertedByUser`; an absent entry counts as not verified.

use std::fmt;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Grid;
use crate::model::profile::{Hypothesis, ProfileReport, Status};
use crate::model::{check_compatibility, Exponents, ModelError, ProblemSpec};
use crate::solver::{compatible_datum, solve, Outcome, SolveControls, SolverError, TraceRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeError {
    #[error("branch {branch} needs hypothesis `{hypothesis}` but the profile has no entry for it")]
    MissingHypothesis { branch: Branch, hypothesis: &'static str },
    #[error("scales must be positive and strictly ascending: {0:?}")]
    BadScales(Vec<f64>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("run at scale {scale} failed: {source}")]
    Run { scale: f64, source: SolverError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    GlobalAllData,
    BlowUpLargeData,
    GlobalSmallData,
    BlowUpAllNontrivial,
}

/// Theorem branch ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "2.2-i")]
    T22i,
    #[serde(rename = "2.2-ii")]
    T22ii,
    #[serde(rename = "2.2-iii")]
    T22iii,
    #[serde(rename = "2.4-i")]
    T24i,
    #[serde(rename = "2.4-ii")]
    T24ii,
    #[serde(rename = "3.1-i")]
    T31i,
    #[serde(rename = "3.1-ii")]
    T31ii,
    #[serde(rename = "3.3")]
    T33,
    #[serde(rename = "3.5")]
    T35,
    #[serde(rename = "3.7")]
    T37,
}

impl Branch {
    pub fn id(&self) -> &'static str {
        match self {
            Branch::T22i => "2.2-i",
            Branch::T22ii => "2.2-ii",
            Branch::T22iii => "2.2-iii",
            Branch::T24i => "2.4-i",
            Branch::T24ii => "2.4-ii",
            Branch::T31i => "3.1-i",
            Branch::T31ii => "3.1-ii",
            Branch::T33 => "3.3",
            Branch::T35 => "3.5",
            Branch::T37 => "3.7",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumedHypothesis {
    pub name: String,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub branch: Branch,
    /// Exponent condition that held, in plain notation.
    pub condition: String,
    pub hypotheses: Vec<ConsumedHypothesis>,
}

impl Predicate {
    pub fn label(&self) -> String {
        let k = match self.kind {
            PredicateKind::GlobalAllData => "GlobalAllData",
            PredicateKind::BlowUpLargeData => "BlowUpLargeData",
            PredicateKind::GlobalSmallData => "GlobalSmallData",
            PredicateKind::BlowUpAllNontrivial => "BlowUpAllNontrivial",
        };
        format!("{k}({})", self.branch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingEntry {
    pub branch: Branch,
    pub hypothesis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Verdict {
    /// In table order; empty means indeterminate.
    pub predicates: Vec<Predicate>,
    /// Hypotheses some branch with satisfied exponent conditions looked for
    /// and did not find in the profile.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<MissingEntry>,
}

impl Verdict {
    pub fn is_indeterminate(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn has(&self, kind: PredicateKind, branch: Branch) -> bool {
        self.predicates.iter().any(|p| p.kind == kind && p.branch == branch)
    }

    /// `Kind(branch)` labels, table order.
    pub fn labels(&self) -> Vec<String> {
        self.predicates.iter().map(Predicate::label).collect()
    }
}

struct Row {
    kind: PredicateKind,
    branch: Branch,
    condition: &'static str,
    holds: bool,
    needs: &'static [&'static str],
}

fn table(e: &Exponents) -> Vec<Row> {
    let (r, p, q, l) = (e.r.0, e.p.0, e.q.0, e.l.0);
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    let rp = r + p;
    let half_q1 = (q + one) / two;
    use PredicateKind::*;
    vec![
        Row { kind: GlobalAllData, branch: Branch::T22i, condition: "max(r+p, l) <= 1", holds: rp.max(l) <= one, needs: &[] },
        Row {
            kind: GlobalAllData,
            branch: Branch::T22ii,
            condition: "l <= 1, 1 < r+p < q",
            holds: l <= one && one < rp && rp < q,
            needs: &["b_positive"],
        },
        Row {
            kind: GlobalAllData,
            branch: Branch::T22iii,
            condition: "1 < l < (q+1)/2, max(r+p, 2p+1) < q",
            holds: one < l && l < half_q1 && rp.max(two * p + one) < q,
            needs: &["b_positive"],
        },
        Row {
            kind: BlowUpLargeData,
            branch: Branch::T24i,
            condition: "l > max(1, (q+1)/2)",
            holds: l > one.max(half_q1),
            needs: &["kernel_lower_bound"],
        },
        Row {
            kind: BlowUpLargeData,
            branch: Branch::T24ii,
            condition: "r+p > max(q, 1)",
            holds: rp > q.max(one),
            needs: &["source_lower_bound"],
        },
        Row {
            kind: GlobalSmallData,
            branch: Branch::T31i,
            condition: "q < min(r+p, 1), l > 1",
            holds: q < rp.min(one) && l > one,
            needs: &["b_initial_positive"],
        },
        Row {
            kind: GlobalSmallData,
            branch: Branch::T31ii,
            condition: "r >= q, (q+1)/2 < l <= 1",
            holds: r >= q && half_q1 < l && l <= one,
            needs: &["b_initial_positive"],
        },
        Row {
            kind: GlobalSmallData,
            branch: Branch::T33,
            condition: "q = 1, min(r+p, l) > 1",
            holds: q == one && rp.min(l) > one,
            needs: &["source_integrable_q1", "kernel_bound_q1"],
        },
        Row {
            kind: BlowUpAllNontrivial,
            branch: Branch::T33,
            condition: "q = 1, min(r, p) >= 1",
            holds: q == one && r.min(p) >= one,
            needs: &["source_divergent_q1"],
        },
        Row {
            kind: BlowUpAllNontrivial,
            branch: Branch::T33,
            condition: "q = 1, l > 1",
            holds: q == one && l > one,
            needs: &["kernel_divergent_q1"],
        },
        Row {
            kind: GlobalSmallData,
            branch: Branch::T35,
            condition: "l > 1, 1 < q < r+p",
            holds: l > one && one < q && q < rp,
            needs: &["kernel_growth", "sink_dominates_source"],
        },
        Row {
            kind: BlowUpAllNontrivial,
            branch: Branch::T35,
            condition: "l >= q > 1",
            holds: l >= q && q > one,
            needs: &["sink_epsilon", "epsilon_vanishes", "kernel_lower_growth"],
        },
        Row {
            kind: BlowUpAllNontrivial,
            branch: Branch::T37,
            condition: "max(r, p) >= q > 1",
            holds: r.max(p) >= q && q > one,
            needs: &["sink_epsilon", "gamma_ratio_diverges", "source_divergent"],
        },
    ]
}

/// Predicted behaviors for `exponents` given checked hypotheses. Pure and
/// total: missing profile entries are reported in [`Verdict::missing`].
pub fn classify(exponents: &Exponents, profile: &ProfileReport) -> Verdict {
    let mut verdict = Verdict::default();
    for row in table(exponents).into_iter().filter(|row| row.holds) {
        let mut consumed = Vec::with_capacity(row.needs.len());
        let mut ok = true;
        for &name in row.needs {
            match profile.status_of(name) {
                Some(status) if status.accepted() => consumed.push(ConsumedHypothesis { name: name.to_string(), status }),
                Some(_) => ok = false,
                None => {
                    ok = false;
                    verdict.missing.push(MissingEntry { branch: row.branch, hypothesis: name.to_string() });
                }
            }
        }
        // one predicate per (kind, branch); the first alternative that holds wins
        if ok && !verdict.has(row.kind, row.branch) {
            verdict.predicates.push(Predicate {
                kind: row.kind,
                branch: row.branch,
                condition: row.condition.to_string(),
                hypotheses: consumed,
            });
        }
    }
    verdict
}

/// As [`classify`], but an absent hypothesis entry is an error.
pub fn classify_strict(exponents: &Exponents, profile: &ProfileReport) -> Result<Verdict, RegimeError> {
    let v = classify(exponents, profile);
    match v.missing.first() {
        Some(m) => {
            let hypothesis = Hypothesis::ALL_NAMES.iter().find(|n| **n == m.hypothesis).copied().unwrap_or("unknown");
            Err(RegimeError::MissingHypothesis { branch: m.branch, hypothesis })
        }
        None => Ok(v),
    }
}

/// Hypothesis names each branch consumes (union over alternatives).
pub fn required_hypotheses(exponents: &Exponents) -> Vec<Hypothesis> {
    let mut names: Vec<&'static str> = table(exponents).iter().filter(|r| r.holds).flat_map(|r| r.needs.iter().copied()).collect();
    names.sort_unstable();
    names.dedup();
    names.into_iter().filter_map(|n| n.parse().ok()).collect()
}

/// Minimum relative increase of `J` over the trace tail for the growth flag.
pub const J_GROWTH_MIN_RATIO: f64 = 2.0;
/// Fitted exponent `s` in `J′ ≈ c J^s` must exceed `1 + J_GROWTH_EXPONENT_MARGIN`.
pub const J_GROWTH_EXPONENT_MARGIN: f64 = 0.05;

/// Growth diagnostics of `J` on the second half of the recorded trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JGrowth {
    /// `J` increases throughout the tail, grows by at least
    /// [`J_GROWTH_MIN_RATIO`], and `J′ ≈ c J^s` with `s > 1`.
    pub super_growth: bool,
    /// Least-squares slope of `log J′` against `log J`; NaN if undefined.
    pub exponent: f64,
    /// `J(t_last) / J(t_last/2)`.
    pub ratio: f64,
    pub tail_rows: usize,
}

pub fn j_growth(traces: &[TraceRow]) -> JGrowth {
    let t_last = traces.last().map_or(0.0, |r| r.t);
    let tail: Vec<&TraceRow> = traces.iter().filter(|r| r.t >= 0.5 * t_last).collect();
    let none = JGrowth { super_growth: false, exponent: f64::NAN, ratio: f64::NAN, tail_rows: tail.len() };
    if tail.len() < 4 {
        return none;
    }
    let increasing = tail.windows(2).all(|w| w[1].j > w[0].j && w[1].t > w[0].t);
    let ratio = tail[tail.len() - 1].j / tail[0].j;
    if !increasing || !(tail[0].j > 0.0) {
        return JGrowth { ratio, ..none };
    }
    // centered differences of J against midpoint values
    let pts: Vec<(f64, f64)> = tail
        .windows(2)
        .map(|w| {
            let d = (w[1].j - w[0].j) / (w[1].t - w[0].t);
            (0.5 * (w[0].j + w[1].j), d)
        })
        .filter(|(j, d)| *j > 0.0 && *d > 0.0)
        .map(|(j, d)| (j.ln(), d.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = if pts.len() >= 3 && sxx > 0.0 { sxy / sxx } else { f64::NAN };
    JGrowth {
        super_growth: ratio >= J_GROWTH_MIN_RATIO && exponent > 1.0 + J_GROWTH_EXPONENT_MARGIN,
        exponent,
        ratio,
        tail_rows: tail.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRow {
    pub scale: f64,
    pub outcome: Outcome,
    pub final_t: f64,
    pub final_sup: f64,
    pub j_growth: JGrowth,
    /// Boundary entries of the scaled datum were replaced by the closure.
    pub boundary_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub rows: Vec<DichotomyRow>,
    /// No global outcome at a scale above the smallest blow-up scale.
    pub monotone: bool,
    pub first_blow_up_scale: Option<f64>,
    /// Scales above the first blow-up that ended globally; worth refining.
    pub flicker_scales: Vec<f64>,
}

/// Solves from `c · u₀` for each `c` in `scales`, in parallel, and reports
/// outcomes in scale order.
pub fn dichotomy_experiment(
    spec: &ProblemSpec,
    grid: &Grid,
    scales: &[f64],
    controls: &SolveControls,
) -> Result<DichotomyReport, RegimeError> {
    let ascending = scales.windows(2).all(|w| w[0] < w[1]);
    if scales.is_empty() || !ascending || scales.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
        return Err(RegimeError::BadScales(scales.to_vec()));
    }
    let rows: Vec<DichotomyRow> = scales
        .par_iter()
        .map(|&scale| {
            let fail = |source: SolverError| RegimeError::Run { scale, source };
            let mut s = spec.with_u0(spec.u0.scaled(scale));
            let boundary_closed = !check_compatibility(&s, grid)?.passed;
            if boundary_closed {
                s = s.with_u0(compatible_datum(&s, grid).map_err(fail)?);
            }
            let run = solve(&s, grid, controls).map_err(fail)?;
            Ok(DichotomyRow {
                scale,
                outcome: run.outcome,
                final_t: run.final_state.t,
                final_sup: run.final_state.u.sup_norm(),
                j_growth: j_growth(&run.traces),
                boundary_closed,
            })
        })
        .collect::<Result<_, RegimeError>>()?;
    let first_blow_up_scale = rows.iter().find(|r| r.outcome.is_blow_up()).map(|r| r.scale);
    let flicker_scales: Vec<f64> = match first_blow_up_scale {
        Some(c0) => rows.iter().filter(|r| r.scale > c0 && r.outcome.is_global()).map(|r| r.scale).collect(),
        None => Vec::new(),
    };
    Ok(DichotomyReport { monotone: flicker_scales.is_empty(), rows, first_blow_up_scale, flicker_scales })
}
