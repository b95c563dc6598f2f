//! Regime maps over at most two parameter axes.

use std::fmt;

use nonlocal_core::domain::Grid;
use nonlocal_core::model::{Exponent, Exponents, ProblemSpec};
use nonlocal_core::regimes::dichotomy_experiment;
use nonlocal_core::solver::SolveControls;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ClassifyPayload, SweepPayload};
use crate::error::LabError;
use crate::run::profile_and_verdict;

pub const MAX_AXES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisParam {
    #[serde(rename = "r")]
    R,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "l")]
    L,
    /// Sets `r = p = v/2`.
    #[serde(rename = "r+p")]
    RPlusP,
    /// Multiplies the base coefficient.
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "k")]
    K,
}

impl AxisParam {
    fn touches(self) -> &'static [&'static str] {
        match self {
            AxisParam::R => &["r"],
            AxisParam::P => &["p"],
            AxisParam::Q => &["q"],
            AxisParam::L => &["l"],
            AxisParam::RPlusP => &["r", "p"],
            AxisParam::A => &["a"],
            AxisParam::B => &["b"],
            AxisParam::K => &["k"],
        }
    }
}

impl fmt::Display for AxisParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AxisParam::RPlusP => "r+p",
            other => other.touches()[0],
        };
        f.write_str(s)
    }
}

/// Inclusive exact range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: Exponent,
    pub stop: Exponent,
    pub step: Exponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: AxisParam,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<AxisRange>,
}

impl SweepAxis {
    pub fn grid_values(&self, max_cells: usize) -> Result<Vec<Exponent>, LabError> {
        match (&self.range, self.values.is_empty()) {
            (Some(_), false) => Err(LabError::schema(format!("axis {}: give values or range, not both", self.param))),
            (None, true) => Err(LabError::schema(format!("axis {}: needs values or a range", self.param))),
            (None, false) => Ok(self.values.clone()),
            (Some(r), true) => {
                if r.step.0 <= Rational64::from_integer(0) || r.stop.0 < r.start.0 {
                    return Err(LabError::schema(format!("axis {}: range needs step > 0 and stop ≥ start", self.param)));
                }
                let mut out = Vec::new();
                let mut v = r.start.0;
                while v <= r.stop.0 {
                    if out.len() >= max_cells {
                        return Err(LabError::schema(format!("axis {}: more than {max_cells} values", self.param)));
                    }
                    out.push(Exponent(v));
                    v += r.step.0;
                }
                Ok(out)
            }
        }
    }
}

/// Lexicographic cell list: the first axis varies slowest.
pub fn cells(axes: &[SweepAxis], max_cells: usize) -> Result<Vec<Vec<Exponent>>, LabError> {
    if axes.len() > MAX_AXES {
        return Err(LabError::schema(format!("sweep.axes: at most {MAX_AXES} axes, got {}", axes.len())));
    }
    if let [x, y] = axes {
        if x.param.touches().iter().any(|n| y.param.touches().contains(n)) {
            return Err(LabError::schema(format!("sweep.axes: {} and {} set the same parameter", x.param, y.param)));
        }
    }
    let mut out: Vec<Vec<Exponent>> = vec![Vec::new()];
    for axis in axes {
        let vals = axis.grid_values(max_cells)?;
        out = out.into_iter().flat_map(|prefix| vals.iter().map(move |v| [prefix.clone(), vec![*v]].concat())).collect();
        if out.len() > max_cells {
            return Err(LabError::schema(format!("sweep: {} cells exceed max_cells = {max_cells}", out.len())));
        }
    }
    Ok(out)
}

/// `base` with every axis value applied.
pub fn cell_spec(base: &ProblemSpec, axes: &[SweepAxis], values: &[Exponent]) -> Result<ProblemSpec, LabError> {
    let mut s = base.clone();
    let mut e = s.exponents;
    for (axis, v) in axes.iter().zip(values) {
        match axis.param {
            AxisParam::R => e.r = *v,
            AxisParam::P => e.p = *v,
            AxisParam::Q => e.q = *v,
            AxisParam::L => e.l = *v,
            AxisParam::RPlusP => {
                let half = Exponent(v.0 / Rational64::from_integer(2));
                e.r = half;
                e.p = half;
            }
            AxisParam::A => s.a = s.a.scaled(v.value())?,
            AxisParam::B => s.b = s.b.scaled(v.value())?,
            AxisParam::K => s.k = s.k.scaled(v.value())?,
        }
    }
    s.exponents = Exponents::new(e.r, e.p, e.q, e.l)?;
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_values: Vec<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Exponents>,
    pub predicates: Vec<String>,
    pub missing: Vec<String>,
    /// One outcome label per dichotomy scale.
    pub outcomes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn evaluate(
    base: &ProblemSpec,
    axes: &[SweepAxis],
    values: &[Exponent],
    classify: &ClassifyPayload,
    dichotomy: Option<(&Grid, &[f64], &SolveControls)>,
) -> SweepRow {
    let mut row = SweepRow {
        axis_values: values.to_vec(),
        exponents: None,
        predicates: Vec::new(),
        missing: Vec::new(),
        outcomes: Vec::new(),
        monotone: None,
        error: None,
    };
    let spec = match cell_spec(base, axes, values) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.exponents = Some(spec.exponents);
    match profile_and_verdict(&spec, classify) {
        Ok((_, verdict)) => {
            row.predicates = verdict.labels();
            row.missing = verdict.missing.iter().map(|m| format!("{}:{}", m.branch, m.hypothesis)).collect();
        }
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    if let Some((grid, scales, controls)) = dichotomy {
        match dichotomy_experiment(&spec, grid, scales, controls) {
            Ok(rep) => {
                row.outcomes = rep.rows.iter().map(|r| r.outcome.label().to_string()).collect();
                row.monotone = Some(rep.monotone);
            }
            Err(e) => row.error = Some(LabError::from(e).to_string()),
        }
    }
    row
}

/// Evaluates every cell in parallel; rows come back in cell order, so the
/// result does not depend on the thread count.
pub fn run_sweep(
    base: &ProblemSpec,
    payload: &SweepPayload,
    classify: &ClassifyPayload,
    grid: &Grid,
    controls: Option<&SolveControls>,
) -> Result<Vec<SweepRow>, LabError> {
    let cells = cells(&payload.axes, payload.max_cells)?;
    let dichotomy = if payload.scales.is_empty() {
        None
    } else {
        let c = controls.ok_or_else(|| LabError::schema("controls: required when sweep.scales is set"))?;
        Some((grid, payload.scales.as_slice(), c))
    };
    Ok(cells.par_iter().map(|v| evaluate(base, &payload.axes, v, classify, dichotomy)).collect())
}

pub fn header(payload: &SweepPayload) -> Vec<String> {
    let mut h: Vec<String> = payload.axes.iter().map(|a| format!("axis:{}", a.param)).collect();
    h.extend(["r", "p", "q", "l", "predicates", "missing"].map(String::from));
    h.extend(payload.scales.iter().map(|s| format!("outcome@{s}")));
    if !payload.scales.is_empty() {
        h.push("monotone".into());
    }
    h.push("error".into());
    h
}

pub fn record(row: &SweepRow, payload: &SweepPayload) -> Vec<String> {
    let mut out: Vec<String> = row.axis_values.iter().map(|v| v.to_string()).collect();
    match &row.exponents {
        Some(e) => out.extend([e.r, e.p, e.q, e.l].map(|x| x.to_string())),
        None => out.extend(std::iter::repeat_n(String::new(), 4)),
    }
    out.push(row.predicates.join(";"));
    out.push(row.missing.join(";"));
    for i in 0..payload.scales.len() {
        out.push(row.outcomes.get(i).cloned().unwrap_or_default());
    }
    if !payload.scales.is_empty() {
        out.push(row.monotone.map(|m| m.to_string()).unwrap_or_default());
    }
    out.push(row.error.clone().unwrap_or_default());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(param: AxisParam, start: &str, stop: &str, step: &str) -> SweepAxis {
        SweepAxis {
            param,
            values: Vec::new(),
            range: Some(AxisRange { start: start.parse().unwrap(), stop: stop.parse().unwrap(), step: step.parse().unwrap() }),
        }
    }

    #[test]
    fn ranges_are_exact_and_inclusive() {
        let v = axis(AxisParam::L, "0.1", "0.3", "0.1").grid_values(100).unwrap();
        assert_eq!(v.iter().map(|x| x.to_string()).collect::<Vec<_>>(), ["0.1", "0.2", "0.3"]);
    }

    #[test]
    fn cells_are_lexicographic() {
        let axes = [axis(AxisParam::RPlusP, "1", "2", "1"), axis(AxisParam::L, "1", "3", "1")];
        let c = cells(&axes, 100).unwrap();
        let flat: Vec<String> = c.iter().map(|v| format!("{}/{}", v[0], v[1])).collect();
        assert_eq!(flat, ["1/1", "1/2", "1/3", "2/1", "2/2", "2/3"]);
    }

    #[test]
    fn limits_are_enforced() {
        let a = axis(AxisParam::L, "1", "3", "1");
        assert!(cells(&[a.clone(), a.clone(), a.clone()], 100).is_err());
        assert!(cells(&[axis(AxisParam::R, "1", "2", "1"), axis(AxisParam::RPlusP, "1", "2", "1")], 100).is_err());
        assert!(cells(&[a.clone(), axis(AxisParam::Q, "1", "3", "1")], 8).is_err());
        assert_eq!(cells(&[], 1).unwrap(), vec![Vec::<Exponent>::new()]);
    }
}
