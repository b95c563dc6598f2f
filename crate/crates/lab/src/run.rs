//! One function per experiment kind. Each returns [`Artifacts`]; nothing
//! here touches the filesystem.

use nonlocal_core::certificates::{check_domination, default_time_grid, make_recipe, verify_candidate, RecipeOptions};
use nonlocal_core::domain::Grid;
use nonlocal_core::model::profile::{resolve_hypotheses, verify_profile_flags, ProfileEntry, ProfileReport, Status};
use nonlocal_core::model::ProblemSpec;
use nonlocal_core::regimes::{classify, classify_strict, required_hypotheses, Verdict};
use nonlocal_core::solver::{compare_runs, fit_lower_bound_d, solve, TraceRow};
use nonlocal_core::spectral::{first_eigenpair, Normalization};
use serde_json::{json, Value};

use crate::config::{ClassifyPayload, ExperimentConfig, Kind};
use crate::error::LabError;
use crate::output::{fmt_float, Plot, Table};
use crate::sweep;

pub const TRACE_HEADER: [&str; 5] = ["t", "sup_norm", "mass", "J", "I"];

/// What a run produced: a JSON summary and any number of CSV tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub summary: Value,
    pub tables: Vec<Table>,
}

pub fn trace_table(rows: &[TraceRow]) -> Table {
    Table {
        suffix: "trace",
        header: TRACE_HEADER.iter().map(|s| s.to_string()).collect(),
        rows: rows.iter().map(|r| [r.t, r.sup_norm, r.mass, r.j, r.i].iter().map(|v| fmt_float(*v)).collect()).collect(),
        plot: Some(Plot { x: "t", y: vec!["sup_norm", "J"], log_y: true }),
    }
}

/// Profile for `spec` (checked plus asserted entries) and its verdict.
pub fn profile_and_verdict(spec: &ProblemSpec, p: &ClassifyPayload) -> Result<(ProfileReport, Verdict), LabError> {
    let (profile, verdict) = profile_for(spec, p)?;
    let verdict = match verdict {
        Some(v) => v,
        None => classify(&spec.exponents, &profile),
    };
    Ok((profile, verdict))
}

fn profile_for(spec: &ProblemSpec, p: &ClassifyPayload) -> Result<(ProfileReport, Option<Verdict>), LabError> {
    let checked = match &p.hypotheses {
        Some(h) => resolve_hypotheses(h)?,
        None => required_hypotheses(&spec.exponents),
    };
    let asserted = resolve_hypotheses(&p.asserted)?;
    let checked: Vec<_> = checked.into_iter().filter(|h| !asserted.iter().any(|a| a.name() == h.name())).collect();
    let mut profile = verify_profile_flags(spec, &checked, p.horizon, p.samples)?;
    profile.entries.extend(asserted.into_iter().map(|h| ProfileEntry {
        hypothesis: h,
        status: Status::AssertedByUser,
        horizon: p.horizon,
        time_samples: 0,
        space_samples: 0,
        evidence: Default::default(),
    }));
    let strict = if p.strict { Some(classify_strict(&spec.exponents, &profile)?) } else { None };
    Ok((profile, strict))
}

fn run_solve(cfg: &ExperimentConfig, grid: &Grid) -> Result<Artifacts, LabError> {
    let spec = &cfg.spec;
    let mut controls = cfg.controls()?.clone();
    let fit_t0 = cfg.solve.as_ref().and_then(|s| s.fit_d_t0);
    let exact_rate = spec.exact_solution_rate();
    if fit_t0.is_some() || exact_rate.is_some() {
        controls.record_snapshots = true;
    }
    let run = solve(spec, grid, &controls)?;
    let mut summary = json!({
        "outcome": run.outcome,
        "steps": run.steps,
        "final_t": run.final_state.t,
        "final_sup": run.final_state.u.sup_norm(),
        "lambda1": run.lambda1,
        "time_shift_estimate": run.time_shift_estimate,
        "trace_rows": run.traces.len(),
    });
    if let Some(c) = exact_rate {
        // max over recorded states of |u − e^{−ct}|
        let err = run
            .snapshots
            .iter()
            .chain([&run.final_state])
            .flat_map(|s| s.u.iter().map(move |v| (v - (-c * s.t).exp()).abs()))
            .fold(0.0f64, f64::max);
        summary["exact_rate"] = json!(c);
        summary["exact_sup_error"] = json!(err);
    }
    if let Some(t0) = fit_t0 {
        let eig = first_eigenpair(grid, Normalization::IntegralOne)?;
        summary["d"] = json!(fit_lower_bound_d(&run, &eig, t0)?);
        summary["d_normalization"] = json!(Normalization::IntegralOne);
    }
    Ok(Artifacts { summary, tables: vec![trace_table(&run.traces)] })
}

fn run_certify(cfg: &ExperimentConfig, grid: &Grid) -> Result<Artifacts, LabError> {
    let p = cfg.certify.as_ref().ok_or_else(|| LabError::schema("certify: payload required"))?;
    let candidate = match (&p.candidate, p.family) {
        (Some(c), None) => c.clone(),
        (None, Some(f)) => {
            let eig = first_eigenpair(grid, Normalization::SupOne)?;
            make_recipe(f, &cfg.spec, grid, &eig, &p.recipe)?
        }
        _ => return Err(LabError::schema("certify: give exactly one of family or candidate")),
    };
    let times = default_time_grid(&candidate, p.time_samples);
    let report = verify_candidate(&candidate, &cfg.spec, grid, &times)?;
    let mut summary = json!({
        "candidate": candidate,
        "residuals": report,
        "tolerance": p.tolerance,
        "passed": report.passes(p.tolerance),
    });
    if p.recipe != RecipeOptions::default() {
        summary["recipe"] = json!(p.recipe);
    }
    if p.domination {
        let dom = check_domination(&candidate, &cfg.spec, grid, cfg.controls()?)?;
        summary["passed"] = json!(report.passes(p.tolerance) && dom.passed);
        summary["domination"] = json!(dom);
    }
    Ok(Artifacts { summary, tables: Vec::new() })
}

fn run_classify(cfg: &ExperimentConfig) -> Result<Artifacts, LabError> {
    let p = cfg.classify.clone().unwrap_or_default();
    let (profile, verdict) = profile_and_verdict(&cfg.spec, &p)?;
    let summary = json!({
        "exponents": cfg.spec.exponents,
        "labels": verdict.labels(),
        "indeterminate": verdict.is_indeterminate(),
        "verdict": verdict,
        "profile": profile,
    });
    Ok(Artifacts { summary, tables: Vec::new() })
}

fn run_sweep(cfg: &ExperimentConfig, grid: &Grid) -> Result<Artifacts, LabError> {
    let p = cfg.sweep.as_ref().ok_or_else(|| LabError::schema("sweep: payload required"))?;
    let classify = cfg.classify.clone().unwrap_or_default();
    let rows = sweep::run_sweep(&cfg.spec, p, &classify, grid, cfg.controls.as_ref())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let summary = json!({
        "axes": p.axes,
        "cells": rows.len(),
        "failed_cells": failed,
        "scales": p.scales,
    });
    let table = Table {
        suffix: "sweep",
        header: sweep::header(p),
        rows: rows.iter().map(|r| sweep::record(r, p)).collect(),
        plot: None,
    };
    Ok(Artifacts { summary, tables: vec![table] })
}

fn run_compare(cfg: &ExperimentConfig, grid: &Grid) -> Result<Artifacts, LabError> {
    let p = cfg.compare.as_ref().ok_or_else(|| LabError::schema("compare: payload required"))?;
    let upper = match (&p.upper, &p.upper_u0) {
        (Some(s), None) => s.clone(),
        (None, Some(u0)) => cfg.spec.with_u0(u0.clone()),
        _ => return Err(LabError::schema("compare: give exactly one of upper or upper_u0")),
    };
    let report = compare_runs(&cfg.spec, &upper, grid, cfg.controls()?)?;
    let eig = first_eigenpair(grid, Normalization::IntegralOne)?;
    let summary = json!({
        "outcome": if report.passed { "ordered" } else { "violated" },
        "report": report,
        "lambda1": eig.lambda1,
    });
    Ok(Artifacts { summary, tables: Vec::new() })
}

fn run_eig(cfg: &ExperimentConfig, grid: &Grid) -> Result<Artifacts, LabError> {
    let p = cfg.eig.clone().unwrap_or_default();
    let eig = first_eigenpair(grid, p.normalization)?;
    let summary = json!({
        "lambda1": eig.lambda1,
        "normalization": eig.normalization,
        "iterations": eig.iterations,
        "nodes": grid.len(),
    });
    let table = Table {
        suffix: "eig",
        header: vec!["x".into(), "phi".into()],
        rows: grid.nodes.iter().zip(eig.phi.iter()).map(|(x, v)| vec![fmt_float(*x), fmt_float(*v)]).collect(),
        plot: Some(Plot { x: "x", y: vec!["phi"], log_y: false }),
    };
    Ok(Artifacts { summary, tables: vec![table] })
}

/// Validates `cfg` and runs it as `kind`. The summary always carries the
/// kind, the config hash and the crate version.
pub fn execute(cfg: &ExperimentConfig, kind: Kind) -> Result<Artifacts, LabError> {
    cfg.validate()?;
    let grid = cfg.build_grid()?;
    let mut art = match kind {
        Kind::Solve => run_solve(cfg, &grid)?,
        Kind::Certify => run_certify(cfg, &grid)?,
        Kind::Classify => run_classify(cfg)?,
        Kind::Sweep => run_sweep(cfg, &grid)?,
        Kind::Compare => run_compare(cfg, &grid)?,
        Kind::Eig => run_eig(cfg, &grid)?,
    };
    art.summary["kind"] = json!(kind);
    art.summary["config_hash"] = json!(cfg.hash());
    art.summary["version"] = json!(env!("CARGO_PKG_VERSION"));
    Ok(art)
}
