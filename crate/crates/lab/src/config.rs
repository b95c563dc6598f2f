//! The JSON experiment schema. `CONFIG.md` at the crate root documents it
//! field by field.

use std::fmt;
use std::path::Path;

use nonlocal_core::certificates::{Candidate, Family, RecipeOptions};
use nonlocal_core::domain::{build_grid, DomainDescriptor, Grid};
use nonlocal_core::model::profile::HypothesisInput;
use nonlocal_core::model::{InitialDatum, ProblemSpec};
use nonlocal_core::solver::SolveControls;
use nonlocal_core::spectral::Normalization;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::LabError;
use crate::sweep::SweepAxis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Solve,
    Certify,
    Classify,
    Sweep,
    Compare,
    Eig,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Solve => "solve",
            Kind::Certify => "certify",
            Kind::Classify => "classify",
            Kind::Sweep => "sweep",
            Kind::Compare => "compare",
            Kind::Eig => "eig",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Defaults to `spec.domain`; must equal it when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<DomainDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolvePayload {
    /// Fit `u ≥ d φ e^{−λ₁t}` over snapshots with `t ≥ fit_d_t0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_d_t0: Option<f64>,
}

fn default_certify_samples() -> usize {
    101
}
fn default_residual_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyPayload {
    /// Build the candidate with this family's recipe ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default)]
    pub recipe: RecipeOptions,
    /// ... or check this explicit candidate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Candidate>,
    #[serde(default = "default_certify_samples")]
    pub time_samples: usize,
    /// Relative residual tolerance for the pass flag.
    #[serde(default = "default_residual_tol")]
    pub tolerance: f64,
    /// Also run the solver from `spec.u0` and check domination up to
    /// `controls.t_end`.
    #[serde(default)]
    pub domination: bool,
}

fn default_horizon() -> f64 {
    10.0
}
fn default_profile_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyPayload {
    /// Hypotheses checked numerically; defaults to every hypothesis some
    /// branch with satisfied exponent conditions needs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Vec<HypothesisInput>>,
    /// Hypotheses taken as given without a numerical check.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub asserted: Vec<HypothesisInput>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_profile_samples")]
    pub samples: usize,
    /// Fail with exit 3 when a branch lacks a profile entry.
    #[serde(default)]
    pub strict: bool,
}

impl Default for ClassifyPayload {
    fn default() -> Self {
        ClassifyPayload {
            hypotheses: None,
            asserted: Vec::new(),
            horizon: default_horizon(),
            samples: default_profile_samples(),
            strict: false,
        }
    }
}

fn default_max_cells() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPayload {
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    /// Initial-data scales for a dichotomy run in every cell; needs `controls`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparePayload {
    /// The upper problem in full; must differ from `spec` only in `u0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<ProblemSpec>,
    /// Shorthand: `spec` with this initial datum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_u0: Option<InitialDatum>,
}

fn sup_one() -> Normalization {
    Normalization::SupOne
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigPayload {
    #[serde(default = "sup_one")]
    pub normalization: Normalization,
}

impl Default for EigPayload {
    fn default() -> Self {
        EigPayload { normalization: sup_one() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be omitted; the CLI subcommand then decides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    pub spec: ProblemSpec,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<SolveControls>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolvePayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<ComparePayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig: Option<EigPayload>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| LabError::ReadConfig { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    /// Resolves the kind against a requested one; the two must agree when
    /// both are present.
    pub fn resolve_kind(&self, requested: Option<Kind>) -> Result<Kind, LabError> {
        match (self.kind, requested) {
            (Some(a), Some(b)) if a != b => Err(LabError::schema(format!("config kind is {a} but {b} was requested"))),
            (Some(k), _) | (None, Some(k)) => Ok(k),
            (None, None) => Err(LabError::schema("kind: missing (set it in the config or pick a subcommand)")),
        }
    }

    /// Checks everything that does not need a run.
    pub fn validate(&self) -> Result<(), LabError> {
        self.spec.validate()?;
        if let Some(d) = self.grid.descriptor {
            if d != self.spec.domain {
                return Err(LabError::schema(format!("grid.descriptor {d:?} differs from spec.domain {:?}", self.spec.domain)));
            }
        }
        if let Some(c) = &self.controls {
            c.validate()?;
        }
        if let Some(c) = &self.compare {
            if let Some(up) = &c.upper {
                up.validate()?;
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid, LabError> {
        Ok(build_grid(self.spec.domain, self.grid.n)?)
    }

    pub fn controls(&self) -> Result<&SolveControls, LabError> {
        self.controls.as_ref().ok_or_else(|| LabError::schema("controls: required for this experiment"))
    }

    /// SHA-256 of the canonical re-serialization, so formatting and key
    /// order in the file do not change it.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
