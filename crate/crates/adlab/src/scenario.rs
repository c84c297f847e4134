//! Scenario file schema: a JSON description of one model, its parameters,
//! the grid, and the analyses to run. Field names are part of the CLI
//! contract.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    RotatingSpin,
    ChirpedSpin,
    GridFile { path: String },
    DualOf { inner: Box<ModelSpec> },
}

impl ModelSpec {
    pub fn dual_depth(&self) -> usize {
        match self {
            ModelSpec::DualOf { inner } => 1 + inner.dual_depth(),
            _ => 0,
        }
    }

    pub fn is_dual(&self) -> bool {
        matches!(self, ModelSpec::DualOf { .. })
    }

    pub fn label(&self) -> String {
        match self {
            ModelSpec::RotatingSpin => "rotating_spin".into(),
            ModelSpec::ChirpedSpin => "chirped_spin".into(),
            ModelSpec::GridFile { path } => format!("grid_file({path})"),
            ModelSpec::DualOf { inner } => format!("dual_of({})", inner.label()),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub omega0: Option<f64>,
    #[serde(rename = "T")]
    pub t_total: Option<f64>,
    pub omega: Option<f64>,
    pub theta_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Propagate,
    Amplitudes,
    Fidelity,
    Perturbation,
    Conditions,
    DualCheck,
    TDependence,
    RlProbe,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// "satisfied" band of the condition verdicts
    pub condition_threshold: f64,
    /// override for the corrected criterion's denominator floor
    pub denom_floor: Option<f64>,
    /// accepted deviation of direct dual integration from the adjoint route
    pub direct_budget: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { condition_threshold: 0.05, denom_floor: None, direct_budget: 1e-4 }
    }
}

fn default_rl_ladder() -> Vec<f64> {
    vec![100.0, 177.828, 316.228, 562.341, 1000.0]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    pub params: ScenarioParams,
    pub grid_points: usize,
    /// 1-based level index (1 = lowest eigenvalue at s = 0)
    pub initial_eigenstate: usize,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out_dir: Option<String>,
    /// total-time ladder for the decay probe
    #[serde(default = "default_rl_ladder")]
    pub rl_t_values: Vec<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.params.t_total, self.params.omega) {
            (Some(t), None) if t > 0.0 => {}
            (None, Some(w)) if w > 0.0 => {}
            _ => {
                return Err(Error::Validation(
                    "exactly one of params.T or params.omega must be given (and positive)".into(),
                ))
            }
        }
        if self.grid_points < 3 {
            return Err(Error::Validation(format!(
                "grid_points must be >= 3, got {}",
                self.grid_points
            )));
        }
        if self.model.dual_depth() > 2 {
            return Err(Error::Validation("dual_of nesting depth exceeds 2".into()));
        }
        if self.initial_eigenstate == 0 {
            return Err(Error::Validation(
                "initial_eigenstate is 1-based (1 = lowest level)".into(),
            ));
        }
        if let Some(w0) = self.params.omega0 {
            if !(w0 > 0.0) {
                return Err(Error::Validation(format!("omega0 must be > 0, got {w0}")));
            }
        }
        if let Some(p) = self.params.theta_exponent {
            if !(p >= 1.0) {
                return Err(Error::Validation(format!(
                    "theta_exponent must be >= 1, got {p}"
                )));
            }
        }
        if self.rl_t_values.len() < 2 && self.analyses.contains(&Analysis::RlProbe) {
            return Err(Error::Validation(
                "rl_t_values needs at least two entries for the decay probe".into(),
            ));
        }
        Ok(())
    }

    /// Total evolution time, from `T` directly or via `omega = 2π/T`.
    pub fn t_total(&self) -> f64 {
        match (self.params.t_total, self.params.omega) {
            (Some(t), _) => t,
            (None, Some(w)) => std::f64::consts::TAU / w,
            _ => unreachable!("validated"),
        }
    }

    pub fn omega0(&self) -> f64 {
        self.params.omega0.unwrap_or(1.0)
    }

    pub fn theta_exponent(&self) -> f64 {
        self.params.theta_exponent.unwrap_or(2.0)
    }
}

/// Sweepable scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    TotalTime,
    Omega0,
    GridPoints,
    ThetaExponent,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "T" => Ok(SweepParam::TotalTime),
            "omega0" => Ok(SweepParam::Omega0),
            "grid_points" => Ok(SweepParam::GridPoints),
            "theta_exponent" => Ok(SweepParam::ThetaExponent),
            other => Err(Error::Validation(format!(
                "sweep parameter must be one of T, omega0, grid_points, theta_exponent; got {other}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::TotalTime => "T",
            SweepParam::Omega0 => "omega0",
            SweepParam::GridPoints => "grid_points",
            SweepParam::ThetaExponent => "theta_exponent",
        }
    }

    /// Returns a copy of `sc` with this parameter overridden.
    pub fn apply(&self, sc: &Scenario, value: f64) -> Result<Scenario> {
        let mut out = sc.clone();
        match self {
            SweepParam::TotalTime => {
                out.params.t_total = Some(value);
                out.params.omega = None;
            }
            SweepParam::Omega0 => out.params.omega0 = Some(value),
            SweepParam::GridPoints => {
                if value < 3.0 || value.fract() != 0.0 {
                    return Err(Error::Validation(format!(
                        "grid_points sweep value {value} is not an integer >= 3"
                    )));
                }
                out.grid_points = value as usize;
            }
            SweepParam::ThetaExponent => out.params.theta_exponent = Some(value),
        }
        out.validate()?;
        Ok(out)
    }
}
