//! TOML run configuration. See `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use hcx_core::instances::{InstanceSpec, Recipe};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_bound_tol")]
    pub bound_tol: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_solver_tol() -> f64 {
    1e-12
}

fn default_bound_tol() -> f64 {
    1e-6
}

fn default_budget() -> usize {
    20
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver_tol: default_solver_tol(),
            bound_tol: default_bound_tol(),
            budget: default_budget(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub level: usize,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default = "default_recipe")]
    pub recipe: Recipe,
    /// Relative size of the random perturbation defining `x̃`.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
}

fn default_order() -> u8 {
    1
}

fn default_recipe() -> Recipe {
    Recipe::SmoothPotential
}

fn default_perturbation() -> f64 {
    0.1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: Option<InstanceSpec>,
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        if !(t.solver_tol > 0.0 && t.bound_tol > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        if t.budget < 1 {
            return Err(CliError::Config("budget must be at least 1".into()));
        }
        if let Some(p) = &self.problem {
            if !matches!(p.order, 1 | 2) {
                return Err(CliError::Config(format!("order must be 1 or 2, got {}", p.order)));
            }
            if !(p.perturbation >= 0.0) {
                return Err(CliError::Config("perturbation must be nonnegative".into()));
            }
        }
        Ok(())
    }
}
