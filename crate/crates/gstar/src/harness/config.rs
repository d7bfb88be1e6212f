//! Declarative experiment configuration: instance family, horizon grid,
//! feasible set, algorithm with constants, seeds and output paths.
//! Schema-validated on load; every constant a bound audit needs must be
//! derivable from the config.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::set::ConstraintSet;

use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub instance: InstanceSpec,
    /// Horizons to run; one report row per (seed, T).
    pub t_grid: Vec<usize>,
    pub dim: usize,
    pub set: ConstraintSet,
    pub algorithm: AlgorithmSpec,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_json: Option<PathBuf>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Fourth-power regression with Gaussian data and noise level sigma.
    LpRegression { sigma: f64 },
    /// Logistic classification with uniform data and label bias delta.
    CrossEntropy { delta: f64 },
    /// Vanishing-curvature 1-D regression, decay exponent p.
    Prop1Case2 { p: f64 },
    /// The 1-D drifting-coefficient quadratic construction (odd T >= 7).
    Prop1Case3,
    /// The 1-D alternating interpolating construction.
    Prop1Case4,
    /// Rademacher linear-loss adversary with gradient scale m.
    LowerBound { m: f64 },
    /// Sampled consistent least squares.
    StochasticConsistentLs,
    /// Sampled least squares with Gaussian target noise.
    StochasticNoisyLs { sigma: f64 },
    /// Sampled fourth-power regression with near-consistent targets.
    StochasticLp4 { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    /// Constant-step projected gradient descent; with no eta given, the
    /// oracle rate min{D / sqrt(G*), 1/(2L)} is used.
    Ogd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    /// Norm-adaptive descent; default alpha is sqrt(2) D / 2.
    AdagradNorm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
    /// Adaptive FTRL on linearized losses; default lambda is 1/(2 D^2).
    Adaftrl {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ogd { .. } => "ogd",
            Self::AdagradNorm { .. } => "adagrad_norm",
            Self::Adaftrl { .. } => "adaftrl",
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(json).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| *t == 0) {
            return fail("t_grid must be non-empty with positive horizons".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.dim == 0 {
            return fail("dim must be at least 1".into());
        }
        if self.set.dim() != self.dim {
            return fail(format!(
                "set dimension {} does not match dim {}",
                self.set.dim(),
                self.dim
            ));
        }
        match &self.instance {
            InstanceSpec::LpRegression { sigma } => {
                if !(0.0..=1.0).contains(sigma) {
                    return fail(format!("lp noise level must be in [0, 1], got {sigma}"));
                }
            }
            InstanceSpec::CrossEntropy { delta } => {
                if !(0.9..=1.0).contains(delta) {
                    return fail(format!("label bias must be in [0.9, 1], got {delta}"));
                }
            }
            InstanceSpec::Prop1Case2 { p } => {
                if self.dim != 1 {
                    return fail("this 1-D construction needs dim = 1".into());
                }
                if !(*p > 0.0 && p.is_finite()) {
                    return fail(format!("decay exponent must be positive, got {p}"));
                }
            }
            InstanceSpec::Prop1Case3 => {
                if self.dim != 1 {
                    return fail("this 1-D construction needs dim = 1".into());
                }
                if let Some(t) = self.t_grid.iter().find(|t| **t < 7 || **t % 2 == 0) {
                    return fail(format!("the construction needs odd T >= 7, got {t}"));
                }
            }
            InstanceSpec::Prop1Case4 => {
                if self.dim != 1 {
                    return fail("this 1-D construction needs dim = 1".into());
                }
            }
            InstanceSpec::LowerBound { m } => {
                if !(*m > 0.0 && m.is_finite()) {
                    return fail(format!("gradient scale must be positive, got {m}"));
                }
            }
            InstanceSpec::StochasticConsistentLs => {}
            InstanceSpec::StochasticNoisyLs { sigma } | InstanceSpec::StochasticLp4 { sigma } => {
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return fail(format!("noise level must be nonnegative, got {sigma}"));
                }
            }
        }
        match &self.algorithm {
            AlgorithmSpec::Ogd { eta: Some(eta) } => {
                if !(*eta > 0.0 && eta.is_finite()) {
                    return fail(format!("eta must be positive, got {eta}"));
                }
            }
            AlgorithmSpec::AdagradNorm { alpha: Some(alpha) } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return fail(format!("alpha must be positive, got {alpha}"));
                }
            }
            AlgorithmSpec::Adaftrl { lambda } => {
                let is_centered_ball = matches!(
                    &self.set,
                    ConstraintSet::Ball { center, .. } if center.norm_sq() == 0.0
                );
                if !is_centered_ball {
                    return fail("adaptive FTRL needs an origin-centered ball".into());
                }
                if let Some(lambda) = lambda {
                    let d = self.set.diameter();
                    let required = 1.0 / (2.0 * d * d);
                    if *lambda < required {
                        return fail(format!(
                            "lambda {lambda} below the required {required}"
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}
