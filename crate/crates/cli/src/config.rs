//! JSON run configuration shared by `simulate` and `sweep`.
//!
//! See `docs/config.md` for the schema. Unknown fields are rejected so that
//! typos do not silently fall back to defaults.

use std::path::Path;

use coderel::harness::{BaseModel, SweepAxis, SweepConfig, SweepValue, DEFAULT_LEVELS};
use coderel::model::{CategorySet, CoderModel};
use coderel::refine::{PairResidual, RefineOptions};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub model: ModelSpec,
    pub raters: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub refine: Option<RefineSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub categories: Option<Vec<String>>,
    pub beta: f64,
    pub tau: Vec<f64>,
    pub p: Vec<f64>,
    pub n_items: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Beta,
    Tau,
    P,
    #[serde(alias = "R")]
    Raters,
    #[serde(alias = "N")]
    Items,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<AxisValue>,
    pub replications: usize,
    #[serde(default)]
    pub quantile_levels: Option<Vec<f64>>,
    #[serde(default)]
    pub baselines: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairResidualSpec {
    FullCross,
    DiagonalOnly,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineSpec {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub restarts: Option<usize>,
    pub pair_residual: Option<PairResidualSpec>,
}

impl RunConfig {
    /// Reads and schema-checks a config file. Errors are usage errors.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    pub fn base(&self) -> coderel::Result<BaseModel> {
        let m = &self.model;
        let categories = match &m.categories {
            Some(labels) => CategorySet::new(labels.iter().cloned())?,
            None => CategorySet::numbered(m.tau.len())?,
        };
        Ok(BaseModel {
            categories,
            beta: m.beta,
            tau: m.tau.clone(),
            p: m.p.clone(),
            n_items: m.n_items,
        })
    }

    pub fn model(&self) -> coderel::Result<CoderModel> {
        self.base()?.build()
    }

    pub fn refine_options(&self) -> RefineOptions {
        let mut opts = RefineOptions::default();
        if let Some(r) = &self.refine {
            opts.max_iters = r.max_iters.unwrap_or(opts.max_iters);
            opts.tol = r.tol.unwrap_or(opts.tol);
            opts.restarts = r.restarts.unwrap_or(opts.restarts);
            if let Some(pr) = r.pair_residual {
                opts.pair_residual = match pr {
                    PairResidualSpec::FullCross => PairResidual::FullCross,
                    PairResidualSpec::DiagonalOnly => PairResidual::DiagonalOnly,
                };
            }
        }
        opts
    }

    /// The sweep section as a harness config. A missing section is a usage error.
    pub fn sweep_config(&self) -> Result<coderel::Result<SweepConfig>, String> {
        let spec = self.sweep.as_ref().ok_or("config has no \"sweep\" section")?;
        let axis = match spec.axis {
            Axis::Beta => SweepAxis::Beta,
            Axis::Tau => SweepAxis::Tau,
            Axis::P => SweepAxis::P,
            Axis::Raters => SweepAxis::Raters,
            Axis::Items => SweepAxis::Items,
        };
        let values = spec
            .values
            .iter()
            .map(|v| match v {
                AxisValue::Scalar(x) => SweepValue::Scalar(*x),
                AxisValue::Vector(v) => SweepValue::Vector(v.clone()),
            })
            .collect();
        Ok(self.base().map(|base| {
            let mut cfg = SweepConfig::new(base, self.raters, axis, values);
            cfg.replications = spec.replications;
            cfg.master_seed = self.seed;
            cfg.quantile_levels = spec
                .quantile_levels
                .clone()
                .unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
            cfg.baselines = spec.baselines;
            cfg.refine = self.refine_options();
            cfg
        }))
    }
}
