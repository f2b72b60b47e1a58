//! Declarative run configuration.
//!
//! A run file is JSON with a versioned `schema` key and unknown keys
//! rejected, so a stored config either reproduces the run that wrote it or
//! fails loudly. Relative paths inside the file resolve against the file's
//! own directory, never the process working directory.

use std::path::{Path, PathBuf};

use pmor::bench::{
    gen_rlc_ladder, gen_second_order, gen_thermal, LadderSpec, SecondOrderSpec, ThermalSpec,
};
use pmor::error::{Error, Result};
use pmor::estimator::InnerProduct;
use pmor::greedy::GreedyConfig;
use pmor::io::manifest::load_system;
use pmor::moment::TermWeights;
use pmor::rbf::KernelSpec;
use pmor::sampling::{decade_tenths, grid, lin_space, log_space, random_subset};
use pmor::system::{AffineParametricSystem, ParameterPoint};
use serde::{Deserialize, Serialize};

pub const RUN_SCHEMA: &str = "pmor-run/1";

/// One sampled axis of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisSpec {
    Linear { lo: f64, hi: f64, n: usize },
    Log { lo: f64, hi: f64, n: usize },
    /// Tenth-of-a-decade ladder `scale * 10^(i/10)`, `i = 0..count`.
    DecadeTenths { scale: f64, count: usize },
    Values(Vec<f64>),
}

impl AxisSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        match self {
            AxisSpec::Linear { lo, hi, n } => lin_space(*lo, *hi, *n),
            AxisSpec::Log { lo, hi, n } => log_space(*lo, *hi, *n),
            AxisSpec::DecadeTenths { scale, count } => decade_tenths(*scale, *count),
            AxisSpec::Values(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidArgument("explicit axis must be nonempty".into()));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Seeded down-sampling of a built point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetSpec {
    pub count: usize,
    pub seed: u64,
}

/// A point set: a frequency axis crossed with zero or more parameter axes,
/// optionally reduced to a seeded random subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub frequency: AxisSpec,
    #[serde(default)]
    pub params: Vec<AxisSpec>,
    #[serde(default)]
    pub subset: Option<SubsetSpec>,
}

impl SetSpec {
    pub fn build(&self) -> Result<Vec<ParameterPoint>> {
        let freqs = self.frequency.build()?;
        let axes = self
            .params
            .iter()
            .map(AxisSpec::build)
            .collect::<Result<Vec<_>>>()?;
        let full = grid(&freqs, &axes)?;
        match &self.subset {
            Some(sub) => random_subset(&full, sub.count, sub.seed),
            None => Ok(full),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    RlcLadder(LadderSpec),
    Thermal(ThermalSpec),
    SecondOrder(SecondOrderSpec),
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<AffineParametricSystem> {
        match self {
            GeneratorSpec::RlcLadder(spec) => gen_rlc_ladder(spec),
            GeneratorSpec::Thermal(spec) => gen_thermal(spec),
            GeneratorSpec::SecondOrder(spec) => gen_second_order(spec),
        }
    }
}

/// Where the full-order system comes from. The enum makes "exactly one
/// source" structural: a config naming both keys fails to parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSource {
    Manifest { path: PathBuf },
    Generator(GeneratorSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fixed,
    Ipsue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub system: SystemSource,
    pub algorithm: Algorithm,
    /// Training set for the fixed-set driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<SetSpec>,
    /// Coarse/fine sets for the surrogate-adaptive driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine: Option<SetSpec>,
    /// Held-out set for `validate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<SetSpec>,
    pub tol: f64,
    pub eta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_add: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_used: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_indices: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_block_cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_constant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_surrogate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<InnerProduct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<TermWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != RUN_SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported run schema '{}', expected '{RUN_SCHEMA}'",
                self.schema
            )));
        }
        match self.algorithm {
            Algorithm::Fixed => {
                if self.training.is_none() {
                    return Err(Error::InvalidArgument(
                        "algorithm 'fixed' needs a 'training' set".into(),
                    ));
                }
                if self.coarse.is_some() || self.fine.is_some() {
                    return Err(Error::InvalidArgument(
                        "'coarse'/'fine' sets belong to algorithm 'ipsue'".into(),
                    ));
                }
            }
            Algorithm::Ipsue => {
                if self.coarse.is_none() || self.fine.is_none() {
                    return Err(Error::InvalidArgument(
                        "algorithm 'ipsue' needs both 'coarse' and 'fine' sets".into(),
                    ));
                }
                if self.training.is_some() {
                    return Err(Error::InvalidArgument(
                        "'training' belongs to algorithm 'fixed'".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Materialize the full-order system; `base` is the config file's
    /// directory, against which a relative manifest path resolves.
    pub fn build_system(&self, base: &Path) -> Result<AffineParametricSystem> {
        match &self.system {
            SystemSource::Manifest { path } => load_system(&resolve(base, path)),
            SystemSource::Generator(gen) => gen.build(),
        }
    }

    /// Driver settings with unset fields at their defaults; a command-line
    /// seed wins over the config's.
    pub fn greedy_config(&self, seed_override: Option<u64>) -> GreedyConfig {
        let mut cfg = GreedyConfig::new(self.tol, self.eta);
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = self.n_add {
            cfg.n_add = v;
        }
        if let Some(v) = seed_override.or(self.seed) {
            cfg.seed = v;
        }
        if let Some(v) = self.kernel {
            cfg.kernel = v;
        }
        if let Some(v) = self.skip_used {
            cfg.skip_used = v;
        }
        cfg.initial_indices = self.initial_indices;
        if let Some(v) = self.max_block_cols {
            cfg.max_block_cols = v;
        }
        if let Some(v) = self.tail_constant {
            cfg.tail_constant = v;
        }
        if let Some(v) = self.log_surrogate {
            cfg.log_surrogate = v;
        }
        if let Some(v) = self.inner {
            cfg.inner = v;
        }
        if let Some(v) = self.weights {
            cfg.weights = v;
        }
        cfg
    }
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
