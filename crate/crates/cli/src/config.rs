//! Run configuration: a flat set of optional settings filled from a TOML file
//! and overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use pickands::estimators::{Method, TruncationPolicy};
use pickands::maxstable::Representation;
use pickands::model::JumpLaw;
use pickands::{LevyModel, ProcessModel, VarianceFunction};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `W = sqrt(2) B_alpha - |t|^alpha`.
    Fbm,
    /// `sigma^2(t) = scale |t|^alpha`.
    Power,
    /// `sigma^2(t) = scale ln(1 + |t|)`.
    Log,
    /// Lévy process, one-sided.
    Levy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Fdd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Series bound for Gaussian models, Lévy bound otherwise.
    Series,
    /// Closed form for `sigma^2(t) >= C^2 |t|^kappa` with `C^2 = scale`, `kappa = alpha`.
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReprArg {
    Spectral,
    SumNormalized,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Spectral => Representation::Spectral,
            ReprArg::SumNormalized => Representation::SumNormalized,
        }
    }
}

/// Every setting a run may use. Unset fields fall back to command defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// TOML file with the same keys as the long flags (dashes become underscores)
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    /// Lévy diffusion coefficient
    #[arg(long)]
    pub phi_diffusion: Option<f64>,
    /// Lévy jump intensity
    #[arg(long)]
    pub phi_jump_rate: Option<f64>,
    /// Jump law: constant:SIZE, normal:MEAN:SD or exponential:RATE
    #[arg(long)]
    pub phi_jump: Option<String>,
    /// Standard Brownian Lévy model
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub brownian: Option<bool>,

    #[arg(long)]
    pub delta: Option<f64>,
    /// Grid mesh for delta = 0
    #[arg(long)]
    pub mesh: Option<f64>,
    /// Window T of windowed estimators
    #[arg(long)]
    pub window: Option<f64>,
    /// Estimator name (alias names accepted)
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial truncation horizon in grid steps
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub max_horizon: Option<usize>,
    /// Doubling stops once the change is below this many standard errors
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Level n of the block estimator
    #[arg(long)]
    pub level: Option<f64>,
    /// Block length r_n
    #[arg(long)]
    pub block: Option<usize>,

    #[arg(long, value_enum)]
    pub check: Option<Check>,
    #[arg(long, value_enum)]
    pub representation: Option<ReprArg>,
    /// Number of max-stable fields to export
    #[arg(long)]
    pub samples: Option<usize>,

    #[arg(long, value_enum)]
    pub bound: Option<BoundKind>,

    /// Small-ball levels, comma separated
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// Initial small-ball cutoff K
    #[arg(long = "cutoff")]
    pub cutoff: Option<usize>,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip)]
    pub format: Option<Format>,
}

pub const DEFAULT_REPS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;

impl Settings {
    /// Overlay `self` (flags) on the file named by `--config`, if any.
    pub fn resolve(self) -> Result<Settings> {
        match &self.config {
            Some(path) => Ok(Settings::load(path)?.overlay(self)),
            None => Ok(self),
        }
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `top` replace those of `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        let mut base = serde_json::to_value(&self).expect("settings serialize");
        let over = serde_json::to_value(&top).expect("settings serialize");
        if let (Some(b), Some(o)) = (base.as_object_mut(), over.as_object()) {
            for (k, v) in o {
                if !v.is_null() {
                    b.insert(k.clone(), v.clone());
                }
            }
        }
        let mut merged: Settings = serde_json::from_value(base).expect("settings round trip");
        merged.config = top.config;
        merged.out = top.out.or(self.out);
        merged.format = top.format.or(self.format);
        merged
    }

    pub fn reps(&self) -> usize {
        self.reps.unwrap_or(DEFAULT_REPS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }

    pub fn family(&self) -> Family {
        match self.family {
            Some(f) => f,
            None if self.brownian == Some(true) || self.phi_diffusion.is_some() || self.phi_jump_rate.is_some() => {
                Family::Levy
            }
            None => Family::Fbm,
        }
    }

    pub fn method(&self) -> Result<Option<Method>> {
        self.method.as_deref().map(|m| m.parse::<Method>().map_err(|e| anyhow!(e))).transpose()
    }

    pub fn delta(&self) -> Result<f64> {
        let d = self.delta.ok_or_else(|| anyhow!("--delta is required"))?;
        if !(d >= 0.0) || !d.is_finite() {
            bail!("--delta must be a finite nonnegative number, got {d}");
        }
        Ok(d)
    }

    pub fn policy(&self) -> Result<TruncationPolicy> {
        let d = TruncationPolicy::default();
        let p = TruncationPolicy {
            initial_horizon: self.horizon.unwrap_or(d.initial_horizon),
            growth: d.growth,
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_horizon: self.max_horizon.unwrap_or(d.max_horizon.max(self.horizon.unwrap_or(0))),
        };
        p.validate()?;
        Ok(p)
    }

    fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or_else(|| anyhow!("--alpha is required for family {:?}", self.family()))
    }

    fn scale(&self) -> Result<f64> {
        self.scale.ok_or_else(|| anyhow!("--scale is required for family {:?}", self.family()))
    }

    pub fn variance_function(&self) -> Result<VarianceFunction> {
        let vf = match self.family() {
            Family::Fbm => VarianceFunction::fbm(self.alpha()?),
            Family::Power => VarianceFunction::power(self.alpha()?, self.scale()?),
            Family::Log => VarianceFunction::Logarithmic { scale: self.scale()? },
            Family::Levy => bail!("the Lévy family has no variance function"),
        };
        vf.validate()?;
        Ok(vf)
    }

    pub fn levy_model(&self) -> Result<LevyModel> {
        let brownian = self.brownian == Some(true);
        let jump_law = self.phi_jump.as_deref().map(parse_jump).transpose()?;
        let model = LevyModel {
            diffusion: self.phi_diffusion.unwrap_or(if brownian { 1.0 } else { 0.0 }),
            jump_rate: self.phi_jump_rate.unwrap_or(0.0),
            jump_law,
        };
        if brownian && (model.jump_rate > 0.0 || model.jump_law.is_some()) {
            bail!("--brownian excludes jumps");
        }
        model.validate()?;
        Ok(model)
    }

    pub fn model(&self) -> Result<ProcessModel> {
        match self.family() {
            Family::Levy => Ok(ProcessModel::Levy(self.levy_model()?)),
            _ => Ok(ProcessModel::Gaussian(self.variance_function()?)),
        }
    }

    /// SHA-256 of the canonical JSON of the settings, without seed and output options.
    pub fn config_hash(&self) -> String {
        let mut key = self.clone();
        key.seed = None;
        key.family = Some(self.family());
        let json = serde_json::to_string(&key).expect("settings serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

pub fn parse_jump(s: &str) -> Result<JumpLaw> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts.get(i).ok_or_else(|| anyhow!("jump law '{s}' is missing a parameter"))?.parse::<f64>().context("jump parameter")
    };
    let law = match (parts[0], parts.len()) {
        ("constant", 2) => JumpLaw::Constant { size: num(1)? },
        ("normal", 3) => JumpLaw::Normal { mean: num(1)?, sd: num(2)? },
        ("exponential", 2) => JumpLaw::Exponential { rate: num(1)? },
        _ => bail!("unknown jump law '{s}'; use constant:SIZE, normal:MEAN:SD or exponential:RATE"),
    };
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: Settings = toml::from_str("alpha = 1.5\ndelta = 2.0\nreps = 10\neta = [0.2, 0.1]").unwrap();
        let flags = Settings { delta: Some(0.5), ..Default::default() };
        let s = file.overlay(flags);
        assert_eq!(s.alpha, Some(1.5));
        assert_eq!(s.delta, Some(0.5));
        assert_eq!(s.reps, Some(10));
        assert_eq!(s.eta, Some(vec![0.2, 0.1]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Settings>("alhpa = 1.0").is_err());
    }

    #[test]
    fn hash_ignores_seed_and_output() {
        let a = Settings { alpha: Some(1.0), seed: Some(1), ..Default::default() };
        let b = Settings { alpha: Some(1.0), seed: Some(2), out: Some("x".into()), ..Default::default() };
        let c = Settings { alpha: Some(1.5), ..Default::default() };
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn models_from_settings() {
        let s = Settings { brownian: Some(true), ..Default::default() };
        assert_eq!(s.family(), Family::Levy);
        assert_eq!(s.levy_model().unwrap(), LevyModel::standard_brownian());
        let j = Settings { family: Some(Family::Levy), phi_jump_rate: Some(1.0), phi_jump: Some("normal:0:1".into()), ..Default::default() };
        assert_eq!(j.levy_model().unwrap().jump_law, Some(JumpLaw::Normal { mean: 0.0, sd: 1.0 }));
        assert!(parse_jump("gamma:1").is_err());
        assert!(Settings::default().model().is_err());
        let bad = Settings { alpha: Some(3.0), ..Default::default() };
        assert!(bad.model().is_err());
    }
}
