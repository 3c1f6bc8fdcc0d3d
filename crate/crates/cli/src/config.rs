//! Settings layering: command-line flags, then a `key = value` config file,
//! then `GRADES_SEED` (seed only), then built-in defaults.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use grades_core::experiments::{ExperimentSpec, Parallelism};
use grades_core::{NetworkCondition, TrainingMode, UpdateRule, WeightReset};

pub const SEED_ENV: &str = "GRADES_SEED";

/// Every setting that can come from more than one place. `None` means
/// "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub facts: Option<usize>,
    pub rules: Option<usize>,
    pub epochs: Option<usize>,
    pub velocity: Option<f64>,
    pub mode: Option<TrainingMode>,
    pub condition: Option<NetworkCondition>,
    pub update_rule: Option<UpdateRule>,
    pub weight_reset: Option<WeightReset>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub paired: Option<bool>,
    pub parallelism: Option<Parallelism>,
}

fn parse_value<T>(key: &str, value: &str) -> anyhow::Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("bad value '{value}' for '{key}': {e}"))
}

fn parse_bool(key: &str, value: &str) -> anyhow::Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("bad value '{value}' for '{key}': expected true or false"),
    }
}

impl Overrides {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// keys accept `-` or `_`.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut o = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value'", i + 1))?;
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            let value = value.trim();
            let k = key.as_str();
            match k {
                "facts" => o.facts = Some(parse_value(k, value)?),
                "rules" => o.rules = Some(parse_value(k, value)?),
                "epochs" => o.epochs = Some(parse_value(k, value)?),
                "velocity" => o.velocity = Some(parse_value(k, value)?),
                "mode" => o.mode = Some(parse_value(k, value)?),
                "condition" => o.condition = Some(parse_value(k, value)?),
                "update-rule" => o.update_rule = Some(parse_value(k, value)?),
                "weight-reset" => o.weight_reset = Some(parse_value(k, value)?),
                "trials" => o.trials = Some(parse_value(k, value)?),
                "seed" => o.seed = Some(parse_value(k, value)?),
                "paired" => o.paired = Some(parse_bool(k, value)?),
                "parallelism" => o.parallelism = Some(parse_value(k, value)?),
                _ => bail!("line {}: unknown key '{key}'", i + 1),
            }
        }
        Ok(o)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    /// Seed from the environment, if set.
    pub fn from_env() -> anyhow::Result<Self> {
        match std::env::var(SEED_ENV) {
            Ok(v) => Ok(Self {
                seed: Some(parse_value(SEED_ENV, v.trim())?),
                ..Default::default()
            }),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Fields set in `self` win; the rest come from `lower`.
    pub fn over(self, lower: Self) -> Self {
        Self {
            facts: self.facts.or(lower.facts),
            rules: self.rules.or(lower.rules),
            epochs: self.epochs.or(lower.epochs),
            velocity: self.velocity.or(lower.velocity),
            mode: self.mode.or(lower.mode),
            condition: self.condition.or(lower.condition),
            update_rule: self.update_rule.or(lower.update_rule),
            weight_reset: self.weight_reset.or(lower.weight_reset),
            trials: self.trials.or(lower.trials),
            seed: self.seed.or(lower.seed),
            paired: self.paired.or(lower.paired),
            parallelism: self.parallelism.or(lower.parallelism),
        }
    }

    /// Settings that apply to any spec, including preset ones.
    pub fn apply_run(&self, spec: &mut ExperimentSpec) {
        if let Some(v) = self.update_rule {
            spec.config.update_rule = v;
        }
        if let Some(v) = self.weight_reset {
            spec.weight_reset = v;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.seed {
            spec.base_seed = v;
        }
        if let Some(v) = self.paired {
            spec.paired = v;
        }
    }

    /// Every setting, on top of the defaults.
    pub fn to_spec(&self) -> ExperimentSpec {
        let mut spec = ExperimentSpec::default();
        if let Some(v) = self.facts {
            spec.num_facts = v;
        }
        if let Some(v) = self.rules {
            spec.num_rules = v;
        }
        if let Some(v) = self.epochs {
            spec.config.epochs = v;
        }
        if let Some(v) = self.velocity {
            spec.config.velocity = v;
        }
        if let Some(v) = self.mode {
            spec.config.mode = v;
        }
        if let Some(v) = self.condition {
            spec.condition = v;
        }
        self.apply_run(&mut spec);
        spec
    }

    pub fn parallelism(&self) -> Parallelism {
        self.parallelism.unwrap_or_default()
    }
}
