//! Error-distribution training of rule weightings.
//!
//! Each epoch runs the truth network and the network under training forward
//! on the same query and fact values. The difference in target values is the
//! epoch's error. Every fired rule that feeds the target, directly or through
//! other rules, receives a share of that error proportional to its
//! contribution: the rule that last wrote the target contributes 1, and a rule
//! feeding input `x` of a contributing rule `R` adds `c(R) · weight_x(R)`.
//! A contributing rule then shifts `velocity · |error| · share · |v_a − v_b|`
//! of weighting between its two inputs (see [`UpdateRule`] for the unscaled
//! variant): toward the higher-valued input when the target must rise, toward
//! the lower-valued one when it must fall.
//!
//! Only weightings change. Training never adds, removes or rewires a rule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::inference::{run_with_plan, FactValueMap, FiringPlan, QuerySpec, RunOutcome, RunStatus};
use crate::network::{FactId, RuleFactNetwork, RuleId};

/// Input values closer than this are treated as equal and the rule is left alone.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrainingMode {
    /// One query, one fixed set of fact values.
    PathSameFacts,
    /// One query, fresh random fact values every epoch.
    PathRandomFacts,
    /// A fresh random query every epoch, fixed fact values.
    MultiPathSameFacts,
    /// A fresh random query and fresh random fact values every epoch.
    MultiPathRandomFacts,
}

impl TrainingMode {
    pub const ALL: [TrainingMode; 4] = [
        Self::PathSameFacts,
        Self::PathRandomFacts,
        Self::MultiPathSameFacts,
        Self::MultiPathRandomFacts,
    ];

    pub fn random_facts(self) -> bool {
        matches!(self, Self::PathRandomFacts | Self::MultiPathRandomFacts)
    }

    pub fn multi_path(self) -> bool {
        matches!(self, Self::MultiPathSameFacts | Self::MultiPathRandomFacts)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::PathSameFacts => "path-same-facts",
            Self::PathRandomFacts => "path-random-facts",
            Self::MultiPathSameFacts => "multi-path-same-facts",
            Self::MultiPathRandomFacts => "multi-path-random-facts",
        }
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown training mode '{s}'")))
    }
}

/// How a contributing rule's weight shift is sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum UpdateRule {
    /// `δ = velocity · |error| · share`.
    ZeroSumShift,
    /// As above, additionally scaled by `|v_a − v_b|`.
    #[default]
    ValueScaledShift,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ZeroSumShift => "zero-sum",
            Self::ValueScaledShift => "value-scaled",
        }
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero-sum" | "zero-sum-shift" => Ok(Self::ZeroSumShift),
            "value-scaled" | "value-scaled-shift" => Ok(Self::ValueScaledShift),
            other => Err(Error::InvalidConfig(format!(
                "unknown update rule '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub velocity: f64,
    pub epochs: usize,
    pub mode: TrainingMode,
    pub update_rule: UpdateRule,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            velocity: 0.1,
            epochs: 100,
            mode: TrainingMode::PathSameFacts,
            update_rule: UpdateRule::ValueScaledShift,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.velocity > 0.0 && self.velocity <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "velocity must be in (0, 1], got {}",
                self.velocity
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    /// Unnormalized contribution: product of intervening input weights,
    /// summed over every path to the target.
    pub raw: f64,
    pub share: f64,
    /// Values the rule read when it fired.
    pub input_values: [f64; 2],
}

/// Contribution of each fired rule to one target fact.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContributionMap {
    entries: BTreeMap<RuleId, Contribution>,
}

impl ContributionMap {
    pub fn get(&self, rule: RuleId) -> Option<&Contribution> {
        self.entries.get(&rule)
    }

    pub fn share(&self, rule: RuleId) -> f64 {
        self.entries.get(&rule).map_or(0.0, |c| c.share)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RuleId, &Contribution)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn shares(&self) -> BTreeMap<RuleId, f64> {
        self.entries.iter().map(|(&k, c)| (k, c.share)).collect()
    }
}

/// Walks the run's firings backward from the last write of `target`.
pub fn compute_contributions(
    net: &RuleFactNetwork,
    outcome: &RunOutcome,
    target: FactId,
) -> Result<ContributionMap> {
    if outcome.status != RunStatus::Completed {
        return Err(Error::NoContribution);
    }
    let last = outcome
        .firings
        .iter()
        .rposition(|f| net.rule(f.rule).output == target)
        .ok_or(Error::NoContribution)?;

    let mut raw = vec![0.0f64; net.num_rules()];
    raw[outcome.firings[last].rule.0] = 1.0;
    // A writer always fires before its readers, so a reverse sweep sees each
    // rule's final contribution before propagating it.
    for firing in outcome.firings[..=last].iter().rev() {
        let c = raw[firing.rule.0];
        if c == 0.0 {
            continue;
        }
        let weights = net.rule(firing.rule).weights();
        for (source, w) in firing.input_sources.iter().zip(weights) {
            if let Some(src) = source {
                raw[src.0] += c * w;
            }
        }
    }

    let total: f64 = outcome.firings[..=last].iter().map(|f| raw[f.rule.0]).sum();
    let entries = outcome.firings[..=last]
        .iter()
        .filter(|f| raw[f.rule.0] > 0.0)
        .map(|f| {
            let r = raw[f.rule.0];
            (
                f.rule,
                Contribution {
                    raw: r,
                    share: r / total,
                    input_values: f.input_values,
                },
            )
        })
        .collect();
    Ok(ContributionMap { entries })
}

/// Shifts weighting on every contributing rule. Returns how many rules
/// actually changed.
pub fn apply_update(
    net: &mut RuleFactNetwork,
    contributions: &ContributionMap,
    error: f64,
    velocity: f64,
    update_rule: UpdateRule,
) -> usize {
    if error == 0.0 {
        return 0;
    }
    let mut updated = 0;
    for (id, c) in contributions.iter() {
        let [va, vb] = c.input_values;
        let spread = va - vb;
        if spread.abs() <= TIE_TOLERANCE {
            continue;
        }
        let mut delta = velocity * error.abs() * c.share;
        if update_rule == UpdateRule::ValueScaledShift {
            delta *= spread.abs();
        }
        // Positive moves weight onto input a.
        let toward_a = if (error > 0.0) == (spread > 0.0) {
            delta
        } else {
            -delta
        };

        let rule = net.rule(id);
        let (old_a, old_b) = (rule.weight_a, rule.weight_b);
        let wa = (old_a + toward_a).clamp(0.0, 1.0);
        let wb = (old_b - toward_a).clamp(0.0, 1.0);
        let sum = wa + wb;
        let (wa, wb) = (wa / sum, wb / sum);
        if wa != old_a || wb != old_b {
            net.set_weights(id, wa, wb);
            updated += 1;
        }
    }
    updated
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch_index: usize,
    pub query: QuerySpec,
    pub truth_status: RunStatus,
    pub trainee_status: RunStatus,
    pub truth_value: f64,
    pub trainee_value: f64,
    /// `truth_value − trainee_value`.
    pub error: f64,
    pub updated_rules: usize,
}

/// Trains `trainee` toward `truth` for `config.epochs` epochs.
///
/// Multi-path modes draw a fresh query each epoch; random-facts modes draw
/// fresh fact values each epoch. Epochs in which either run fails to complete
/// are reported with no update.
pub fn train<R: Rng + ?Sized>(
    trainee: &mut RuleFactNetwork,
    truth: &RuleFactNetwork,
    base_query: &QuerySpec,
    base_values: &FactValueMap,
    config: &TrainingConfig,
    rng: &mut R,
) -> Result<Vec<EpochReport>> {
    config.validate()?;
    if trainee.num_facts() != truth.num_facts() {
        return Err(Error::DimensionMismatch {
            trainee: trainee.num_facts(),
            truth: truth.num_facts(),
        });
    }
    base_query.validate(truth)?;
    let n = truth.num_facts();
    let truth_plan = FiringPlan::new(truth);
    let trainee_plan = FiringPlan::new(trainee);
    let mode = config.mode;

    let mut reports = Vec::with_capacity(config.epochs);
    let mut scratch_values;
    for epoch_index in 0..config.epochs {
        let query = if mode.multi_path() {
            QuerySpec::random_distinct(n, rng)
        } else {
            *base_query
        };
        let values = if mode.random_facts() {
            scratch_values = FactValueMap::random(n, rng);
            &scratch_values
        } else {
            base_values
        };

        let truth_run = run_with_plan(truth, &truth_plan, &query, values)?;
        let trainee_run = run_with_plan(trainee, &trainee_plan, &query, values)?;
        let error = truth_run.target_value - trainee_run.target_value;

        let updated_rules = if truth_run.completed() && trainee_run.completed() {
            let contributions = compute_contributions(trainee, &trainee_run, query.target_fact)?;
            apply_update(
                trainee,
                &contributions,
                error,
                config.velocity,
                config.update_rule,
            )
        } else {
            0
        };

        reports.push(EpochReport {
            epoch_index,
            query,
            truth_status: truth_run.status,
            trainee_status: trainee_run.status,
            truth_value: truth_run.target_value,
            trainee_value: trainee_run.target_value,
            error,
            updated_rules,
        });
    }
    Ok(reports)
}
