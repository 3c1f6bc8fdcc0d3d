//! Monte-Carlo experiment harness.
//!
//! A trial generates a random truth network, derives the network under
//! training for the experiment's condition, picks a query and fact values,
//! trains, and then evaluates both networks on the query. Trials are
//! independent: each one draws from its own seeded streams, so the record
//! for trial `i` is the same whether trials run sequentially or on any
//! number of threads.

mod presets;
mod report;
mod stats;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{run_with_plan, FactValueMap, FiringPlan, QuerySpec, RunStatus};
use crate::network::{
    derive_condition, generate_random_network, rule_capacity, NetworkCondition, RuleFactNetwork,
    WeightReset,
};
use crate::rng::{self, Substream};
use crate::training::{train, TrainingConfig};

pub use presets::{preset_suite, PRESET_NAMES};
pub use report::{write_summary_csv, write_trials_csv, SummaryRow};
pub use stats::{summarize, Aggregates, SummaryStats, ERROR_BUCKET_BOUNDARY};

pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub num_facts: usize,
    /// Ignored for fully connected trainees; the truth network still uses it.
    pub num_rules: usize,
    pub condition: NetworkCondition,
    /// Starting weights of the trainee.
    pub weight_reset: WeightReset,
    pub config: TrainingConfig,
    pub trials: usize,
    pub base_seed: u64,
    /// Share truth networks, queries and fact values across specs that
    /// differ only in condition or training settings.
    pub paired: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            num_facts: 100,
            num_rules: 100,
            condition: NetworkCondition::Base,
            weight_reset: WeightReset::default(),
            config: TrainingConfig::default(),
            trials: DEFAULT_TRIALS,
            base_seed: 1,
            paired: false,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameters("trials must be at least 1".into()));
        }
        if self.num_facts < 3 {
            return Err(Error::InvalidParameters(format!(
                "num_facts must be at least 3, got {}",
                self.num_facts
            )));
        }
        if self.num_rules == 0 {
            return Err(Error::InvalidParameters(
                "num_rules must be at least 1".into(),
            ));
        }
        let capacity = rule_capacity(self.num_facts);
        if self.num_rules > capacity {
            return Err(Error::InfeasibleNetwork {
                requested: self.num_rules,
                capacity,
                num_facts: self.num_facts,
            });
        }
        self.condition.validate()?;
        self.config.validate()
    }

    /// Seed salt for a trial. Paired specs share streams with every spec of
    /// the same size; unpaired specs get streams of their own.
    fn salt(&self) -> u64 {
        if self.paired {
            rng::mix(&[self.num_facts as u64, self.num_rules as u64])
        } else {
            rng::fnv1a(
                format!(
                    "{}|{}|{}|{}|{}|{}|{}|{}",
                    self.num_facts,
                    self.num_rules,
                    self.condition,
                    self.weight_reset,
                    self.config.epochs,
                    self.config.velocity,
                    self.config.mode,
                    self.config.update_rule
                )
                .as_bytes(),
            )
        }
    }

    fn stream(&self, trial_index: usize, sub: Substream) -> rng::Stream {
        rng::trial_stream(self.base_seed, self.salt(), trial_index as u64, sub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Evaluated,
    ExcludedNoCompletion,
    ExcludedImmediate,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Evaluated => "evaluated",
            Self::ExcludedNoCompletion => "excluded_no_completion",
            Self::ExcludedImmediate => "excluded_immediate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub status: TrialStatus,
    pub truth_value: f64,
    pub trained_value: f64,
    /// `|truth_value − trained_value|`.
    pub abs_error: f64,
    pub train_duration: Duration,
    pub eval_duration: Duration,
}

impl TrialRecord {
    /// Equality ignoring durations.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.trial_index == other.trial_index
            && self.status == other.status
            && self.truth_value.to_bits() == other.truth_value.to_bits()
            && self.trained_value.to_bits() == other.trained_value.to_bits()
            && self.abs_error.to_bits() == other.abs_error.to_bits()
    }
}

/// Everything a trial produced, for callers that want more than the record.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub record: TrialRecord,
    pub truth: RuleFactNetwork,
    pub trainee_before: RuleFactNetwork,
    pub trainee_after: RuleFactNetwork,
    pub query: QuerySpec,
    pub epochs: Vec<crate::training::EpochReport>,
}

pub fn run_trial(spec: &ExperimentSpec, trial_index: usize) -> Result<TrialRecord> {
    run_trial_detailed(spec, trial_index, spec_derivation(spec)).map(|d| d.record)
}

/// The derivation [`run_trial`] uses: [`derive_condition`] with the spec's reset.
pub fn spec_derivation(
    spec: &ExperimentSpec,
) -> impl FnOnce(&RuleFactNetwork, NetworkCondition, &mut rng::Stream) -> Result<RuleFactNetwork> {
    let reset = spec.weight_reset;
    move |truth, condition, rng| derive_condition(truth, condition, reset, rng)
}

/// Runs one trial with a caller-supplied derivation of the trainee from the
/// truth network.
pub fn run_trial_detailed<F>(
    spec: &ExperimentSpec,
    trial_index: usize,
    derive: F,
) -> Result<TrialDetail>
where
    F: FnOnce(&RuleFactNetwork, NetworkCondition, &mut rng::Stream) -> Result<RuleFactNetwork>,
{
    let truth = generate_random_network(
        spec.num_facts,
        spec.num_rules,
        &mut spec.stream(trial_index, Substream::Truth),
    )?;
    let trainee_before = derive(
        &truth,
        spec.condition,
        &mut spec.stream(trial_index, Substream::Derive),
    )?;

    let mut query_rng = spec.stream(trial_index, Substream::Query);
    let query = QuerySpec::random_any(spec.num_facts, &mut query_rng);
    let base_values = FactValueMap::random(spec.num_facts, &mut query_rng);

    let mut trainee = trainee_before.clone();
    let started = Instant::now();
    let epochs = train(
        &mut trainee,
        &truth,
        &query,
        &base_values,
        &spec.config,
        &mut spec.stream(trial_index, Substream::Training),
    )?;
    let train_duration = started.elapsed();

    let started = Instant::now();
    let eval_values = if spec.config.mode.random_facts() {
        FactValueMap::random(
            spec.num_facts,
            &mut spec.stream(trial_index, Substream::Evaluation),
        )
    } else {
        base_values
    };
    let truth_run = run_with_plan(&truth, &FiringPlan::new(&truth), &query, &eval_values)?;
    let trained_run = run_with_plan(&trainee, &FiringPlan::new(&trainee), &query, &eval_values)?;
    let eval_duration = started.elapsed();

    let status = if truth_run.status == RunStatus::ImmediateCompletion {
        TrialStatus::ExcludedImmediate
    } else if truth_run.completed() && trained_run.completed() {
        TrialStatus::Evaluated
    } else {
        TrialStatus::ExcludedNoCompletion
    };

    let record = TrialRecord {
        trial_index,
        status,
        truth_value: truth_run.target_value,
        trained_value: trained_run.target_value,
        abs_error: (truth_run.target_value - trained_run.target_value).abs(),
        train_duration,
        eval_duration,
    };
    Ok(TrialDetail {
        record,
        truth,
        trainee_before,
        trainee_after: trainee,
        query,
        epochs,
    })
}

/// How many worker threads an experiment may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    Threads(usize),
    /// Rayon's global pool.
    #[default]
    Auto,
}

impl std::str::FromStr for Parallelism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Self::Auto),
            "1" | "sequential" => Ok(Self::Sequential),
            n => match n.parse::<usize>() {
                Ok(0) | Err(_) => Err(Error::InvalidParameters(format!(
                    "parallelism must be 'auto' or a positive integer, got '{s}'"
                ))),
                Ok(k) => Ok(Self::Threads(k)),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
}

pub fn run_experiment(spec: &ExperimentSpec, parallelism: Parallelism) -> Result<ExperimentResult> {
    spec.validate()?;
    let run_all = || -> Result<Vec<TrialRecord>> {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| run_trial(spec, i))
            .collect()
    };
    let records = match parallelism {
        Parallelism::Sequential => (0..spec.trials)
            .map(|i| run_trial(spec, i))
            .collect::<Result<Vec<_>>>()?,
        Parallelism::Auto => run_all()?,
        Parallelism::Threads(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameters(format!("cannot start thread pool: {e}")))?
            .install(run_all)?,
    };
    let summary = summarize(&records);
    Ok(ExperimentResult { records, summary })
}
