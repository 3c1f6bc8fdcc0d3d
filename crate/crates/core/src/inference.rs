//! Forward-chaining inference.
//!
//! A run sets the query's start fact to [`INITIAL_VALUE`] and fires rules in
//! passes. Within a pass, rules are visited in ascending id order and a rule
//! fires when it is *ready*: every rule that writes one of its inputs has
//! already fired. If a pass finds nothing ready (the remaining rules form a
//! cycle) the lowest-id unfired rule fires alone. Each rule fires at most
//! once per run, and the run ends at the first pass that changes no fact by
//! more than [`CHANGE_TOLERANCE`]. On acyclic networks this is plain
//! topological evaluation.
//!
//! Firing order depends only on network structure, so it is computed once as
//! a [`FiringPlan`] and reused across the many runs made during training.

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{FactId, RuleFactNetwork, RuleId};

/// Value assigned to a query's start fact.
pub const INITIAL_VALUE: f64 = 0.99;

/// A pass that moves no fact by more than this ends the run.
pub const CHANGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuerySpec {
    pub start_fact: FactId,
    pub target_fact: FactId,
    pub initial_value: f64,
}

impl QuerySpec {
    pub fn new(start_fact: FactId, target_fact: FactId) -> Self {
        Self {
            start_fact,
            target_fact,
            initial_value: INITIAL_VALUE,
        }
    }

    pub fn validate(&self, net: &RuleFactNetwork) -> Result<()> {
        net.check_fact(self.start_fact)?;
        net.check_fact(self.target_fact)
    }

    /// Uniform over ordered pairs with `start != target`.
    pub fn random_distinct<R: Rng + ?Sized>(num_facts: usize, rng: &mut R) -> Self {
        let start = rng.gen_range(0..num_facts);
        let mut target = rng.gen_range(0..num_facts - 1);
        if target >= start {
            target += 1;
        }
        Self::new(FactId(start), FactId(target))
    }

    /// Start and target drawn independently; they may coincide.
    pub fn random_any<R: Rng + ?Sized>(num_facts: usize, rng: &mut R) -> Self {
        let start = rng.gen_range(0..num_facts);
        let target = rng.gen_range(0..num_facts);
        Self::new(FactId(start), FactId(target))
    }
}

/// One value per fact.
#[derive(Debug, Clone, PartialEq)]
pub struct FactValueMap {
    values: Vec<f64>,
}

impl FactValueMap {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameters(format!(
                "fact value {v} outside [0, 1]"
            )));
        }
        Ok(Self { values })
    }

    pub fn uniform(num_facts: usize, value: f64) -> Self {
        Self {
            values: vec![value.clamp(0.0, 1.0); num_facts],
        }
    }

    /// Independent uniform draw on [0, 1) for every fact.
    pub fn random<R: Rng + ?Sized>(num_facts: usize, rng: &mut R) -> Self {
        Self {
            values: (0..num_facts).map(|_| rng.gen::<f64>()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, fact: FactId) -> f64 {
        self.values[fact.0]
    }

    pub fn set(&mut self, fact: FactId, value: f64) {
        self.values[fact.0] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    fn check_complete(&self, net: &RuleFactNetwork) -> Result<()> {
        if self.values.len() != net.num_facts() {
            return Err(Error::IncompleteValues {
                expected: net.num_facts(),
                actual: self.values.len(),
            });
        }
        Ok(())
    }
}

pub fn random_fact_values<R: Rng + ?Sized>(net: &RuleFactNetwork, rng: &mut R) -> FactValueMap {
    FactValueMap::random(net.num_facts(), rng)
}

/// Copies `values` with the start fact overwritten by the query's initial value.
pub fn initialize_state(
    net: &RuleFactNetwork,
    query: &QuerySpec,
    values: &FactValueMap,
) -> Result<FactValueMap> {
    query.validate(net)?;
    values.check_complete(net)?;
    let mut state = values.clone();
    state.set(query.start_fact, query.initial_value);
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Some fired rule wrote the target fact.
    Completed,
    /// Start and target coincide; nothing fired.
    ImmediateCompletion,
    /// No fired rule wrote the target fact.
    DidNotComplete,
}

/// A single rule firing.
#[derive(Debug, Clone, PartialEq)]
pub struct Firing {
    pub rule: RuleId,
    /// Input values the rule read, in `[input_a, input_b]` order.
    pub input_values: [f64; 2],
    /// The rule whose firing last set each input before this one fired, if any.
    pub input_sources: [Option<RuleId>; 2],
    pub output_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub target_value: f64,
    /// Firings in the order they happened.
    pub firings: Vec<Firing>,
    pub final_values: FactValueMap,
    /// Passes executed, including the final quiescent one.
    pub passes: usize,
}

impl RunOutcome {
    pub fn fired_rules(&self) -> Vec<RuleId> {
        self.firings.iter().map(|f| f.rule).collect()
    }

    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

/// Pass-by-pass firing order for one network structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringPlan {
    passes: Vec<Vec<RuleId>>,
    num_rules: usize,
}

impl FiringPlan {
    pub fn new(net: &RuleFactNetwork) -> Self {
        let rules = net.rules();
        let mut pending_writers = vec![0usize; net.num_facts()];
        for r in rules {
            pending_writers[r.output.0] += 1;
        }
        let mut fired = vec![false; rules.len()];
        let mut remaining = rules.len();
        let mut lowest_unfired = 0;
        let mut passes = Vec::new();

        while remaining > 0 {
            let mut pass = Vec::new();
            for r in &rules[lowest_unfired..] {
                if fired[r.id.0] {
                    continue;
                }
                if pending_writers[r.input_a.0] == 0 && pending_writers[r.input_b.0] == 0 {
                    fired[r.id.0] = true;
                    pending_writers[r.output.0] -= 1;
                    pass.push(r.id);
                }
            }
            if pass.is_empty() {
                // Everything left sits on a cycle; break it at the lowest id.
                let r = &rules[lowest_unfired];
                fired[r.id.0] = true;
                pending_writers[r.output.0] -= 1;
                pass.push(r.id);
            }
            remaining -= pass.len();
            while lowest_unfired < rules.len() && fired[lowest_unfired] {
                lowest_unfired += 1;
            }
            passes.push(pass);
        }
        Self {
            passes,
            num_rules: rules.len(),
        }
    }

    pub fn passes(&self) -> &[Vec<RuleId>] {
        &self.passes
    }

    pub fn order(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.passes.iter().flatten().copied()
    }

    fn matches(&self, net: &RuleFactNetwork) -> bool {
        self.num_rules == net.num_rules()
    }
}

/// Runs the query forward to quiescence.
pub fn run_forward(
    net: &RuleFactNetwork,
    query: &QuerySpec,
    values: &FactValueMap,
) -> Result<RunOutcome> {
    let plan = FiringPlan::new(net);
    run_with_plan(net, &plan, query, values)
}

/// [`run_forward`] with a precomputed plan. The plan must come from a network
/// with the same structure as `net`.
pub fn run_with_plan(
    net: &RuleFactNetwork,
    plan: &FiringPlan,
    query: &QuerySpec,
    values: &FactValueMap,
) -> Result<RunOutcome> {
    debug_assert!(plan.matches(net));
    let mut state = initialize_state(net, query, values)?;
    let target = query.target_fact;

    if query.start_fact == target {
        return Ok(RunOutcome {
            status: RunStatus::ImmediateCompletion,
            target_value: state.get(target),
            firings: Vec::new(),
            final_values: state,
            passes: 0,
        });
    }

    let mut last_writer: Vec<Option<RuleId>> = vec![None; net.num_facts()];
    let mut firings = Vec::with_capacity(net.num_rules());
    let mut passes = 0;
    let mut quiesced = false;

    for pass in plan.passes() {
        passes += 1;
        let mut changed = false;
        for &id in pass {
            let rule = net.rule(id);
            let input_values = [state.get(rule.input_a), state.get(rule.input_b)];
            let output_value = rule.combine(input_values[0], input_values[1]);
            if (output_value - state.get(rule.output)).abs() > CHANGE_TOLERANCE {
                changed = true;
            }
            firings.push(Firing {
                rule: id,
                input_values,
                input_sources: [last_writer[rule.input_a.0], last_writer[rule.input_b.0]],
                output_value,
            });
            state.set(rule.output, output_value);
            last_writer[rule.output.0] = Some(id);
        }
        if !changed {
            quiesced = true;
            break;
        }
    }
    if !quiesced {
        // The closing pass finds no unfired rule and changes nothing.
        passes += 1;
    }

    let status = if last_writer[target.0].is_some() {
        RunStatus::Completed
    } else {
        RunStatus::DidNotComplete
    };
    Ok(RunOutcome {
        status,
        target_value: state.get(target),
        firings,
        final_values: state,
        passes,
    })
}
