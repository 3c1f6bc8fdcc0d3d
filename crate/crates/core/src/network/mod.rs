//! Rule-fact network data model.
//!
//! A network is a set of `num_facts` facts, addressed densely by [`FactId`],
//! and a list of two-input rules. Each rule combines its two input facts into
//! its output fact through a convex weighting `weight_a + weight_b = 1`.
//! Fact *values* are not part of the network; they live in
//! [`crate::inference::FactValueMap`] so one network can be run against many
//! value sets.

mod format;
mod generate;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use format::{load_network, parse_network, save_network, write_network};
pub use generate::{build_fully_connected, derive_condition, generate_random_network, reweight};

/// Tolerance on `weight_a + weight_b == 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(pub usize);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub usize);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Structural identity of a rule: unordered input pair plus output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleKey {
    pub low: FactId,
    pub high: FactId,
    pub output: FactId,
}

impl RuleKey {
    pub fn new(a: FactId, b: FactId, output: FactId) -> Self {
        Self {
            low: a.min(b),
            high: a.max(b),
            output,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: RuleId,
    pub input_a: FactId,
    pub input_b: FactId,
    pub output: FactId,
    pub weight_a: f64,
    pub weight_b: f64,
}

impl Rule {
    pub fn key(&self) -> RuleKey {
        RuleKey::new(self.input_a, self.input_b, self.output)
    }

    pub fn inputs(&self) -> [FactId; 2] {
        [self.input_a, self.input_b]
    }

    pub fn weights(&self) -> [f64; 2] {
        [self.weight_a, self.weight_b]
    }

    /// Output value for the given input values.
    pub fn combine(&self, value_a: f64, value_b: f64) -> f64 {
        (self.weight_a * value_a + self.weight_b * value_b).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleFactNetwork {
    num_facts: usize,
    rules: Vec<Rule>,
}

impl RuleFactNetwork {
    /// Builds a network and checks every structural and weight invariant.
    pub fn new(num_facts: usize, rules: Vec<Rule>) -> Result<Self> {
        let net = Self { num_facts, rules };
        net.validate()?;
        Ok(net)
    }

    pub(crate) fn from_parts_unchecked(num_facts: usize, rules: Vec<Rule>) -> Self {
        Self { num_facts, rules }
    }

    pub fn num_facts(&self) -> usize {
        self.num_facts
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.0]
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> {
        (0..self.num_facts).map(FactId)
    }

    pub fn contains_fact(&self, fact: FactId) -> bool {
        fact.0 < self.num_facts
    }

    pub fn check_fact(&self, fact: FactId) -> Result<()> {
        if self.contains_fact(fact) {
            Ok(())
        } else {
            Err(Error::UnknownFact {
                fact,
                num_facts: self.num_facts,
            })
        }
    }

    /// Replaces a rule's weightings. Structure is untouched.
    pub fn set_weights(&mut self, id: RuleId, weight_a: f64, weight_b: f64) {
        let rule = &mut self.rules[id.0];
        rule.weight_a = weight_a;
        rule.weight_b = weight_b;
    }

    pub fn keys(&self) -> impl Iterator<Item = RuleKey> + '_ {
        self.rules.iter().map(Rule::key)
    }

    /// Structural identity of the whole network, ignoring weights.
    pub fn structure(&self) -> Vec<(FactId, FactId, FactId)> {
        self.rules
            .iter()
            .map(|r| (r.input_a, r.input_b, r.output))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.rules.len());
        for (index, rule) in self.rules.iter().enumerate() {
            if rule.id.0 != index {
                return Err(Error::Validation(format!(
                    "rule at position {index} has id {}; ids must be dense and in order",
                    rule.id
                )));
            }
            for fact in [rule.input_a, rule.input_b, rule.output] {
                if !self.contains_fact(fact) {
                    return Err(Error::Validation(format!(
                        "rule {} references fact {fact} but the network has {} facts",
                        rule.id, self.num_facts
                    )));
                }
            }
            if rule.input_a == rule.input_b {
                return Err(Error::Validation(format!(
                    "rule {} uses fact {} as both inputs",
                    rule.id, rule.input_a
                )));
            }
            if rule.output == rule.input_a || rule.output == rule.input_b {
                return Err(Error::Validation(format!(
                    "rule {} outputs to one of its own inputs",
                    rule.id
                )));
            }
            for (name, w) in [("weight_a", rule.weight_a), ("weight_b", rule.weight_b)] {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Validation(format!(
                        "rule {} has {name} = {w}, outside [0, 1]",
                        rule.id
                    )));
                }
            }
            let sum = rule.weight_a + rule.weight_b;
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::Validation(format!(
                    "rule {} weights sum to {sum}, not 1",
                    rule.id
                )));
            }
            if !seen.insert(rule.key()) {
                return Err(Error::Validation(format!(
                    "rule {} duplicates an earlier rule ({{{}, {}}} -> {})",
                    rule.id, rule.input_a, rule.input_b, rule.output
                )));
            }
        }
        Ok(())
    }
}

/// Number of distinct (unordered input pair, output) slots: C(n,2)·(n−2).
pub fn rule_capacity(num_facts: usize) -> usize {
    if num_facts < 3 {
        return 0;
    }
    num_facts * (num_facts - 1) / 2 * (num_facts - 2)
}

/// How a network under training is derived from the truth network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetworkCondition {
    /// Same structure, weights reset.
    Base,
    /// A rule for every input pair and every third fact.
    FullyConnected,
    /// Same fact and rule counts, structure regenerated from scratch.
    Random,
    /// Base plus `ceil(pct * num_rules)` extra random rules.
    Augmented(f64),
    /// `ceil(pct * num_rules)` rules swapped for fresh random ones.
    ErrorInjected(f64),
}

impl NetworkCondition {
    pub fn pct(&self) -> Option<f64> {
        match *self {
            Self::Augmented(p) | Self::ErrorInjected(p) => Some(p),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.pct() {
            Some(p) if !(p > 0.0 && p <= 1.0) => Err(Error::InvalidParameters(format!(
                "condition percentage must be in (0, 1], got {p}"
            ))),
            _ => Ok(()),
        }
    }

    /// Number of rules touched by an augmented or error-injected condition.
    pub fn changed_rules(&self, num_rules: usize) -> usize {
        match self.pct() {
            // Subtract a hair so 0.1 * 100 = 10.000000000000002 stays 10.
            Some(p) => ((p * num_rules as f64) - 1e-9).ceil().max(0.0) as usize,
            None => 0,
        }
    }
}

impl fmt::Display for NetworkCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Base => write!(f, "base"),
            Self::FullyConnected => write!(f, "fully-connected"),
            Self::Random => write!(f, "random"),
            Self::Augmented(p) => write!(f, "augmented:{p}"),
            Self::ErrorInjected(p) => write!(f, "error:{p}"),
        }
    }
}

/// Starting weights of a network under training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WeightReset {
    /// Every rule starts at `(0.5, 0.5)`.
    #[default]
    Symmetric,
    /// Every rule draws `weight_a` uniformly, as at generation.
    Uniform,
}

impl WeightReset {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Symmetric => "symmetric",
            Self::Uniform => "uniform",
        }
    }
}

impl fmt::Display for WeightReset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightReset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" | "half" => Ok(Self::Symmetric),
            "uniform" | "random" => Ok(Self::Uniform),
            other => Err(Error::InvalidParameters(format!(
                "unknown weight reset '{other}'"
            ))),
        }
    }
}

impl FromStr for NetworkCondition {
    type Err = Error;

    /// Accepts `base`, `fc`/`fully-connected`, `random`, `augmented:<pct>`
    /// and `error:<pct>`. A percentage above 1 is read as a percent (`10` ⇒ 0.10).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, pct) = match s.split_once(':') {
            Some((k, p)) => (k.to_string(), Some(p.trim_end_matches('%').to_string())),
            None => (s.clone(), None),
        };
        let parse_pct = |p: Option<String>| -> Result<f64> {
            let p = p.ok_or_else(|| {
                Error::InvalidParameters(format!(
                    "condition '{s}' needs a percentage, e.g. {kind}:0.1"
                ))
            })?;
            let v: f64 = p
                .parse()
                .map_err(|_| Error::InvalidParameters(format!("bad percentage '{p}'")))?;
            Ok(if v > 1.0 { v / 100.0 } else { v })
        };
        let cond = match kind.as_str() {
            "base" | "nfc" if pct.is_none() => Self::Base,
            "fc" | "fully-connected" | "fully_connected" if pct.is_none() => Self::FullyConnected,
            "random" if pct.is_none() => Self::Random,
            "augmented" | "aug" => Self::Augmented(parse_pct(pct)?),
            "error" | "error-injected" => Self::ErrorInjected(parse_pct(pct)?),
            _ => {
                return Err(Error::InvalidParameters(format!(
                    "unknown network condition '{s}'"
                )))
            }
        };
        cond.validate()?;
        Ok(cond)
    }
}
