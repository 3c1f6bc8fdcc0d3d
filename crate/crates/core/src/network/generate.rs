use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use super::{
    rule_capacity, FactId, NetworkCondition, Rule, RuleFactNetwork, RuleId, RuleKey, WeightReset,
};
use crate::error::{Error, Result};

fn random_weights<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let a: f64 = rng.gen();
    (a, 1.0 - a)
}

fn check_size(num_facts: usize) -> Result<()> {
    if num_facts < 3 {
        return Err(Error::InvalidParameters(format!(
            "a rule needs three distinct facts; got num_facts = {num_facts}"
        )));
    }
    Ok(())
}

/// Draws `count` random rule structures that collide neither with `taken`
/// nor with each other, and inserts them into `taken`.
///
/// Sparse requests use rejection sampling. When the request would fill more
/// than half of the free slots, the free slots are enumerated and sampled
/// without replacement instead, so generation stays fast near saturation.
fn draw_new_keys<R: Rng + ?Sized>(
    num_facts: usize,
    count: usize,
    taken: &mut HashSet<RuleKey>,
    rng: &mut R,
) -> Result<Vec<(FactId, FactId, FactId)>> {
    let capacity = rule_capacity(num_facts);
    let free = capacity - taken.len();
    if count > free {
        return Err(Error::InfeasibleNetwork {
            requested: taken.len() + count,
            capacity,
            num_facts,
        });
    }

    let mut drawn = Vec::with_capacity(count);
    if count * 2 <= free {
        while drawn.len() < count {
            let picks = index::sample(rng, num_facts, 3);
            let (a, b, out) = (
                FactId(picks.index(0)),
                FactId(picks.index(1)),
                FactId(picks.index(2)),
            );
            if taken.insert(RuleKey::new(a, b, out)) {
                drawn.push((a, b, out));
            }
        }
    } else {
        let slots: Vec<RuleKey> = all_keys(num_facts).filter(|k| !taken.contains(k)).collect();
        for i in index::sample(rng, slots.len(), count) {
            let key = slots[i];
            // Randomize which input is "a" so the enumeration order leaves no trace.
            let (a, b) = if rng.gen::<bool>() {
                (key.low, key.high)
            } else {
                (key.high, key.low)
            };
            taken.insert(key);
            drawn.push((a, b, key.output));
        }
    }
    Ok(drawn)
}

/// Every (unordered pair, third fact) slot, pairs in lexicographic order and
/// outputs ascending within a pair.
fn all_keys(num_facts: usize) -> impl Iterator<Item = RuleKey> {
    (0..num_facts).flat_map(move |i| {
        (i + 1..num_facts).flat_map(move |j| {
            (0..num_facts)
                .filter(move |&k| k != i && k != j)
                .map(move |k| RuleKey::new(FactId(i), FactId(j), FactId(k)))
        })
    })
}

/// Random network with `num_rules` non-duplicate rules over `num_facts` facts.
pub fn generate_random_network<R: Rng + ?Sized>(
    num_facts: usize,
    num_rules: usize,
    rng: &mut R,
) -> Result<RuleFactNetwork> {
    check_size(num_facts)?;
    if num_rules == 0 {
        return Err(Error::InvalidParameters(
            "num_rules must be at least 1".into(),
        ));
    }
    let mut taken = HashSet::with_capacity(num_rules);
    let keys = draw_new_keys(num_facts, num_rules, &mut taken, rng)?;
    let rules = keys
        .into_iter()
        .enumerate()
        .map(|(i, (a, b, out))| {
            let (wa, wb) = random_weights(rng);
            Rule {
                id: RuleId(i),
                input_a: a,
                input_b: b,
                output: out,
                weight_a: wa,
                weight_b: wb,
            }
        })
        .collect();
    Ok(RuleFactNetwork::from_parts_unchecked(num_facts, rules))
}

/// Network with one rule per (unordered input pair, third fact) slot.
pub fn build_fully_connected<R: Rng + ?Sized>(
    num_facts: usize,
    rng: &mut R,
) -> Result<RuleFactNetwork> {
    check_size(num_facts)?;
    let rules = all_keys(num_facts)
        .enumerate()
        .map(|(i, key)| {
            let (wa, wb) = random_weights(rng);
            Rule {
                id: RuleId(i),
                input_a: key.low,
                input_b: key.high,
                output: key.output,
                weight_a: wa,
                weight_b: wb,
            }
        })
        .collect();
    Ok(RuleFactNetwork::from_parts_unchecked(num_facts, rules))
}

/// Resets every rule's weighting. `Uniform` draws in rule-id order;
/// `Symmetric` consumes nothing from `rng`.
pub fn reweight<R: Rng + ?Sized>(net: &mut RuleFactNetwork, reset: WeightReset, rng: &mut R) {
    for rule in &mut net.rules {
        let (wa, wb) = match reset {
            WeightReset::Symmetric => (0.5, 0.5),
            WeightReset::Uniform => random_weights(rng),
        };
        rule.weight_a = wa;
        rule.weight_b = wb;
    }
}

/// Derives a network under training from `truth` according to `condition`.
/// Every condition starts from `reset` weights. `truth` is only read.
pub fn derive_condition<R: Rng + ?Sized>(
    truth: &RuleFactNetwork,
    condition: NetworkCondition,
    reset: WeightReset,
    rng: &mut R,
) -> Result<RuleFactNetwork> {
    condition.validate()?;
    let n = truth.num_facts();
    let mut net = match condition {
        NetworkCondition::Base => truth.clone(),
        NetworkCondition::FullyConnected => build_fully_connected(n, rng)?,
        NetworkCondition::Random => generate_random_network(n, truth.num_rules(), rng)?,
        NetworkCondition::Augmented(_) => {
            let extra = condition.changed_rules(truth.num_rules());
            let mut taken: HashSet<RuleKey> = truth.keys().collect();
            let keys = draw_new_keys(n, extra, &mut taken, rng)?;
            let mut rules = truth.rules().to_vec();
            for (a, b, out) in keys {
                rules.push(Rule {
                    id: RuleId(rules.len()),
                    input_a: a,
                    input_b: b,
                    output: out,
                    weight_a: 0.5,
                    weight_b: 0.5,
                });
            }
            RuleFactNetwork::from_parts_unchecked(n, rules)
        }
        NetworkCondition::ErrorInjected(_) => {
            let m = truth.num_rules();
            let replaced = condition.changed_rules(m).min(m);
            let mut victims: Vec<usize> = index::sample(rng, m, replaced).into_vec();
            victims.sort_unstable();
            // Replacements must differ from every truth rule, including the
            // ones being removed, so exactly `replaced` structures change.
            let mut taken: HashSet<RuleKey> = truth.keys().collect();
            let keys = draw_new_keys(n, replaced, &mut taken, rng)?;
            let mut rules = truth.rules().to_vec();
            for (&slot, (a, b, out)) in victims.iter().zip(keys) {
                let rule = &mut rules[slot];
                rule.input_a = a;
                rule.input_b = b;
                rule.output = out;
            }
            RuleFactNetwork::from_parts_unchecked(n, rules)
        }
    };
    reweight(&mut net, reset, rng);
    Ok(net)
}
