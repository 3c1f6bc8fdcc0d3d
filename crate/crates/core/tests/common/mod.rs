//! Checks shared by the property tests and the acceptance run.

use std::collections::{BTreeSet, HashSet};

use grades_core::experiments::{run_experiment, ExperimentSpec, Parallelism};
use grades_core::inference::{run_with_plan, FiringPlan};
use grades_core::network::{
    build_fully_connected, generate_random_network, reweight, rule_capacity,
};
use grades_core::training::{apply_update, compute_contributions};
use grades_core::{
    rng, run_forward, train, FactId, FactValueMap, NetworkCondition, QuerySpec, Rule,
    RuleFactNetwork, RuleId, RunStatus, TrainingConfig, TrainingMode, UpdateRule, WeightReset,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// The deterministic property checks, by name. Each panics on violation.
#[allow(dead_code)]
pub const PROPERTY_CHECKS: [(&str, fn()); 8] = [
    (
        "weight sum conserved over 1e5 updates",
        weight_sum_survives_a_long_fuzz_run,
    ),
    (
        "forward values in [0,1], passes <= rules + 1",
        forward_runs_stay_in_range,
    ),
    (
        "contributions equal path enumeration",
        contributions_match_path_enumeration,
    ),
    (
        "fully connected count",
        fully_connected_count_matches_enumeration,
    ),
    (
        "single-rule training never increases error",
        single_rule_training_never_increases_error,
    ),
    (
        "sequential equals parallel",
        sequential_and_parallel_runs_agree,
    ),
    (
        "zero error leaves weights alone",
        zero_error_leaves_weights_bit_identical,
    ),
    (
        "zero velocity leaves weights alone",
        zero_velocity_leaves_weights_bit_identical,
    ),
];

pub fn rule(id: usize, a: usize, b: usize, out: usize, wa: f64) -> Rule {
    Rule {
        id: RuleId(id),
        input_a: FactId(a),
        input_b: FactId(b),
        output: FactId(out),
        weight_a: wa,
        weight_b: 1.0 - wa,
    }
}

pub fn assert_weights_ok(net: &RuleFactNetwork) {
    for r in net.rules() {
        assert!((r.weight_a + r.weight_b - 1.0).abs() <= 1e-9, "{r:?}");
        assert!(
            (0.0..=1.0).contains(&r.weight_a) && (0.0..=1.0).contains(&r.weight_b),
            "{r:?}"
        );
    }
}

/// Random acyclic network: facts are laid out in a hidden random order and
/// every rule writes a fact later in that order than both of its inputs.
/// With `unique_writers` no fact has more than one writer.
pub fn random_dag<R: Rng>(rng: &mut R, unique_writers: bool) -> (RuleFactNetwork, Vec<usize>) {
    let n = rng.gen_range(3..=8);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut seen = HashSet::new();
    let mut written = HashSet::new();
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(1..=3 * n) {
        let hi = rng.gen_range(2..n);
        let out = order[hi];
        let i = rng.gen_range(0..hi);
        let j = (i + rng.gen_range(1..hi)) % hi;
        let (a, b) = (order[i], order[j]);
        let key = (a.min(b), a.max(b), out);
        if seen.contains(&key) || (unique_writers && written.contains(&out)) {
            continue;
        }
        seen.insert(key);
        written.insert(out);
        rules.push(rule(rules.len(), a, b, out, rng.gen()));
    }
    (RuleFactNetwork::new(n, rules).unwrap(), order)
}

pub fn fully_connected_by_enumeration(n: usize) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            for t in 0..n {
                if a < b && t != a && t != b {
                    out.insert((a, b, t));
                }
            }
        }
    }
    out
}

pub fn fully_connected_count_matches_enumeration() {
    for n in 3..=12 {
        let net = build_fully_connected(n, &mut rng::stream(n as u64)).unwrap();
        let expected = fully_connected_by_enumeration(n);
        assert_eq!(net.num_rules(), n * (n - 1) / 2 * (n - 2));
        assert_eq!(net.num_rules(), expected.len());
        assert_eq!(rule_capacity(n), expected.len());
        let got: BTreeSet<_> = net
            .rules()
            .iter()
            .map(|r| {
                (
                    r.input_a.0.min(r.input_b.0),
                    r.input_a.0.max(r.input_b.0),
                    r.output.0,
                )
            })
            .collect();
        assert_eq!(got, expected);
        net.validate().unwrap();
    }
}

pub fn weight_sum_survives_a_long_fuzz_run() {
    let mut r = rng::stream(2024);
    let mut updates = 0usize;
    while updates < 100_000 {
        let n = r.gen_range(4..=30);
        let m = r.gen_range(1..=(3 * n).min(rule_capacity(n)));
        let mut net = generate_random_network(n, m, &mut r).unwrap();
        let plan = FiringPlan::new(&net);
        let rule_kind = if r.gen() {
            UpdateRule::ZeroSumShift
        } else {
            UpdateRule::ValueScaledShift
        };
        for _ in 0..50 {
            let query = QuerySpec::random_distinct(n, &mut r);
            let values = FactValueMap::random(n, &mut r);
            let run = run_with_plan(&net, &plan, &query, &values).unwrap();
            if !run.completed() {
                continue;
            }
            let contributions = compute_contributions(&net, &run, query.target_fact).unwrap();
            let error = r.gen_range(-1.0..=1.0);
            let velocity = r.gen_range(0.0..=1.0);
            updates += apply_update(&mut net, &contributions, error, velocity, rule_kind);
            assert_weights_ok(&net);
        }
    }
}

pub fn contributions_match_path_enumeration() {
    let mut r = rng::stream(77);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 1000 {
        attempts += 1;
        assert!(attempts < 100_000);
        let (net, _) = random_dag(&mut r, attempts % 2 == 0);
        let n = net.num_facts();
        let query = QuerySpec::random_distinct(n, &mut r);
        let values = FactValueMap::random(n, &mut r);
        let run = run_forward(&net, &query, &values).unwrap();
        if run.status != RunStatus::Completed {
            continue;
        }
        let map = compute_contributions(&net, &run, query.target_fact).unwrap();

        // Acyclic, so every rule fires and all writers of a fact fire before
        // any reader. The value a reader sees comes from the writer that
        // fired last.
        let position: Vec<usize> = {
            let mut p = vec![0; net.num_rules()];
            for (i, id) in run.fired_rules().into_iter().enumerate() {
                p[id.0] = i;
            }
            p
        };
        let effective_writer = |fact: FactId| {
            net.rules()
                .iter()
                .filter(|w| w.output == fact)
                .max_by_key(|w| position[w.id.0])
                .map(|w| w.id)
        };
        let last = effective_writer(query.target_fact).unwrap();

        // Sum over every path from each rule to `last` of the product of the
        // input weights that path enters through.
        fn paths(
            net: &RuleFactNetwork,
            from: RuleId,
            to: RuleId,
            writer: &dyn Fn(FactId) -> Option<RuleId>,
        ) -> f64 {
            if from == to {
                return 1.0;
            }
            let out = net.rule(from).output;
            if writer(out) != Some(from) {
                return 0.0;
            }
            net.rules()
                .iter()
                .flat_map(|reader| {
                    reader
                        .inputs()
                        .into_iter()
                        .zip(reader.weights())
                        .filter(move |(f, _)| *f == out)
                        .map(move |(_, w)| (reader.id, w))
                })
                .map(|(reader, w)| w * paths(net, reader, to, writer))
                .sum()
        }
        let raw: Vec<f64> = net
            .rules()
            .iter()
            .map(|x| paths(&net, x.id, last, &effective_writer))
            .collect();
        let total: f64 = raw.iter().sum();
        for (i, &c) in raw.iter().enumerate() {
            let got = map.get(RuleId(i));
            if c == 0.0 {
                assert!(got.is_none(), "rule {i} should not contribute");
            } else {
                let got = got.unwrap_or_else(|| panic!("rule {i} missing"));
                assert!((got.raw - c).abs() < 1e-12, "raw {} vs {c}", got.raw);
                assert!((got.share - c / total).abs() < 1e-12);
            }
        }
        let share_sum: f64 = map.iter().map(|(_, c)| c.share).sum();
        assert!((share_sum - 1.0).abs() < 1e-12);
        checked += 1;
    }
}

pub fn single_rule_training_never_increases_error() {
    let mut r = rng::stream(31);
    for _ in 0..1000 {
        let a = r.gen_range(0..3);
        let b = (a + r.gen_range(1..3)) % 3;
        let t = 3 - a - b;
        let truth = RuleFactNetwork::new(3, vec![rule(0, a, b, t, r.gen())]).unwrap();
        let mut trainee = truth.clone();
        reweight(&mut trainee, WeightReset::Uniform, &mut r);
        let query = QuerySpec::new(FactId(a), FactId(t));
        let values = FactValueMap::random(3, &mut r);
        let config = TrainingConfig {
            velocity: r.gen_range(0.01..=1.0),
            epochs: 60,
            mode: TrainingMode::PathSameFacts,
            update_rule: if r.gen() {
                UpdateRule::ZeroSumShift
            } else {
                UpdateRule::ValueScaledShift
            },
        };
        let reports = train(&mut trainee, &truth, &query, &values, &config, &mut r).unwrap();
        for pair in reports.windows(2) {
            assert!(
                pair[1].error.abs() <= pair[0].error.abs() + 1e-12,
                "{} then {}",
                pair[0].error,
                pair[1].error
            );
        }
        let saturated =
            trainee.rule(RuleId(0)).weight_a == 0.0 || trainee.rule(RuleId(0)).weight_a == 1.0;
        if !saturated && (0.99 - values.get(FactId(b))).abs() > 1e-6 && config.velocity > 0.5 {
            assert!(reports.last().unwrap().error.abs() < reports[0].error.abs() + 1e-12);
        }
    }
}

pub fn sequential_and_parallel_runs_agree() {
    for (condition, mode) in [
        (NetworkCondition::Base, TrainingMode::PathSameFacts),
        (
            NetworkCondition::ErrorInjected(0.3),
            TrainingMode::MultiPathRandomFacts,
        ),
        (
            NetworkCondition::Augmented(0.2),
            TrainingMode::PathRandomFacts,
        ),
    ] {
        let spec = ExperimentSpec {
            num_facts: 30,
            num_rules: 30,
            condition,
            config: TrainingConfig {
                epochs: 10,
                mode,
                ..Default::default()
            },
            trials: 64,
            base_seed: 9,
            ..Default::default()
        };
        let seq = run_experiment(&spec, Parallelism::Sequential).unwrap();
        for par in [Parallelism::Threads(4), Parallelism::Auto] {
            let other = run_experiment(&spec, par).unwrap();
            assert!(seq
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| a.same_outcome(b)));
            assert!(seq.summary.same_statistics(&other.summary));
        }
    }
}

pub fn zero_error_leaves_weights_bit_identical() {
    let mut r = rng::stream(8);
    for _ in 0..200 {
        let truth = generate_random_network(12, 20, &mut r).unwrap();
        let mut trainee = truth.clone();
        let query = QuerySpec::random_any(12, &mut r);
        let values = FactValueMap::random(12, &mut r);
        for mode in [
            TrainingMode::PathSameFacts,
            TrainingMode::MultiPathRandomFacts,
        ] {
            let config = TrainingConfig {
                epochs: 20,
                mode,
                velocity: 1.0,
                ..Default::default()
            };
            let reports = train(&mut trainee, &truth, &query, &values, &config, &mut r).unwrap();
            assert!(reports
                .iter()
                .all(|e| e.error == 0.0 && e.updated_rules == 0));
            assert_eq!(trainee, truth);
        }
    }
}

pub fn zero_velocity_leaves_weights_bit_identical() {
    let mut r = rng::stream(12);
    for _ in 0..500 {
        let mut net = generate_random_network(10, 20, &mut r).unwrap();
        let before = net.clone();
        let query = QuerySpec::random_distinct(10, &mut r);
        let run = run_forward(&net, &query, &FactValueMap::random(10, &mut r)).unwrap();
        if !run.completed() {
            continue;
        }
        let map = compute_contributions(&net, &run, query.target_fact).unwrap();
        for kind in [UpdateRule::ZeroSumShift, UpdateRule::ValueScaledShift] {
            assert_eq!(
                apply_update(&mut net, &map, r.gen_range(-1.0..1.0), 0.0, kind),
                0
            );
            assert_eq!(apply_update(&mut net, &map, 0.0, 1.0, kind), 0);
        }
        assert_eq!(net, before);
    }
}

pub fn forward_runs_stay_in_range() {
    let mut r = rng::stream(3);
    for _ in 0..2000 {
        let n = r.gen_range(3..60);
        let m = r.gen_range(1..=(4 * n).min(rule_capacity(n)));
        let net = generate_random_network(n, m, &mut r).unwrap();
        let plan = FiringPlan::new(&net);
        for _ in 0..10 {
            let query = QuerySpec::random_any(n, &mut r);
            let run = run_with_plan(&net, &plan, &query, &FactValueMap::random(n, &mut r)).unwrap();
            assert!(run.passes <= m + 1, "{} passes for {m} rules", run.passes);
            assert!(run
                .final_values
                .as_slice()
                .iter()
                .all(|v| (0.0..=1.0).contains(v)));
            assert!(run
                .firings
                .iter()
                .all(|f| (0.0..=1.0).contains(&f.output_value)));
        }
    }
}
