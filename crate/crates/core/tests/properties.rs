use std::collections::HashSet;

use grades_core::experiments::{run_trial_detailed, spec_derivation, ExperimentSpec};
use grades_core::inference::{run_with_plan, FiringPlan};
use grades_core::network::{
    derive_condition, generate_random_network, parse_network, reweight, rule_capacity,
    write_network,
};
use grades_core::training::{apply_update, compute_contributions};
use grades_core::{
    rng, run_forward, train, FactId, FactValueMap, NetworkCondition, QuerySpec, RuleFactNetwork,
    RunStatus, TrainingConfig, TrainingMode, UpdateRule, WeightReset,
};
use proptest::prelude::*;
use rand::Rng;

mod common;

use common::{assert_weights_ok, random_dag, rule};

#[test]
fn weight_sum_survives_a_long_fuzz_run() {
    common::weight_sum_survives_a_long_fuzz_run();
}

#[test]
fn forward_runs_stay_in_range() {
    common::forward_runs_stay_in_range();
}

#[test]
fn contributions_match_path_enumeration() {
    common::contributions_match_path_enumeration();
}

#[test]
fn fully_connected_count_matches_enumeration() {
    common::fully_connected_count_matches_enumeration();
}

#[test]
fn single_rule_training_never_increases_error() {
    common::single_rule_training_never_increases_error();
}

#[test]
fn sequential_and_parallel_runs_agree() {
    common::sequential_and_parallel_runs_agree();
}

#[test]
fn zero_error_leaves_weights_bit_identical() {
    common::zero_error_leaves_weights_bit_identical();
}

#[test]
fn zero_velocity_leaves_weights_bit_identical() {
    common::zero_velocity_leaves_weights_bit_identical();
}

#[test]
fn raw_contribution_is_the_target_sensitivity() {
    // Finite-difference oracle on unique-writer DAGs: nudging a rule's output
    // moves the target by raw contribution times the nudge.
    let mut r = rng::stream(5);
    let mut checked = 0;
    while checked < 300 {
        let (net, order) = random_dag(&mut r, true);
        let n = net.num_facts();
        let query = QuerySpec::random_distinct(n, &mut r);
        let values = FactValueMap::random(n, &mut r);
        let run = run_forward(&net, &query, &values).unwrap();
        if run.status != RunStatus::Completed {
            continue;
        }
        let map = compute_contributions(&net, &run, query.target_fact).unwrap();
        let writer = |f: usize| net.rules().iter().find(|w| w.output.0 == f);
        for probe in net.rules() {
            let eval = |bump: f64| {
                let mut v = values.as_slice().to_vec();
                v[query.start_fact.0] = 0.99;
                for &f in &order {
                    if let Some(w) = writer(f) {
                        v[f] = w.weight_a * v[w.input_a.0] + w.weight_b * v[w.input_b.0];
                        if w.id == probe.id {
                            v[f] += bump;
                        }
                    }
                }
                v[query.target_fact.0]
            };
            let h = 1e-6;
            let slope = (eval(h) - eval(-h)) / (2.0 * h);
            let raw = map.get(probe.id).map_or(0.0, |c| c.raw);
            assert!((slope - raw).abs() < 1e-6, "slope {slope} raw {raw}");
        }
        checked += 1;
    }
}

#[test]
fn dag_runs_match_topological_evaluation() {
    let mut r = rng::stream(11);
    for _ in 0..1000 {
        let (net, order) = random_dag(&mut r, true);
        let n = net.num_facts();
        let query = QuerySpec::random_distinct(n, &mut r);
        let values = FactValueMap::random(n, &mut r);
        let run = run_forward(&net, &query, &values).unwrap();

        let mut v = values.as_slice().to_vec();
        v[query.start_fact.0] = 0.99;
        for &f in &order {
            if let Some(w) = net.rules().iter().find(|w| w.output.0 == f) {
                v[f] = w.weight_a * v[w.input_a.0] + w.weight_b * v[w.input_b.0];
            }
        }
        for (f, expected) in v.iter().enumerate() {
            assert!((run.final_values.get(FactId(f)) - expected).abs() < 1e-12);
        }
        assert_eq!(run.firings.len(), net.num_rules());
    }
}

#[test]
fn tiny_velocity_means_tiny_steps() {
    let mut r = rng::stream(13);
    let truth = generate_random_network(10, 20, &mut r).unwrap();
    let mut trainee = truth.clone();
    reweight(&mut trainee, WeightReset::Uniform, &mut r);
    let before = trainee.clone();
    let config = TrainingConfig {
        velocity: 1e-12,
        epochs: 1,
        mode: TrainingMode::MultiPathSameFacts,
        ..Default::default()
    };
    for _ in 0..100 {
        let mut t = before.clone();
        let q = QuerySpec::random_distinct(10, &mut r);
        train(
            &mut t,
            &truth,
            &q,
            &FactValueMap::random(10, &mut r),
            &config,
            &mut r,
        )
        .unwrap();
        for (x, y) in t.rules().iter().zip(before.rules()) {
            assert!((x.weight_a - y.weight_a).abs() <= 1e-12);
        }
    }
    trainee.validate().unwrap();
}

#[test]
fn training_preserves_structure_and_truth() {
    let conditions = [
        NetworkCondition::Base,
        NetworkCondition::FullyConnected,
        NetworkCondition::Random,
        NetworkCondition::Augmented(0.25),
        NetworkCondition::ErrorInjected(0.5),
    ];
    for (i, &condition) in conditions.iter().enumerate() {
        for mode in [
            TrainingMode::PathSameFacts,
            TrainingMode::MultiPathRandomFacts,
        ] {
            let spec = ExperimentSpec {
                num_facts: 11,
                num_rules: 11,
                condition,
                config: TrainingConfig {
                    epochs: 30,
                    mode,
                    ..Default::default()
                },
                trials: 20,
                base_seed: 40 + i as u64,
                ..Default::default()
            };
            for t in 0..spec.trials {
                let truth_alone = generate_random_network(11, 11, &mut rng::stream(0)).unwrap();
                let truth_copy = truth_alone.clone();
                derive_condition(
                    &truth_alone,
                    condition,
                    WeightReset::Uniform,
                    &mut rng::stream(t as u64),
                )
                .unwrap();
                assert_eq!(truth_alone, truth_copy);

                let mut seen = None;
                let derive = |truth: &RuleFactNetwork, c, s: &mut rng::Stream| {
                    seen = Some(truth.clone());
                    spec_derivation(&spec)(truth, c, s)
                };
                let d = run_trial_detailed(&spec, t, derive).unwrap();
                assert_eq!(d.trainee_before.structure(), d.trainee_after.structure());
                assert_weights_ok(&d.trainee_after);
                assert_eq!(Some(d.truth), seen, "truth weights untouched by training");
            }
        }
    }
}

#[test]
fn error_injection_keeps_the_rest_of_truth() {
    let mut r = rng::stream(21);
    for _ in 0..200 {
        let n = r.gen_range(6..40);
        let m = r.gen_range(1..=(2 * n).min(rule_capacity(n) / 2));
        let truth = generate_random_network(n, m, &mut r).unwrap();
        let p = r.gen_range(0.01..=1.0);
        let derived = derive_condition(
            &truth,
            NetworkCondition::ErrorInjected(p),
            WeightReset::Symmetric,
            &mut r,
        )
        .unwrap();
        let keys: HashSet<_> = truth.keys().collect();
        let kept = derived.keys().filter(|k| keys.contains(k)).count();
        assert_eq!(
            kept,
            m - NetworkCondition::ErrorInjected(p).changed_rules(m)
        );
        assert_eq!(kept, m - ((p * m as f64) - 1e-9).ceil() as usize);
        derived.validate().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn forward_runs_on_arbitrary_networks(
        seed in any::<u64>(),
        n in 3usize..40,
        density in 1usize..4,
    ) {
        let mut r = rng::stream(seed);
        let m = (density * n).min(rule_capacity(n));
        let net = generate_random_network(n, m, &mut r).unwrap();
        let plan = FiringPlan::new(&net);
        for _ in 0..10 {
            let query = QuerySpec::random_any(n, &mut r);
            let values = FactValueMap::random(n, &mut r);
            let run = run_with_plan(&net, &plan, &query, &values).unwrap();
            prop_assert!(run.passes <= m + 1);
            prop_assert!(run.final_values.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!((0.0..=1.0).contains(&run.target_value));
            prop_assert!(run.firings.len() <= m);
            let again = run_with_plan(&net, &plan, &query, &values).unwrap();
            prop_assert_eq!(run, again);
        }
    }

    #[test]
    fn generated_networks_are_valid_and_seeded(
        seed in any::<u64>(),
        n in 3usize..30,
        m_frac in 0.01f64..1.0,
    ) {
        let m = ((rule_capacity(n) as f64 * m_frac).ceil() as usize).max(1);
        let a = generate_random_network(n, m, &mut rng::stream(seed)).unwrap();
        let b = generate_random_network(n, m, &mut rng::stream(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        a.validate().unwrap();
        let keys: HashSet<_> = a.keys().collect();
        prop_assert_eq!(keys.len(), m);
        for r in a.rules() {
            prop_assert!(r.output != r.input_a && r.output != r.input_b && r.input_a != r.input_b);
        }
    }

    #[test]
    fn network_files_round_trip(seed in any::<u64>(), n in 3usize..20, m in 1usize..40) {
        let m = m.min(rule_capacity(n));
        let net = generate_random_network(n, m, &mut rng::stream(seed)).unwrap();
        let mut text = Vec::new();
        write_network(&net, &mut text).unwrap();
        let back = parse_network(text.as_slice()).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn single_rule_output_is_monotone_in_input_a(
        wa in 0.0001f64..=1.0,
        lo in 0.0f64..=1.0,
        hi in 0.0f64..=1.0,
        vb in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let net = RuleFactNetwork::new(4, vec![rule(0, 1, 2, 3, wa)]).unwrap();
        let query = QuerySpec::new(FactId(0), FactId(3));
        let low = run_forward(&net, &query, &FactValueMap::new(vec![0.0, lo, vb, 0.0]).unwrap()).unwrap();
        let high = run_forward(&net, &query, &FactValueMap::new(vec![0.0, hi, vb, 0.0]).unwrap()).unwrap();
        prop_assert!(high.target_value >= low.target_value);
    }

    #[test]
    fn one_update_is_bounded_and_conserves_weight(
        seed in any::<u64>(),
        error in -1.0f64..=1.0,
        velocity in 0.0f64..=1.0,
    ) {
        let mut r = rng::stream(seed);
        let mut net = generate_random_network(15, 30, &mut r).unwrap();
        let before = net.clone();
        let query = QuerySpec::random_distinct(15, &mut r);
        let run = run_forward(&net, &query, &FactValueMap::random(15, &mut r)).unwrap();
        if run.completed() {
            let map = compute_contributions(&net, &run, query.target_fact).unwrap();
            apply_update(&mut net, &map, error, velocity, UpdateRule::ZeroSumShift);
            assert_weights_ok(&net);
            for (x, y) in net.rules().iter().zip(before.rules()) {
                prop_assert!((x.weight_a - y.weight_a).abs() <= velocity * error.abs() + 1e-12);
            }
        }
    }
}
