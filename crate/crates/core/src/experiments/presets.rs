//! Named experiment grids.

use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::network::NetworkCondition;
use crate::training::{TrainingConfig, TrainingMode};

pub const PRESET_NAMES: [&str; 10] = [
    "network-types-11",
    "network-types-100",
    "epochs",
    "base-vs-random-100ep",
    "fc-vs-nfc",
    "augmented-100ep",
    "error-100ep",
    "velocity",
    "sizes",
    "training-modes",
];

const AUGMENT_LEVELS: [f64; 5] = [0.01, 0.05, 0.10, 0.25, 0.50];
const ERROR_LEVELS: [f64; 3] = [0.10, 0.25, 0.50];

fn spec(facts: usize, rules: usize, condition: NetworkCondition, epochs: usize) -> ExperimentSpec {
    ExperimentSpec {
        num_facts: facts,
        num_rules: rules,
        condition,
        config: TrainingConfig {
            epochs,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn network_types(with_fc: bool) -> Vec<NetworkCondition> {
    let mut conditions = vec![NetworkCondition::Base];
    if with_fc {
        conditions.push(NetworkCondition::FullyConnected);
    }
    conditions.push(NetworkCondition::Random);
    conditions.extend(AUGMENT_LEVELS.map(NetworkCondition::Augmented));
    conditions.extend(ERROR_LEVELS.map(NetworkCondition::ErrorInjected));
    conditions
}

/// Specs for a named grid, with default trials (1000) and seed (1).
pub fn preset_suite(name: &str) -> Result<Vec<ExperimentSpec>> {
    let specs = match name {
        "network-types-11" => network_types(true)
            .into_iter()
            .map(|c| spec(11, 11, c, 1))
            .collect(),
        "network-types-100" => network_types(false)
            .into_iter()
            .map(|c| spec(100, 100, c, 1))
            .collect(),
        "epochs" => [1, 10, 25, 50, 100, 250, 500, 1000]
            .into_iter()
            .map(|e| spec(100, 100, NetworkCondition::Base, e))
            .collect(),
        "base-vs-random-100ep" => [NetworkCondition::Base, NetworkCondition::Random]
            .into_iter()
            .map(|c| spec(100, 100, c, 100))
            .collect(),
        "fc-vs-nfc" => [NetworkCondition::FullyConnected, NetworkCondition::Base]
            .into_iter()
            .flat_map(|c| [5, 7, 9, 10, 11].map(|n| spec(n, n, c, 100)))
            .collect(),
        "augmented-100ep" => std::iter::once(NetworkCondition::Base)
            .chain(AUGMENT_LEVELS.map(NetworkCondition::Augmented))
            .map(|c| spec(100, 100, c, 100))
            .collect(),
        "error-100ep" => std::iter::once(NetworkCondition::Base)
            .chain(ERROR_LEVELS.map(NetworkCondition::ErrorInjected))
            .map(|c| spec(100, 100, c, 100))
            .collect(),
        "velocity" => [0.01, 0.05, 0.10, 0.15, 0.25, 0.50]
            .into_iter()
            .map(|v| {
                let mut s = spec(100, 100, NetworkCondition::Base, 100);
                s.config.velocity = v;
                s
            })
            .collect(),
        "sizes" => [
            (50, 50),
            (100, 50),
            (100, 100),
            (150, 100),
            (150, 150),
            (200, 150),
            (200, 200),
            (250, 200),
            (250, 250),
        ]
        .into_iter()
        .map(|(f, r)| spec(f, r, NetworkCondition::Base, 100))
        .collect(),
        "training-modes" => TrainingMode::ALL
            .into_iter()
            .map(|m| {
                let mut s = spec(100, 100, NetworkCondition::Base, 100);
                s.config.mode = m;
                s
            })
            .collect(),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(specs)
}
