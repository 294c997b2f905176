//! Shared fixtures for the criterion benchmarks.

use pqlwcr::datagen::{gen_dataset, GeneratedDataset, ScenarioConfig, ScenarioKind};
use pqlwcr::seed::derived_rng;

/// Deterministic dataset from the size-gated continuous design.
pub fn gated_continuous(n: usize, p: usize, seed: u64) -> GeneratedDataset {
    let config = ScenarioConfig::new(ScenarioKind::ContinuousIcs, n, p, 0.5).unwrap();
    let mut rng = derived_rng(seed, &[]);
    gen_dataset(&config, &mut rng).unwrap()
}

/// Deterministic dataset from the size-gated binary design.
pub fn gated_binary(n: usize, p: usize, seed: u64) -> GeneratedDataset {
    let config = ScenarioConfig::new(ScenarioKind::BinaryIcs, n, p, 0.5).unwrap();
    let mut rng = derived_rng(seed, &[]);
    gen_dataset(&config, &mut rng).unwrap()
}
