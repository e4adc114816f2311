//! Shared fixtures for the criterion benchmarks.

use gridrisk_core::{Fleet, GeneratorUnit};

/// The twelve-unit study fleet (eleven conventional units plus the V2G
/// aggregate), duplicated here so benchmarks run without file access.
pub fn study_fleet() -> Fleet {
    let caps = [100.0, 100.0, 100.0, 100.0, 100.0, 200.0, 300.0, 500.0, 500.0, 500.0, 500.0, 200.0];
    let rates = [0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.08, 0.085, 0.085, 0.09, 0.09, 0.05];
    Fleet::new(
        caps.iter()
            .zip(rates)
            .enumerate()
            .map(|(i, (&c, q))| GeneratorUnit::new(format!("u{i}"), c, q, true))
            .collect(),
    )
    .unwrap()
}
