//! Shared inputs for the pipeline benchmarks.

use augequiv_core::{fixture_group, slice_for_base, ExperimentRecord, Mode, SlicePoint, StudyConfig};

/// Records and preset config of a bundled study.
pub fn study(name: &str) -> (Vec<ExperimentRecord>, StudyConfig) {
    let records = fixture_group(name).expect("bundled fixture");
    let config = StudyConfig::preset(name).expect("bundled preset");
    (records, config)
}

/// The CIFAR-10 closed-set slice at `n_base`.
pub fn cifar_slice(n_base: u64) -> Vec<SlicePoint> {
    let (records, _) = study("cifar10");
    slice_for_base(&records, "cifar10", Mode::ClosedSet, n_base).expect("bundled slice")
}
