use std::collections::{BTreeMap, BTreeSet};

use super::{ExperimentRecord, Mode};
use crate::error::{Error, Result};

/// Fewest points a slice may have; four coefficients plus headroom.
pub const MIN_SLICE_POINTS: usize = 5;

/// One averaged accuracy measurement in total-count coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    /// Total real images: base plus added real.
    pub n_real: f64,
    /// Total synthetic images.
    pub n_syn: f64,
    pub accuracy: f64,
}

/// Collects the runs that share one base set, for fitting a single surface.
///
/// Real-augmentation rows map to `(n_base + added_real, 0)` and rows of
/// `mode` map to `(n_base, added_syn)`. Replicates at the same point are
/// averaged. The baseline appears in every table; it is averaged per source
/// table first, so a repeated baseline counts once.
///
/// Output is sorted by `(n_real, n_syn)`.
pub fn slice_for_base(records: &[ExperimentRecord], dataset: &str, mode: Mode, n_base: u64) -> Result<Vec<SlicePoint>> {
    let rows: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| r.dataset == dataset && r.n_base == n_base)
        .filter(|r| r.mode == Mode::RealAug || r.mode == mode)
        .collect();

    let classifiers: BTreeSet<&str> = rows.iter().map(|r| r.classifier.as_str()).collect();
    if classifiers.len() > 1 {
        return Err(Error::MixedClassifiers {
            dataset: dataset.to_string(),
            classifiers: classifiers.into_iter().collect::<Vec<_>>().join(", "),
        });
    }

    let mut baseline: BTreeMap<Mode, (f64, usize)> = BTreeMap::new();
    let mut points: BTreeMap<(u64, u64), (f64, usize)> = BTreeMap::new();
    for r in &rows {
        let acc = if r.is_baseline() {
            baseline.entry(r.mode).or_default()
        } else {
            points.entry((r.n_base + r.added_real, r.added_syn)).or_default()
        };
        acc.0 += r.accuracy;
        acc.1 += 1;
    }
    if !baseline.is_empty() {
        let mean = baseline.values().map(|(s, n)| s / *n as f64).sum::<f64>() / baseline.len() as f64;
        points.insert((n_base, 0), (mean, 1));
    }

    let out: Vec<SlicePoint> = points
        .into_iter()
        .map(|((n_real, n_syn), (sum, n))| SlicePoint {
            n_real: n_real as f64,
            n_syn: n_syn as f64,
            accuracy: sum / n as f64,
        })
        .collect();

    if out.len() < MIN_SLICE_POINTS {
        return Err(Error::InsufficientData {
            context: format!("{dataset}/{mode} at n_base = {n_base}"),
            needed: MIN_SLICE_POINTS,
            found: out.len(),
        });
    }
    Ok(out)
}
