use std::collections::BTreeSet;

use crate::dataset::{ExperimentRecord, Mode};
use crate::error::{Error, Result};

/// Accuracy gains of closed-set and open-set augmentation at one scale,
/// measured against the same baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct IrPoint {
    pub dataset_id: String,
    pub n_base: u64,
    /// Synthetic images per base image.
    pub scale: f64,
    pub baseline: f64,
    pub acc_closed: f64,
    pub acc_open: f64,
    pub delta_closed: f64,
    pub delta_open: f64,
    /// `delta_closed / delta_open`; `None` when `delta_open` is zero.
    pub ir: Option<f64>,
}

fn mean_of<'a>(rows: impl Iterator<Item = &'a ExperimentRecord>) -> Option<(f64, BTreeSet<&'a str>)> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut classifiers = BTreeSet::new();
    for r in rows {
        sum += r.accuracy;
        n += 1;
        classifiers.insert(r.classifier.as_str());
    }
    (n > 0).then(|| (sum / n as f64, classifiers))
}

/// Improvement ratio at `n_base` and scale `1:k`, straight from the
/// measured rows (replicates averaged).
pub fn compute_ir(records: &[ExperimentRecord], dataset_id: &str, n_base: u64, k: f64) -> Result<IrPoint> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {k}")));
    }
    let added = (k * n_base as f64).round() as u64;
    let here = || {
        records
            .iter()
            .filter(move |r| r.dataset == dataset_id && r.n_base == n_base)
    };
    let missing = |what: &str| Error::MissingRow(format!("{what} for {dataset_id} at n_base = {n_base}"));
    let (baseline, mut cls) = mean_of(here().filter(|r| r.is_baseline())).ok_or_else(|| missing("baseline row"))?;
    let (acc_closed, c) = mean_of(here().filter(|r| r.mode == Mode::ClosedSet && r.added_syn == added && added > 0))
        .ok_or_else(|| missing(&format!("closed_set 1:{k} row (added_syn = {added})")))?;
    cls.extend(c);
    let (acc_open, c) = mean_of(here().filter(|r| r.mode == Mode::OpenSet && r.added_syn == added && added > 0))
        .ok_or_else(|| missing(&format!("open_set 1:{k} row (added_syn = {added})")))?;
    cls.extend(c);
    if cls.len() > 1 {
        return Err(Error::MixedClassifiers {
            dataset: dataset_id.to_string(),
            classifiers: cls.into_iter().collect::<Vec<_>>().join(", "),
        });
    }

    let delta_closed = acc_closed - baseline;
    let delta_open = acc_open - baseline;
    Ok(IrPoint {
        dataset_id: dataset_id.to_string(),
        n_base,
        scale: k,
        baseline,
        acc_closed,
        acc_open,
        delta_closed,
        delta_open,
        ir: (delta_open != 0.0).then(|| delta_closed / delta_open),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixture_group;

    #[test]
    fn full_cifar_ir() {
        let recs = fixture_group("cifar10").unwrap();
        let p = compute_ir(&recs, "cifar10", 50_000, 1.0).unwrap();
        assert_eq!(p.baseline, 93.42);
        assert_eq!(p.acc_closed, 95.35);
        assert_eq!(p.acc_open, 94.11);
        let ir = p.ir.unwrap();
        assert!((ir - 1.93 / 0.69).abs() < 1e-9);
        assert_eq!(format!("{ir:.2}"), "2.80");
    }

    #[test]
    fn tiny_cifar_ir_below_one() {
        let recs = fixture_group("cifar10").unwrap();
        let p = compute_ir(&recs, "cifar10", 500, 1.0).unwrap();
        assert!((p.delta_closed - 4.06).abs() < 1e-9);
        assert!((p.delta_open - 7.36).abs() < 1e-9);
        assert!((p.ir.unwrap() - 0.5516).abs() < 1e-3);
    }

    #[test]
    fn equal_rows_give_one_and_flat_open_is_undefined() {
        let mut recs = fixture_group("cifar10").unwrap();
        for r in recs.iter_mut() {
            if r.n_base == 5000 && r.mode == Mode::OpenSet && r.added_syn == 5000 {
                r.accuracy = 81.51;
            }
        }
        assert_eq!(compute_ir(&recs, "cifar10", 5000, 1.0).unwrap().ir, Some(1.0));
        for r in recs.iter_mut() {
            if r.n_base == 5000 && r.mode == Mode::OpenSet && r.added_syn == 5000 {
                r.accuracy = 74.20;
            }
        }
        assert_eq!(compute_ir(&recs, "cifar10", 5000, 1.0).unwrap().ir, None);
    }

    #[test]
    fn missing_rows_named() {
        let recs = fixture_group("cifar10").unwrap();
        let err = compute_ir(&recs, "cifar10", 777, 1.0).unwrap_err();
        assert!(err.to_string().contains("baseline row"), "{err}");
        let err = compute_ir(&recs, "cifar10", 500, 7.0).unwrap_err();
        assert!(err.to_string().contains("closed_set 1:7 row"), "{err}");
        let closed_only: Vec<_> = recs.iter().filter(|r| r.mode != Mode::OpenSet).cloned().collect();
        let err = compute_ir(&closed_only, "cifar10", 500, 1.0).unwrap_err();
        assert!(err.to_string().contains("open_set"), "{err}");
    }

    #[test]
    fn scale_four() {
        let recs = fixture_group("cifar10").unwrap();
        let p = compute_ir(&recs, "cifar10", 500, 4.0).unwrap();
        assert_eq!(p.acc_closed, 43.38);
    }
}
