use std::collections::BTreeSet;

use crate::equivlaw::LossSpace;
use crate::error::{Error, Result};
use crate::linfit::{Criterion, SelectionScope};

/// One base-set size and the real-augmentation ratios `n_real+ / n_base`
/// at which equivalence tuples are solved.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub n_base: u64,
    pub ratios: Vec<f64>,
}

impl GridEntry {
    pub fn new(n_base: u64, ratios: &[f64]) -> Self {
        GridEntry {
            n_base,
            ratios: ratios.to_vec(),
        }
    }
}

/// Everything needed to run one study end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Empty means "infer from the records".
    pub dataset_id: String,
    /// Restrict to one classifier when the records hold several.
    pub classifier: Option<String>,
    /// Size of the full original training set; sets `tau = 10 / n_total`.
    pub n_total: u64,
    /// Offset inside every log feature.
    pub epsilon: f64,
    pub tuple_grid: Vec<GridEntry>,
    /// Largest `n_syn+ / n_base` kept as a tuple.
    pub ratio_cap: f64,
    pub criterion: Criterion,
    pub loss: LossSpace,
    pub selection: SelectionScope,
    /// Real-to-synthetic scale `1:k` used for the improvement ratio.
    pub ir_scale: f64,
    /// Grid points per contour axis.
    pub contour_resolution: usize,
    pub contour_levels: usize,
    /// Contour axes span `[0, contour_extent * n_base]` in added images.
    pub contour_extent: f64,
}

/// Names accepted by [`StudyConfig::preset`].
pub const PRESETS: &[&str] = &["cifar10", "imagenet100", "bloodmnist"];

impl StudyConfig {
    /// A config with the standard defaults and no grid.
    pub fn new(dataset_id: impl Into<String>, n_total: u64) -> Self {
        StudyConfig {
            dataset_id: dataset_id.into(),
            classifier: None,
            n_total,
            epsilon: 1.0,
            tuple_grid: Vec::new(),
            ratio_cap: 100.0,
            criterion: Criterion::AdjustedR2,
            loss: LossSpace::Log,
            selection: SelectionScope::Shared,
            ir_scale: 1.0,
            contour_resolution: 256,
            contour_levels: 8,
            contour_extent: 4.0,
        }
    }

    /// The bundled study configurations.
    pub fn preset(name: &str) -> Result<Self> {
        let (dataset, n_total, grid): (&str, u64, Vec<GridEntry>) = match name {
            "cifar10" => (
                "cifar10",
                50_000,
                [500, 5000, 25_000]
                    .iter()
                    .map(|&b| GridEntry::new(b, &[1.0, 2.0, 3.0]))
                    .collect(),
            ),
            "imagenet100" | "imagenet100_vit" => (
                "imagenet100",
                130_000,
                [6500, 26_000]
                    .iter()
                    .map(|&b| GridEntry::new(b, &[0.2, 0.4, 0.6, 0.8, 1.0, 2.0, 3.0, 4.0]))
                    .collect(),
            ),
            "bloodmnist" => (
                "bloodmnist",
                12_000,
                [1200, 6000]
                    .iter()
                    .map(|&b| GridEntry::new(b, &[1.0, 2.0, 3.0]))
                    .collect(),
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let mut cfg = StudyConfig::new(dataset, n_total);
        cfg.tuple_grid = grid;
        if name == "imagenet100_vit" {
            cfg.classifier = Some("vit_b32".into());
        }
        Ok(cfg)
    }

    /// `10 / n_total`.
    pub fn tau(&self) -> Result<f64> {
        crate::equivlaw::compute_tau(self.n_total)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_total == 0 {
            return bad("n_total must be positive".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.ratio_cap > 0.0 && self.ratio_cap.is_finite()) {
            return bad(format!("cap must be positive, got {}", self.ratio_cap));
        }
        if !(self.ir_scale > 0.0 && self.ir_scale.is_finite()) {
            return bad(format!("scale must be positive, got {}", self.ir_scale));
        }
        if self.contour_resolution < 2 {
            return bad("contour resolution must be at least 2".into());
        }
        if !(self.contour_extent > 0.0 && self.contour_extent.is_finite()) {
            return bad("contour extent must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for entry in &self.tuple_grid {
            if !seen.insert(entry.n_base) {
                return bad(format!("duplicate n_base {} in grid", entry.n_base));
            }
            if entry.n_base == 0 {
                return bad("grid n_base must be positive".into());
            }
            if entry.n_base > self.n_total {
                return bad(format!("grid n_base {} exceeds n_total {}", entry.n_base, self.n_total));
            }
            if let Some(r) = entry.ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
                return bad(format!("grid ratio {r} at n_base {} must be positive", entry.n_base));
            }
        }
        Ok(())
    }
}
