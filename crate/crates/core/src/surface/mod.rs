//! Fitted accuracy surfaces and their contour maps.

mod contour;
mod svg;

use std::fmt;

use crate::dataset::{Mode, SlicePoint};
use crate::linfit::LinearModel;

pub use contour::{contour_grid, default_levels, trace_contours, ContourLevel, ContourSet, GridSpec};
pub use svg::{render_svg, SvgStyle};

/// `Acc(n_real, n_syn)` for one `(dataset, mode, n_base)` slice.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySurface {
    pub dataset_id: String,
    pub mode: Mode,
    pub n_base: u64,
    pub model: LinearModel,
    /// Largest total real count among the fitted points.
    pub max_n_real: f64,
    /// Largest synthetic count among the fitted points.
    pub max_n_syn: f64,
    /// Range of the fitted accuracies.
    pub min_accuracy: f64,
    pub max_accuracy: f64,
}

impl AccuracySurface {
    pub fn new(
        dataset_id: impl Into<String>,
        mode: Mode,
        n_base: u64,
        model: LinearModel,
        points: &[SlicePoint],
    ) -> Self {
        let fold =
            |f: fn(&SlicePoint) -> f64, init: f64, pick: fn(f64, f64) -> f64| points.iter().map(f).fold(init, pick);
        AccuracySurface {
            dataset_id: dataset_id.into(),
            mode,
            n_base,
            model,
            max_n_real: fold(|p| p.n_real, 0.0, f64::max),
            max_n_syn: fold(|p| p.n_syn, 0.0, f64::max),
            min_accuracy: fold(|p| p.accuracy, f64::INFINITY, f64::min),
            max_accuracy: fold(|p| p.accuracy, f64::NEG_INFINITY, f64::max),
        }
    }

    /// Predicted accuracy at total counts `(n_real, n_syn)`.
    pub fn eval(&self, n_real: f64, n_syn: f64) -> f64 {
        self.model.predict(n_real, n_syn)
    }

    /// Predicted accuracy after adding `real_plus` real or `syn_plus`
    /// synthetic images to the base set.
    pub fn eval_added(&self, real_plus: f64, syn_plus: f64) -> f64 {
        self.eval(self.n_base as f64 + real_plus, syn_plus)
    }

    pub fn epsilon(&self) -> f64 {
        self.model.epsilon
    }

    /// True when `(n_real, n_syn)` lies outside the fitted data range.
    pub fn is_extrapolated(&self, n_real: f64, n_syn: f64) -> bool {
        n_real > self.max_n_real || n_syn > self.max_n_syn
    }

    /// Stable identifier such as `cifar10/closed_set/5000`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for AccuracySurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.dataset_id, self.mode, self.n_base)
    }
}
