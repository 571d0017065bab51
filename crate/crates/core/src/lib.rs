//! Quantifies how many synthetic training images are worth one real image.
//!
//! The pipeline fits an accuracy surface `Acc(n_real, n_syn)` to each base
//! set size of an experiment grid, solves for real/synthetic amounts of
//! equal predicted accuracy, and fits the two-parameter law
//! `n_syn+ / n_base = c1^(tau n_base) (c2^(n_real+ / n_base) - 1)` to those
//! pairs.
//!
//! ```
//! use augequiv_core::{fixture_group, run_study, Mode, StudyConfig};
//!
//! let records = fixture_group("cifar10").unwrap();
//! let config = StudyConfig::preset("cifar10").unwrap();
//! let report = run_study(&records, &config, &[Mode::ClosedSet]).unwrap();
//! assert!(report.law(Mode::ClosedSet).unwrap().c2 > 1.0);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dataset;
pub mod equivlaw;
pub mod error;
pub mod linfit;
pub mod surface;

pub use analysis::{compute_ir, run_study, ConclusionReport, IrPoint};
pub use dataset::{
    fixture_catalog, fixture_group, load_fixture, parse_records, slice_for_base, write_records, ExperimentRecord,
    GridEntry, Mode, Schema, SlicePoint, StudyConfig,
};
pub use equivlaw::{
    build_tuples, compute_tau, fit_law, predict_ratio, solve_equivalent_syn, EquivalenceLaw, EquivalenceTuple,
    LossSpace, Solve, TupleSet,
};
pub use error::{Error, Result};
pub use linfit::{
    ols_fit, select_model, select_shared_model, BasisFunction, Criterion, LinearModel, ModelSelection, SelectionScope,
    Subset,
};
pub use surface::{contour_grid, render_svg, AccuracySurface, ContourSet, GridSpec, SvgStyle};
