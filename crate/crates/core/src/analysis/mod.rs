//! Improvement ratios, study orchestration and the study report.

mod ir;
mod report;
mod study;

pub use ir::{compute_ir, IrPoint};
pub use study::{
    run_study, Check, CheckStatus, ConclusionReport, ContourArtifact, ModeFit, ModeOutcome, ModeReport, SensitivityRow,
    SliceReport, SENSITIVITY_EPSILONS,
};
