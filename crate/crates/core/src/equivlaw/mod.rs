//! Real-to-synthetic equivalence: tuple solving and the two-parameter law
//! `n_syn+ / n_base = c1^(tau n_base) (c2^(n_real+ / n_base) - 1)`.

mod fit;
mod tuples;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use fit::{fit_law, LawDiagnostics, StartOutcome, C1_STARTS, C2_STARTS};
pub use tuples::{build_tuples, solve_equivalent_syn, DiscardedTuple, EquivalenceTuple, FailedTuple, Solve, TupleSet};

/// `10 / n_total`.
pub fn compute_tau(n_total: u64) -> Result<f64> {
    if n_total == 0 {
        return Err(Error::InvalidArgument("n_total must be positive".into()));
    }
    Ok(10.0 / n_total as f64)
}

/// Space in which law residuals are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossSpace {
    /// `log y - log y_hat`, scale-free across tuples.
    #[default]
    Log,
    /// `y - y_hat`.
    Linear,
}

impl LossSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            LossSpace::Log => "log",
            LossSpace::Linear => "linear",
        }
    }
}

impl fmt::Display for LossSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(LossSpace::Log),
            "linear" => Ok(LossSpace::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss '{other}' (expected log or linear)"
            ))),
        }
    }
}

/// A fitted equivalence law. `tau` is fixed by the dataset, not fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceLaw {
    pub c1: f64,
    pub c2: f64,
    pub tau: f64,
    pub diagnostics: LawDiagnostics,
}

impl EquivalenceLaw {
    /// Predicted `n_syn+ / n_base` for real ratio `r = n_real+ / n_base`.
    pub fn predict_ratio(&self, n_base: f64, r: f64) -> f64 {
        predict_ratio(self.c1, self.c2, self.tau, n_base, r)
    }
}

impl fmt::Display for EquivalenceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = 1.0 / self.tau;
        let divisor = if (d - d.round()).abs() <= 1e-9 * d {
            format!("{}", d.round())
        } else {
            format!("{d:.6}")
        };
        write!(
            f,
            "n_syn+/n_base = {:.4}^(n_base/{divisor}) * ({:.4}^(n_real+/n_base) - 1)",
            self.c1, self.c2
        )
    }
}

/// `c1^(tau n_base) (c2^r - 1)`; exactly zero at `r = 0`.
pub fn predict_ratio(c1: f64, c2: f64, tau: f64, n_base: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    c1.powf(tau * n_base) * (r * c2.ln()).exp_m1()
}
