use std::collections::BTreeMap;

use crate::dataset::StudyConfig;
use crate::error::{Error, Result};
use crate::surface::AccuracySurface;

/// Adding `n_real_plus` real images to a base set of `n_base` matches, in
/// predicted accuracy, adding `n_syn_plus` synthetic ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceTuple {
    pub n_base: u64,
    pub n_real_plus: f64,
    pub n_syn_plus: f64,
    pub surface_id: String,
}

impl EquivalenceTuple {
    /// `r = n_real+ / n_base`.
    pub fn real_ratio(&self) -> f64 {
        self.n_real_plus / self.n_base as f64
    }

    /// `y = n_syn+ / n_base`.
    pub fn syn_ratio(&self) -> f64 {
        self.n_syn_plus / self.n_base as f64
    }
}

/// Outcome of one equivalence solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solve {
    Solved(f64),
    /// The target accuracy is not reached within `ratio_cap * n_base`
    /// synthetic images.
    Discarded {
        target: f64,
        at_cap: f64,
    },
}

/// Finds `n_syn+` with `Acc_syn(n_base, n_syn+) = Acc_real(n_base + n_real+, 0)`.
///
/// Bisection on `[0, ratio_cap * n_base]` to a relative width of 1e-9. The
/// synthetic surface must be non-decreasing on that bracket; this is
/// checked exactly before searching.
pub fn solve_equivalent_syn(
    real_surface: &AccuracySurface,
    syn_surface: &AccuracySurface,
    n_base: f64,
    n_real_plus: f64,
    ratio_cap: f64,
) -> Result<Solve> {
    if !(n_real_plus >= 0.0) || !(n_base > 0.0) || !(ratio_cap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need n_base > 0, n_real_plus >= 0 and cap > 0 (got {n_base}, {n_real_plus}, {ratio_cap})"
        )));
    }
    if n_real_plus == 0.0 {
        return Ok(Solve::Solved(0.0));
    }
    let target = real_surface.eval(n_base + n_real_plus, 0.0);
    let baseline = syn_surface.eval(n_base, 0.0);
    if target < baseline {
        return Err(Error::TargetBelowBaseline { target, baseline });
    }
    let hi_bound = ratio_cap * n_base;
    if !syn_surface.model.syn_nondecreasing(n_base, 0.0, hi_bound) {
        return Err(Error::NonMonotone {
            n_base,
            lo: 0.0,
            hi: hi_bound,
        });
    }
    let at_cap = syn_surface.eval(n_base, hi_bound);
    if at_cap < target {
        return Ok(Solve::Discarded { target, at_cap });
    }
    if target == baseline {
        return Ok(Solve::Solved(0.0));
    }

    let g = |s: f64| syn_surface.eval(n_base, s) - target;
    let (mut lo, mut hi) = (0.0f64, hi_bound);
    let floor = 1e-300f64.max(1e-15 * n_base);
    for _ in 0..2000 {
        if hi - lo <= 1e-9 * hi.max(floor) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Solve::Solved(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscardedTuple {
    pub n_base: u64,
    pub n_real_plus: f64,
    pub target: f64,
    pub at_cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedTuple {
    pub n_base: u64,
    pub n_real_plus: f64,
    pub error: Error,
}

/// Solved tuples plus everything that was left out and why.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TupleSet {
    pub tuples: Vec<EquivalenceTuple>,
    pub discarded: Vec<DiscardedTuple>,
    /// Non-monotone surfaces and targets below baseline.
    pub failures: Vec<FailedTuple>,
}

/// Solves every `(n_base, r)` of the configured grid, in grid order.
///
/// Each slice uses its one surface for both sides of the equation.
pub fn build_tuples(surfaces: &BTreeMap<u64, AccuracySurface>, config: &StudyConfig) -> Result<TupleSet> {
    let mut set = TupleSet::default();
    for entry in &config.tuple_grid {
        let surface = surfaces.get(&entry.n_base).ok_or(Error::MissingSurface(entry.n_base))?;
        let nb = entry.n_base as f64;
        for &r in &entry.ratios {
            let n_real_plus = r * nb;
            match solve_equivalent_syn(surface, surface, nb, n_real_plus, config.ratio_cap) {
                Ok(Solve::Solved(n_syn_plus)) => set.tuples.push(EquivalenceTuple {
                    n_base: entry.n_base,
                    n_real_plus,
                    n_syn_plus,
                    surface_id: surface.id(),
                }),
                Ok(Solve::Discarded { target, at_cap }) => set.discarded.push(DiscardedTuple {
                    n_base: entry.n_base,
                    n_real_plus,
                    target,
                    at_cap,
                }),
                Err(e @ (Error::NonMonotone { .. } | Error::TargetBelowBaseline { .. })) => {
                    set.failures.push(FailedTuple {
                        n_base: entry.n_base,
                        n_real_plus,
                        error: e,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(set)
}
