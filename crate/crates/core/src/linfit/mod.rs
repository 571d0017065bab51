//! Least-squares accuracy models over the log-feature basis and
//! exhaustive best-subset selection.

mod basis;
mod qr;

use std::fmt;
use std::str::FromStr;

use crate::dataset::SlicePoint;
use crate::error::{Error, Result};

pub use basis::{BasisFunction, Subset};

/// Fewest points [`select_model`] accepts.
pub const MIN_SELECTION_POINTS: usize = 6;

/// Relative tolerance under which two criterion scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Goodness-of-fit numbers for one least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitDiagnostics {
    pub rss: f64,
    pub tss: f64,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub rmse: f64,
    pub n_points: usize,
}

/// An accuracy model `sum_i b_i f_i(n_real, n_syn) + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub subset: Subset,
    /// One slope per member of `subset`, in canonical member order.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub epsilon: f64,
    pub diagnostics: FitDiagnostics,
}

impl LinearModel {
    /// A model with given coefficients and no fit diagnostics.
    pub fn from_coefficients(subset: Subset, coefficients: Vec<f64>, intercept: f64, epsilon: f64) -> Result<Self> {
        if coefficients.len() != subset.len() {
            return Err(Error::InvalidArgument(format!(
                "{subset} needs {} coefficients, got {}",
                subset.len(),
                coefficients.len()
            )));
        }
        Ok(LinearModel {
            subset,
            coefficients,
            intercept,
            epsilon,
            diagnostics: FitDiagnostics::default(),
        })
    }

    /// Slope of `b`, zero when `b` is not in the subset.
    pub fn coefficient(&self, b: BasisFunction) -> f64 {
        self.subset
            .members()
            .zip(&self.coefficients)
            .find(|(m, _)| *m == b)
            .map_or(0.0, |(_, c)| *c)
    }

    pub fn predict(&self, n_real: f64, n_syn: f64) -> f64 {
        self.subset
            .members()
            .zip(&self.coefficients)
            .map(|(b, c)| c * b.eval(n_real, n_syn, self.epsilon))
            .sum::<f64>()
            + self.intercept
    }

    /// Partial derivative in `n_real`.
    pub fn d_real(&self, n_real: f64, n_syn: f64) -> f64 {
        use BasisFunction::*;
        let e = self.epsilon;
        self.coefficient(NReal)
            + self.coefficient(LogReal) / (n_real + e)
            + self.coefficient(LogTotal) / (n_real + n_syn + e)
    }

    /// Partial derivative in `n_syn`.
    pub fn d_syn(&self, n_real: f64, n_syn: f64) -> f64 {
        use BasisFunction::*;
        let e = self.epsilon;
        self.coefficient(NSyn)
            + self.coefficient(LogSyn) / (n_syn + e)
            + self.coefficient(LogTotal) / (n_real + n_syn + e)
    }

    /// True when `n_syn -> predict(n_real, n_syn)` never decreases on
    /// `[lo, hi]`. Exact: the derivative times its positive denominators
    /// is a quadratic, whose minimum on the interval is checked.
    pub fn syn_nondecreasing(&self, n_real: f64, lo: f64, hi: f64) -> bool {
        use BasisFunction::*;
        derivative_nonneg(
            self.coefficient(NSyn),
            self.coefficient(LogSyn),
            self.coefficient(LogTotal),
            n_real,
            self.epsilon,
            lo,
            hi,
        )
    }

    /// Same as [`syn_nondecreasing`](Self::syn_nondecreasing) along `n_real`.
    pub fn real_nondecreasing(&self, n_syn: f64, lo: f64, hi: f64) -> bool {
        use BasisFunction::*;
        derivative_nonneg(
            self.coefficient(NReal),
            self.coefficient(LogReal),
            self.coefficient(LogTotal),
            n_syn,
            self.epsilon,
            lo,
            hi,
        )
    }

    pub fn residuals(&self, points: &[SlicePoint]) -> Vec<f64> {
        points
            .iter()
            .map(|p| p.accuracy - self.predict(p.n_real, p.n_syn))
            .collect()
    }
}

/// Checks `lin + own/(x+e) + total/(x+other+e) >= 0` for `x` in `[lo, hi]`.
fn derivative_nonneg(lin: f64, own: f64, total: f64, other: f64, eps: f64, lo: f64, hi: f64) -> bool {
    let q = |x: f64| {
        let a = x + eps;
        let b = x + other + eps;
        let value = lin * a * b + own * b + total * a;
        let size = lin.abs() * a * b + own.abs() * b + total.abs() * a;
        value >= -1e-12 * size
    };
    if !q(lo) || !q(hi) {
        return false;
    }
    // q(x) = lin x^2 + (lin (other + 2e) + own + total) x + const
    if lin > 0.0 {
        let b1 = lin * (other + 2.0 * eps) + own + total;
        let vertex = -b1 / (2.0 * lin);
        if vertex > lo && vertex < hi {
            return q(vertex);
        }
    }
    true
}

/// Score used to rank candidate subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    R2,
    #[default]
    AdjustedR2,
    Rmse,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::R2 => "r2",
            Criterion::AdjustedR2 => "adjusted_r2",
            Criterion::Rmse => "rmse",
        }
    }

    /// Larger is better for every criterion (RMSE is negated).
    pub fn score(self, d: &FitDiagnostics) -> f64 {
        match self {
            Criterion::R2 => d.r2,
            Criterion::AdjustedR2 => d.adjusted_r2,
            Criterion::Rmse => -d.rmse,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r2" => Ok(Criterion::R2),
            "adjusted_r2" => Ok(Criterion::AdjustedR2),
            "rmse" => Ok(Criterion::Rmse),
            other => Err(Error::InvalidArgument(format!(
                "unknown criterion '{other}' (expected r2, adjusted_r2 or rmse)"
            ))),
        }
    }
}

/// Whether each slice picks its own subset or a study shares one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionScope {
    #[default]
    Shared,
    PerSlice,
}

impl SelectionScope {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionScope::Shared => "shared",
            SelectionScope::PerSlice => "per_slice",
        }
    }
}

impl fmt::Display for SelectionScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(SelectionScope::Shared),
            "per_slice" => Ok(SelectionScope::PerSlice),
            other => Err(Error::InvalidArgument(format!(
                "unknown selection '{other}' (expected shared or per_slice)"
            ))),
        }
    }
}

fn column_name(i: usize, subset: Subset) -> String {
    if i == 0 {
        "intercept".into()
    } else {
        subset.members().nth(i - 1).unwrap().name().into()
    }
}

/// Ordinary least squares of accuracy on the features of `subset` plus an
/// intercept.
///
/// Points are put in a canonical order before factorization, so the result
/// does not depend on input order at all.
pub fn ols_fit(points: &[SlicePoint], subset: Subset, eps: f64) -> Result<LinearModel> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let p = subset.len();
    if points.len() < p + 2 {
        return Err(Error::InsufficientData {
            context: format!("fit of {subset}"),
            needed: p + 2,
            found: points.len(),
        });
    }

    let mut pts: Vec<SlicePoint> = points.to_vec();
    pts.sort_by(|a, b| {
        a.n_real
            .total_cmp(&b.n_real)
            .then(a.n_syn.total_cmp(&b.n_syn))
            .then(a.accuracy.total_cmp(&b.accuracy))
    });
    let y: Vec<f64> = pts.iter().map(|p| p.accuracy).collect();
    let mut cols = vec![vec![1.0; pts.len()]];
    for b in subset.members() {
        cols.push(pts.iter().map(|q| b.eval(q.n_real, q.n_syn, eps)).collect());
    }

    let sol = qr::lstsq(&cols, &y).map_err(|qr::QrError::Dependent { column, dependent_on }| Error::SingularFit {
        column: column_name(column, subset),
        dependent_on: dependent_on
            .iter()
            .map(|&i| column_name(i, subset))
            .collect::<Vec<_>>()
            .join(", "),
    })?;

    let mut model = LinearModel {
        subset,
        coefficients: sol[1..].to_vec(),
        intercept: sol[0],
        epsilon: eps,
        diagnostics: FitDiagnostics {
            rss: 0.0,
            tss: 0.0,
            r2: 0.0,
            adjusted_r2: 0.0,
            rmse: 0.0,
            n_points: pts.len(),
        },
    };
    let n = pts.len() as f64;
    let rss: f64 = model.residuals(&pts).iter().map(|r| r * r).sum();
    let mean = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sum_sq: f64 = y.iter().map(|v| v * v).sum();
    let r2 = if tss <= 1e-24 * sum_sq.max(1.0) {
        1.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    };
    let adjusted_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - p as f64 - 1.0);
    model.diagnostics = FitDiagnostics {
        rss,
        tss,
        r2,
        adjusted_r2,
        rmse: (rss / n).sqrt(),
        n_points: pts.len(),
    };
    Ok(model)
}

/// One subset tried during selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub subset: Subset,
    pub fit: Result<FitDiagnostics>,
}

/// The winning model plus every candidate's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelection {
    pub model: LinearModel,
    pub criterion: Criterion,
    pub candidates: Vec<Candidate>,
}

fn beats(a: f64, b: f64) -> bool {
    a > b + TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Fits all 31 subsets to one slice and keeps the best by `criterion`.
///
/// Ties (within [`TIE_TOLERANCE`]) go to the smaller subset, then to the
/// lexicographically first.
pub fn select_model(points: &[SlicePoint], eps: f64, criterion: Criterion) -> Result<ModelSelection> {
    if points.len() < MIN_SELECTION_POINTS {
        return Err(Error::InsufficientData {
            context: "model selection".into(),
            needed: MIN_SELECTION_POINTS,
            found: points.len(),
        });
    }
    let mut best: Option<(f64, LinearModel)> = None;
    let mut candidates = Vec::with_capacity(31);
    for subset in Subset::all() {
        let fit = ols_fit(points, subset, eps);
        candidates.push(Candidate {
            subset,
            fit: fit.as_ref().map(|m| m.diagnostics).map_err(Clone::clone),
        });
        if let Ok(model) = fit {
            let score = criterion.score(&model.diagnostics);
            if best.as_ref().map_or(true, |(s, _)| beats(score, *s)) {
                best = Some((score, model));
            }
        }
    }
    match best {
        Some((_, model)) => Ok(ModelSelection {
            model,
            criterion,
            candidates,
        }),
        None => Err(Error::Selection("every candidate subset is singular".into())),
    }
}

/// One slice taking part in a shared selection.
#[derive(Debug, Clone, Copy)]
pub struct SliceInput<'a> {
    pub n_base: u64,
    pub points: &'a [SlicePoint],
    /// Largest `n_real+ / n_base` the surface will be queried at.
    pub max_real_ratio: f64,
}

/// How one subset fared across all slices of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedCandidate {
    pub subset: Subset,
    /// Mean criterion score, `None` if some slice could not be fitted.
    pub mean_score: Option<f64>,
    pub admissible: bool,
    /// Why the subset was not admissible; empty otherwise.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharedSelection {
    pub subset: Subset,
    /// One model per input slice, same order.
    pub models: Vec<LinearModel>,
    pub mean_score: f64,
    /// False when no subset passed the shape checks and the best-scoring
    /// fittable subset was taken instead.
    pub admissible: bool,
    pub criterion: Criterion,
    pub candidates: Vec<SharedCandidate>,
}

/// Shape requirements for a slice model to be usable for equivalence
/// solving: non-decreasing in synthetic data over `[0, cap * n_base]` with
/// a net gain, and non-decreasing in real data over the queried range.
pub fn shape_violation(model: &LinearModel, n_base: f64, max_real_ratio: f64, cap: f64) -> Option<String> {
    let hi = cap * n_base;
    if !model.syn_nondecreasing(n_base, 0.0, hi) {
        return Some(format!("decreasing in n_syn at n_base = {n_base}"));
    }
    if !(model.predict(n_base, hi) > model.predict(n_base, 0.0)) {
        return Some(format!("no gain from synthetic data at n_base = {n_base}"));
    }
    if !model.real_nondecreasing(0.0, n_base, n_base * (1.0 + max_real_ratio)) {
        return Some(format!("decreasing in n_real at n_base = {n_base}"));
    }
    None
}

/// Picks one subset for every slice of a study.
///
/// Each subset is fitted to every slice. Subsets whose fits all pass
/// [`shape_violation`] are admissible, and the admissible subset with the
/// best mean score wins (ties as in [`select_model`]). If none is
/// admissible, the best fittable subset is returned with
/// `admissible = false`.
pub fn select_shared_model(
    slices: &[SliceInput<'_>],
    eps: f64,
    criterion: Criterion,
    ratio_cap: f64,
) -> Result<SharedSelection> {
    if slices.is_empty() {
        return Err(Error::Selection("no slices to select over".into()));
    }
    for s in slices {
        if s.points.len() < MIN_SELECTION_POINTS {
            return Err(Error::InsufficientData {
                context: format!("model selection at n_base = {}", s.n_base),
                needed: MIN_SELECTION_POINTS,
                found: s.points.len(),
            });
        }
    }

    let mut candidates = Vec::with_capacity(31);
    let mut best_ok: Option<(f64, Subset, Vec<LinearModel>)> = None;
    let mut best_any: Option<(f64, Subset, Vec<LinearModel>)> = None;
    for subset in Subset::all() {
        let fits: Result<Vec<LinearModel>> = slices.iter().map(|s| ols_fit(s.points, subset, eps)).collect();
        let models = match fits {
            Ok(m) => m,
            Err(e) => {
                candidates.push(SharedCandidate {
                    subset,
                    mean_score: None,
                    admissible: false,
                    note: e.to_string(),
                });
                continue;
            }
        };
        let mean = models.iter().map(|m| criterion.score(&m.diagnostics)).sum::<f64>() / models.len() as f64;
        let violation = slices
            .iter()
            .zip(&models)
            .find_map(|(s, m)| shape_violation(m, s.n_base as f64, s.max_real_ratio, ratio_cap));
        let admissible = violation.is_none();
        candidates.push(SharedCandidate {
            subset,
            mean_score: Some(mean),
            admissible,
            note: violation.unwrap_or_default(),
        });
        if best_any.as_ref().map_or(true, |(s, ..)| beats(mean, *s)) {
            best_any = Some((mean, subset, models.clone()));
        }
        if admissible && best_ok.as_ref().map_or(true, |(s, ..)| beats(mean, *s)) {
            best_ok = Some((mean, subset, models));
        }
    }

    let admissible = best_ok.is_some();
    let (mean_score, subset, models) = best_ok
        .or(best_any)
        .ok_or_else(|| Error::Selection("no subset can be fitted on every slice".into()))?;
    Ok(SharedSelection {
        subset,
        models,
        mean_score,
        admissible,
        criterion,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use BasisFunction::*;

    fn pt(n_real: f64, n_syn: f64, accuracy: f64) -> SlicePoint {
        SlicePoint {
            n_real,
            n_syn,
            accuracy,
        }
    }

    fn grid(f: impl Fn(f64, f64) -> f64) -> Vec<SlicePoint> {
        let mut v = Vec::new();
        for &r in &[100.0, 200.0, 300.0, 400.0] {
            v.push(pt(r, 0.0, f(r, 0.0)));
        }
        for &s in &[100.0, 250.0, 400.0, 800.0] {
            v.push(pt(100.0, s, f(100.0, s)));
        }
        v
    }

    #[test]
    fn recovers_single_log() {
        let pts: Vec<SlicePoint> = [1.0, 3.0, 10.0, 40.0, 100.0, 500.0]
            .iter()
            .map(|&n| pt(n, 0.0, 3.0 * (n + 1.0_f64).ln() + 7.0))
            .collect();
        let m = ols_fit(&pts, Subset::new(&[LogReal]).unwrap(), 1.0).unwrap();
        assert!((m.coefficients[0] - 3.0).abs() < 1e-8);
        assert!((m.intercept - 7.0).abs() < 1e-8);
        assert!(m.diagnostics.rss < 1e-20);
        assert_eq!(m.diagnostics.r2, 1.0);
    }

    #[test]
    fn constant_response() {
        let pts: Vec<SlicePoint> = (0..6)
            .map(|i| pt(100.0 + 50.0 * i as f64, (i % 2) as f64 * 70.0, 74.20))
            .collect();
        for subset in [Subset::new(&[LogReal]).unwrap(), Subset::new(&[NReal, LogSyn]).unwrap()] {
            let m = ols_fit(&pts, subset, 1.0).unwrap();
            for c in &m.coefficients {
                assert!(c.abs() < 1e-9, "{c}");
            }
            assert!((m.intercept - 74.20).abs() < 1e-9);
        }
    }

    #[test]
    fn equal_columns_are_singular() {
        let pts: Vec<SlicePoint> = (1..=6)
            .map(|i| pt(i as f64 * 10.0, i as f64 * 10.0, i as f64))
            .collect();
        let err = ols_fit(&pts, Subset::new(&[NReal, NSyn]).unwrap(), 1.0).unwrap_err();
        assert_eq!(
            err,
            Error::SingularFit {
                column: "N_SYN".into(),
                dependent_on: "N_REAL".into()
            }
        );
    }

    #[test]
    fn too_few_points_for_subset() {
        let pts = grid(|r, _| r)[..3].to_vec();
        assert!(matches!(
            ols_fit(&pts, Subset::new(&[NReal, NSyn]).unwrap(), 1.0),
            Err(Error::InsufficientData {
                needed: 4,
                found: 3,
                ..
            })
        ));
        assert!(ols_fit(&grid(|r, _| r), Subset::FULL, 0.0).is_err());
    }

    #[test]
    fn selects_linear_real() {
        let pts = grid(|r, _| 2.0 * r + 5.0);
        let sel = select_model(&pts, 1.0, Criterion::AdjustedR2).unwrap();
        assert_eq!(sel.model.subset, Subset::new(&[NReal]).unwrap());
        assert!((sel.model.coefficients[0] - 2.0).abs() < 1e-9);
        assert_eq!(sel.candidates.len(), 31);
    }

    #[test]
    fn five_points_rejected() {
        let pts = grid(|r, _| r)[..5].to_vec();
        assert!(matches!(
            select_model(&pts, 1.0, Criterion::AdjustedR2),
            Err(Error::InsufficientData {
                needed: 6,
                found: 5,
                ..
            })
        ));
    }

    #[test]
    fn criteria_parse() {
        for c in [Criterion::R2, Criterion::AdjustedR2, Criterion::Rmse] {
            assert_eq!(c.as_str().parse::<Criterion>().unwrap(), c);
        }
        assert!("aic".parse::<Criterion>().is_err());
        assert_eq!("per_slice".parse::<SelectionScope>().unwrap(), SelectionScope::PerSlice);
    }

    #[test]
    fn adjusted_never_exceeds_r2() {
        let pts = grid(|r, s| (r + 1.0).ln() * 4.0 + (s + 1.0).sqrt() + (r * 7.0).sin());
        let sel = select_model(&pts, 1.0, Criterion::AdjustedR2).unwrap();
        for c in &sel.candidates {
            if let Ok(d) = &c.fit {
                assert!(d.adjusted_r2 <= d.r2 + 1e-15);
                assert!((0.0..=1.0).contains(&d.r2));
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pts = grid(|r, s| 3.0 * (r + 1.0).ln() + 2.0 * (s + 1.0).ln() + 0.001 * r - (r + s + 1.0).ln());
        let m = ols_fit(&pts, Subset::FULL, 1.0).unwrap();
        let (r, s, h) = (150.0, 300.0, 1e-4);
        let fd_r = (m.predict(r + h, s) - m.predict(r - h, s)) / (2.0 * h);
        let fd_s = (m.predict(r, s + h) - m.predict(r, s - h)) / (2.0 * h);
        assert!((fd_r - m.d_real(r, s)).abs() < 1e-6);
        assert!((fd_s - m.d_syn(r, s)).abs() < 1e-6);
    }

    #[test]
    fn monotonicity_check_matches_sampling() {
        // d/ds = -1e-3 + 1/(s+1): positive until s = 999
        let m = LinearModel {
            subset: Subset::new(&[NSyn, LogSyn]).unwrap(),
            coefficients: vec![-1e-3, 1.0],
            intercept: 0.0,
            epsilon: 1.0,
            diagnostics: ols_fit(&grid(|r, _| r), Subset::new(&[NReal]).unwrap(), 1.0)
                .unwrap()
                .diagnostics,
        };
        assert!(m.syn_nondecreasing(100.0, 0.0, 998.0));
        assert!(!m.syn_nondecreasing(100.0, 0.0, 1001.0));
        // positive quadratic with an interior dip below zero
        let m2 = LinearModel {
            subset: Subset::new(&[NSyn, LogSyn, LogTotal]).unwrap(),
            coefficients: vec![1.0, 30.0, -40.0],
            ..m.clone()
        };
        let sampled = (0..=2000).all(|i| m2.d_syn(5.0, i as f64 * 0.01) >= 0.0);
        assert_eq!(m2.syn_nondecreasing(5.0, 0.0, 20.0), sampled);
    }

    #[test]
    fn shared_selection_prefers_admissible() {
        let f = |r: f64, s: f64| 2.0 * (r + 1.0).ln() + 1.5 * (s + 1.0).ln() + (r + s + 1.0).ln();
        let a: Vec<SlicePoint> = grid(f);
        let b: Vec<SlicePoint> = grid(|r, s| f(r * 2.0, s * 2.0));
        let sel = select_shared_model(
            &[
                SliceInput {
                    n_base: 100,
                    points: &a,
                    max_real_ratio: 3.0,
                },
                SliceInput {
                    n_base: 200,
                    points: &b,
                    max_real_ratio: 3.0,
                },
            ],
            1.0,
            Criterion::AdjustedR2,
            100.0,
        )
        .unwrap();
        assert!(sel.admissible);
        assert_eq!(sel.models.len(), 2);
        assert_eq!(sel.candidates.len(), 31);
        for (m, n) in sel.models.iter().zip([100.0, 200.0]) {
            assert!(shape_violation(m, n, 3.0, 100.0).is_none());
        }
    }
}
