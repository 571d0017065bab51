use std::collections::{BTreeMap, BTreeSet};

use super::ir::{compute_ir, IrPoint};
use crate::dataset::{slice_for_base, ExperimentRecord, Mode, SlicePoint, StudyConfig};
use crate::equivlaw::{build_tuples, fit_law, EquivalenceLaw, TupleSet};
use crate::error::{Error, Result};
use crate::linfit::{select_model, select_shared_model, LinearModel, SelectionScope, SliceInput, Subset};
use crate::surface::{contour_grid, default_levels, render_svg, AccuracySurface, GridSpec, SvgStyle};

/// Log offsets at which laws are refitted for the sensitivity table.
pub const SENSITIVITY_EPSILONS: [f64; 3] = [0.1, 1.0, 10.0];

/// Fit summary of one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub n_base: u64,
    pub points: usize,
    pub model: LinearModel,
    /// The subset this slice alone would pick.
    pub own_best: Subset,
}

/// One rendered contour map.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourArtifact {
    pub mode: Mode,
    pub n_base: u64,
    pub levels: Vec<f64>,
    pub polylines: usize,
    pub csv: String,
    /// SVG text, or why it could not be drawn.
    pub svg: std::result::Result<String, String>,
}

impl ContourArtifact {
    /// File stem such as `contour_closed_set_5000`.
    pub fn stem(&self) -> String {
        format!("contour_{}_{}", self.mode, self.n_base)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFit {
    pub slices: Vec<SliceReport>,
    /// False when no subset passed the shape checks (shared selection).
    pub subset_admissible: bool,
    pub surfaces: BTreeMap<u64, AccuracySurface>,
    pub tuples: TupleSet,
    pub law: EquivalenceLaw,
    /// Tuples whose `n_syn+` lies beyond the synthetic data of their slice.
    pub extrapolated: usize,
    pub contours: Vec<ContourArtifact>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeOutcome {
    Fitted(Box<ModeFit>),
    Failed(String),
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode: Mode,
    pub outcome: ModeOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotApplicable => "n/a",
        }
    }
}

/// A conclusion check and the numbers it compared.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub epsilon: f64,
    pub mode: Mode,
    pub outcome: std::result::Result<(Subset, EquivalenceLaw, usize), String>,
}

/// Everything one study produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ConclusionReport {
    pub config: StudyConfig,
    pub dataset_id: String,
    pub classifiers: Vec<String>,
    pub modes: Vec<ModeReport>,
    pub checks: Vec<Check>,
    pub ir: Vec<std::result::Result<IrPoint, String>>,
    pub sensitivity: Vec<SensitivityRow>,
    /// Some requested mode failed.
    pub partial: bool,
}

impl ConclusionReport {
    pub fn mode_fit(&self, mode: Mode) -> Option<&ModeFit> {
        self.modes
            .iter()
            .find(|m| m.mode == mode)
            .and_then(|m| match &m.outcome {
                ModeOutcome::Fitted(f) => Some(f.as_ref()),
                _ => None,
            })
    }

    pub fn law(&self, mode: Mode) -> Option<&EquivalenceLaw> {
        self.mode_fit(mode).map(|f| &f.law)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Pipeline {
    slices: Vec<SliceReport>,
    admissible: bool,
    surfaces: BTreeMap<u64, AccuracySurface>,
    tuples: TupleSet,
    law: EquivalenceLaw,
}

/// `(n_base, points, largest grid ratio)` for every grid entry.
type ModeSlices = Vec<(u64, Vec<SlicePoint>, f64)>;

fn gather(records: &[ExperimentRecord], dataset: &str, mode: Mode, config: &StudyConfig) -> Result<ModeSlices> {
    if config.tuple_grid.is_empty() {
        return Err(Error::Config("tuple grid is empty".into()));
    }
    config
        .tuple_grid
        .iter()
        .map(|entry| {
            let pts = slice_for_base(records, dataset, mode, entry.n_base)?;
            let max_r = entry.ratios.iter().copied().fold(0.0, f64::max);
            Ok((entry.n_base, pts, max_r))
        })
        .collect()
}

/// Fits every mode of a study. With shared selection one subset is chosen
/// over the slices of all modes that could be sliced, so a mode's result
/// does not depend on which other modes were requested.
fn fit_modes(
    records: &[ExperimentRecord],
    dataset: &str,
    modes: &[Mode],
    config: &StudyConfig,
) -> BTreeMap<Mode, Result<Pipeline>> {
    let gathered: Vec<(Mode, Result<ModeSlices>)> = modes
        .iter()
        .map(|&m| (m, gather(records, dataset, m, config)))
        .collect();

    let shared = match config.selection {
        SelectionScope::PerSlice => None,
        SelectionScope::Shared => {
            let inputs: Vec<SliceInput> = gathered
                .iter()
                .filter_map(|(_, g)| g.as_ref().ok())
                .flatten()
                .map(|(nb, pts, r)| SliceInput {
                    n_base: *nb,
                    points: pts,
                    max_real_ratio: *r,
                })
                .collect();
            (!inputs.is_empty())
                .then(|| select_shared_model(&inputs, config.epsilon, config.criterion, config.ratio_cap))
        }
    };

    let mut out = BTreeMap::new();
    let mut offset = 0;
    for (mode, g) in gathered {
        let result = g.and_then(|slices| {
            let models = match &shared {
                None => None,
                Some(Err(e)) => return Err(e.clone()),
                Some(Ok(sel)) => {
                    let m = (sel.models[offset..offset + slices.len()].to_vec(), sel.admissible);
                    offset += slices.len();
                    Some(m)
                }
            };
            finish(dataset, mode, slices, models, config)
        });
        out.insert(mode, result);
    }
    out
}

fn finish(
    dataset: &str,
    mode: Mode,
    points: ModeSlices,
    shared: Option<(Vec<LinearModel>, bool)>,
    config: &StudyConfig,
) -> Result<Pipeline> {
    let own: Vec<LinearModel> = points
        .iter()
        .map(|(_, pts, _)| select_model(pts, config.epsilon, config.criterion).map(|s| s.model))
        .collect::<Result<_>>()?;
    let (models, admissible) = shared.unwrap_or_else(|| (own.clone(), true));

    let mut surfaces = BTreeMap::new();
    let mut slices = Vec::new();
    for (((nb, pts, _), model), own) in points.iter().zip(models).zip(own) {
        slices.push(SliceReport {
            n_base: *nb,
            points: pts.len(),
            model: model.clone(),
            own_best: own.subset,
        });
        surfaces.insert(*nb, AccuracySurface::new(dataset, mode, *nb, model, pts));
    }
    let tuples = build_tuples(&surfaces, config)?;
    let law = fit_law(&tuples.tuples, config.tau()?, config.loss)?;
    Ok(Pipeline {
        slices,
        admissible,
        surfaces,
        tuples,
        law,
    })
}

fn contours_for(surface: &AccuracySurface, config: &StudyConfig) -> ContourArtifact {
    let grid = GridSpec::for_surface(surface, config.contour_extent, config.contour_resolution);
    let levels = default_levels(surface.min_accuracy, surface.max_accuracy, config.contour_levels);
    let (polylines, csv, svg) = match contour_grid(surface, &grid, &levels) {
        Ok(set) => {
            let style = SvgStyle {
                title: Some(format!("{} accuracy contours", surface.id())),
                ..SvgStyle::default()
            };
            let svg = render_svg(&set, &style).map_err(|e| e.to_string());
            (set.polyline_count(), set.to_csv(), svg)
        }
        Err(e) => (0, String::new(), Err(e.to_string())),
    };
    ContourArtifact {
        mode: surface.mode,
        n_base: surface.n_base,
        levels,
        polylines,
        csv,
        svg,
    }
}

/// Runs the full pipeline for each requested synthetic mode: slices,
/// model selection, surfaces, equivalence tuples, law fit and contours.
/// Then evaluates the conclusion checks, the improvement-ratio table and
/// the epsilon sensitivity refits.
///
/// A failing mode is recorded and the others continue. A mode without any
/// records is not applicable. Only an unusable configuration or record set
/// is an error.
pub fn run_study(records: &[ExperimentRecord], config: &StudyConfig, modes: &[Mode]) -> Result<ConclusionReport> {
    config.validate()?;
    if let Some(m) = modes.iter().find(|m| !m.is_synthetic()) {
        return Err(Error::InvalidArgument(format!("{m} is not a synthetic mode")));
    }

    let dataset_id = if config.dataset_id.is_empty() {
        let ids: BTreeSet<&str> = records.iter().map(|r| r.dataset.as_str()).collect();
        match ids.len() {
            1 => ids.into_iter().next().unwrap().to_string(),
            0 => return Err(Error::Config("no records".into())),
            _ => {
                return Err(Error::Config(format!(
                    "records hold several datasets ({}); set dataset_id",
                    ids.into_iter().collect::<Vec<_>>().join(", ")
                )))
            }
        }
    } else {
        config.dataset_id.clone()
    };
    let records: Vec<ExperimentRecord> = records
        .iter()
        .filter(|r| r.dataset == dataset_id)
        .filter(|r| config.classifier.as_ref().map_or(true, |c| &r.classifier == c))
        .cloned()
        .collect();
    if records.is_empty() {
        return Err(Error::Config(format!("no records for dataset '{dataset_id}'")));
    }
    let classifiers: Vec<String> = records
        .iter()
        .map(|r| r.classifier.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let present: Vec<Mode> = [Mode::ClosedSet, Mode::OpenSet]
        .into_iter()
        .filter(|m| records.iter().any(|r| r.mode == *m))
        .collect();
    let mut fits = fit_modes(&records, &dataset_id, &present, config);
    let mut mode_reports = Vec::new();
    for &mode in modes {
        let outcome = match fits.remove(&mode) {
            None => ModeOutcome::NotApplicable(format!("no {mode} records")),
            Some(Err(e)) => ModeOutcome::Failed(e.to_string()),
            Some(Ok(p)) => {
                let extrapolated = p
                    .tuples
                    .tuples
                    .iter()
                    .filter(|t| p.surfaces[&t.n_base].is_extrapolated(0.0, t.n_syn_plus))
                    .count();
                let contours = p.surfaces.values().map(|s| contours_for(s, config)).collect();
                ModeOutcome::Fitted(Box::new(ModeFit {
                    slices: p.slices,
                    subset_admissible: p.admissible,
                    surfaces: p.surfaces,
                    tuples: p.tuples,
                    law: p.law,
                    extrapolated,
                    contours,
                }))
            }
        };
        mode_reports.push(ModeReport { mode, outcome });
    }
    let partial = mode_reports.iter().any(|m| matches!(m.outcome, ModeOutcome::Failed(_)));

    let mut report = ConclusionReport {
        config: config.clone(),
        dataset_id: dataset_id.clone(),
        classifiers,
        modes: mode_reports,
        checks: Vec::new(),
        ir: Vec::new(),
        sensitivity: Vec::new(),
        partial,
    };
    report.checks = conclusion_checks(&report);
    report.ir = ir_table(&records, &dataset_id, config.ir_scale);

    for eps in SENSITIVITY_EPSILONS {
        let cfg = StudyConfig {
            epsilon: eps,
            ..config.clone()
        };
        let mut fits = fit_modes(&records, &dataset_id, &present, &cfg);
        for &mode in modes {
            let Some(fit) = fits.remove(&mode) else {
                continue;
            };
            let outcome = fit
                .map(|p| (p.slices[0].model.subset, p.law, p.tuples.tuples.len()))
                .map_err(|e| e.to_string());
            report.sensitivity.push(SensitivityRow {
                epsilon: eps,
                mode,
                outcome,
            });
        }
    }
    Ok(report)
}

fn conclusion_checks(report: &ConclusionReport) -> Vec<Check> {
    let laws: Vec<(Mode, &EquivalenceLaw)> = report
        .modes
        .iter()
        .filter_map(|m| report.law(m.mode).map(|l| (m.mode, l)))
        .collect();

    let c2 = if laws.is_empty() {
        Check {
            name: "all_c2_gt_1",
            status: CheckStatus::NotApplicable,
            evidence: "no fitted laws".into(),
        }
    } else {
        let ok = laws.iter().all(|(_, l)| l.c2 > 1.0);
        Check {
            name: "all_c2_gt_1",
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            evidence: laws
                .iter()
                .map(|(m, l)| format!("{m} c2 = {:.4}", l.c2))
                .collect::<Vec<_>>()
                .join("; "),
        }
    };

    let c1 = match (report.law(Mode::ClosedSet), report.law(Mode::OpenSet)) {
        (Some(c), Some(o)) => {
            let ok = c.c1 < o.c1;
            Check {
                name: "closed_c1_lt_open_c1",
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                evidence: format!(
                    "closed_set c1 = {:.4} {} open_set c1 = {:.4}",
                    c.c1,
                    if ok { "<" } else { ">=" },
                    o.c1
                ),
            }
        }
        (c, o) => {
            let missing: Vec<&str> = [(c, "closed_set"), (o, "open_set")]
                .iter()
                .filter(|(l, _)| l.is_none())
                .map(|(_, n)| *n)
                .collect();
            Check {
                name: "closed_c1_lt_open_c1",
                status: CheckStatus::NotApplicable,
                evidence: format!("no {} law", missing.join(" or ")),
            }
        }
    };
    vec![c2, c1]
}

/// IR at every base size that has closed-set or open-set rows.
fn ir_table(records: &[ExperimentRecord], dataset_id: &str, k: f64) -> Vec<std::result::Result<IrPoint, String>> {
    let bases: BTreeSet<u64> = records
        .iter()
        .filter(|r| r.dataset == dataset_id && r.mode.is_synthetic())
        .map(|r| r.n_base)
        .collect();
    bases
        .into_iter()
        .map(|nb| compute_ir(records, dataset_id, nb, k).map_err(|e| e.to_string()))
        .collect()
}
