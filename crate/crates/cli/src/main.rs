//! `augequiv`: fit accuracy surfaces and real/synthetic equivalence laws
//! from augmentation experiment tables.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or fit
//! error. Diagnostics go to stderr; results and written paths to stdout.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use augequiv_core::analysis::ModeOutcome;
use augequiv_core::{
    compute_ir, fixture_catalog, fixture_group, parse_records, run_study, ConclusionReport, Criterion,
    ExperimentRecord, LossSpace, Mode, Schema, SelectionScope, StudyConfig,
};
use clap::{Args, Parser, Subcommand};

use crate::config::load_config;

#[derive(Parser)]
#[command(
    name = "augequiv",
    version,
    about = "How many synthetic images is one real image worth?"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select and fit the accuracy surface of every slice.
    FitSurface(StudyArgs),
    /// Solve equivalence tuples on the fitted surfaces.
    SolveEquivalence(StudyArgs),
    /// Fit the equivalence law per synthetic mode.
    FitLaw(StudyArgs),
    /// Improvement ratio of closed-set over open-set augmentation.
    Ir(StudyArgs),
    /// Write contour maps (SVG and CSV) of every fitted surface.
    Contour(StudyArgs),
    /// Run the whole study and write the report with its contour maps.
    Report(StudyArgs),
    /// Check that record files parse and satisfy the record invariants.
    Validate(InputArgs),
    /// List the bundled fixture tables.
    Fixtures,
}

#[derive(Args)]
struct InputArgs {
    /// Record files (CSV with header).
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Bundled fixture table or group, e.g. `cifar10`.
    #[arg(long)]
    fixtures: Option<String>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bundled study configuration.
    #[arg(long)]
    preset: Option<String>,
    /// `key = value` config file, applied on top of the preset if any.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for written artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long)]
    loss: Option<LossSpace>,
    #[arg(long)]
    selection: Option<SelectionScope>,
    /// Synthetic-to-base ratio cap for equivalence solving.
    #[arg(long)]
    cap: Option<f64>,
    /// Restrict output to one base set size.
    #[arg(long = "n-base")]
    n_base: Option<u64>,
    /// Augmentation scale `k` of `1:k` for the improvement ratio.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    classifier: Option<String>,
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<augequiv_core::Error> for Failure {
    fn from(e: augequiv_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(
                e.kind(),
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand {
                    ExitCode::from(1)
                } else {
                    ExitCode::SUCCESS
                };
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first} (see augequiv --help)");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome<()> {
    match command {
        Command::Fixtures => {
            for f in fixture_catalog() {
                println!("{:<22} {}", f.name, f.description);
            }
            Ok(())
        }
        Command::Validate(input) => validate(&input),
        Command::Ir(args) => ir(&args),
        Command::FitSurface(args) => {
            let report = study(&args)?;
            print!("{}", surfaces_table(&report, args.n_base));
            Ok(())
        }
        Command::SolveEquivalence(args) => {
            let report = study(&args)?;
            print!("{}", tuples_table(&report, args.n_base));
            Ok(())
        }
        Command::FitLaw(args) => {
            let report = study(&args)?;
            print!("{}", laws(&report)?);
            Ok(())
        }
        Command::Contour(args) => {
            let report = study(&args)?;
            let files: Vec<(String, String)> = report
                .artifacts()
                .into_iter()
                .filter(|(name, _)| {
                    args.n_base.map_or(true, |nb| {
                        name.rsplit_once('.')
                            .is_some_and(|(stem, _)| stem.ends_with(&format!("_{nb}")))
                    })
                })
                .collect();
            if files.is_empty() {
                return Err(anyhow!("no contour maps were produced").into());
            }
            write_files(&args.out, &files)
        }
        Command::Report(args) => {
            let report = study(&args)?;
            let mut files = vec![("report.txt".to_string(), report.render())];
            files.extend(report.artifacts());
            write_files(&args.out, &files)
        }
    }
}

fn load_records(input: &InputArgs) -> Outcome<Vec<ExperimentRecord>> {
    if input.input.is_empty() && input.fixtures.is_none() {
        return Err(usage(anyhow!("no records: pass --input FILE or --fixtures NAME")));
    }
    let mut records = Vec::new();
    if let Some(name) = &input.fixtures {
        records.extend(fixture_group(name).map_err(usage)?);
    }
    for path in &input.input {
        records.extend(read_file(path)?);
    }
    Ok(records)
}

fn read_file(path: &Path) -> Outcome<Vec<ExperimentRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_records(&text, &Schema::default()).with_context(|| format!("in {}", path.display()))?)
}

fn validate(input: &InputArgs) -> Outcome<()> {
    let mut targets: Vec<(String, Outcome<Vec<ExperimentRecord>>)> = Vec::new();
    if input.input.is_empty() && input.fixtures.is_none() {
        for f in fixture_catalog() {
            targets.push((
                f.name.to_string(),
                fixture_group(f.name).map_err(|e| Failure::Data(e.into())),
            ));
        }
    }
    if let Some(name) = &input.fixtures {
        targets.push((name.clone(), fixture_group(name).map_err(usage)));
    }
    for path in &input.input {
        targets.push((path.display().to_string(), read_file(path)));
    }
    let mut bad = 0;
    for (name, outcome) in targets {
        match outcome {
            Ok(records) => println!("ok {name}: {} records", records.len()),
            Err(Failure::Usage(e)) => return Err(Failure::Usage(e)),
            Err(Failure::Data(e)) => {
                eprintln!("invalid {name}: {e:#}");
                bad += 1;
            }
        }
    }
    if bad > 0 {
        return Err(anyhow!("{bad} input(s) failed validation").into());
    }
    Ok(())
}

/// Preset, then config file, then flag overrides; validated. Without
/// `--preset` the preset is guessed from the fixture name or the single
/// dataset id of the records.
fn resolve_config(args: &StudyArgs, records: &[ExperimentRecord]) -> Outcome<StudyConfig> {
    let guess = || {
        let mut ids: Vec<&str> = records.iter().map(|r| r.dataset.as_str()).collect();
        ids.sort();
        ids.dedup();
        match ids.as_slice() {
            [one] => StudyConfig::preset(one).ok(),
            _ => None,
        }
    };
    let preset = match (&args.preset, &args.input.fixtures) {
        (Some(p), _) => Some(StudyConfig::preset(p).map_err(usage)?),
        (None, Some(f)) => StudyConfig::preset(f).ok().or_else(guess),
        (None, None) => guess(),
    };
    let mut cfg = match (&args.config, preset) {
        (Some(path), base) => load_config(path, base).map_err(usage)?,
        (None, Some(base)) => base,
        (None, None) => {
            return Err(usage(anyhow!(
                "no study configuration: pass --preset NAME or --config FILE"
            )))
        }
    };
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.criterion {
        cfg.criterion = v;
    }
    if let Some(v) = args.loss {
        cfg.loss = v;
    }
    if let Some(v) = args.selection {
        cfg.selection = v;
    }
    if let Some(v) = args.cap {
        cfg.ratio_cap = v;
    }
    if let Some(v) = args.scale {
        cfg.ir_scale = v;
    }
    if let Some(v) = &args.dataset {
        cfg.dataset_id = v.clone();
    }
    if let Some(v) = &args.classifier {
        cfg.classifier = Some(v.clone());
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn study(args: &StudyArgs) -> Outcome<ConclusionReport> {
    let records = load_records(&args.input)?;
    let config = resolve_config(args, &records)?;
    let report = run_study(&records, &config, &[Mode::ClosedSet, Mode::OpenSet])?;
    for m in &report.modes {
        if let ModeOutcome::Failed(why) = &m.outcome {
            eprintln!("warning: {} failed: {why}", m.mode);
        }
    }
    Ok(report)
}

fn ir(args: &StudyArgs) -> Outcome<()> {
    let records = load_records(&args.input)?;
    let explicit = args.preset.is_some() || args.config.is_some();
    let config = match resolve_config(args, &records) {
        Ok(c) => Some(c),
        Err(e) if explicit => return Err(e),
        Err(_) => None,
    };
    let k = args.scale.or(config.as_ref().map(|c| c.ir_scale)).unwrap_or(1.0);
    if !(k.is_finite() && k > 0.0) {
        return Err(usage(anyhow!("scale must be positive, got {k}")));
    }
    let dataset = match args
        .dataset
        .clone()
        .or(config.map(|c| c.dataset_id))
        .filter(|d| !d.is_empty())
    {
        Some(d) => d,
        None => {
            let mut ids: Vec<&str> = records.iter().map(|r| r.dataset.as_str()).collect();
            ids.sort();
            ids.dedup();
            match ids.as_slice() {
                [one] => one.to_string(),
                _ => return Err(usage(anyhow!("records hold several datasets; pass --dataset"))),
            }
        }
    };
    let bases: Vec<u64> = match args.n_base {
        Some(nb) => vec![nb],
        None => {
            let mut b: Vec<u64> = records
                .iter()
                .filter(|r| r.dataset == dataset && r.mode == Mode::OpenSet)
                .map(|r| r.n_base)
                .collect();
            b.sort();
            b.dedup();
            b
        }
    };
    let mut undefined = 0;
    for nb in bases {
        let p = compute_ir(&records, &dataset, nb, k)?;
        match p.ir {
            Some(v) => println!(
                "IR = {v:.2} (dataset {dataset}, n_base {nb}, scale 1:{k}, closed {:+.2}, open {:+.2})",
                p.delta_closed, p.delta_open
            ),
            None => {
                println!("IR = undefined (dataset {dataset}, n_base {nb}, scale 1:{k}, open-set gain is zero)");
                undefined += 1;
            }
        }
    }
    if undefined > 0 && args.n_base.is_some() {
        return Err(anyhow!("IR is undefined: the open-set accuracy gain is zero").into());
    }
    Ok(())
}

fn fitted(report: &ConclusionReport) -> impl Iterator<Item = (Mode, &augequiv_core::analysis::ModeFit)> {
    report.modes.iter().filter_map(|m| match &m.outcome {
        ModeOutcome::Fitted(f) => Some((m.mode, f.as_ref())),
        _ => None,
    })
}

fn surfaces_table(report: &ConclusionReport, n_base: Option<u64>) -> String {
    let mut s = String::from("mode,n_base,points,subset,own_best,adjusted_r2,rmse,intercept,coefficients\n");
    for (mode, fit) in fitted(report) {
        for sl in fit.slices.iter().filter(|sl| n_base.map_or(true, |nb| nb == sl.n_base)) {
            let coefs: Vec<String> = sl.model.coefficients.iter().map(|c| format!("{c:.6e}")).collect();
            let _ = writeln!(
                s,
                "{mode},{},{},{},{},{:.6},{:.6},{:.6},{}",
                sl.n_base,
                sl.points,
                sl.model.subset,
                sl.own_best,
                sl.model.diagnostics.adjusted_r2,
                sl.model.diagnostics.rmse,
                sl.model.intercept,
                coefs.join(" ")
            );
        }
    }
    s
}

fn tuples_table(report: &ConclusionReport, n_base: Option<u64>) -> String {
    let keep = |nb: u64| n_base.map_or(true, |x| x == nb);
    let mut s = String::from("mode,n_base,n_real_plus,n_syn_plus,real_ratio,syn_ratio,status\n");
    for (mode, fit) in fitted(report) {
        for t in fit.tuples.tuples.iter().filter(|t| keep(t.n_base)) {
            let _ = writeln!(
                s,
                "{mode},{},{:.3},{:.3},{:.6},{:.6},solved",
                t.n_base,
                t.n_real_plus,
                t.n_syn_plus,
                t.real_ratio(),
                t.syn_ratio()
            );
        }
        for d in fit.tuples.discarded.iter().filter(|d| keep(d.n_base)) {
            let _ = writeln!(s, "{mode},{},{:.3},,,,discarded", d.n_base, d.n_real_plus);
        }
        for f in fit.tuples.failures.iter().filter(|f| keep(f.n_base)) {
            let _ = writeln!(
                s,
                "{mode},{},{:.3},,,,failed: {}",
                f.n_base,
                f.n_real_plus,
                f.error.to_string().replace(',', ";")
            );
        }
    }
    s
}

fn laws(report: &ConclusionReport) -> anyhow::Result<String> {
    let mut s = String::new();
    let mut any = false;
    for m in &report.modes {
        match &m.outcome {
            ModeOutcome::Fitted(fit) => {
                any = true;
                let l = &fit.law;
                let _ = writeln!(
                    s,
                    "{}: c1 = {:.4}, c2 = {:.4} ({} tuples, {} discarded, subset {})",
                    m.mode,
                    l.c1,
                    l.c2,
                    fit.tuples.tuples.len(),
                    fit.tuples.discarded.len(),
                    fit.slices[0].model.subset
                );
                let _ = writeln!(s, "  {l}");
            }
            ModeOutcome::Failed(why) => {
                let _ = writeln!(s, "{}: failed ({why})", m.mode);
            }
            ModeOutcome::NotApplicable(why) => {
                let _ = writeln!(s, "{}: n/a ({why})", m.mode);
            }
        }
    }
    for ch in &report.checks {
        let _ = writeln!(s, "check {}: {} ({})", ch.name, ch.status.as_str(), ch.evidence);
    }
    if !any {
        return Err(anyhow!("no synthetic mode could be fitted"));
    }
    Ok(s)
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Outcome<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}
