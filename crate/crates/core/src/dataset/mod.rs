//! Experiment records: the data model, CSV ingestion, and the bundled
//! result tables.
//!
//! Every input, user-supplied or bundled, goes through [`parse_records`]:
//! a comma-delimited file whose header names the seven record fields
//! `dataset,mode,classifier,n_base,added_real,added_syn,accuracy`.

mod fixtures;
mod slice;
mod study;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use fixtures::{fixture_catalog, fixture_group, load_fixture, FixtureInfo, FIXTURE_GROUPS};
pub use slice::{slice_for_base, SlicePoint, MIN_SLICE_POINTS};
pub use study::{GridEntry, StudyConfig, PRESETS};

/// How the extra training images of a run were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Extra real images drawn from the original training set.
    RealAug,
    /// Synthetic images from a generator trained only on the base set.
    ClosedSet,
    /// Synthetic images from a generator pre-trained on external data.
    OpenSet,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::RealAug, Mode::ClosedSet, Mode::OpenSet];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RealAug => "real_aug",
            Mode::ClosedSet => "closed_set",
            Mode::OpenSet => "open_set",
        }
    }

    /// True for the two generative modes.
    pub fn is_synthetic(self) -> bool {
        !matches!(self, Mode::RealAug)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real_aug" => Ok(Mode::RealAug),
            "closed_set" => Ok(Mode::ClosedSet),
            "open_set" => Ok(Mode::OpenSet),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}' (expected real_aug, closed_set or open_set)"
            ))),
        }
    }
}

/// One measured top-1 accuracy for a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub mode: Mode,
    pub classifier: String,
    pub n_base: u64,
    pub added_real: u64,
    pub added_syn: u64,
    /// Top-1 accuracy in percent.
    pub accuracy: f64,
}

impl ExperimentRecord {
    /// A run with nothing added to the base set.
    pub fn is_baseline(&self) -> bool {
        self.added_real == 0 && self.added_syn == 0
    }

    /// Checks the record invariants, returning the offending column and a
    /// message on failure.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(0.0..=100.0).contains(&self.accuracy) || !self.accuracy.is_finite() {
            return Err(("accuracy", "accuracy out of range".into()));
        }
        if self.added_real > 0 && self.added_syn > 0 {
            return Err(("added_syn", "added_real and added_syn are both nonzero".into()));
        }
        match self.mode {
            Mode::RealAug if self.added_syn > 0 => {
                return Err(("added_syn", "real_aug row with added_syn > 0".into()));
            }
            Mode::ClosedSet | Mode::OpenSet if self.added_real > 0 => {
                return Err(("added_real", format!("{} row with added_real > 0", self.mode)));
            }
            _ => {}
        }
        if self.n_base + self.added_real + self.added_syn == 0 {
            return Err(("n_base", "empty training set".into()));
        }
        if self.dataset.is_empty() {
            return Err(("dataset", "empty dataset label".into()));
        }
        Ok(())
    }
}

/// Column names used to locate each record field in the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub dataset: String,
    pub mode: String,
    pub classifier: String,
    pub n_base: String,
    pub added_real: String,
    pub added_syn: String,
    pub accuracy: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            dataset: "dataset".into(),
            mode: "mode".into(),
            classifier: "classifier".into(),
            n_base: "n_base".into(),
            added_real: "added_real".into(),
            added_syn: "added_syn".into(),
            accuracy: "accuracy".into(),
        }
    }
}

impl Schema {
    fn names(&self) -> [&str; 7] {
        [
            &self.dataset,
            &self.mode,
            &self.classifier,
            &self.n_base,
            &self.added_real,
            &self.added_syn,
            &self.accuracy,
        ]
    }
}

/// The canonical header line.
pub const HEADER: &str = "dataset,mode,classifier,n_base,added_real,added_syn,accuracy";

/// Parses delimiter-separated records. Row numbers in errors are 1-based
/// and count data rows only (the header is row 0).
pub fn parse_records(text: &str, schema: &Schema) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let header = reader.headers().map_err(|e| Error::Header(e.to_string()))?.clone();
    let mut index = [0usize; 7];
    for (slot, name) in index.iter_mut().zip(schema.names()) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Header(format!("missing column '{name}'")))?;
    }
    let [i_dataset, i_mode, i_classifier, i_base, i_real, i_syn, i_acc] = index;

    let mut records = Vec::new();
    for (k, row) in reader.records().enumerate() {
        let row_no = k + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            column: "*".into(),
            message: format!("malformed row ({e})"),
        })?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let fail = |column: &str, message: String| Error::Parse {
            row: row_no,
            column: column.into(),
            message,
        };

        let mode: Mode = field(i_mode)
            .parse()
            .map_err(|_| fail(&schema.mode, format!("unknown mode '{}'", field(i_mode))))?;
        let count = |i: usize, column: &str| -> Result<u64> {
            let raw = field(i);
            raw.parse::<u64>().map_err(|_| match raw.parse::<i64>() {
                Ok(v) if v < 0 => fail(column, "negative count".into()),
                _ => fail(column, format!("malformed number '{raw}'")),
            })
        };
        let n_base = count(i_base, &schema.n_base)?;
        let added_real = count(i_real, &schema.added_real)?;
        let added_syn = count(i_syn, &schema.added_syn)?;
        let accuracy: f64 = field(i_acc)
            .parse()
            .map_err(|_| fail(&schema.accuracy, format!("malformed number '{}'", field(i_acc))))?;

        let record = ExperimentRecord {
            dataset: field(i_dataset).to_string(),
            mode,
            classifier: field(i_classifier).to_string(),
            n_base,
            added_real,
            added_syn,
            accuracy,
        };
        if let Err((column, message)) = record.check() {
            let column = match column {
                "accuracy" => &schema.accuracy,
                "added_syn" => &schema.added_syn,
                "added_real" => &schema.added_real,
                "n_base" => &schema.n_base,
                _ => &schema.dataset,
            };
            return Err(fail(column, message));
        }
        records.push(record);
    }
    Ok(records)
}

/// Serializes records with the canonical header. Accuracies use the
/// shortest representation that parses back to the same value.
pub fn write_records(records: &[ExperimentRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.dataset, r.mode, r.classifier, r.n_base, r.added_real, r.added_syn, r.accuracy
        ));
    }
    out
}

/// Keeps records of one classifier.
pub fn filter_classifier(records: &[ExperimentRecord], classifier: &str) -> Vec<ExperimentRecord> {
    records.iter().filter(|r| r.classifier == classifier).cloned().collect()
}
