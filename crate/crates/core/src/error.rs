use thiserror::Error;

/// Errors produced anywhere in the fitting pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{message} at row {row}, column {column}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("bad header: {0}")]
    Header(String),

    #[error("unknown fixture '{0}'")]
    UnknownFixture(String),

    #[error("insufficient data for {context}: need at least {needed} points, found {found}")]
    InsufficientData {
        context: String,
        needed: usize,
        found: usize,
    },

    #[error("records for {dataset} mix classifiers ({classifiers}); filter to one classifier first")]
    MixedClassifiers { dataset: String, classifiers: String },

    #[error("singular fit: column {column} is linearly dependent on [{dependent_on}]")]
    SingularFit { column: String, dependent_on: String },

    #[error("model selection failed: {0}")]
    Selection(String),

    #[error("surface is not monotone in n_syn over [{lo}, {hi}] at n_base = {n_base}")]
    NonMonotone { n_base: f64, lo: f64, hi: f64 },

    #[error("equivalence target {target} lies below the baseline accuracy {baseline}")]
    TargetBelowBaseline { target: f64, baseline: f64 },

    #[error("no accuracy surface for n_base = {0}")]
    MissingSurface(u64),

    #[error("law fit failed: {0}")]
    LawFit(String),

    #[error("missing row: {0}")]
    MissingRow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("render error: {0}")]
    Render(String),
}

pub type Result<T> = std::result::Result<T, Error>;
