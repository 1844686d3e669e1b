use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate generator: total transition rate is zero")]
    DegenerateGenerator,

    /// The rate graph has more than one closed class, so the kernel of the
    /// generator is not one-dimensional.
    #[error("degenerate steady state: disconnected closed blocks {blocks:?}")]
    DegenerateSteadyState { blocks: Vec<Vec<&'static str>> },

    #[error("negative population {value:e} in state {state} exceeds the clamping window")]
    NegativePopulation { state: usize, value: f64 },

    #[error("probability {value:e} of state {state} is below the floor {floor:e}")]
    SmallProbability { state: usize, value: f64, floor: f64 },

    #[error("parameter '{name}' is not valid for the {model} model; valid: {}", valid.join(", "))]
    InvalidParameter {
        name: String,
        model: &'static str,
        valid: Vec<&'static str>,
    },

    #[error("{method} differentiation is not available for {what}")]
    UnsupportedMethod {
        method: &'static str,
        what: &'static str,
    },

    #[error("at grid index {index}: {source}")]
    AtGridIndex { index: usize, source: Box<Error> },

    #[error("invalid sweep spec field '{field}': {reason}")]
    InvalidSpec { field: String, reason: String },

    #[error("no finite cells in sweep result")]
    EmptyResult,

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config line {line}: unknown key '{key}'{}", suggestion.as_ref().map(|s| format!(" (did you mean '{s}'?)")).unwrap_or_default())]
    UnknownKey {
        line: usize,
        key: String,
        suggestion: Option<String>,
    },

    #[error("config is missing required key '{0}'")]
    MissingKey(String),

    #[error("unknown figure preset '{id}'; available: {}", available.join(", "))]
    UnknownPreset {
        id: String,
        available: Vec<&'static str>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable code used as the status of failed sweep cells.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DegenerateGenerator => "degenerate_generator",
            Error::DegenerateSteadyState { .. } => "degenerate_steady_state",
            Error::NegativePopulation { .. } => "negative_population",
            Error::SmallProbability { .. } => "small_probability",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::UnsupportedMethod { .. } => "unsupported_method",
            Error::AtGridIndex { source, .. } => source.code(),
            Error::InvalidSpec { .. } => "invalid_spec",
            Error::EmptyResult => "empty_result",
            Error::ConfigParse { .. } => "config_parse",
            Error::UnknownKey { .. } => "unknown_key",
            Error::MissingKey(_) => "missing_key",
            Error::UnknownPreset { .. } => "unknown_preset",
            Error::Io(_) => "io",
        }
    }

    /// Cell status string: the code, plus the offending state index for
    /// probability-floor failures.
    pub fn status(&self) -> String {
        match self {
            Error::SmallProbability { state, .. } => format!("small_probability[{state}]"),
            Error::AtGridIndex { source, .. } => source.status(),
            other => other.code().to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
