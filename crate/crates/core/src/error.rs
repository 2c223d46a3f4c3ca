use thiserror::Error;

/// Errors raised while building tables, solving, or reporting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chain fails the ergodicity check: sup of lambda_n/mu_n over the tail is {rho_sup}")]
    NonErgodic { rho_sup: f64 },

    #[error("truncation frontier not reached within {max_states} states")]
    TruncationOverflow { max_states: usize },

    #[error("invalid rate at state {state}: {detail}")]
    RateDomain { state: usize, detail: String },

    #[error("tabulated model has {available} states but {needed} are required")]
    TabulatedTooShort { needed: usize, available: usize },

    #[error("steady-state probability underflows at state {state}")]
    ProbabilityUnderflow { state: usize },

    #[error("model carries no analytic mean cost")]
    MissingAnalyticForm,

    #[error("mean cost unavailable for the exact solution")]
    MissingZeta,

    #[error("series for {quantity} neither stabilizes nor shows divergent growth within the frontier")]
    InconclusiveConvergence { quantity: &'static str },

    #[error("frontier {available} is below the requested index {requested}")]
    FrontierTooSmall { requested: usize, available: usize },

    #[error("no frontier up to n* = {n_star} damps the backward seed below unit roundoff at row {report_max}")]
    NoSafeFrontier { report_max: usize, n_star: usize },

    #[error("relative error factors undefined: {0}")]
    ZeroDenominator(String),

    #[error("crossover order violated: m = {m} exceeds M = {big_m}")]
    CrossoverOrder { m: usize, big_m: usize },

    #[error("mixed-scheme limits need a finite mean passage time from steady state to 0")]
    RequiresFiniteTp0,

    #[error("special function argument out of domain: {0}")]
    DomainError(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Numeric failures (as opposed to malformed input).
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
