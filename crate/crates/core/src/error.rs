use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("coupling must be positive and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("chain parameter `{0}` must be finite")]
    NonFiniteParameter(&'static str),
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("time interval must be positive, got {0}")]
    NonPositiveInterval(f64),
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("search window [{lo}, {hi}] is degenerate")]
    DegenerateWindow { lo: f64, hi: f64 },
    #[error("grid step and tolerance must be positive")]
    InvalidResolution,
    #[error("probability target must lie in (0, 1), got {0}")]
    InvalidProbability(f64),
    #[error(
        "failure threshold {p_target} not reached after {l_used} measurements \
         (P = {reached}, t = {total_time})"
    )]
    ThresholdNotReached {
        p_target: f64,
        l_used: usize,
        reached: f64,
        total_time: f64,
    },
    #[error("damping rates must be finite and non-negative")]
    InvalidRate,
    #[error("rails are damped asymmetrically (gamma_1 = {gamma_1}, gamma_2 = {gamma_2})")]
    AsymmetricNoise { gamma_1: f64, gamma_2: f64 },
    #[error("state has {state} sites but the spectrum has {spectrum}")]
    DimensionMismatch { state: usize, spectrum: usize },
    #[error("{what}: need at least {needed}, got {got}")]
    InsufficientSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("samples must be positive and finite for a log-log fit")]
    InvalidSample,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("logical qubit is not normalized (|alpha|^2 + |beta|^2 = {0})")]
    Unnormalized(f64),
    #[error("full-space oracle is limited to N <= {cap}, got {n}")]
    OracleTooLarge { n: usize, cap: usize },
    #[error("unknown figure id {0} (expected 2, 3 or 4)")]
    UnknownFigure(u32),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
