use thiserror::Error;

/// Errors raised by the simulator.
///
/// `Config` errors always name the offending key so that a bad parameter file
/// can be fixed without reading source code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: `{key}` {constraint}")]
    Config { key: String, constraint: String },

    #[error("time {t} s is outside the short-time regime (0, {limit}) s")]
    OutsideShortTime { t: f64, limit: f64 },

    #[error("ODE step size underflow at t = {t} s (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("quadrature did not converge within {max_subdivisions} subdivisions (estimated error {error:e})")]
    QuadratureNonConvergence { max_subdivisions: usize, error: f64 },

    #[error("branch separation {r:e} m fell below the minimum {r_min:e} m at t = {t} s")]
    SeparationBelowMinimum { r: f64, r_min: f64, t: f64 },

    #[error("schedule does not recombine: {0}")]
    NonClosingSchedule(String),

    #[error("entangling phase {phase:e} rad is not resolvable above quadrature error {error:e} rad")]
    UnresolvablePhase { phase: f64, error: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("sweep grid has {points} points, above the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },

    #[error("power-law fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::GridTooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
