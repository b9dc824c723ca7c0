use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the solver stack can report.
///
/// Variants group into the stable CLI exit-code classes returned by
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("vacuum/invalid state: Bernoulli radicand {radicand:e} is not positive")]
    Vacuum { radicand: f64 },

    #[error("sonic degeneracy at x1 = {x:.12}: |u^2 - c^2| = {gap:e} below guard {guard:e}")]
    SonicDegeneracy { x: f64, gap: f64, guard: f64 },

    #[error(
        "no transonic shock for this exit pressure: Pe = {pe:.17e} outside window (P1, P0) = ({p1:.17e}, {p0:.17e})"
    )]
    NoTransonicShock { pe: f64, p1: f64, p0: f64 },

    #[error("degenerate window: exit pressure independent of shock position (P = {pressure:.17e})")]
    DegenerateWindow { pressure: f64 },

    #[error("monotonicity violated: P0 = {p0:.17e} <= P1 = {p1:.17e}")]
    MonotonicityViolated { p0: f64, p1: f64 },

    #[error("coefficient degeneracy: {name} = {value:e} at y1 = {y1:.12}")]
    CoefficientDegeneracy { name: &'static str, value: f64, y1: f64 },

    #[error("compatibility violation: {0}")]
    Compatibility(String),

    #[error("characteristic degeneracy at (y1, y2) = ({y1:.9}, {y2:.9}): denominator {denominator:e}")]
    CharacteristicDegeneracy { y1: f64, y2: f64, denominator: f64 },

    #[error("hat state too large: {0}")]
    HatTooLarge(String),

    #[error("shock curve leaves the nozzle: xi = {xi:.12} at y2 = {y2:.9}")]
    ShockOutOfNozzle { xi: f64, y2: f64 },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("fixed-point iteration diverged after {iterations} iterations (contraction ratios {ratios:?})")]
    Divergence { iterations: usize, ratios: Vec<f64> },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path}: byte offset {offset}: {message}")]
    Parse { path: PathBuf, offset: u64, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// CLI exit code: 2 validation, 3 solver divergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } => 4,
            Error::Divergence { .. } => 3,
            Error::Solver(_)
            | Error::SonicDegeneracy { .. }
            | Error::CharacteristicDegeneracy { .. }
            | Error::HatTooLarge(_)
            | Error::ShockOutOfNozzle { .. }
            | Error::Internal(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
