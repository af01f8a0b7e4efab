use thiserror::Error;

use crate::equilibria::EquilibriumKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probe grid is empty")]
    EmptyGrid,

    #[error("probe grid must be sorted and nonnegative")]
    InvalidGrid,

    #[error("could not bracket a root of {what} on [0, {x_max}]; increase the search bound")]
    BracketNotFound { what: &'static str, x_max: f64 },

    #[error("interior equilibrium exists but no sign change of psi was found on (0, {k})")]
    NoSignChange { k: f64 },

    #[error("nonpositive {which} denominator {value} at state ({x}, {y})")]
    NonpositiveDenominator {
        which: &'static str,
        value: f64,
        x: f64,
        y: f64,
    },

    #[error("step {index} failed: {source}")]
    StepFailed { index: usize, source: Box<Error> },

    #[error("equilibrium {0} does not exist for these parameters")]
    MissingEquilibrium(EquilibriumKind),

    #[error("(m1, m2) = ({m1}, {m2}) lies within {tol} of a regime boundary ({boundary})")]
    AmbiguousRegime {
        m1: f64,
        m2: f64,
        tol: f64,
        boundary: &'static str,
    },

    #[error("point ({x}, {y}) is not a fixed point of the map (residual {residual})")]
    NotAFixedPoint { x: f64, y: f64, residual: f64 },

    #[error("infeasible scheme for a Lyapunov certificate: {0}")]
    InfeasibleScheme(String),

    #[error("Lyapunov function did not decrease at step {index}, state ({x}, {y}), delta V = {delta}")]
    DecreaseViolated {
        index: usize,
        x: f64,
        y: f64,
        delta: f64,
    },

    #[error("non-finite value produced from state ({x}, {y})")]
    NonFiniteValue { x: f64, y: f64 },

    #[error("reference trajectory left the nonnegative quadrant at t = {t}")]
    ReferenceUnstable { t: f64 },

    #[error("invalid step list: {0}")]
    InvalidStepList(String),
}
