use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Series does not converge at the requested point.
    Divergent,
    Overflow,
    /// g(x) = f(x) - 1 + 1/x stays positive; the value is its minimum.
    NotAdmissible(f64),
    Tolerance,
    /// Declared tail index disagrees with the fitted one.
    Inconsistent { declared: f64, fitted: f64 },
    NearCritical,
    NotALaw(f64),
    Supercritical(f64),
    QuadratureFail { k: usize, estimate: f64 },
    TailUnreliable { expected: f64, fitted: f64 },
    Noninvertible,
    Undefined(&'static str),
    MassDeficit(f64),
    ZeroMean,
    BadMatch,
    CapExceeded,
    Infeasible,
    RetryCapExceeded,
    NotCritical(f64),
    NotSubcritical(f64),
    HorizonExceeded,
    OddLoop,
    NotLooptree,
    PerimeterMismatch,
    NonSimpleComponent,
    Invalid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Divergent => write!(f, "series diverges at the requested point"),
            Error::Overflow => write!(f, "overflow"),
            Error::NotAdmissible(g) => write!(f, "not admissible (min gap {g:e})"),
            Error::Tolerance => write!(f, "root bracket failed to shrink"),
            Error::Inconsistent { declared, fitted } => {
                write!(f, "declared tail index {declared} disagrees with fit {fitted}")
            }
            Error::NearCritical => write!(f, "near critical, variance test indeterminate"),
            Error::NotALaw(s) => write!(f, "not a probability law (mass {s})"),
            Error::Supercritical(m) => write!(f, "supercritical (mean {m})"),
            Error::QuadratureFail { k, estimate } => {
                write!(f, "quadrature failed at k = {k} (error {estimate:e})")
            }
            Error::TailUnreliable { expected, fitted } => {
                write!(f, "tail exponent {fitted} does not match {expected}")
            }
            Error::Noninvertible => write!(f, "series is not invertible"),
            Error::Undefined(what) => write!(f, "undefined: {what}"),
            Error::MassDeficit(d) => write!(f, "mass deficit {d:e}"),
            Error::ZeroMean => write!(f, "zero mean"),
            Error::BadMatch => write!(f, "tail model cannot be matched"),
            Error::CapExceeded => write!(f, "node cap exceeded"),
            Error::Infeasible => write!(f, "no tree of that size"),
            Error::RetryCapExceeded => write!(f, "retry cap exceeded"),
            Error::NotCritical(m) => write!(f, "not critical (mean product {m})"),
            Error::NotSubcritical(m) => write!(f, "not subcritical (mean product {m})"),
            Error::HorizonExceeded => write!(f, "radius beyond sampled horizon"),
            Error::OddLoop => write!(f, "black vertex with an even number of children"),
            Error::NotLooptree => write!(f, "map is not a looptree"),
            Error::PerimeterMismatch => write!(f, "component perimeter mismatch"),
            Error::NonSimpleComponent => write!(f, "component boundary is not simple"),
            Error::Invalid(what) => write!(f, "invalid input: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
