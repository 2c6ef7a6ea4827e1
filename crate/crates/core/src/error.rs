use core::fmt;

/// Errors produced by the core algorithms.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A probability lay outside `[0, 1]` or was not finite.
    InvalidProbability { index: usize, value: f64 },
    /// A sequence that must be nonempty was empty.
    Empty(&'static str),
    /// A real parameter violated its domain, e.g. `epsilon` outside `(0, 1)`.
    Domain { name: &'static str, value: f64 },
    /// An exponential-size computation was refused.
    SizeLimit {
        what: &'static str,
        limit: usize,
        requested: usize,
    },
    /// Two distributions were compared on incompatible domains.
    DomainMismatch { left: usize, right: usize },
    /// A sample fell outside `{0, ..., domain_max}`.
    SampleOutOfDomain {
        index: usize,
        value: u64,
        domain_max: usize,
    },
    /// Truncating a distribution to the requested domain lost too much mass.
    TailMass { lost: f64, tolerance: f64 },
    /// A cover element does not fit within `n` variables.
    ShiftOverflow { needed: usize, n: usize },
    /// A cover or candidate list grew past its configured element cap.
    ElementCap { cap: usize },
    /// No cover element passed the acceptance test.
    NoAcceptingElement {
        best_delta: Option<f64>,
        best_cdf_gap: Option<f64>,
    },
    /// Every candidate lost at least one competition.
    TournamentFailure,
    /// Malformed structured input.
    Invalid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidProbability { index, value } => {
                write!(
                    f,
                    "probability at index {index} is {value}, expected a value in [0, 1]"
                )
            }
            Error::Empty(what) => write!(f, "{what} must be nonempty"),
            Error::Domain { name, value } => {
                write!(f, "parameter {name} = {value} is out of range")
            }
            Error::SizeLimit {
                what,
                limit,
                requested,
            } => {
                write!(f, "{what}: size {requested} exceeds limit {limit}")
            }
            Error::DomainMismatch { left, right } => {
                write!(f, "domain mismatch: {left} vs {right}")
            }
            Error::SampleOutOfDomain {
                index,
                value,
                domain_max,
            } => {
                write!(
                    f,
                    "sample {index} has value {value} outside [0, {domain_max}]"
                )
            }
            Error::TailMass { lost, tolerance } => {
                write!(
                    f,
                    "truncation lost mass {lost:e}, tolerance is {tolerance:e}"
                )
            }
            Error::ShiftOverflow { needed, n } => {
                write!(f, "cover element needs {needed} variables but n = {n}")
            }
            Error::ElementCap { cap } => write!(f, "element cap of {cap} exceeded"),
            Error::NoAcceptingElement {
                best_delta,
                best_cdf_gap,
            } => {
                write!(f, "no cover element accepted (best delta statistic: ")?;
                match best_delta {
                    Some(v) => write!(f, "{v}")?,
                    None => f.write_str("none")?,
                }
                f.write_str(", best CDF-gap statistic: ")?;
                match best_cdf_gap {
                    Some(v) => write!(f, "{v})"),
                    None => f.write_str("none)"),
                }
            }
            Error::TournamentFailure => {
                f.write_str("tournament failure: every candidate lost a competition")
            }
            Error::Invalid(what) => write!(f, "invalid input: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
