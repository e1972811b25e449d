use std::fmt;

use crate::numeric::Rational;

/// A metric condition that failed, naming the offending sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    NotSquare {
        rows: usize,
        row: usize,
        len: usize,
    },
    TooFewPoints(usize),
    DuplicateLabel(String),
    NonZeroDiagonal {
        i: usize,
    },
    NonPositive {
        i: usize,
        j: usize,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    /// `d(i,j) + d(j,k) < d(i,k)`
    Triangle {
        i: usize,
        j: usize,
        k: usize,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NotSquare { rows, row, len } => {
                write!(
                    f,
                    "matrix is not square: row {row} has {len} entries, expected {rows}"
                )
            }
            MetricViolation::TooFewPoints(n) => write!(f, "need at least 2 points, got {n}"),
            MetricViolation::DuplicateLabel(l) => write!(f, "duplicate label {l:?}"),
            MetricViolation::NonZeroDiagonal { i } => write!(f, "d({i},{i}) is not zero"),
            MetricViolation::NonPositive { i, j } => {
                write!(
                    f,
                    "positivity fails at ({i},{j}): off-diagonal distance must be > 0"
                )
            }
            MetricViolation::Asymmetric { i, j } => {
                write!(f, "symmetry fails at ({i},{j}): d({i},{j}) != d({j},{i})")
            }
            MetricViolation::Triangle { i, j, k } => write!(
                f,
                "triangle inequality fails at ({i},{j},{k}): d({i},{j}) + d({j},{k}) < d({i},{k})"
            ),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("metric violation: {0}")]
    Metric(MetricViolation),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("breakpoint {0} lies strictly inside the restriction interval")]
    BreakpointInside(Rational),
    #[error("graph contains a negative cycle at the requested lambda")]
    NegativeCycle,
    #[error("vertex {0} is unreachable from the source")]
    Unreachable(usize),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error("instance too large: {0}")]
    Size(String),
}

impl From<MetricViolation> for Error {
    fn from(v: MetricViolation) -> Self {
        Error::Metric(v)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
