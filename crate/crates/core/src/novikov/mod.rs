//! Exact arithmetic in the Novikov field `Λ^{ℚ,Γ}`.

mod element;
mod group;

use std::cmp::Ordering;
use std::fmt;

use num_rational::{BigRational, Ratio};
use thiserror::Error;

pub(crate) use element::parse_exp;
pub use element::Novikov;
pub use group::ExponentGroup;

/// Exponents and filtration levels.
pub type Exp = Ratio<i64>;
/// Coefficients of Novikov series.
pub type Coeff = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NovikovError {
    #[error("no terms below cutoff T^{cutoff}; valuation is undetermined")]
    CutoffAmbiguous { cutoff: Exp },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live over different exponent groups ({left} vs {right})")]
    GroupMismatch {
        left: ExponentGroup,
        right: ExponentGroup,
    },
    #[error("exponent {exponent} is not in {group}")]
    ExponentOutsideGroup { exponent: Exp, group: ExponentGroup },
    #[error("{smaller} is not a subgroup of {larger}")]
    NotASubgroup {
        smaller: ExponentGroup,
        larger: ExponentGroup,
    },
    #[error("invalid exponent group: {0}")]
    InvalidGroup(String),
    #[error("inverse of an exact non-monomial needs an explicit cutoff")]
    NeedsCutoff,
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

/// Valuation of a Novikov element: a rational, or `+∞` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Exp),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<Exp> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// A rational extended by `±∞`, used for filtration levels and depths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    NegInf,
    Finite(Exp),
    PosInf,
}

impl ExtRational {
    pub fn finite(self) -> Option<Exp> {
        match self {
            ExtRational::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }
}

impl From<Exp> for ExtRational {
    fn from(v: Exp) -> Self {
        ExtRational::Finite(v)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::NegInf => write!(f, "-inf"),
            ExtRational::Finite(v) => write!(f, "{v}"),
            ExtRational::PosInf => write!(f, "+inf"),
        }
    }
}
