//! Filtered vector spaces and ℝ-filtered chain complexes over Novikov
//! fields: levels, orthogonal bases, reduction certificates and the
//! boundary depth.

mod complex;
mod maps;
mod reduce;
mod snf;
mod space;

use thiserror::Error;

use crate::novikov::{Exp, ExponentGroup, Novikov, NovikovError};

pub use complex::{ComplexCertificate, FilteredComplex, GradingCertificate};
pub use maps::{
    invert_exact, level_shift, quasiequivalence_audit, AuditReport, FilteredMap, QuasiEquivalence,
};
pub use reduce::{DepthWitness, FilteredLinearMap, ReductionCertificate, ReductionPair};
pub use space::{FilteredVectorSpace, GradingSet};

/// Coordinates of a chain in a distinguished basis.
pub type Chain = Vec<Novikov>;

/// Precision controls for the depth engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthOptions {
    /// Starting cutoff; `None` starts a few steps above the smallest
    /// valuation and grows from there.
    pub cutoff: Option<Exp>,
    /// How many times the cutoff may grow before giving up.
    pub max_doublings: u32,
}

impl Default for DepthOptions {
    fn default() -> Self {
        DepthOptions {
            cutoff: None,
            max_doublings: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilteredError {
    #[error(transparent)]
    Novikov(#[from] NovikovError),
    #[error("invalid grading set: {0}")]
    InvalidGrading(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("generator `{0}` is declared twice")]
    DuplicateGenerator(String),
    #[error("differential entries must be exact (no O(T^k) tail)")]
    InexactEntry,
    #[error("∂{generator} raises the level through {target}: {image_level} > {source_level}")]
    LevelIncrease {
        generator: String,
        target: String,
        source_level: Exp,
        image_level: Exp,
    },
    #[error("∂∘∂ ≠ 0: entry from {generator} to {target}")]
    BoundarySquared { generator: String, target: String },
    #[error("family is not orthogonal")]
    NotOrthogonal,
    #[error("family is linearly dependent")]
    NotIndependent,
    #[error("the map is zero")]
    ZeroMap,
    #[error("{group} is not contained in {requested}")]
    NotASupergroup {
        group: ExponentGroup,
        requested: ExponentGroup,
    },
    #[error("not equivariant: {0}")]
    NotEquivariant(String),
    #[error("not a filtration isomorphism: {0}")]
    NotFiltrationIso(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("not a chain map: {0}")]
    NotChainMap(String),
    #[error("homotopy identity fails: {0}")]
    HomotopyIdentityFails(String),
    #[error("{map} raises the level of `{generator}` by {actual}, more than {allowed}")]
    ShiftExceeded {
        map: String,
        generator: String,
        allowed: Exp,
        actual: Exp,
    },
    #[error("c1 + c2 = {c1} + {c2} exceeds c = {c}")]
    ShiftBudget { c1: Exp, c2: Exp, c: Exp },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
}
