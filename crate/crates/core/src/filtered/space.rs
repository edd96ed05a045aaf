use std::collections::HashSet;

use num_traits::Zero;

use super::{Chain, FilteredError};
use crate::matrix::{NovMatrix, RationalSpan};
use crate::novikov::{Coeff, Exp, ExponentGroup, ExtRational, Novikov};

/// A finite set of grading labels with a successor bijection modelling the
/// ℤ-action `k ↦ k + 1`. Cycles of length `N` model `ℤ/N`; a single label
/// whose successor is itself models an ungraded complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingSet {
    labels: Vec<String>,
    successor: Vec<usize>,
    predecessor: Vec<usize>,
}

impl GradingSet {
    pub fn new(labels: Vec<String>, successor: Vec<usize>) -> Result<Self, FilteredError> {
        if labels.is_empty() {
            return Err(FilteredError::InvalidGrading("no grading labels".into()));
        }
        if successor.len() != labels.len() {
            return Err(FilteredError::InvalidGrading(
                "successor table does not cover every label".into(),
            ));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(FilteredError::InvalidGrading(format!(
                    "label `{l}` is repeated"
                )));
            }
        }
        let mut predecessor = vec![usize::MAX; labels.len()];
        for (i, &s) in successor.iter().enumerate() {
            if s >= labels.len() || predecessor[s] != usize::MAX {
                return Err(FilteredError::InvalidGrading(
                    "successor is not a bijection".into(),
                ));
            }
            predecessor[s] = i;
        }
        Ok(GradingSet {
            labels,
            successor,
            predecessor,
        })
    }

    /// Labels `l_0, …, l_{N-1}` with `succ(l_i) = l_{i+1 mod N}`.
    pub fn cyclic<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        Self::new(labels, (0..n).map(|i| (i + 1) % n).collect()).expect("cyclic grading")
    }

    /// Two gradings `0` and `1` with `succ(0) = 1`, so `∂` maps `1 → 0`.
    pub fn two_term() -> Self {
        Self::cyclic(["0", "1"])
    }

    pub fn ungraded() -> Self {
        Self::cyclic(["*"])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn succ(&self, k: usize) -> usize {
        self.successor[k]
    }

    pub fn pred(&self, k: usize) -> usize {
        self.predecessor[k]
    }
}

/// A finite-dimensional filtered vector space with a distinguished
/// orthogonal basis of named generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredVectorSpace {
    pub group: ExponentGroup,
    pub names: Vec<String>,
    pub levels: Vec<Exp>,
}

impl FilteredVectorSpace {
    pub fn new(group: ExponentGroup, names: Vec<String>, levels: Vec<Exp>) -> Self {
        assert_eq!(names.len(), levels.len());
        FilteredVectorSpace {
            group,
            names,
            levels,
        }
    }

    /// `Λⁿ` with every generator at level 0.
    pub fn standard(group: ExponentGroup, n: usize) -> Self {
        Self::new(
            group,
            (1..=n).map(|i| format!("x{i}")).collect(),
            vec![Exp::zero(); n],
        )
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn zero_chain(&self) -> Chain {
        vec![Novikov::zero(self.group); self.dim()]
    }

    pub fn generator(&self, i: usize) -> Chain {
        let mut c = self.zero_chain();
        c[i] = Novikov::one(self.group);
        c
    }

    /// `ℓ(Σ λ_i x_i) = max_i (ℓ(x_i) − ν(λ_i))`, or `−∞` for the zero chain.
    /// Coefficients with no terms below their cutoff are treated as zero.
    pub fn level(&self, chain: &[Novikov]) -> ExtRational {
        chain_level(&self.levels, chain)
    }

    /// Smallest group containing the coefficient group and every level.
    pub fn standard_group(&self) -> ExponentGroup {
        self.group.extended_by(self.levels.iter().copied())
    }

    /// Leading-coefficient vector of a nonzero chain: entry `i` is the
    /// coefficient of `λ_i` at exponent `ℓ(x_i) − ℓ(c)`.
    pub fn reduction(&self, chain: &[Novikov]) -> Option<Vec<Coeff>> {
        chain_reduction(&self.levels, chain)
    }

    /// Exact orthogonality test: a family of nonzero chains is orthogonal
    /// iff their reductions are linearly independent over ℚ.
    pub fn is_orthogonal(&self, family: &[Chain]) -> bool {
        let mut span = RationalSpan::new();
        family.iter().all(|c| match self.reduction(c) {
            Some(r) => span.insert(&r),
            None => false,
        })
    }

    /// Extends an orthogonal family to an orthogonal basis by appending
    /// distinguished generators.
    pub fn extend_orthogonal_basis(&self, family: &[Chain]) -> Result<Vec<Chain>, FilteredError> {
        for c in family {
            if c.len() != self.dim() {
                return Err(FilteredError::DimensionMismatch(format!(
                    "chain of length {} in a space of dimension {}",
                    c.len(),
                    self.dim()
                )));
            }
        }
        let mut span = RationalSpan::new();
        let mut orthogonal = true;
        for c in family {
            match self.reduction(c) {
                Some(r) => orthogonal &= span.insert(&r),
                None => return Err(FilteredError::NotIndependent),
            }
        }
        if !orthogonal {
            if rank_of_chains(self, family)? < family.len() {
                return Err(FilteredError::NotIndependent);
            }
            return Err(FilteredError::NotOrthogonal);
        }
        let mut out = family.to_vec();
        for i in 0..self.dim() {
            let mut unit = vec![Coeff::zero(); self.dim()];
            unit[i] = num_traits::One::one();
            if span.insert(&unit) {
                out.push(self.generator(i));
            }
        }
        Ok(out)
    }
}

pub(crate) fn chain_level(levels: &[Exp], chain: &[Novikov]) -> ExtRational {
    levels
        .iter()
        .zip(chain)
        .filter_map(|(l, x)| x.leading().map(|(e, _)| ExtRational::Finite(l - e)))
        .max()
        .unwrap_or(ExtRational::NegInf)
}

pub(crate) fn chain_reduction(levels: &[Exp], chain: &[Novikov]) -> Option<Vec<Coeff>> {
    let top = chain_level(levels, chain).finite()?;
    Some(
        levels
            .iter()
            .zip(chain)
            .map(|(l, x)| x.coefficient(l - top))
            .collect(),
    )
}

fn rank_of_chains(space: &FilteredVectorSpace, family: &[Chain]) -> Result<usize, FilteredError> {
    let m = NovMatrix::from_columns(space.group, space.dim(), family);
    let source = FilteredVectorSpace::standard(space.group, family.len());
    let map = super::FilteredLinearMap::new(source, space.clone(), m)?;
    map.rank(&Default::default())
}
