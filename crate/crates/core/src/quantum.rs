//! Quantum corrections: deformations `∂ = ∂₀ ⊗ 1 + O(T^μ)` of a complex
//! over `ℚ`, and the dichotomy between undisturbed homology and a depth
//! of at least the gap.

use num_traits::Zero;
use thiserror::Error;

use crate::filtered::{DepthOptions, FilteredComplex, FilteredError};
use crate::matrix::{rank, NovMatrix};
use crate::novikov::{Coeff, Exp, ExtRational, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error("base and deformation disagree: {0}")]
    Shape(String),
    #[error("base entry at ({row}, {col}) of grading {grading} is not a rational constant")]
    BaseNotRational {
        grading: String,
        row: usize,
        col: usize,
    },
    #[error("generator `{0}` has a nonzero level; corrections live at level 0")]
    NonzeroLevel(String),
    #[error("gap {0} must be positive and lie in the exponent group")]
    BadGap(Exp),
    #[error(
        "deformation entry {target} <- {generator} has valuation {actual}, gap requires {required}"
    )]
    GapViolated {
        generator: String,
        target: String,
        required: Exp,
        actual: Exp,
    },
    #[error(transparent)]
    Filtered(#[from] FilteredError),
}

/// `(C̄, ∂₀)` together with its deformation `(C, ∂)` and the gap table:
/// `gap[k]` bounds the deformation of `∂ : C_{succ(k)} → C_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumCorrection {
    base: FilteredComplex,
    deformed: FilteredComplex,
    gap: Vec<Exp>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    /// Smallest deformation valuation per target grading, `+inf` when undeformed.
    pub tightest: Vec<ExtRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alternative {
    /// `b_k = b_{k−1} = 0` and homology keeps its dimension.
    Preserved,
    /// A depth reaches its gap and homology drops.
    Lost,
    /// Neither alternative holds; never expected for a valid correction.
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub alternative: Alternative,
    pub depth: ExtRational,
    pub depth_below: ExtRational,
    pub gap: Exp,
    pub gap_below: Exp,
    pub homology: usize,
    pub base_homology: usize,
}

impl QuantumCorrection {
    /// The base complex must have level-0 generators and rational constant
    /// entries; the deformed complex must share its gradings and generators.
    pub fn new(
        base: FilteredComplex,
        deformed: FilteredComplex,
        gap: Vec<Exp>,
    ) -> Result<Self, QuantumError> {
        let n = base.grading().len();
        if deformed.grading() != base.grading() || gap.len() != n {
            return Err(QuantumError::Shape("grading sets differ".into()));
        }
        if deformed.group() != base.group() {
            return Err(QuantumError::Shape("exponent groups differ".into()));
        }
        for k in 0..n {
            let (p, q) = (base.piece(k), deformed.piece(k));
            if p.names != q.names {
                return Err(QuantumError::Shape(format!(
                    "generators of grading {} differ",
                    base.grading().label(k)
                )));
            }
            for (name, level) in p
                .names
                .iter()
                .zip(&p.levels)
                .chain(q.names.iter().zip(&q.levels))
            {
                if !level.is_zero() {
                    return Err(QuantumError::NonzeroLevel(name.clone()));
                }
            }
            for (i, j, x) in base.differential(k).entries() {
                if !x.is_exact() || x.terms().iter().any(|(e, _)| !e.is_zero()) {
                    return Err(QuantumError::BaseNotRational {
                        grading: base.grading().label(k).to_string(),
                        row: i,
                        col: j,
                    });
                }
            }
            if gap[k] <= Exp::zero() || !base.group().contains(gap[k]) {
                return Err(QuantumError::BadGap(gap[k]));
            }
        }
        Ok(QuantumCorrection {
            base,
            deformed,
            gap,
        })
    }

    pub fn base(&self) -> &FilteredComplex {
        &self.base
    }

    pub fn deformed(&self) -> &FilteredComplex {
        &self.deformed
    }

    pub fn gap(&self) -> &[Exp] {
        &self.gap
    }

    /// `∂₀` out of grading `k` as a rational matrix.
    pub fn base_matrix(&self, k: usize) -> Vec<Vec<Coeff>> {
        rational_part(self.base.differential(k))
    }

    /// `(∂ − ∂₀ ⊗ 1)` out of grading `k`.
    pub fn deformation(&self, k: usize) -> NovMatrix {
        self.deformed.differential(k).sub(self.base.differential(k))
    }

    /// Checks every deformation entry against the declared gap and reports
    /// the tightest gap the data allows.
    pub fn validate_gap(&self) -> Result<GapReport, QuantumError> {
        let grading = self.base.grading();
        let mut tightest = Vec::with_capacity(grading.len());
        for k in 0..grading.len() {
            let s = grading.succ(k);
            let delta = self.deformation(s);
            let mut best = ExtRational::PosInf;
            for (i, j, x) in delta.entries() {
                let Valuation::Finite(v) = x.nu().map_err(FilteredError::from)? else {
                    continue;
                };
                if v < self.gap[k] {
                    return Err(QuantumError::GapViolated {
                        generator: self.base.piece(s).names[j].clone(),
                        target: self.base.piece(k).names[i].clone(),
                        required: self.gap[k],
                        actual: v,
                    });
                }
                best = best.min(ExtRational::Finite(v));
            }
            tightest.push(best);
        }
        Ok(GapReport { tightest })
    }

    /// `(rank ∂₀, rank ∂)` on `C_{succ(k)}`.
    pub fn rank_compare(
        &self,
        k: usize,
        opts: &DepthOptions,
    ) -> Result<(usize, usize), QuantumError> {
        let s = self.base.grading().succ(k);
        let r0 = rank(&self.base_matrix(s));
        let r = self.deformed.step_map(k).rank(opts)?;
        Ok((r0, r))
    }

    /// `dim_ℚ H_k(C̄)` for every grading.
    pub fn base_homology(&self) -> Vec<usize> {
        let g = self.base.grading();
        let ranks: Vec<usize> = (0..g.len()).map(|k| rank(&self.base_matrix(k))).collect();
        (0..g.len())
            .map(|k| self.base.piece(k).dim() - ranks[k] - ranks[g.succ(k)])
            .collect()
    }

    /// Decides which of the two alternatives holds at grading `k`.
    pub fn classify(&self, k: usize, opts: &DepthOptions) -> Result<Classification, QuantumError> {
        let below = self.base.grading().pred(k);
        let depth = self.deformed.boundary_depth_graded(k, opts)?;
        let depth_below = self.deformed.boundary_depth_graded(below, opts)?;
        let homology = self.deformed.homology_dims(opts)?[k];
        let base_homology = self.base_homology()[k];
        let zero = ExtRational::Finite(Exp::zero());
        let preserved = depth == zero && depth_below == zero && homology == base_homology;
        let lost = (depth >= ExtRational::Finite(self.gap[k])
            || depth_below >= ExtRational::Finite(self.gap[below]))
            && homology < base_homology;
        let alternative = match (preserved, lost) {
            (true, false) => Alternative::Preserved,
            (false, true) => Alternative::Lost,
            _ => Alternative::Neither,
        };
        Ok(Classification {
            alternative,
            depth,
            depth_below,
            gap: self.gap[k],
            gap_below: self.gap[below],
            homology,
            base_homology,
        })
    }
}

/// Constant coefficients of a matrix.
pub fn rational_part(m: &NovMatrix) -> Vec<Vec<Coeff>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| m.get(i, j).coefficient(Exp::zero()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::GradingSet;
    use crate::novikov::{ExponentGroup, Novikov};

    fn pair(deform: Option<Exp>) -> (FilteredComplex, FilteredComplex) {
        let g = ExponentGroup::integers();
        let pieces = || {
            vec![
                vec![("y".to_string(), Exp::zero())],
                vec![("x".to_string(), Exp::zero())],
            ]
        };
        let zero = NovMatrix::zeros(g, 1, 1);
        let base = FilteredComplex::new(
            GradingSet::two_term(),
            g,
            pieces(),
            vec![zero.clone(), zero.clone()],
        )
        .unwrap();
        let mut d = zero.clone();
        if let Some(mu) = deform {
            d.set(
                0,
                0,
                Novikov::monomial(g, Coeff::from_integer(1.into()), mu).unwrap(),
            );
        }
        let deformed =
            FilteredComplex::new(GradingSet::two_term(), g, pieces(), vec![zero, d]).unwrap();
        (base, deformed)
    }

    fn int(n: i64) -> Exp {
        Exp::from_integer(n)
    }

    #[test]
    fn undeformed_is_preserved() {
        let (b, d) = pair(None);
        let q = QuantumCorrection::new(b, d, vec![int(1), int(1)]).unwrap();
        let r = q.validate_gap().unwrap();
        assert_eq!(r.tightest, vec![ExtRational::PosInf; 2]);
        let opts = DepthOptions::default();
        assert_eq!(
            q.classify(0, &opts).unwrap().alternative,
            Alternative::Preserved
        );
        assert_eq!(q.rank_compare(0, &opts).unwrap(), (0, 0));
    }

    #[test]
    fn single_deformation_loses_homology() {
        let (b, d) = pair(Some(int(2)));
        let q = QuantumCorrection::new(b, d, vec![int(2), int(2)]).unwrap();
        assert_eq!(
            q.validate_gap().unwrap().tightest[0],
            ExtRational::Finite(int(2))
        );
        let opts = DepthOptions::default();
        let c = q.classify(0, &opts).unwrap();
        assert_eq!(c.alternative, Alternative::Lost);
        assert_eq!(c.depth, ExtRational::Finite(int(2)));
        assert_eq!((c.homology, c.base_homology), (0, 1));
        assert_eq!(q.rank_compare(0, &opts).unwrap(), (0, 1));
    }

    #[test]
    fn gap_violation() {
        let (b, d) = pair(Some(int(1)));
        let q = QuantumCorrection::new(b, d, vec![int(2), int(2)]).unwrap();
        assert!(matches!(
            q.validate_gap(),
            Err(QuantumError::GapViolated { .. })
        ));
        let (b, d) = pair(Some(int(1)));
        assert!(QuantumCorrection::new(b, d, vec![int(0), int(1)]).is_err());
    }
}
