use std::collections::HashMap;

use super::maps::invert_exact;
use super::reduce::{FilteredLinearMap, ReductionCertificate};
use super::space::{FilteredVectorSpace, GradingSet};
use super::{Chain, DepthOptions, FilteredError};
use crate::matrix::{NovMatrix, RationalSpan};
use crate::novikov::{Exp, ExponentGroup, ExtRational, Novikov};

/// An `S`-graded ℝ-filtered chain complex over `Λ^{ℚ,Γ}`.
///
/// `differential(k)` maps `C_k` to `C_{pred(k)}`. Construction checks that
/// `∂∘∂ = 0` and that `∂` does not raise filtration levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredComplex {
    grading: GradingSet,
    group: ExponentGroup,
    pieces: Vec<FilteredVectorSpace>,
    differential: Vec<NovMatrix>,
}

/// Orthogonal basis of one grading adapted to the complex: boundaries
/// coming from `C_{succ(k)}`, unpaired cycles, and primitives of boundaries
/// in `C_{pred(k)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingCertificate {
    pub label: String,
    pub boundaries: Vec<Chain>,
    pub gaps: Vec<Exp>,
    pub cycles: Vec<Chain>,
    pub primitives: Vec<Chain>,
}

impl GradingCertificate {
    pub fn basis(&self) -> Vec<Chain> {
        let mut v = self.boundaries.clone();
        v.extend(self.cycles.iter().cloned());
        v.extend(self.primitives.iter().cloned());
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexCertificate {
    pub group: ExponentGroup,
    pub gradings: Vec<GradingCertificate>,
}

impl FilteredComplex {
    /// `pieces[k]` lists the generators `(name, level)` of grading `k`.
    pub fn new(
        grading: GradingSet,
        group: ExponentGroup,
        pieces: Vec<Vec<(String, Exp)>>,
        differential: Vec<NovMatrix>,
    ) -> Result<Self, FilteredError> {
        let pieces = pieces
            .into_iter()
            .map(|p| {
                let (names, levels) = p.into_iter().unzip();
                FilteredVectorSpace::new(group, names, levels)
            })
            .collect();
        Self::from_spaces(grading, group, pieces, differential)
    }

    pub fn from_spaces(
        grading: GradingSet,
        group: ExponentGroup,
        pieces: Vec<FilteredVectorSpace>,
        differential: Vec<NovMatrix>,
    ) -> Result<Self, FilteredError> {
        let c = FilteredComplex {
            grading,
            group,
            pieces,
            differential,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), FilteredError> {
        let n = self.grading.len();
        if self.pieces.len() != n || self.differential.len() != n {
            return Err(FilteredError::DimensionMismatch(
                "one piece and one differential block per grading expected".into(),
            ));
        }
        let mut seen = HashMap::new();
        for (k, p) in self.pieces.iter().enumerate() {
            if p.group != self.group {
                return Err(FilteredError::DimensionMismatch(format!(
                    "grading {} is over {} instead of {}",
                    self.grading.label(k),
                    p.group,
                    self.group
                )));
            }
            for name in &p.names {
                if seen.insert(name.clone(), k).is_some() {
                    return Err(FilteredError::DuplicateGenerator(name.clone()));
                }
            }
        }
        for k in 0..n {
            let d = &self.differential[k];
            let (src, tgt) = (&self.pieces[k], &self.pieces[self.grading.pred(k)]);
            if d.rows() != tgt.dim() || d.cols() != src.dim() {
                return Err(FilteredError::DimensionMismatch(format!(
                    "differential out of grading {} is {}x{}, expected {}x{}",
                    self.grading.label(k),
                    d.rows(),
                    d.cols(),
                    tgt.dim(),
                    src.dim()
                )));
            }
            if d.group() != self.group {
                return Err(FilteredError::DimensionMismatch(format!(
                    "differential out of grading {} is over {}",
                    self.grading.label(k),
                    d.group()
                )));
            }
            if !d.is_exact() {
                return Err(FilteredError::InexactEntry);
            }
            for (i, j, a) in d.entries() {
                let Some((v, _)) = a.leading() else { continue };
                let image = tgt.levels[i] - v;
                if image > src.levels[j] {
                    return Err(FilteredError::LevelIncrease {
                        generator: src.names[j].clone(),
                        target: tgt.names[i].clone(),
                        source_level: src.levels[j],
                        image_level: image,
                    });
                }
            }
        }
        for k in 0..n {
            let sq = self.differential[self.grading.pred(k)].mul(&self.differential[k]);
            let bad = sq
                .entries()
                .find(|(_, _, x)| !x.is_exact_zero())
                .map(|(i, j, _)| (i, j));
            if let Some((i, j)) = bad {
                let tgt = &self.pieces[self.grading.pred(self.grading.pred(k))];
                return Err(FilteredError::BoundarySquared {
                    generator: self.pieces[k].names[j].clone(),
                    target: tgt.names[i].clone(),
                });
            }
        }
        Ok(())
    }

    pub fn grading(&self) -> &GradingSet {
        &self.grading
    }

    pub fn group(&self) -> ExponentGroup {
        self.group
    }

    pub fn piece(&self, k: usize) -> &FilteredVectorSpace {
        &self.pieces[k]
    }

    pub fn pieces(&self) -> &[FilteredVectorSpace] {
        &self.pieces
    }

    /// `∂ : C_k → C_{pred(k)}`.
    pub fn differential(&self, k: usize) -> &NovMatrix {
        &self.differential[k]
    }

    pub fn total_dim(&self) -> usize {
        self.pieces.iter().map(FilteredVectorSpace::dim).sum()
    }

    /// Grading and index of a generator.
    pub fn locate(&self, name: &str) -> Option<(usize, usize)> {
        self.pieces
            .iter()
            .enumerate()
            .find_map(|(k, p)| p.names.iter().position(|n| n == name).map(|i| (k, i)))
    }

    pub fn apply(&self, k: usize, chain: &[Novikov]) -> Chain {
        self.differential[k].mul_vec(chain)
    }

    /// `∂ : C_{succ(k)} → C_k`, the map whose pairs define `b_k`.
    pub fn step_map(&self, k: usize) -> FilteredLinearMap {
        let s = self.grading.succ(k);
        FilteredLinearMap {
            source: self.pieces[s].clone(),
            target: self.pieces[k].clone(),
            matrix: self.differential[s].clone(),
        }
    }

    /// `b_k`: the largest gap of `∂ : C_{k+1} → C_k`, or 0 without pairs.
    pub fn boundary_depth_graded(
        &self,
        k: usize,
        opts: &DepthOptions,
    ) -> Result<ExtRational, FilteredError> {
        self.step_map(k).depth(opts)
    }

    pub fn graded_depths(&self, opts: &DepthOptions) -> Result<Vec<ExtRational>, FilteredError> {
        (0..self.grading.len())
            .map(|k| self.boundary_depth_graded(k, opts))
            .collect()
    }

    /// `b(C) = max_k b_k(C)`.
    pub fn boundary_depth(&self, opts: &DepthOptions) -> Result<ExtRational, FilteredError> {
        Ok(self
            .graded_depths(opts)?
            .into_iter()
            .max()
            .unwrap_or(ExtRational::Finite(Exp::from_integer(0))))
    }

    /// Ranks of `∂` out of every grading.
    pub fn ranks(&self, opts: &DepthOptions) -> Result<Vec<usize>, FilteredError> {
        (0..self.grading.len())
            .map(|k| self.step_map(self.grading.pred(k)).rank(opts))
            .collect()
    }

    /// `dim H_k` for every grading.
    pub fn homology_dims(&self, opts: &DepthOptions) -> Result<Vec<usize>, FilteredError> {
        let ranks = self.ranks(opts)?;
        Ok((0..self.grading.len())
            .map(|k| self.pieces[k].dim() - ranks[k] - ranks[self.grading.succ(k)])
            .collect())
    }

    /// Smallest coefficient group containing `Γ` and every level.
    pub fn standard_group(&self) -> ExponentGroup {
        self.pieces
            .iter()
            .fold(self.group, |g, p| g.join(&p.standard_group()))
    }

    /// Per-grading orthogonal bases made of boundaries, unpaired cycles and
    /// primitives, all with coefficients over [`Self::standard_group`].
    pub fn certificate(&self, opts: &DepthOptions) -> Result<ComplexCertificate, FilteredError> {
        let g = self.standard_group();
        let regroup =
            |c: &Chain| -> Chain { c.iter().map(|x| x.with_group_unchecked(g)).collect() };
        // reduction of ∂ out of grading k
        let out: Vec<ReductionCertificate> = (0..self.grading.len())
            .map(|k| self.step_map(self.grading.pred(k)).reduce(opts))
            .collect::<Result<_, _>>()?;
        let mut gradings = Vec::with_capacity(self.grading.len());
        for k in 0..self.grading.len() {
            let incoming = &out[self.grading.succ(k)];
            let boundaries: Vec<Chain> = incoming
                .pairs
                .iter()
                .map(|p| regroup(&p.boundary))
                .collect();
            let gaps = incoming.pairs.iter().map(|p| p.gap).collect();
            let space = &self.pieces[k];
            let mut span = RationalSpan::new();
            for b in &boundaries {
                let r = space.reduction(b).expect("boundaries are nonzero");
                span.insert(&r);
            }
            let mut cycles = Vec::new();
            for z in &out[k].kernel {
                let r = space.reduction(z).expect("kernel vectors are nonzero");
                if span.insert(&r) {
                    cycles.push(regroup(z));
                }
            }
            gradings.push(GradingCertificate {
                label: self.grading.label(k).to_string(),
                boundaries,
                gaps,
                cycles,
                primitives: out[k].pairs.iter().map(|p| regroup(&p.primitive)).collect(),
            });
        }
        Ok(ComplexCertificate { group: g, gradings })
    }

    /// The same complex with coefficients in `Λ^{ℚ,Γ'}`, `Γ ≤ Γ'`.
    pub fn extend_coefficients(&self, larger: ExponentGroup) -> Result<Self, FilteredError> {
        if !self.group.is_subgroup_of(&larger) {
            return Err(FilteredError::NotASupergroup {
                group: self.group,
                requested: larger,
            });
        }
        Ok(FilteredComplex {
            grading: self.grading.clone(),
            group: larger,
            pieces: self
                .pieces
                .iter()
                .map(|p| FilteredVectorSpace {
                    group: larger,
                    ..p.clone()
                })
                .collect(),
            differential: self
                .differential
                .iter()
                .map(|d| d.with_group_unchecked(larger))
                .collect(),
        })
    }

    /// Transports the complex along `Φ_k : C_k → D_{φ(k)}`, shifting levels
    /// in grading `k` by `σ(k)`.
    ///
    /// `D_{φ(k)}` has the standard basis `e_i` with level
    /// `ℓ_C(Φ_k⁻¹ e_i) + σ(k)` and differential `Φ ∂ Φ⁻¹`.
    pub fn apply_shift_isomorphism(
        &self,
        phi: &[NovMatrix],
        grading_map: &[usize],
        shifts: &[Exp],
    ) -> Result<Self, FilteredError> {
        let n = self.grading.len();
        if phi.len() != n || grading_map.len() != n || shifts.len() != n {
            return Err(FilteredError::DimensionMismatch(
                "one matrix, image and shift per grading expected".into(),
            ));
        }
        let mut hit = vec![false; n];
        for &t in grading_map {
            if t >= n || std::mem::replace(&mut hit[t], true) {
                return Err(FilteredError::NotEquivariant(
                    "grading map is not a bijection".into(),
                ));
            }
        }
        for k in 0..n {
            let s = self.grading.succ(k);
            if grading_map[s] != self.grading.succ(grading_map[k]) {
                return Err(FilteredError::NotEquivariant(format!(
                    "φ(succ {}) ≠ succ φ({})",
                    self.grading.label(k),
                    self.grading.label(k)
                )));
            }
            if shifts[s] != shifts[k] {
                return Err(FilteredError::NotEquivariant(format!(
                    "σ(succ {}) ≠ σ({})",
                    self.grading.label(k),
                    self.grading.label(k)
                )));
            }
        }
        let mut inverses = Vec::with_capacity(n);
        let mut spaces = vec![None; n];
        for k in 0..n {
            let dim = self.pieces[k].dim();
            if phi[k].rows() != dim || phi[k].cols() != dim || phi[k].group() != self.group {
                return Err(FilteredError::DimensionMismatch(format!(
                    "Φ on grading {} has the wrong shape or group",
                    self.grading.label(k)
                )));
            }
            let inv = invert_exact(&phi[k])?;
            let cols: Vec<Chain> = (0..dim).map(|j| inv.column(j)).collect();
            if !self.pieces[k].is_orthogonal(&cols) {
                return Err(FilteredError::NotFiltrationIso(format!(
                    "Φ⁻¹ on grading {} does not carry an orthogonal basis",
                    self.grading.label(k)
                )));
            }
            let levels = cols
                .iter()
                .map(|c| {
                    self.pieces[k]
                        .level(c)
                        .finite()
                        .expect("columns of an inverse are nonzero")
                        + shifts[k]
                })
                .collect();
            spaces[grading_map[k]] = Some(FilteredVectorSpace::new(
                self.group,
                self.pieces[k].names.clone(),
                levels,
            ));
            inverses.push(inv);
        }
        let mut differential = vec![None; n];
        for k in 0..n {
            let p = self.grading.pred(k);
            let d = phi[p].mul(&self.differential[k]).mul(&inverses[k]);
            differential[grading_map[k]] = Some(d);
        }
        Self::from_spaces(
            self.grading.clone(),
            self.group,
            spaces.into_iter().map(Option::unwrap).collect(),
            differential.into_iter().map(Option::unwrap).collect(),
        )
    }

    /// The same complex with generator levels replaced.
    pub fn with_levels(&self, levels: Vec<Vec<Exp>>) -> Result<Self, FilteredError> {
        let pieces = self
            .pieces
            .iter()
            .zip(levels)
            .map(|(p, l)| FilteredVectorSpace::new(self.group, p.names.clone(), l))
            .collect();
        Self::from_spaces(
            self.grading.clone(),
            self.group,
            pieces,
            self.differential.clone(),
        )
    }
}
