use std::collections::BTreeSet;

use num_traits::Zero;

use super::snf::{self, Smith};
use super::space::{chain_level, FilteredVectorSpace};
use super::{Chain, DepthOptions, FilteredError};
use crate::matrix::NovMatrix;
use crate::novikov::{Exp, ExponentGroup, ExtRational, Novikov};

/// A Λ-linear map between filtered vector spaces, written in the
/// distinguished bases (`matrix[i][j]` is the coefficient of target
/// generator `i` in the image of source generator `j`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredLinearMap {
    pub source: FilteredVectorSpace,
    pub target: FilteredVectorSpace,
    pub matrix: NovMatrix,
}

/// A boundary `x = A y` together with a primitive of least level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionPair {
    pub primitive: Chain,
    pub boundary: Chain,
    pub gap: Exp,
}

/// Orthogonal bases adapted to a map: the primitives together with
/// `kernel` form an orthogonal basis of the source, the boundaries together
/// with `cokernel` an orthogonal basis of the target.
///
/// Chains are written in the original generators but with coefficients over
/// `group`, the coefficient group extended so that every level lies in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionCertificate {
    pub group: ExponentGroup,
    pub pairs: Vec<ReductionPair>,
    pub kernel: Vec<Chain>,
    pub cokernel: Vec<Chain>,
}

impl ReductionCertificate {
    pub fn depth(&self) -> Exp {
        self.pairs.first().map_or(Exp::zero(), |p| p.gap)
    }
}

/// A boundary realizing the boundary depth and its cheapest primitive, both
/// with coefficients in the original group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthWitness {
    pub boundary: Chain,
    pub primitive: Chain,
    pub gap: Exp,
}

pub(crate) struct Standardized {
    pub matrix: NovMatrix,
    pub start: Exp,
}

fn exactify(chain: Chain) -> Chain {
    chain.into_iter().map(Novikov::into_exact).collect()
}

fn shifted(chain: &[Novikov], shifts: &[Exp], sign: i64) -> Chain {
    chain
        .iter()
        .zip(shifts)
        .map(|(x, l)| x.shift_unchecked(*l * sign))
        .collect()
}

fn std_level(chain: &[Novikov]) -> ExtRational {
    chain_level(&vec![Exp::zero(); chain.len()], chain)
}

impl FilteredLinearMap {
    pub fn new(
        source: FilteredVectorSpace,
        target: FilteredVectorSpace,
        matrix: NovMatrix,
    ) -> Result<Self, FilteredError> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(FilteredError::DimensionMismatch(format!(
                "{}x{} matrix for a map from dimension {} to {}",
                matrix.rows(),
                matrix.cols(),
                source.dim(),
                target.dim()
            )));
        }
        if source.group != target.group || matrix.group() != source.group {
            return Err(FilteredError::Novikov(
                crate::novikov::NovikovError::GroupMismatch {
                    left: source.group,
                    right: matrix.group(),
                },
            ));
        }
        if !matrix.is_exact() {
            return Err(FilteredError::InexactEntry);
        }
        Ok(FilteredLinearMap {
            source,
            target,
            matrix,
        })
    }

    pub fn group(&self) -> ExponentGroup {
        self.source.group
    }

    /// Coefficient group of the standardized map.
    pub fn standard_group(&self) -> ExponentGroup {
        self.source
            .standard_group()
            .join(&self.target.standard_group())
    }

    /// The same map over `Λ^{ℚ,Γ'}`, `Γ ≤ Γ'`.
    pub fn extend_coefficients(&self, larger: ExponentGroup) -> Result<Self, FilteredError> {
        if !self.group().is_subgroup_of(&larger) {
            return Err(FilteredError::NotASupergroup {
                group: self.group(),
                requested: larger,
            });
        }
        let space = |v: &FilteredVectorSpace| FilteredVectorSpace {
            group: larger,
            ..v.clone()
        };
        Ok(FilteredLinearMap {
            source: space(&self.source),
            target: space(&self.target),
            matrix: self.matrix.with_group_unchecked(larger),
        })
    }

    /// Rescales every generator to level 0: `S_ij = T^{ℓ(y_j) − ℓ(x_i)} A_ij`.
    pub(crate) fn standardize(&self) -> Standardized {
        let g = self.standard_group();
        let matrix = NovMatrix::from_fn(g, self.matrix.rows(), self.matrix.cols(), |i, j| {
            self.matrix
                .get(i, j)
                .with_group_unchecked(g)
                .shift_unchecked(self.source.levels[j] - self.target.levels[i])
        });
        let start = snf::policy_cutoff(&matrix);
        Standardized { matrix, start }
    }

    pub fn apply(&self, chain: &[Novikov]) -> Chain {
        self.matrix.mul_vec(chain)
    }

    pub fn rank(&self, opts: &DepthOptions) -> Result<usize, FilteredError> {
        let s = self.standardize();
        Ok(snf::invariants(&s.matrix, s.start, false, opts)?.rank())
    }

    /// Gaps of all pairs in descending order.
    pub fn gaps(&self, opts: &DepthOptions) -> Result<Vec<Exp>, FilteredError> {
        let s = self.standardize();
        let mut v = snf::invariants(&s.matrix, s.start, false, opts)?.valuations();
        v.reverse();
        Ok(v)
    }

    /// Largest gap, or 0 for the zero map.
    pub fn depth(&self, opts: &DepthOptions) -> Result<ExtRational, FilteredError> {
        let gaps = self.gaps(opts)?;
        Ok(ExtRational::Finite(
            gaps.first().copied().unwrap_or_else(Exp::zero),
        ))
    }

    fn smith_tracked(&self, opts: &DepthOptions) -> Result<(Standardized, Smith), FilteredError> {
        let s = self.standardize();
        let mut f = snf::invariants(&s.matrix, s.start, true, opts)?;
        // leave room for the precision spent inverting pivots
        let want = f.max_valuation().unwrap_or_else(Exp::zero) * 2 + snf::spread(&s.matrix);
        if f.truncated && f.cutoff <= want {
            f = snf::smith(&s.matrix, want + f.cutoff, true);
        }
        Ok((s, f))
    }

    /// Orthogonal bases adapted to the map, with pairs sorted by gap
    /// descending.
    pub fn reduce(&self, opts: &DepthOptions) -> Result<ReductionCertificate, FilteredError> {
        let (s, mut f) = self.smith_tracked(opts)?;
        for _ in 0..=opts.max_doublings {
            if let Some(cert) = self.certificate_from(&s, &f) {
                return Ok(cert);
            }
            f = snf::smith(&s.matrix, f.cutoff * 2, true);
        }
        Err(FilteredError::PrecisionExhausted(
            "reduction certificate did not verify".into(),
        ))
    }

    fn certificate_from(&self, s: &Standardized, f: &Smith) -> Option<ReductionCertificate> {
        let g = s.matrix.group();
        let mut pairs = Vec::with_capacity(f.rank());
        for p in &f.pivots {
            let y = exactify(f.right_column(p.col));
            let x = s.matrix.mul_vec(&y);
            let gap = match (std_level(&y), std_level(&x)) {
                (ExtRational::Finite(a), ExtRational::Finite(b)) => a - b,
                _ => return None,
            };
            if gap != p.valuation {
                return None;
            }
            pairs.push(ReductionPair {
                primitive: shifted(&y, &self.source.levels, 1),
                boundary: shifted(&x, &self.target.levels, 1),
                gap,
            });
        }
        let pivot_cols: BTreeSet<usize> = f.pivots.iter().map(|p| p.col).collect();
        let mut kernel = Vec::new();
        for j in (0..s.matrix.cols()).filter(|j| !pivot_cols.contains(j)) {
            let k = f.right_column(j);
            if s.matrix.mul_vec(&k).iter().any(|x| !x.is_zero()) {
                return None;
            }
            kernel.push(shifted(&k, &self.source.levels, 1));
        }
        let target = FilteredVectorSpace {
            group: g,
            ..self.target.clone()
        };
        let boundaries: Vec<Chain> = pairs.iter().map(|p| p.boundary.clone()).collect();
        let basis = target.extend_orthogonal_basis(&boundaries).ok()?;
        let cokernel = basis[boundaries.len()..].to_vec();
        pairs.sort_by_key(|p| std::cmp::Reverse(p.gap));
        Some(ReductionCertificate {
            group: g,
            pairs,
            kernel,
            cokernel,
        })
    }

    /// A boundary `x₀ = A y₀` whose cheapest primitive is `y₀` and whose gap
    /// equals the boundary depth; both chains have coefficients in the
    /// original group.
    pub fn depth_witness(&self, opts: &DepthOptions) -> Result<DepthWitness, FilteredError> {
        let (s, mut f) = self.smith_tracked(opts)?;
        if f.rank() == 0 {
            return Err(FilteredError::ZeroMap);
        }
        for _ in 0..=opts.max_doublings {
            if let Some(w) = self.witness_from(&s, &f) {
                return Ok(w);
            }
            f = snf::smith(&s.matrix, f.cutoff * 2, true);
        }
        Err(FilteredError::PrecisionExhausted(
            "depth witness did not verify".into(),
        ))
    }

    /// Cheapest primitive of a boundary given in standardized target
    /// coordinates, in standardized source coordinates.
    fn cheapest_primitive(&self, s: &Standardized, f: &Smith, x_std: &[Novikov]) -> Chain {
        let g = s.matrix.group();
        let left = f.left_rows();
        let mut y = vec![Novikov::zero(g); s.matrix.cols()];
        for p in &f.pivots {
            let mut z = Novikov::zero(g);
            for (l, x) in left[p.row].iter().zip(x_std) {
                if !l.is_zero() && !x.is_zero() {
                    z = &z + &(l * x);
                }
            }
            if z.is_zero() {
                continue;
            }
            let coef = &f.pivot_inverse(p) * &z;
            for (acc, r) in y.iter_mut().zip(f.right_column(p.col)) {
                *acc = &*acc + &(&coef * &r);
            }
        }
        y
    }

    fn witness_from(&self, s: &Standardized, f: &Smith) -> Option<DepthWitness> {
        let depth = f.max_valuation()?;
        let top = f.pivots.iter().find(|p| p.valuation == depth)?;
        let y_std = exactify(f.right_column(top.col));
        let x_std = s.matrix.mul_vec(&y_std);
        let x0 = shifted(&x_std, &self.target.levels, 1);

        let gamma = self.group();
        let reps: BTreeSet<Exp> = x0
            .iter()
            .flat_map(|c| c.terms().iter().map(|t| gamma.coset_representative(t.0)))
            .collect();
        let mut best: Option<(Exp, Exp, Chain, Chain)> = None;
        let a = self.matrix.with_group_unchecked(s.matrix.group());
        for rep in reps {
            let part: Chain = x0.iter().map(|c| c.coset_part(&gamma, rep)).collect();
            let part_std = shifted(&part, &self.target.levels, -1);
            let y = self.cheapest_primitive(s, f, &part_std);
            let y = shifted(&y, &self.source.levels, 1);
            let y: Chain = exactify(y.iter().map(|c| c.coset_part(&gamma, rep)).collect());
            let x = a.mul_vec(&y);
            let gap = match (self.source.level(&y), self.target.level(&x)) {
                (ExtRational::Finite(a), ExtRational::Finite(b)) => a - b,
                _ => continue,
            };
            if best.as_ref().is_none_or(|b| gap > b.0) {
                best = Some((gap, rep, x, y));
            }
        }
        let (gap, rep, x, y) = best?;
        if gap != depth {
            return None;
        }
        let back = |c: &Chain| -> Option<Chain> {
            c.iter()
                .map(|e| {
                    let e = e.shift_unchecked(-rep);
                    e.terms()
                        .iter()
                        .all(|t| gamma.contains(t.0))
                        .then(|| e.with_group_unchecked(gamma))
                })
                .collect()
        };
        Some(DepthWitness {
            boundary: back(&x)?,
            primitive: back(&y)?,
            gap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::Exp;

    fn q(n: i64, d: i64) -> Exp {
        Exp::new(n, d)
    }

    fn single_pair(group: ExponentGroup, a: &str) -> FilteredLinearMap {
        let src = FilteredVectorSpace::new(group, vec!["y".into()], vec![q(0, 1)]);
        let tgt = FilteredVectorSpace::new(group, vec!["x".into()], vec![q(0, 1)]);
        let m = NovMatrix::from_fn(group, 1, 1, |_, _| Novikov::parse(group, a).unwrap());
        FilteredLinearMap::new(src, tgt, m).unwrap()
    }

    #[test]
    fn zero_map_has_no_pairs() {
        let g = ExponentGroup::integers();
        let src = FilteredVectorSpace::standard(g, 2);
        let tgt = FilteredVectorSpace::standard(g, 3);
        let map = FilteredLinearMap::new(src, tgt, NovMatrix::zeros(g, 3, 2)).unwrap();
        let cert = map.reduce(&DepthOptions::default()).unwrap();
        assert!(cert.pairs.is_empty());
        assert_eq!(cert.kernel.len(), 2);
        assert_eq!(cert.cokernel.len(), 3);
        assert_eq!(
            map.depth_witness(&DepthOptions::default()),
            Err(FilteredError::ZeroMap)
        );
    }

    #[test]
    fn single_pair_gap() {
        let g = ExponentGroup::integers();
        let map = single_pair(g, "1*T^3");
        let opts = DepthOptions::default();
        let cert = map.reduce(&opts).unwrap();
        assert_eq!(cert.pairs.len(), 1);
        assert_eq!(cert.pairs[0].gap, q(3, 1));
        assert_eq!(map.depth(&opts).unwrap(), ExtRational::Finite(q(3, 1)));
        let w = map.depth_witness(&opts).unwrap();
        assert_eq!(w.gap, q(3, 1));
        assert_eq!(map.apply(&w.primitive), w.boundary);
    }

    #[test]
    fn witness_lands_in_original_group() {
        // levels 1/2 and 0 over Γ trivial: the witness must have constant coefficients
        let g = ExponentGroup::trivial();
        let src =
            FilteredVectorSpace::new(g, vec!["p1".into(), "p2".into()], vec![q(3, 1), q(5, 2)]);
        let tgt =
            FilteredVectorSpace::new(g, vec!["q1".into(), "q2".into()], vec![q(0, 1), q(1, 2)]);
        let one = Novikov::one(g);
        let m = NovMatrix::from_fn(g, 2, 2, |i, j| if i == j { one.clone() } else { -&one });
        let map = FilteredLinearMap::new(src, tgt, m).unwrap();
        let opts = DepthOptions::default();
        let w = map.depth_witness(&opts).unwrap();
        assert_eq!(ExtRational::Finite(w.gap), map.depth(&opts).unwrap());
        assert!(w.primitive.iter().all(|c| c.group() == g));
        assert_eq!(map.apply(&w.primitive), w.boundary);
    }
}
