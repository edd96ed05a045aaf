//! Filtered tensor products with the graded sign rule.

use thiserror::Error;

use crate::filtered::{
    Chain, DepthOptions, FilteredComplex, FilteredError, FilteredVectorSpace, GradingSet,
};
use crate::matrix::NovMatrix;
use crate::novikov::{Exp, ExponentGroup, ExtRational, Novikov, NovikovError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("exponent groups differ: {0} and {1}")]
    GroupMismatch(ExponentGroup, ExponentGroup),
    #[error("the first factor has no parity; the sign rule is unavailable")]
    SignRuleUnavailable,
    #[error("characteristic-two mode is not supported")]
    CharacteristicTwo,
    #[error("parity: {0}")]
    BadParity(String),
    #[error("alternative basis is not orthogonal or has the wrong size")]
    NotOrthogonal,
    #[error(transparent)]
    Novikov(#[from] NovikovError),
    #[error(transparent)]
    Filtered(#[from] FilteredError),
}

/// A complex with the `ℤ/2` grading that drives the sign rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedComplex {
    complex: FilteredComplex,
    /// `parity[k][i]` for generator `i` of grading `k`.
    parity: Option<Vec<Vec<u8>>>,
    characteristic_two: bool,
}

impl SignedComplex {
    /// Explicit parities; `∂` must flip them.
    pub fn new(complex: FilteredComplex, parity: Vec<Vec<u8>>) -> Result<Self, TensorError> {
        let n = complex.grading().len();
        if parity.len() != n || (0..n).any(|k| parity[k].len() != complex.piece(k).dim()) {
            return Err(TensorError::BadParity(
                "shape differs from the complex".into(),
            ));
        }
        if parity.iter().flatten().any(|&p| p > 1) {
            return Err(TensorError::BadParity("values must be 0 or 1".into()));
        }
        for k in 0..n {
            let t = complex.grading().pred(k);
            for (i, j, x) in complex.differential(k).entries() {
                if !x.is_zero() && parity[k][j] == parity[t][i] {
                    return Err(TensorError::BadParity(format!(
                        "∂{} hits {} of the same parity",
                        complex.piece(k).names[j],
                        complex.piece(t).names[i]
                    )));
                }
            }
        }
        Ok(SignedComplex {
            complex,
            parity: Some(parity),
            characteristic_two: false,
        })
    }

    /// Parity read off the grading index of a two-term complex.
    pub fn from_two_term(complex: FilteredComplex) -> Result<Self, TensorError> {
        if complex.grading().len() != 2 {
            return Err(TensorError::BadParity("expected two gradings".into()));
        }
        let parity = (0..2)
            .map(|k| vec![k as u8; complex.piece(k).dim()])
            .collect();
        Self::new(complex, parity)
    }

    pub fn unsigned(complex: FilteredComplex) -> Self {
        SignedComplex {
            complex,
            parity: None,
            characteristic_two: false,
        }
    }

    pub fn characteristic_two(complex: FilteredComplex) -> Self {
        SignedComplex {
            complex,
            parity: None,
            characteristic_two: true,
        }
    }

    pub fn complex(&self) -> &FilteredComplex {
        &self.complex
    }

    pub fn parity(&self) -> Option<&[Vec<u8>]> {
        self.parity.as_deref()
    }

    /// Generators of every grading in order, with their parities.
    fn flat(&self) -> Flat {
        let c = &self.complex;
        let n = c.grading().len();
        let mut offset = Vec::with_capacity(n);
        let mut names = Vec::new();
        let mut levels = Vec::new();
        let mut parity = Vec::new();
        for k in 0..n {
            offset.push(names.len());
            let p = c.piece(k);
            names.extend(p.names.iter().cloned());
            levels.extend(p.levels.iter().copied());
            for i in 0..p.dim() {
                parity.push(self.parity.as_ref().map(|q| q[k][i]));
            }
        }
        let total = names.len();
        let mut d = NovMatrix::zeros(c.group(), total, total);
        for k in 0..n {
            let t = c.grading().pred(k);
            for (i, j, x) in c.differential(k).entries() {
                if !x.is_exact_zero() {
                    d.set(offset[t] + i, offset[k] + j, x.clone());
                }
            }
        }
        Flat {
            names,
            levels,
            parity,
            d,
        }
    }
}

struct Flat {
    names: Vec<String>,
    levels: Vec<Exp>,
    parity: Vec<Option<u8>>,
    d: NovMatrix,
}

fn same_group(a: ExponentGroup, b: ExponentGroup) -> Result<(), TensorError> {
    if a != b {
        return Err(TensorError::GroupMismatch(a, b));
    }
    Ok(())
}

/// Basis `{x_i ⊗ y_j}` in C-major order with levels `ℓ(x_i) + ℓ(y_j)`.
pub fn tensor_levels(
    c: &FilteredVectorSpace,
    d: &FilteredVectorSpace,
) -> Result<FilteredVectorSpace, TensorError> {
    same_group(c.group, d.group)?;
    let mut names = Vec::with_capacity(c.dim() * d.dim());
    let mut levels = Vec::with_capacity(c.dim() * d.dim());
    for i in 0..c.dim() {
        for j in 0..d.dim() {
            names.push(format!("{}⊗{}", c.names[i], d.names[j]));
            levels.push(c.levels[i] + d.levels[j]);
        }
    }
    Ok(FilteredVectorSpace::new(c.group, names, levels))
}

/// `Σ λ_ij w_i ⊗ z_j` in the basis `{x_a ⊗ y_b}`.
pub fn tensor_expand(w: &[Chain], z: &[Chain], coefficients: &[Novikov]) -> Chain {
    let (m, n) = (w[0].len(), z[0].len());
    let group = coefficients[0].group();
    let mut out = vec![Novikov::zero(group); m * n];
    for (i, wi) in w.iter().enumerate() {
        for (j, zj) in z.iter().enumerate() {
            let lam = &coefficients[i * z.len() + j];
            if lam.is_zero() {
                continue;
            }
            for a in 0..m {
                if wi[a].is_zero() {
                    continue;
                }
                let la = lam * &wi[a];
                for b in 0..n {
                    if !zj[b].is_zero() {
                        out[a * n + b] = &out[a * n + b] + &(&la * &zj[b]);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisReport {
    pub probes: usize,
    pub mismatches: usize,
}

impl BasisReport {
    pub fn agreed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Evaluates `ℓ⊗` on each probe (coordinates in `{w_i ⊗ z_j}`) through the
/// alternative bases and through the distinguished ones.
pub fn check_basis_independence(
    c: &FilteredVectorSpace,
    d: &FilteredVectorSpace,
    alt_c: &[Chain],
    alt_d: &[Chain],
    probes: &[Vec<Novikov>],
) -> Result<BasisReport, TensorError> {
    same_group(c.group, d.group)?;
    let full =
        |s: &FilteredVectorSpace, alt: &[Chain]| alt.len() == s.dim() && s.is_orthogonal(alt);
    if !full(c, alt_c) || !full(d, alt_d) {
        return Err(TensorError::NotOrthogonal);
    }
    let standard = tensor_levels(c, d)?;
    let alt_levels: Vec<Exp> = alt_c
        .iter()
        .flat_map(|w| {
            let lw = c.level(w).finite().expect("basis vectors are nonzero");
            alt_d
                .iter()
                .map(move |z| lw + d.level(z).finite().expect("basis vectors are nonzero"))
        })
        .collect();
    let alt_names = (0..alt_levels.len()).map(|i| format!("e{i}")).collect();
    let alt = FilteredVectorSpace::new(c.group, alt_names, alt_levels);
    let mismatches = probes
        .iter()
        .filter(|p| alt.level(p) != standard.level(&tensor_expand(alt_c, alt_d, p)))
        .count();
    Ok(BasisReport {
        probes: probes.len(),
        mismatches,
    })
}

/// `∂⊗ = ∂_C ⊗ 1 + (−1)^{|·|} ⊗ ∂_D` on `C ⊗ D`. The product is split by
/// parity into a two-term complex when both factors carry parities, and is
/// a single self-mapping grading otherwise.
pub fn tensor_complex(c: &SignedComplex, d: &SignedComplex) -> Result<SignedComplex, TensorError> {
    if c.characteristic_two || d.characteristic_two {
        return Err(TensorError::CharacteristicTwo);
    }
    if c.parity.is_none() {
        return Err(TensorError::SignRuleUnavailable);
    }
    let group = c.complex.group();
    same_group(group, d.complex.group())?;
    let (fc, fd) = (c.flat(), d.flat());
    let (m, n) = (fc.names.len(), fd.names.len());
    let idx = |a: usize, b: usize| a * n + b;
    let mut total = NovMatrix::zeros(group, m * n, m * n);
    for (a, b, x) in fc.d.entries() {
        if x.is_zero() {
            continue;
        }
        for j in 0..n {
            total.set(idx(a, j), idx(b, j), x.clone());
        }
    }
    for (a, b, y) in fd.d.entries() {
        if y.is_zero() {
            continue;
        }
        for i in 0..m {
            let signed = if fc.parity[i] == Some(1) {
                -y
            } else {
                y.clone()
            };
            let cur = total.get(idx(i, a), idx(i, b));
            total.set(idx(i, a), idx(i, b), cur + &signed);
        }
    }
    let mut generators = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let parity = match (fc.parity[i], fd.parity[j]) {
                (Some(p), Some(q)) => Some((p + q) % 2),
                _ => None,
            };
            generators.push((
                format!("{}⊗{}", fc.names[i], fd.names[j]),
                fc.levels[i] + fd.levels[j],
                parity,
            ));
        }
    }
    if d.parity.is_none() {
        let pieces = vec![generators.into_iter().map(|(s, l, _)| (s, l)).collect()];
        let complex = FilteredComplex::new(GradingSet::ungraded(), group, pieces, vec![total])?;
        return Ok(SignedComplex::unsigned(complex));
    }
    let classes: Vec<Vec<usize>> = (0..2u8)
        .map(|p| (0..m * n).filter(|&g| generators[g].2 == Some(p)).collect())
        .collect();
    let block = |rows: &[usize], cols: &[usize]| {
        NovMatrix::from_fn(group, rows.len(), cols.len(), |i, j| {
            total.get(rows[i], cols[j]).clone()
        })
    };
    // two-term grading: ∂ out of grading k lands in the other one
    let differential = vec![
        block(&classes[1], &classes[0]),
        block(&classes[0], &classes[1]),
    ];
    let pieces = classes
        .iter()
        .map(|cl| {
            cl.iter()
                .map(|&g| (generators[g].0.clone(), generators[g].1))
                .collect()
        })
        .collect();
    let complex = FilteredComplex::new(GradingSet::two_term(), group, pieces, differential)?;
    let parity = classes
        .iter()
        .enumerate()
        .map(|(p, cl)| vec![p as u8; cl.len()])
        .collect();
    SignedComplex::new(complex, parity)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductReport {
    pub depth_c: ExtRational,
    pub depth_d: ExtRational,
    pub depth_product: ExtRational,
    pub homology_c: usize,
    pub homology_d: usize,
    /// `b(C⊗D) ≥ min(b(C), b(D))`.
    pub min_bound: bool,
    /// `b(C⊗D) ≥ b(C)`, checked when `H(D) ≠ 0`.
    pub left_bound: Option<bool>,
    /// `b(C⊗D) ≥ b(D)`, checked when `H(C) ≠ 0`.
    pub right_bound: Option<bool>,
}

impl ProductReport {
    pub fn holds(&self) -> bool {
        self.min_bound && self.left_bound != Some(false) && self.right_bound != Some(false)
    }
}

/// Depths and homology of both factors and of the product, with the lower
/// bounds the product depth must satisfy.
pub fn verify_product_bounds(
    c: &SignedComplex,
    d: &SignedComplex,
    opts: &DepthOptions,
) -> Result<(SignedComplex, ProductReport), TensorError> {
    let product = tensor_complex(c, d)?;
    let depth_c = c.complex.boundary_depth(opts)?;
    let depth_d = d.complex.boundary_depth(opts)?;
    let depth_product = product.complex.boundary_depth(opts)?;
    let homology_c: usize = c.complex.homology_dims(opts)?.iter().sum();
    let homology_d: usize = d.complex.homology_dims(opts)?.iter().sum();
    let report = ProductReport {
        depth_c,
        depth_d,
        depth_product,
        homology_c,
        homology_d,
        min_bound: depth_product >= depth_c.min(depth_d),
        left_bound: (homology_d > 0).then_some(depth_product >= depth_c),
        right_bound: (homology_c > 0).then_some(depth_product >= depth_d),
    };
    Ok((product, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::Coeff;

    fn int(n: i64) -> Exp {
        Exp::from_integer(n)
    }

    /// `∂w = T^0 x` with `ℓ(w) = gap`, `ℓ(x) = 0`: one pair of the given gap.
    pub(super) fn pair(gap: i64, w: &str, x: &str) -> SignedComplex {
        let g = ExponentGroup::integers();
        let mut d1 = NovMatrix::zeros(g, 1, 1);
        d1.set(0, 0, Novikov::one(g));
        let pieces = vec![
            vec![(x.to_string(), int(0))],
            vec![(w.to_string(), int(gap))],
        ];
        let c = FilteredComplex::new(
            GradingSet::two_term(),
            g,
            pieces,
            vec![NovMatrix::zeros(g, 1, 1), d1],
        )
        .unwrap();
        SignedComplex::from_two_term(c).unwrap()
    }

    fn cycle(name: &str) -> SignedComplex {
        let g = ExponentGroup::integers();
        let pieces = vec![vec![(name.to_string(), int(0))], vec![]];
        let c = FilteredComplex::new(
            GradingSet::two_term(),
            g,
            pieces,
            vec![NovMatrix::zeros(g, 0, 1), NovMatrix::zeros(g, 1, 0)],
        )
        .unwrap();
        SignedComplex::from_two_term(c).unwrap()
    }

    #[test]
    fn levels_add() {
        let g = ExponentGroup::integers();
        let c = FilteredVectorSpace::new(g, vec!["x".into()], vec![int(3)]);
        let d = FilteredVectorSpace::new(g, vec!["a".into(), "b".into()], vec![int(0), int(1)]);
        let t = tensor_levels(&c, &d).unwrap();
        assert_eq!(t.levels, vec![int(3), int(4)]);
        assert_eq!(t.names, vec!["x⊗a", "x⊗b"]);
        let e = FilteredVectorSpace::new(g, vec!["y".into()], vec![int(0)]);
        let cc = FilteredVectorSpace::new(g, vec!["x".into()], vec![int(0)]);
        let t = tensor_levels(&cc, &e).unwrap();
        let chain = vec![Novikov::monomial(g, Coeff::from_integer(1.into()), int(2)).unwrap()];
        assert_eq!(t.level(&chain), ExtRational::Finite(int(-2)));
    }

    #[test]
    fn two_pairs() {
        let (c, d) = (pair(2, "w", "x"), pair(3, "v", "y"));
        let (p, r) = verify_product_bounds(&c, &d, &DepthOptions::default()).unwrap();
        assert_eq!(r.depth_product, ExtRational::Finite(int(2)));
        assert!(r.holds());
        assert_eq!(p.complex().total_dim(), 4);
        assert_eq!(p.complex().piece(1).names, vec!["x⊗v", "w⊗y"]);
    }

    #[test]
    fn pair_times_cycle() {
        let (p, r) =
            verify_product_bounds(&pair(5, "w", "x"), &cycle("h"), &DepthOptions::default())
                .unwrap();
        assert_eq!(r.depth_product, ExtRational::Finite(int(5)));
        assert_eq!(r.left_bound, Some(true));
        assert_eq!(
            p.complex().homology_dims(&DepthOptions::default()).unwrap(),
            vec![0, 0]
        );
    }

    #[test]
    fn sign_rule() {
        // ∂(w⊗v) = x⊗v − w⊗y since |w| = 1
        let (p, _) = verify_product_bounds(
            &pair(2, "w", "x"),
            &pair(3, "v", "y"),
            &DepthOptions::default(),
        )
        .unwrap();
        let c = p.complex();
        let (k, i) = c.locate("w⊗v").unwrap();
        let image = c.apply(k, &c.piece(k).generator(i));
        let target = c.piece(c.grading().pred(k));
        let g = c.group();
        let at = |name: &str| &image[target.names.iter().position(|n| n == name).unwrap()];
        assert_eq!(at("x⊗v"), &Novikov::one(g));
        assert_eq!(at("w⊗y"), &-&Novikov::one(g));
    }

    #[test]
    fn sign_rule_needs_parity() {
        let c = SignedComplex::unsigned(pair(1, "w", "x").complex().clone());
        assert_eq!(
            tensor_complex(&c, &c),
            Err(TensorError::SignRuleUnavailable)
        );
        let c2 = SignedComplex::characteristic_two(c.complex().clone());
        assert_eq!(
            tensor_complex(&c2, &c2),
            Err(TensorError::CharacteristicTwo)
        );
    }

    #[test]
    fn basis_independence() {
        let g = ExponentGroup::integers();
        let s = FilteredVectorSpace::new(g, vec!["x1".into(), "x2".into()], vec![int(0), int(0)]);
        let t_ = Novikov::monomial(g, Coeff::from_integer(1.into()), int(1)).unwrap();
        let alt = vec![vec![Novikov::one(g), t_], s.generator(1)];
        let ident = vec![s.generator(0), s.generator(1)];
        let probe: Vec<Novikov> = (0..4)
            .map(|i| Novikov::monomial(g, Coeff::from_integer((i + 1).into()), int(i)).unwrap())
            .collect();
        let r = check_basis_independence(&s, &s, &alt, &ident, &[probe]).unwrap();
        assert!(r.agreed());
        let bad = vec![s.generator(0), s.generator(0)];
        assert_eq!(
            check_basis_independence(&s, &s, &bad, &ident, &[]),
            Err(TensorError::NotOrthogonal)
        );
    }
}
