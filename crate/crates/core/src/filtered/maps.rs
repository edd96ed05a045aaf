use super::complex::FilteredComplex;
use super::space::FilteredVectorSpace;
use super::{DepthOptions, FilteredError};
use crate::matrix::NovMatrix;
use crate::novikov::{Exp, ExtRational, Novikov};

/// Inverse of a square matrix whose inverse has finitely many terms.
///
/// Gauss–Jordan elimination with minimal-valuation pivots runs on series
/// truncated at a cutoff sized from the degree bound for `adj(M)/det(M)`;
/// the truncated result is accepted only if it multiplies back to the
/// identity exactly.
pub fn invert_exact(m: &NovMatrix) -> Result<NovMatrix, FilteredError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(FilteredError::DimensionMismatch(
            "inverse of a non-square matrix".into(),
        ));
    }
    let g = m.group();
    let id = NovMatrix::identity(g, n);
    if n == 0 {
        return Ok(id);
    }
    let (hi, lo) = match (m.max_exponent(), m.min_valuation()) {
        (Some(hi), Some(lo)) => (hi, lo),
        _ => return Err(FilteredError::NotInvertible("zero matrix".into())),
    };
    let nn = Exp::from_integer(n as i64);
    let bound = (nn - 1) * hi - nn * lo + 1;
    let step = (hi - lo).max(Exp::from_integer(1)) * nn;
    for attempt in 0..6 {
        let working = bound.max(hi).max(Exp::from_integer(0)) + step * (1 << attempt);
        let inv = gauss_jordan(m, working)?;
        let inv = inv.map(|x| x.truncate(bound).into_exact());
        if m.mul(&inv) == id {
            return Ok(inv);
        }
    }
    Err(FilteredError::NotInvertible(
        "inverse is not a finite Laurent polynomial matrix".into(),
    ))
}

fn gauss_jordan(m: &NovMatrix, cutoff: Exp) -> Result<NovMatrix, FilteredError> {
    let n = m.rows();
    let g = m.group();
    let mut a: Vec<Vec<Novikov>> = (0..n)
        .map(|i| {
            let mut row: Vec<Novikov> = m.row(i).into_iter().map(|x| x.truncate(cutoff)).collect();
            row.extend((0..n).map(|j| {
                if i == j {
                    Novikov::one(g).truncate(cutoff)
                } else {
                    Novikov::zero(g)
                }
            }));
            row
        })
        .collect();
    for c in 0..n {
        let r = (c..n)
            .filter_map(|i| a[i][c].leading().map(|t| (t.0, i)))
            .min()
            .map(|(_, i)| i)
            .ok_or_else(|| FilteredError::NotInvertible("singular matrix".into()))?;
        a.swap(c, r);
        let v = a[c][c].leading().expect("pivot").0;
        let pinv = a[c][c].invert_to(cutoff - v - v).expect("pivot is nonzero");
        a[c] = a[c].iter().map(|x| (x * &pinv).truncate(cutoff)).collect();
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..2 * n {
                if a[c][j].is_zero() {
                    continue;
                }
                let updated = &a[i][j] - &(&f * &a[c][j]);
                a[i][j] = updated.truncate(cutoff);
            }
            a[i][c] = Novikov::zero(g);
        }
    }
    Ok(NovMatrix::from_fn(g, n, n, |i, j| a[i][n + j].clone()))
}

/// Largest `ℓ_W(M e_j) − ℓ_V(e_j)` over generators, with the generator
/// attaining it. `None` for the zero map.
pub fn level_shift(
    m: &NovMatrix,
    source: &FilteredVectorSpace,
    target: &FilteredVectorSpace,
) -> Option<(Exp, usize)> {
    let mut best: Option<(Exp, usize)> = None;
    for j in 0..m.cols() {
        if let ExtRational::Finite(l) = target.level(&m.column(j)) {
            let s = l - source.levels[j];
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, j));
            }
        }
    }
    best
}

/// Per-grading matrices of a filtered map. Degree 0 maps send grading `k`
/// of the source to grading `k` of the target; degree 1 homotopies send
/// grading `k` to `succ(k)` of the same complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredMap {
    pub matrices: Vec<NovMatrix>,
    pub shift: Exp,
}

impl FilteredMap {
    pub fn identity(c: &FilteredComplex, shift: Exp) -> Self {
        FilteredMap {
            matrices: c
                .pieces()
                .iter()
                .map(|p| NovMatrix::identity(c.group(), p.dim()))
                .collect(),
            shift,
        }
    }

    pub fn zero_homotopy(c: &FilteredComplex, shift: Exp) -> Self {
        let g = c.grading();
        FilteredMap {
            matrices: (0..g.len())
                .map(|k| NovMatrix::zeros(c.group(), c.piece(g.succ(k)).dim(), c.piece(k).dim()))
                .collect(),
            shift,
        }
    }
}

/// Data of a claimed `c`-quasiequivalence between `C` and `D`.
#[derive(Clone, Debug)]
pub struct QuasiEquivalence {
    pub phi: FilteredMap,
    pub psi: FilteredMap,
    pub k_c: FilteredMap,
    pub k_d: FilteredMap,
    pub c: Exp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub depth_c: ExtRational,
    pub depth_d: ExtRational,
    pub bound: Exp,
    /// `|b(C) − b(D)| ≤ c`.
    pub within_bound: bool,
}

fn check_shift(
    what: &str,
    m: &NovMatrix,
    source: &FilteredVectorSpace,
    target: &FilteredVectorSpace,
    allowed: Exp,
) -> Result<(), FilteredError> {
    if let Some((s, j)) = level_shift(m, source, target) {
        if s > allowed {
            return Err(FilteredError::ShiftExceeded {
                map: what.to_string(),
                generator: source.names[j].clone(),
                allowed,
                actual: s,
            });
        }
    }
    Ok(())
}

fn check_chain_map(
    what: &str,
    a: &FilteredComplex,
    b: &FilteredComplex,
    f: &FilteredMap,
) -> Result<(), FilteredError> {
    let g = a.grading();
    for k in 0..g.len() {
        let lhs = f.matrices[g.pred(k)].mul(a.differential(k));
        let rhs = b.differential(k).mul(&f.matrices[k]);
        if lhs != rhs {
            return Err(FilteredError::NotChainMap(format!(
                "{what} does not commute with the differentials on grading {}",
                g.label(k)
            )));
        }
        check_shift(what, &f.matrices[k], a.piece(k), b.piece(k), f.shift)?;
    }
    Ok(())
}

fn check_homotopy(
    what: &str,
    a: &FilteredComplex,
    composite: &[NovMatrix],
    h: &FilteredMap,
    budget: Exp,
) -> Result<(), FilteredError> {
    let g = a.grading();
    if h.shift > budget {
        return Err(FilteredError::ShiftExceeded {
            map: what.to_string(),
            generator: String::new(),
            allowed: budget,
            actual: h.shift,
        });
    }
    for k in 0..g.len() {
        let id = NovMatrix::identity(a.group(), a.piece(k).dim());
        let lhs = composite[k].sub(&id);
        let rhs = h.matrices[g.pred(k)]
            .mul(a.differential(k))
            .add(&a.differential(g.succ(k)).mul(&h.matrices[k]));
        if lhs != rhs {
            return Err(FilteredError::HomotopyIdentityFails(format!(
                "{what} fails on grading {}",
                g.label(k)
            )));
        }
        check_shift(
            what,
            &h.matrices[k],
            a.piece(k),
            a.piece(g.succ(k)),
            h.shift,
        )?;
    }
    Ok(())
}

fn check_shapes(
    what: &str,
    f: &FilteredMap,
    rows: impl Fn(usize) -> usize,
    cols: impl Fn(usize) -> usize,
    n: usize,
) -> Result<(), FilteredError> {
    if f.matrices.len() != n
        || f.matrices
            .iter()
            .enumerate()
            .any(|(k, m)| m.rows() != rows(k) || m.cols() != cols(k))
    {
        return Err(FilteredError::DimensionMismatch(format!(
            "{what} has the wrong shape"
        )));
    }
    Ok(())
}

/// Verifies that `q` is a `c`-quasiequivalence between `C` and `D` and
/// compares their boundary depths.
pub fn quasiequivalence_audit(
    c: &FilteredComplex,
    d: &FilteredComplex,
    q: &QuasiEquivalence,
    opts: &DepthOptions,
) -> Result<AuditReport, FilteredError> {
    if c.grading() != d.grading() {
        return Err(FilteredError::DimensionMismatch(
            "complexes have different gradings".into(),
        ));
    }
    if q.phi.shift + q.psi.shift > q.c {
        return Err(FilteredError::ShiftBudget {
            c1: q.phi.shift,
            c2: q.psi.shift,
            c: q.c,
        });
    }
    let g = c.grading();
    let n = g.len();
    check_shapes("Φ", &q.phi, |k| d.piece(k).dim(), |k| c.piece(k).dim(), n)?;
    check_shapes("Ψ", &q.psi, |k| c.piece(k).dim(), |k| d.piece(k).dim(), n)?;
    check_shapes(
        "K_C",
        &q.k_c,
        |k| c.piece(g.succ(k)).dim(),
        |k| c.piece(k).dim(),
        n,
    )?;
    check_shapes(
        "K_D",
        &q.k_d,
        |k| d.piece(g.succ(k)).dim(),
        |k| d.piece(k).dim(),
        n,
    )?;
    check_chain_map("Φ", c, d, &q.phi)?;
    check_chain_map("Ψ", d, c, &q.psi)?;
    let psi_phi: Vec<NovMatrix> = (0..n)
        .map(|k| q.psi.matrices[k].mul(&q.phi.matrices[k]))
        .collect();
    let phi_psi: Vec<NovMatrix> = (0..n)
        .map(|k| q.phi.matrices[k].mul(&q.psi.matrices[k]))
        .collect();
    check_homotopy("K_C", c, &psi_phi, &q.k_c, q.c)?;
    check_homotopy("K_D", d, &phi_psi, &q.k_d, q.c)?;
    let depth_c = c.boundary_depth(opts)?;
    let depth_d = d.boundary_depth(opts)?;
    let within_bound = match (depth_c, depth_d) {
        (ExtRational::Finite(a), ExtRational::Finite(b)) => {
            num_traits::Signed::abs(&(a - b)) <= q.c
        }
        (a, b) => a == b,
    };
    Ok(AuditReport {
        depth_c,
        depth_d,
        bound: q.c,
        within_bound,
    })
}
