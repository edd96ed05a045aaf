//! Seeded instance generators for property runs. Every generator produces
//! valid instances by construction; callers seed a `ChaCha8Rng` so runs are
//! reproducible.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};

use crate::asymptotic::{self, BlockOperatorFamily, IntegratorOptions, Mat};
use crate::filtered::{
    invert_exact, FilteredComplex, FilteredLinearMap, FilteredMap, FilteredVectorSpace, GradingSet,
    QuasiEquivalence,
};
use crate::matrix::NovMatrix;
use crate::morse::CircleMorseData;
use crate::novikov::{Coeff, Exp, ExponentGroup, Novikov};
use crate::quantum::QuantumCorrection;
use crate::tensor::SignedComplex;

fn int(n: i64) -> Exp {
    Exp::from_integer(n)
}

fn coeff<R: Rng + ?Sized>(rng: &mut R, max: i64) -> Coeff {
    let mut c = rng.random_range(1..=max);
    if rng.random_bool(0.5) {
        c = -c;
    }
    Coeff::from_integer(c.into())
}

/// Exact sum of up to `max_terms` monomials `c T^{k·step}` with integer
/// `k ∈ [lo, hi]` and small nonzero integer `c`.
pub fn polynomial<R: Rng + ?Sized>(
    rng: &mut R,
    group: ExponentGroup,
    lo: i64,
    hi: i64,
    max_terms: usize,
) -> Novikov {
    let step = if group.is_trivial() {
        int(0)
    } else {
        group.step()
    };
    let terms = rng.random_range(1..=max_terms);
    let mut x = Novikov::zero(group);
    for _ in 0..terms {
        let e = step * int(rng.random_range(lo..=hi));
        let c = coeff(rng, 3);
        x = &x + &Novikov::monomial(group, c, e).expect("exponent in group");
    }
    x
}

/// Critical values with `m ≤ max_m` and integer values in `[lo, hi]`.
pub fn circle_data<R: Rng + ?Sized>(
    rng: &mut R,
    max_m: usize,
    lo: i64,
    hi: i64,
) -> CircleMorseData {
    let m = rng.random_range(1..=max_m);
    circle_data_exact(rng, m, lo, hi)
}

fn circle_values<R: Rng + ?Sized>(rng: &mut R, m: usize, lo: i64, hi: i64) -> Vec<Exp> {
    let q: Vec<i64> = (0..m).map(|_| rng.random_range(lo..hi)).collect();
    let mut v = Vec::with_capacity(2 * m);
    for i in 0..m {
        let floor = q[i].max(q[(i + m - 1) % m]);
        v.push(int(rng.random_range(floor + 1..=hi)));
        v.push(int(q[i]));
    }
    v
}

pub fn circle_data_exact<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    lo: i64,
    hi: i64,
) -> CircleMorseData {
    CircleMorseData::new(circle_values(rng, m, lo, hi)).expect("valid by construction")
}

/// A pattern of up to three maxima repeated `copies` times.
pub fn periodic_circle_data<R: Rng + ?Sized>(
    rng: &mut R,
    copies: usize,
    lo: i64,
    hi: i64,
) -> CircleMorseData {
    let m = rng.random_range(1..=3);
    let base = circle_values(rng, m, lo, hi);
    let values = base
        .iter()
        .copied()
        .cycle()
        .take(base.len() * copies)
        .collect();
    CircleMorseData::new(values).expect("valid by construction")
}

/// Finitely supported integer sequence of length `≤ max_len`.
pub fn sequence<R: Rng + ?Sized>(rng: &mut R, max_len: usize, bound: i64) -> Vec<Exp> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| int(rng.random_range(-bound..=bound)))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct MapShape {
    pub max_dim: usize,
    pub max_exponent: i64,
    /// Levels are drawn from `{0, 1/d, 2/d, …}` up to `max_level`.
    pub level_denominator: i64,
    pub max_level: i64,
}

impl Default for MapShape {
    fn default() -> Self {
        MapShape {
            max_dim: 6,
            max_exponent: 10,
            level_denominator: 2,
            max_level: 5,
        }
    }
}

fn levels<R: Rng + ?Sized>(rng: &mut R, n: usize, shape: &MapShape) -> Vec<Exp> {
    let d = shape.level_denominator;
    (0..n)
        .map(|_| Exp::new(rng.random_range(0..=shape.max_level * d), d))
        .collect()
}

/// A filtered linear map over `Λ^{ℚ,ℤ·1}`: entries are polynomials with
/// exponents in `[0, max_exponent]` and valuation at least `ℓ_i − ℓ_j`, so
/// no level goes up. Some columns are monomial multiples of earlier ones so
/// that kernels occur.
pub fn filtered_map<R: Rng + ?Sized>(rng: &mut R, shape: &MapShape) -> FilteredLinearMap {
    let g = ExponentGroup::integers();
    let (m, n) = (
        rng.random_range(1..=shape.max_dim),
        rng.random_range(1..=shape.max_dim),
    );
    let src = levels(rng, n, shape);
    let tgt = levels(rng, m, shape);
    let floor = |i: usize, j: usize| ceil_int(tgt[i] - src[j]).max(0);
    let mut columns: Vec<Vec<Novikov>> = Vec::with_capacity(n);
    for j in 0..n {
        if j > 0 && rng.random_bool(0.25) {
            let from = rng.random_range(0..j);
            let shift = ceil_int(src[from] - src[j]).max(0) + rng.random_range(0..=1);
            let fits = columns[from].iter().all(|x| {
                x.terms()
                    .last()
                    .is_none_or(|(e, _)| *e + int(shift) <= int(shape.max_exponent))
            });
            if fits {
                let col = columns[from]
                    .iter()
                    .map(|x| x.mul_monomial(int(shift)).expect("integer shift"))
                    .collect();
                columns.push(col);
                continue;
            }
        }
        columns.push(
            (0..m)
                .map(|i| {
                    if rng.random_bool(0.5) {
                        polynomial(rng, g, floor(i, j), shape.max_exponent, 3)
                    } else {
                        Novikov::zero(g)
                    }
                })
                .collect(),
        );
    }
    let matrix = NovMatrix::from_columns(g, m, &columns);
    let name = |p: &str, k: usize| (1..=k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    FilteredLinearMap::new(
        FilteredVectorSpace::new(g, name("y", n), src),
        FilteredVectorSpace::new(g, name("x", m), tgt),
        matrix,
    )
    .expect("shapes agree")
}

/// `0 → C₁ → C₀ → 0` with `f` as its differential.
pub fn map_complex(f: &FilteredLinearMap) -> FilteredComplex {
    let g = f.group();
    let named = |v: &FilteredVectorSpace| {
        v.names
            .iter()
            .cloned()
            .zip(v.levels.iter().copied())
            .collect()
    };
    FilteredComplex::new(
        GradingSet::two_term(),
        g,
        vec![named(&f.target), named(&f.source)],
        vec![
            NovMatrix::zeros(g, f.source.dim(), f.target.dim()),
            f.matrix.clone(),
        ],
    )
    .expect("filtered by construction")
}

#[derive(Clone, Debug)]
pub struct ComplexShape {
    pub gradings: usize,
    pub max_dim: usize,
    pub max_exponent: i64,
    pub max_level: i64,
    /// Probability that a candidate pair is created.
    pub pairing: f64,
}

impl Default for ComplexShape {
    fn default() -> Self {
        ComplexShape {
            gradings: 2,
            max_dim: 4,
            max_exponent: 5,
            max_level: 6,
            pairing: 0.7,
        }
    }
}

fn ceil_int(x: Exp) -> i64 {
    x.ceil().to_integer()
}

/// `I + N` with `N` strictly upper triangular, entries of valuation at
/// least `ℓ_i − ℓ_j`: a filtration automorphism with polynomial inverse.
pub fn unipotent<R: Rng + ?Sized>(
    rng: &mut R,
    group: ExponentGroup,
    levels: &[Exp],
    max_exponent: i64,
    density: f64,
) -> NovMatrix {
    let n = levels.len();
    let step = if group.is_trivial() {
        int(1)
    } else {
        group.step()
    };
    NovMatrix::from_fn(group, n, n, |i, j| {
        if i == j {
            Novikov::one(group)
        } else if i < j && rng.random_bool(density) {
            let lo = ceil_int((levels[i] - levels[j]) / step);
            let lo = if group.is_trivial() { lo.max(0) } else { lo };
            if group.is_trivial() && lo > 0 {
                return Novikov::zero(group);
            }
            let hi = if group.is_trivial() {
                0
            } else {
                lo + max_exponent
            };
            polynomial(rng, group, lo, hi, 2)
        } else {
            Novikov::zero(group)
        }
    })
}

/// A filtered complex over `Λ^{ℚ,ℤ·1}` with cyclic grading: a random
/// pairing `∂y = c T^g x` conjugated by filtration automorphisms.
pub fn filtered_complex<R: Rng + ?Sized>(rng: &mut R, shape: &ComplexShape) -> FilteredComplex {
    let g = ExponentGroup::integers();
    let labels: Vec<String> = (0..shape.gradings).map(|k| k.to_string()).collect();
    let grading = GradingSet::cyclic(labels);
    let n = grading.len();
    let dims: Vec<usize> = loop {
        let d: Vec<usize> = (0..n)
            .map(|_| rng.random_range(0..=shape.max_dim))
            .collect();
        if d.iter().sum::<usize>() > 0 {
            break d;
        }
    };
    let lv: Vec<Vec<Exp>> = dims
        .iter()
        .map(|&d| {
            (0..d)
                .map(|_| int(rng.random_range(0..=shape.max_level)))
                .collect()
        })
        .collect();
    let mut used: Vec<Vec<bool>> = dims.iter().map(|&d| vec![false; d]).collect();
    let mut pairing: Vec<NovMatrix> = (0..n)
        .map(|k| NovMatrix::zeros(g, dims[grading.pred(k)], dims[k]))
        .collect();
    for k in 0..n {
        let t = grading.pred(k);
        for j in 0..dims[k] {
            if used[k][j] || !rng.random_bool(shape.pairing) {
                continue;
            }
            let free: Vec<usize> = (0..dims[t])
                .filter(|&i| !used[t][i] && !(t == k && i == j))
                .collect();
            if free.is_empty() {
                continue;
            }
            let i = free[rng.random_range(0..free.len())];
            used[k][j] = true;
            used[t][i] = true;
            let floor = ceil_int(lv[t][i] - lv[k][j]).max(0);
            let e = int(floor + rng.random_range(0..=shape.max_exponent));
            pairing[k].set(
                i,
                j,
                Novikov::monomial(g, coeff(rng, 3), e).expect("integer"),
            );
        }
    }
    let q: Vec<NovMatrix> = lv.iter().map(|l| unipotent(rng, g, l, 2, 0.4)).collect();
    let q_inv: Vec<NovMatrix> = q
        .iter()
        .map(|m| invert_exact(m).expect("unipotent"))
        .collect();
    let differential = (0..n)
        .map(|k| q[grading.pred(k)].mul(&pairing[k]).mul(&q_inv[k]))
        .collect();
    let pieces = (0..n)
        .map(|k| {
            (0..dims[k])
                .map(|i| (format!("g{}_{}", grading.label(k), i + 1), lv[k][i]))
                .collect()
        })
        .collect();
    FilteredComplex::new(grading, g, pieces, differential).expect("valid by construction")
}

/// Two-term complex with its grading as parity.
pub fn signed_complex<R: Rng + ?Sized>(rng: &mut R, max_total: usize) -> SignedComplex {
    loop {
        let shape = ComplexShape {
            gradings: 2,
            max_dim: max_total / 2,
            ..ComplexShape::default()
        };
        let c = filtered_complex(rng, &shape);
        if c.total_dim() <= max_total {
            return SignedComplex::from_two_term(c).expect("two-term");
        }
    }
}

/// Data `(Φ_k, φ, σ)` of a random shift-isomorphism of `c`: a rotation of
/// the grading cycle, one shift for the cycle, and per-grading products of
/// a permutation, a monomial diagonal and a filtration automorphism.
pub fn shift_isomorphism<R: Rng + ?Sized>(
    rng: &mut R,
    c: &FilteredComplex,
) -> (Vec<NovMatrix>, Vec<usize>, Vec<Exp>) {
    let g = c.group();
    let n = c.grading().len();
    let rotate = rng.random_range(0..n);
    let mut grading_map = vec![0; n];
    // walk the cycle through 0; every grading set built here is one cycle
    let mut k = 0;
    let mut image = 0;
    for _ in 0..rotate {
        image = c.grading().succ(image);
    }
    for _ in 0..n {
        grading_map[k] = image;
        k = c.grading().succ(k);
        image = c.grading().succ(image);
    }
    let sigma = Exp::new(rng.random_range(-12..=12), rng.random_range(1..=4));
    let phi = (0..n)
        .map(|k| {
            let p = c.piece(k);
            let dim = p.dim();
            let u = unipotent(rng, g, &p.levels, 2, 0.4);
            let diag = NovMatrix::from_fn(g, dim, dim, |i, j| {
                if i == j {
                    Novikov::monomial(g, coeff(rng, 3), int(rng.random_range(-3..=3)))
                        .expect("integer")
                } else {
                    Novikov::zero(g)
                }
            });
            let mut perm: Vec<usize> = (0..dim).collect();
            for i in (1..dim).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let pm = NovMatrix::from_fn(g, dim, dim, |i, j| {
                if perm[j] == i {
                    Novikov::one(g)
                } else {
                    Novikov::zero(g)
                }
            });
            pm.mul(&diag).mul(&u)
        })
        .collect();
    (phi, grading_map, vec![sigma; n])
}

/// `D` equal to `C` with every level moved by at most `c/2`, joined to `C`
/// by `Φ = I + ∂h + h∂`, `Ψ = I` and homotopies `h` on both sides.
pub fn quasi_equivalent<R: Rng + ?Sized>(
    rng: &mut R,
    c: &FilteredComplex,
    budget: Exp,
) -> (FilteredComplex, QuasiEquivalence) {
    let g = c.group();
    let grading = c.grading().clone();
    let n = grading.len();
    let half = budget / int(2);
    let denominator = 4i64;
    let steps = (half * int(denominator)).floor().to_integer();
    let d = (0..64)
        .find_map(|_| {
            let levels: Vec<Vec<Exp>> = c
                .pieces()
                .iter()
                .map(|p| {
                    p.levels
                        .iter()
                        .map(|l| *l + Exp::new(rng.random_range(-steps..=steps), denominator))
                        .collect()
                })
                .collect();
            c.with_levels(levels).ok()
        })
        .unwrap_or_else(|| c.clone());
    // h : C_k → C_succ(k) with valuations high enough to stay inside the budget
    let slack = ceil_int(budget) + 2;
    let h: Vec<NovMatrix> = (0..n)
        .map(|k| {
            let (src, tgt) = (c.piece(k), c.piece(grading.succ(k)));
            NovMatrix::from_fn(g, tgt.dim(), src.dim(), |i, j| {
                if rng.random_bool(0.3) {
                    let lo = ceil_int(tgt.levels[i] - src.levels[j]) + slack;
                    polynomial(rng, g, lo, lo + 2, 2)
                } else {
                    Novikov::zero(g)
                }
            })
        })
        .collect();
    let phi: Vec<NovMatrix> = (0..n)
        .map(|k| {
            let dk = c.piece(k).dim();
            let through_pred = h[grading.pred(k)].mul(c.differential(k));
            let through_succ = c.differential(grading.succ(k)).mul(&h[k]);
            NovMatrix::identity(g, dk)
                .add(&through_pred)
                .add(&through_succ)
        })
        .collect();
    let q = QuasiEquivalence {
        phi: FilteredMap {
            matrices: phi,
            shift: half,
        },
        psi: FilteredMap::identity(c, half),
        k_c: FilteredMap {
            matrices: h.clone(),
            shift: budget,
        },
        k_d: FilteredMap {
            matrices: h,
            shift: budget,
        },
        c: budget,
    };
    (d, q)
}

#[derive(Clone, Debug)]
pub struct CorrectionShape {
    pub gradings: usize,
    pub max_dim: usize,
    pub gap: i64,
}

impl Default for CorrectionShape {
    fn default() -> Self {
        CorrectionShape {
            gradings: 2,
            max_dim: 5,
            gap: 2,
        }
    }
}

/// `∂₀ = P D₀ P⁻¹` over `ℚ` from elementary collapses, deformed to
/// `∂ = Q (D₀ + T^μ E) Q⁻¹` with `Q = P(I + T^μ Y)`: `E` pairs some
/// generators left free by `D₀` and perturbs existing pairs, `Y` is
/// strictly triangular. All entries of `∂ − ∂₀` have valuation `≥ μ`.
pub fn quantum_correction<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &CorrectionShape,
) -> QuantumCorrection {
    let g = ExponentGroup::integers();
    let grading = GradingSet::cyclic((0..shape.gradings).map(|k| k.to_string()));
    let n = grading.len();
    let mu = int(shape.gap);
    let dims: Vec<usize> = (0..n)
        .map(|_| rng.random_range(1..=shape.max_dim))
        .collect();
    let mut used: Vec<Vec<bool>> = dims.iter().map(|&d| vec![false; d]).collect();
    let mut d0: Vec<NovMatrix> = (0..n)
        .map(|k| NovMatrix::zeros(g, dims[grading.pred(k)], dims[k]))
        .collect();
    let mut extra = d0.clone();
    let deform = rng.random_bool(0.6);
    for (round, target) in [(0, &mut d0), (1, &mut extra)] {
        if round == 1 && !deform {
            break;
        }
        for k in 0..n {
            let t = grading.pred(k);
            for j in 0..dims[k] {
                if used[k][j] || !rng.random_bool(0.5) {
                    continue;
                }
                let free: Vec<usize> = (0..dims[t])
                    .filter(|&i| !used[t][i] && !(t == k && i == j))
                    .collect();
                if free.is_empty() {
                    continue;
                }
                let i = free[rng.random_range(0..free.len())];
                used[k][j] = true;
                used[t][i] = true;
                let e = if round == 0 {
                    int(0)
                } else {
                    mu + int(rng.random_range(0..=2))
                };
                target[k].set(
                    i,
                    j,
                    Novikov::monomial(g, coeff(rng, 3), e).expect("integer"),
                );
            }
        }
    }
    // perturb existing pairs by T^μ terms
    for k in 0..n {
        let entries: Vec<(usize, usize)> = d0[k]
            .entries()
            .filter(|(_, _, x)| !x.is_zero())
            .map(|(i, j, _)| (i, j))
            .collect();
        for (i, j) in entries {
            if rng.random_bool(0.5) {
                extra[k].set(i, j, polynomial(rng, g, shape.gap, shape.gap + 2, 2));
            }
        }
    }
    let zero_levels = |d: usize| vec![int(0); d];
    // constant entries: zero levels with no exponent range
    let p: Vec<NovMatrix> = dims
        .iter()
        .map(|&d| unipotent(rng, g, &zero_levels(d), 0, 0.5))
        .collect();
    let y: Vec<NovMatrix> = dims
        .iter()
        .map(|&d| {
            NovMatrix::from_fn(g, d, d, |i, j| {
                if i < j && rng.random_bool(0.4) {
                    polynomial(rng, g, shape.gap, shape.gap + 2, 2)
                } else if i == j {
                    Novikov::one(g)
                } else {
                    Novikov::zero(g)
                }
            })
        })
        .collect();
    let q: Vec<NovMatrix> = (0..n).map(|k| p[k].mul(&y[k])).collect();
    let inv = |m: &NovMatrix| invert_exact(m).expect("unipotent");
    let (p_inv, q_inv): (Vec<_>, Vec<_>) =
        (p.iter().map(inv).collect(), q.iter().map(inv).collect());
    let pieces = || -> Vec<Vec<(String, Exp)>> {
        (0..n)
            .map(|k| {
                (0..dims[k])
                    .map(|i| (format!("e{}_{}", k, i + 1), int(0)))
                    .collect()
            })
            .collect()
    };
    let base_d: Vec<NovMatrix> = (0..n)
        .map(|k| p[grading.pred(k)].mul(&d0[k]).mul(&p_inv[k]))
        .collect();
    let def_d: Vec<NovMatrix> = (0..n)
        .map(|k| q[grading.pred(k)].mul(&d0[k].add(&extra[k])).mul(&q_inv[k]))
        .collect();
    let base = FilteredComplex::new(grading.clone(), g, pieces(), base_d).expect("valid base");
    let deformed = FilteredComplex::new(grading, g, pieces(), def_d).expect("valid deformation");
    QuantumCorrection::new(base, deformed, vec![mu; n]).expect("valid correction")
}

/// Symmetric matrix with entries uniform in `[−1, 1]`, scaled to operator
/// norm `norm`.
pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> Mat {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let s = (&a + a.transpose()) * 0.5;
    let current = asymptotic::sym_norm(&s);
    if current == 0.0 {
        s
    } else {
        s * (norm / current)
    }
}

/// A pair `(B₁, B₂)` with norms in `[0.1, 3]`.
pub fn block_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Mat, Mat) {
    let a = rng.random_range(0.1..3.0);
    let b = rng.random_range(0.1..3.0);
    (symmetric(rng, n, a), symmetric(rng, n, b))
}

/// Independent random samples at `knots` equally spaced points of
/// `[−T, T]`, rescaled so that `max ‖B₁‖ + ‖B₂‖` over samples is `bound`.
pub fn block_family<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    t: f64,
    knots: usize,
    bound: f64,
) -> BlockOperatorFamily {
    let positions = asymptotic::uniform_grid(-t, t, knots);
    let b1: Vec<Mat> = (0..knots)
        .map(|_| {
            let norm = rng.random_range(0.2..1.0);
            symmetric(rng, n, norm)
        })
        .collect();
    let b2: Vec<Mat> = (0..knots)
        .map(|_| {
            let norm = rng.random_range(0.2..1.0);
            symmetric(rng, n, norm)
        })
        .collect();
    let peak = b1
        .iter()
        .zip(&b2)
        .map(|(a, b)| asymptotic::sym_norm(a) + asymptotic::sym_norm(b))
        .fold(0.0, f64::max);
    let s = bound / peak;
    BlockOperatorFamily::new(
        positions,
        b1.into_iter().map(|m| m * s).collect(),
        b2.into_iter().map(|m| m * s).collect(),
    )
    .expect("symmetric samples")
}

pub fn constant_family<R: Rng + ?Sized>(rng: &mut R, n: usize, t: f64) -> BlockOperatorFamily {
    let (a, b) = (rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
    let (b1, b2) = (symmetric(rng, n, a), symmetric(rng, n, b));
    BlockOperatorFamily::constant(b1, b2, t).expect("symmetric")
}

/// A family vanishing at both ends, scaled so that a designed `η` is
/// exceptional.
#[derive(Clone, Debug)]
pub struct EngineeredCrossing {
    pub family: BlockOperatorFamily,
    pub eta: f64,
    pub alpha: f64,
    /// `|x(T)| / |v(T)|` for the solution started on the kernel direction.
    pub kernel_residual: f64,
}

/// Searches rotating families `α φ(s)(P + sQ, R + sS)` on `ℝ² ⊕ ℝ²`,
/// `φ(s) = cos²(πs/2T)`, for a sign change of the composed determinant at
/// `eta` as `α` grows, then bisects on `α`.
pub fn engineered_crossing<R: Rng + ?Sized>(rng: &mut R, eta: f64, t: f64) -> EngineeredCrossing {
    let opts = IntegratorOptions::default();
    let det = |f: &BlockOperatorFamily| -> f64 {
        asymptotic::composed_operator(f, eta, &opts)
            .expect("integrable")
            .0
            .determinant()
    };
    loop {
        let n = 2;
        let (p, q, r, s) = (
            symmetric(rng, n, 1.0),
            symmetric(rng, n, 1.0),
            symmetric(rng, n, 1.0),
            symmetric(rng, n, 1.0),
        );
        let positions = asymptotic::uniform_grid(-t, t, 65);
        let bump = |x: f64| (std::f64::consts::PI * x / (2.0 * t)).cos().powi(2);
        let b1 = positions.iter().map(|&x| (&p + &q * x) * bump(x)).collect();
        let b2 = positions.iter().map(|&x| (&r + &s * x) * bump(x)).collect();
        let mut b1: Vec<Mat> = b1;
        let mut b2: Vec<Mat> = b2;
        // exact zeros at the ends
        let last = positions.len() - 1;
        for v in [&mut b1, &mut b2] {
            v[0].fill(0.0);
            v[last].fill(0.0);
        }
        let base = BlockOperatorFamily::new(positions, b1, b2).expect("symmetric");
        let mut lo = 0.0;
        let mut d_lo = det(&base.scaled(lo));
        let mut found = None;
        for i in 1..=48 {
            let a = 0.25 * i as f64;
            let d = det(&base.scaled(a));
            if d.signum() != d_lo.signum() {
                found = Some(a);
                break;
            }
            lo = a;
            d_lo = d;
        }
        let Some(mut hi) = found else { continue };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let d = det(&base.scaled(mid));
            if d.signum() == d_lo.signum() {
                lo = mid;
                d_lo = d;
            } else {
                hi = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        let family = base.scaled(alpha);
        let phi = asymptotic::fundamental_solution(&family, eta, &opts)
            .expect("integrable")
            .matrix;
        let m = phi.view((0, 0), (n, n)).clone_owned();
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let k = (0..n)
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .expect("n ≥ 1");
        let mut start = nalgebra::DVector::zeros(2 * n);
        for i in 0..n {
            start[i] = v_t[(k, i)];
        }
        let end = &phi * start;
        let kernel_residual = end.rows(0, n).norm() / end.norm();
        return EngineeredCrossing {
            family,
            eta,
            alpha,
            kernel_residual,
        };
    }
}
