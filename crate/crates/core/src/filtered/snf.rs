//! Smith normal form over the valuation ring `Λ_{≥0}` by minimal-valuation
//! pivoting, computed modulo `T^N`.
//!
//! Every entry of the working matrix is known modulo `T^N`. Minimal
//! valuation pivoting keeps that invariant, so the pivot valuations found are
//! exactly the invariant factors `d_j < N`. Invariants at or above `N` are
//! invisible; [`invariants`] raises `N` until the rank is certified.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{DepthOptions, FilteredError};
use crate::matrix::NovMatrix;
use crate::novikov::{Coeff, Exp, Novikov};

#[derive(Clone, Debug)]
pub(crate) struct Pivot {
    pub row: usize,
    pub col: usize,
    pub value: Novikov,
    pub valuation: Exp,
}

/// `L·S·R = D` with `D` supported on the pivot positions.
#[derive(Clone, Debug)]
pub(crate) struct Smith {
    pub cutoff: Exp,
    pub pivots: Vec<Pivot>,
    pub left: Option<Vec<Vec<Novikov>>>,
    pub right: Option<Vec<Vec<Novikov>>>,
    /// Whether any entry was truncated; if not, the form is exact.
    pub truncated: bool,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn valuations(&self) -> Vec<Exp> {
        self.pivots.iter().map(|p| p.valuation).collect()
    }

    pub fn max_valuation(&self) -> Option<Exp> {
        self.pivots.iter().map(|p| p.valuation).max()
    }

    /// `R e_j` for a column index `j` of the input.
    pub fn right_column(&self, j: usize) -> Vec<Novikov> {
        let r = self.right.as_ref().expect("transforms were not tracked");
        r.iter().map(|row| row[j].clone()).collect()
    }

    pub fn left_rows(&self) -> &[Vec<Novikov>] {
        self.left.as_ref().expect("transforms were not tracked")
    }

    pub fn pivot_inverse(&self, p: &Pivot) -> Novikov {
        p.value
            .invert_to(self.cutoff - p.valuation - p.valuation)
            .expect("pivot is nonzero")
    }
}

fn clip(x: Novikov, cutoff: Exp, truncated: &mut bool) -> Novikov {
    let fits = x.terms().last().is_none_or(|t| t.0 < cutoff);
    if x.is_exact() && fits {
        x
    } else {
        *truncated = true;
        x.truncate(cutoff)
    }
}

fn identity(group: crate::novikov::ExponentGroup, n: usize) -> Vec<Vec<Novikov>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Novikov::one(group)
                    } else {
                        Novikov::zero(group)
                    }
                })
                .collect()
        })
        .collect()
}

pub(crate) fn smith(s: &NovMatrix, cutoff: Exp, track: bool) -> Smith {
    let (m, n) = (s.rows(), s.cols());
    let group = s.group();
    let mut truncated = false;
    let mut a: Vec<Vec<Novikov>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| clip(s.get(i, j).clone(), cutoff, &mut truncated))
                .collect()
        })
        .collect();
    let mut left = track.then(|| identity(group, m));
    let mut right = track.then(|| identity(group, n));
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    let mut pivots = Vec::new();
    let mut scratch = false;
    loop {
        let mut best: Option<(Exp, usize, usize)> = None;
        for j in (0..n).filter(|&j| !col_done[j]) {
            for i in (0..m).filter(|&i| !row_done[i]) {
                if let Some((v, _)) = a[i][j].leading() {
                    if best.is_none_or(|(b, _, _)| *v < b) {
                        best = Some((*v, j, i));
                    }
                }
            }
        }
        let Some((v, c, r)) = best else { break };
        let p = a[r][c].clone();
        let pinv = p.invert_to(cutoff - v - v).expect("pivot is nonzero");
        for i in 0..m {
            if i == r || row_done[i] || a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &pinv;
            for j in 0..n {
                if j == c || col_done[j] || a[r][j].is_zero() {
                    continue;
                }
                let updated = &a[i][j] - &(&f * &a[r][j]);
                a[i][j] = clip(updated, cutoff, &mut truncated);
            }
            a[i][c] = Novikov::zero(group);
            if let Some(l) = left.as_mut() {
                for j in 0..m {
                    if l[r][j].is_zero() {
                        continue;
                    }
                    let updated = &l[i][j] - &(&f * &l[r][j]);
                    l[i][j] = clip(updated, cutoff, &mut scratch);
                }
            }
        }
        for j in 0..n {
            if j == c || col_done[j] || a[r][j].is_zero() {
                continue;
            }
            let f = &a[r][j] * &pinv;
            a[r][j] = Novikov::zero(group);
            if let Some(rt) = right.as_mut() {
                for row in rt.iter_mut() {
                    if row[c].is_zero() {
                        continue;
                    }
                    let updated = &row[j] - &(&f * &row[c]);
                    row[j] = clip(updated, cutoff, &mut scratch);
                }
            }
        }
        row_done[r] = true;
        col_done[c] = true;
        pivots.push(Pivot {
            row: r,
            col: c,
            value: p,
            valuation: v,
        });
    }
    Smith {
        cutoff,
        pivots,
        left,
        right,
        truncated,
    }
}

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    acc
}

fn invmod(a: u64) -> Option<u64> {
    (a != 0).then(|| powmod(a, PRIME - 2))
}

fn reduce_int(x: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    x.mod_floor(&p).to_u64().expect("reduced below the prime")
}

fn reduce_coeff(c: &Coeff) -> Option<u64> {
    let d = invmod(reduce_int(c.denom()))?;
    Some(mulmod(reduce_int(c.numer()), d))
}

/// A lower bound for the rank over the Novikov field: the rank of the
/// matrix evaluated at `T^{step} = t₀` modulo a prime. Specialization never
/// raises rank, so the bound is rigorous; it equals the true rank unless
/// `t₀` is a common root of every maximal nonvanishing minor modulo `p`.
pub(crate) fn rank_lower_bound(s: &NovMatrix) -> usize {
    let step = s.group().step();
    [0x2545_f491_4f6c_dd1d_u64, 0x1b87_3593_0f5a_6c4f]
        .iter()
        .map(|&seed| modular_rank(s, step, seed % PRIME))
        .max()
        .unwrap_or(0)
}

fn modular_rank(s: &NovMatrix, step: Exp, t0: u64) -> usize {
    let t0_inv = invmod(t0).expect("evaluation point is nonzero");
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(s.rows());
    for i in 0..s.rows() {
        let mut row = Vec::with_capacity(s.cols());
        for j in 0..s.cols() {
            let mut acc = 0u64;
            for (e, c) in s.get(i, j).terms() {
                let Some(c) = reduce_coeff(c) else { return 0 };
                let k = if step.is_zero() {
                    0
                } else {
                    (e / step).to_integer()
                };
                let base = if k < 0 { t0_inv } else { t0 };
                let term = mulmod(c, powmod(base, k.unsigned_abs()));
                acc = (acc + term) % PRIME;
            }
            row.push(acc);
        }
        rows.push(row);
    }
    let mut rank = 0;
    let cols = s.cols();
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = invmod(rows[rank][c]).expect("nonzero pivot");
        for i in rank + 1..rows.len() {
            if rows[i][c] == 0 {
                continue;
            }
            let f = mulmod(rows[i][c], inv);
            for j in c..cols {
                let sub = mulmod(f, rows[rank][j]);
                rows[i][j] = (rows[i][j] + PRIME - sub) % PRIME;
            }
        }
        rank += 1;
    }
    rank
}

fn unit(s: &NovMatrix) -> Exp {
    let step = s.group().step();
    if step.is_zero() {
        Exp::from_integer(1)
    } else {
        step
    }
}

/// Default starting cutoff: a few steps above the smallest valuation.
pub(crate) fn policy_cutoff(s: &NovMatrix) -> Exp {
    s.min_valuation().unwrap_or_else(Exp::zero) + unit(s) * Exp::from_integer(4)
}

/// A cutoff above every invariant factor. For a nonzero `r×r` minor `M`,
/// the largest invariant is at most `ν(M) − (r−1)·v_min`, and `ν(M)` is at
/// most the sum of the `r` largest row (or column) maxima.
pub(crate) fn visibility_bound(s: &NovMatrix) -> Exp {
    let Some(vmin) = s.min_valuation() else {
        return unit(s);
    };
    let top = |maxima: Vec<Option<Exp>>| {
        let mut v: Vec<Exp> = maxima.into_iter().flatten().collect();
        v.sort_by(|a, b| b.cmp(a));
        let mut acc = Exp::zero();
        let mut best = vmin;
        for (k, x) in v.iter().enumerate() {
            acc += x;
            best = best.max(acc - vmin * Exp::from_integer(k as i64));
        }
        best
    };
    let exp = |i: usize, j: usize| s.get(i, j).terms().last().map(|t| t.0);
    let rows = (0..s.rows())
        .map(|i| (0..s.cols()).filter_map(|j| exp(i, j)).max())
        .collect();
    let cols = (0..s.cols())
        .map(|j| (0..s.rows()).filter_map(|i| exp(i, j)).max())
        .collect();
    top(rows).min(top(cols)) + unit(s)
}

/// Runs [`smith`] at growing cutoffs until every invariant is visible: the
/// form is exact or of full rank, its rank reaches the modular lower bound,
/// or the cutoff passes [`visibility_bound`].
pub(crate) fn invariants(
    s: &NovMatrix,
    start: Exp,
    track: bool,
    opts: &DepthOptions,
) -> Result<Smith, FilteredError> {
    let lower = rank_lower_bound(s);
    let full = s.rows().min(s.cols());
    let vmin = s.min_valuation().unwrap_or_else(Exp::zero);
    let bound = visibility_bound(s);
    let mut cutoff = opts.cutoff.unwrap_or(start).max(vmin + unit(s));
    for _ in 0..=opts.max_doublings {
        let a = smith(s, cutoff, track);
        if !a.truncated || a.rank() == full || a.rank() >= lower || cutoff >= bound {
            return Ok(a);
        }
        cutoff = (cutoff + (cutoff - vmin).max(unit(s))).min(bound);
    }
    Err(FilteredError::PrecisionExhausted(format!(
        "invariants not visible below T^{cutoff}"
    )))
}

/// Absolute bound on the largest exponent in `s` relative to its smallest
/// valuation, used to size working cutoffs for transforms.
pub(crate) fn spread(s: &NovMatrix) -> Exp {
    match (s.max_exponent(), s.min_valuation()) {
        (Some(hi), Some(lo)) => (hi - lo).abs(),
        _ => Exp::zero(),
    }
}
