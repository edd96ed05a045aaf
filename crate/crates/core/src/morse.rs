//! Boundary depth of Morse functions on the circle, and the function-level
//! constructions `mm f` and stacked bumps `f_v`.

use std::ops::{Neg, Sub};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::filtered::{DepthOptions, DepthWitness, FilteredComplex, FilteredError, GradingSet};
use crate::matrix::NovMatrix;
use crate::novikov::{Exp, ExponentGroup, ExtRational, Novikov};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorseError {
    #[error("invalid critical values: {0}")]
    InvalidData(String),
    #[error("a sampled function needs at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid bump profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Filtered(#[from] FilteredError),
}

/// Critical values `(p₁, q₁, …, p_m, q_m)` of a Morse function on the
/// circle in cyclic order, maxima `p` and minima `q` alternating, rotated so
/// that `p₁` is the first global maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleMorseData {
    values: Vec<Exp>,
}

/// Indices `(i, k, j, l)` of a cyclically ordered quadruple
/// `(p_i, q_k, p_j, q_l)` (0-based) and its score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadruple<T> {
    pub indices: [usize; 4],
    pub score: T,
}

impl CircleMorseData {
    pub fn new(values: Vec<Exp>) -> Result<Self, MorseError> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(MorseError::InvalidData(
                "expected a nonempty even number of values".into(),
            ));
        }
        let m = values.len() / 2;
        for i in 0..m {
            let (p, q, next) = (
                values[2 * i],
                values[2 * i + 1],
                values[(2 * i + 2) % (2 * m)],
            );
            if p <= q || next <= q {
                return Err(MorseError::InvalidData(format!(
                    "minimum {} is not below its neighbouring maxima",
                    i + 1
                )));
            }
        }
        let top = (0..m)
            .max_by(|a, b| values[2 * a].cmp(&values[2 * b]).then(b.cmp(a)))
            .expect("m ≥ 1");
        let mut values = values;
        values.rotate_left(2 * top);
        Ok(CircleMorseData { values })
    }

    pub fn m(&self) -> usize {
        self.values.len() / 2
    }

    pub fn values(&self) -> &[Exp] {
        &self.values
    }

    pub fn maxima(&self) -> Vec<Exp> {
        self.values.iter().step_by(2).copied().collect()
    }

    pub fn minima(&self) -> Vec<Exp> {
        self.values.iter().skip(1).step_by(2).copied().collect()
    }

    /// `max − min` of the critical values.
    pub fn osc(&self) -> Exp {
        let hi = self.values.iter().max().expect("nonempty");
        let lo = self.values.iter().min().expect("nonempty");
        hi - lo
    }
}

/// The Morse complex over `Λ^{ℚ,{0}}`: generators `p_i` in grading 1 and
/// `q_i` in grading 0 at their critical values, `∂p_i = q_i − q_{i−1}`.
pub fn morse_complex(d: &CircleMorseData) -> FilteredComplex {
    let m = d.m();
    let g = ExponentGroup::trivial();
    let one = Novikov::one(g);
    let mut d1 = NovMatrix::zeros(g, m, m);
    if m > 1 {
        for i in 0..m {
            d1.set(i, i, one.clone());
            d1.set((i + m - 1) % m, i, -&one);
        }
    }
    let minima = d
        .minima()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (format!("q{}", i + 1), v));
    let maxima = d
        .maxima()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (format!("p{}", i + 1), v));
    FilteredComplex::new(
        GradingSet::two_term(),
        g,
        vec![minima.collect(), maxima.collect()],
        vec![NovMatrix::zeros(g, m, m), d1],
    )
    .expect("Morse complex data is valid by construction")
}

/// `β` through the chain engine.
pub fn beta_chain(d: &CircleMorseData) -> Result<Exp, MorseError> {
    let depth = morse_complex(d).boundary_depth(&DepthOptions::default())?;
    Ok(depth
        .finite()
        .expect("finite-dimensional complexes have finite depth"))
}

/// Boundary/primitive pair realizing `β` in the Morse complex.
pub fn beta_witness(d: &CircleMorseData) -> Result<DepthWitness, MorseError> {
    Ok(morse_complex(d)
        .step_map(0)
        .depth_witness(&DepthOptions::default())?)
}

/// Maximal score over cyclically ordered quadruples `(p_i, q_k, p_j, q_l)`
/// of alternating maxima and minima, computed in `O(m²)` by taking the
/// lowest minimum on each of the two arcs between a pair of maxima.
/// `None` when there are fewer than two maxima.
pub fn best_quadruple<T>(maxima: &[T], minima: &[T]) -> Option<Quadruple<T>>
where
    T: Clone + PartialOrd + Sub<Output = T>,
{
    let m = maxima.len();
    if m < 2 {
        return None;
    }
    let lowest = |range: &mut dyn Iterator<Item = usize>| -> usize {
        let mut best: Option<usize> = None;
        for k in range {
            if best.is_none_or(|b| minima[k] < minima[b]) {
                best = Some(k);
            }
        }
        best.expect("arc contains a minimum")
    };
    let mut best: Option<Quadruple<T>> = None;
    for i in 0..m {
        // running minimum on the arc from p_i forward to p_j
        let mut inner: Option<usize> = None;
        for j in i + 1..m {
            let k_new = j - 1;
            if inner.is_none_or(|b| minima[k_new] < minima[b]) {
                inner = Some(k_new);
            }
            let k = inner.expect("nonempty arc");
            let l = lowest(&mut (j..m).chain(0..i));
            let top = if maxima[i] < maxima[j] {
                &maxima[i]
            } else {
                &maxima[j]
            };
            let bottom = if minima[k] < minima[l] {
                &minima[l]
            } else {
                &minima[k]
            };
            let score = top.clone() - bottom.clone();
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Quadruple {
                    indices: [i, k, j, l],
                    score,
                });
            }
        }
    }
    best
}

/// Exhaustive `O(m⁴)` version of [`best_quadruple`].
pub fn best_quadruple_exhaustive<T>(maxima: &[T], minima: &[T]) -> Option<Quadruple<T>>
where
    T: Clone + PartialOrd + Sub<Output = T>,
{
    let m = maxima.len();
    let mut best: Option<Quadruple<T>> = None;
    for i in 0..m {
        for j in i + 1..m {
            for k in i..j {
                for l in (j..m).chain(0..i) {
                    let top = if maxima[i] < maxima[j] {
                        &maxima[i]
                    } else {
                        &maxima[j]
                    };
                    let bottom = if minima[k] < minima[l] {
                        &minima[l]
                    } else {
                        &minima[k]
                    };
                    let score = top.clone() - bottom.clone();
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        best = Some(Quadruple {
                            indices: [i, k, j, l],
                            score,
                        });
                    }
                }
            }
        }
    }
    best
}

/// `γ(f)`: the critical-quadruple formula, 0 for `m = 1`.
pub fn beta_combinatorial(d: &CircleMorseData) -> Exp {
    best_quadruple(&d.maxima(), &d.minima()).map_or(Exp::zero(), |q| q.score)
}

/// Alternating local extrema of cyclic samples after merging plateaus,
/// rotated to start with a maximum. Empty for a constant function.
pub fn cyclic_extrema<T: Clone + PartialOrd>(samples: &[T]) -> (Vec<T>, Vec<T>) {
    let mut runs: Vec<T> = Vec::with_capacity(samples.len());
    for s in samples {
        if runs.last() != Some(s) {
            runs.push(s.clone());
        }
    }
    while runs.len() > 1 && runs.first() == runs.last() {
        runs.pop();
    }
    let n = runs.len();
    if n < 2 {
        return (Vec::new(), Vec::new());
    }
    let mut ext: Vec<(bool, T)> = Vec::new();
    for i in 0..n {
        let (prev, cur, next) = (&runs[(i + n - 1) % n], &runs[i], &runs[(i + 1) % n]);
        if cur > prev && cur > next {
            ext.push((true, cur.clone()));
        } else if cur < prev && cur < next {
            ext.push((false, cur.clone()));
        }
    }
    let start = ext.iter().position(|e| e.0).unwrap_or(0);
    ext.rotate_left(start);
    let maxima = ext.iter().filter(|e| e.0).map(|e| e.1.clone()).collect();
    let minima = ext.iter().filter(|e| !e.0).map(|e| e.1.clone()).collect();
    (maxima, minima)
}

/// `max min(f(t₁), f(t₃)) − max(f(t₂), f(t₄))` over cyclically ordered
/// sample quadruples, clamped below at 0.
pub fn beta_continuous<T>(samples: &[T]) -> Result<T, MorseError>
where
    T: Clone + PartialOrd + Sub<Output = T> + Zero,
{
    if samples.len() < 4 {
        return Err(MorseError::TooFewSamples(samples.len()));
    }
    let (maxima, minima) = cyclic_extrema(samples);
    let score = best_quadruple(&maxima, &minima).map_or_else(T::zero, |q| q.score);
    Ok(if score > T::zero() { score } else { T::zero() })
}

/// Infimum of `f` over its non-strict local maxima on the circle.
pub fn mm_circle<T: Clone + PartialOrd>(samples: &[T]) -> Option<T> {
    let n = samples.len();
    let mut best: Option<T> = None;
    for i in 0..n {
        let (prev, cur, next) = (
            &samples[(i + n - 1) % n],
            &samples[i],
            &samples[(i + 1) % n],
        );
        if cur >= prev && cur >= next && best.as_ref().is_none_or(|b| cur < b) {
            best = Some(cur.clone());
        }
    }
    best
}

/// `mm f` for `f` sampled on a window outside which it vanishes: the flat
/// zero region contributes local maxima at value 0.
pub fn mm_line<T: Clone + PartialOrd + Zero>(samples: &[T]) -> T {
    let mut best = T::zero();
    let at = |i: isize| -> T {
        if i < 0 || i as usize >= samples.len() {
            T::zero()
        } else {
            samples[i as usize].clone()
        }
    };
    for i in 0..samples.len() as isize {
        let cur = at(i);
        if cur >= at(i - 1) && cur >= at(i + 1) && cur < best {
            best = cur;
        }
    }
    best
}

/// A bump `g` on `[0, 1]`, sampled at `k / (len − 1)` and interpolated
/// linearly; vanishes at both ends, has maximum 1, and every local minimum
/// has value 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BumpProfile {
    knots: Vec<Exp>,
}

impl BumpProfile {
    pub fn new(knots: Vec<Exp>) -> Result<Self, MorseError> {
        let n = knots.len();
        if n < 3 || !(n - 1).is_power_of_two() {
            return Err(MorseError::InvalidProfile(
                "need 2^b + 1 knots with b ≥ 1".into(),
            ));
        }
        if !knots[0].is_zero() || !knots[n - 1].is_zero() {
            return Err(MorseError::InvalidProfile(
                "support must be interior".into(),
            ));
        }
        if knots.iter().max() != Some(&Exp::from_integer(1)) {
            return Err(MorseError::InvalidProfile("maximum must be 1".into()));
        }
        for i in 1..n - 1 {
            if knots[i] <= knots[i - 1] && knots[i] <= knots[i + 1] && !knots[i].is_zero() {
                return Err(MorseError::InvalidProfile(format!(
                    "local minimum {} at knot {i}",
                    knots[i]
                )));
            }
        }
        Ok(BumpProfile { knots })
    }

    /// A tent with flat zero shoulders on 8 intervals.
    pub fn standard() -> Self {
        let k = |n: i64, d: i64| Exp::new(n, d);
        BumpProfile::new(vec![
            k(0, 1),
            k(0, 1),
            k(1, 4),
            k(3, 4),
            k(1, 1),
            k(3, 4),
            k(1, 4),
            k(0, 1),
            k(0, 1),
        ])
        .expect("standard profile is valid")
    }

    pub fn knots(&self) -> &[Exp] {
        &self.knots
    }

    fn resolution_bits(&self) -> u32 {
        (self.knots.len() - 1).trailing_zeros()
    }

    pub fn eval(&self, u: Exp) -> Exp {
        let n = (self.knots.len() - 1) as i64;
        if u <= Exp::zero() || u >= Exp::from_integer(1) {
            return Exp::zero();
        }
        let x = u * n;
        let k = x.floor().to_integer();
        let t = x - Exp::from_integer(k);
        let (a, b) = (self.knots[k as usize], self.knots[k as usize + 1]);
        a + (b - a) * t
    }
}

/// Values of `f_v(s) = Σ v_i g(2^i (s − (1 − 2^{1−i})))` at `s = j / 2^K`,
/// `j = 0, …, 2^K`, where `K` is fine enough to hit every profile knot.
/// Block `i` occupies `[1 − 2^{1−i}, 1 − 2^{−i}]`.
pub fn stacked_bumps(v: &[Exp], g: &BumpProfile) -> Vec<Exp> {
    let bits = v.len() as u32 + g.resolution_bits();
    let n = 1i64 << bits;
    (0..=n)
        .map(|j| {
            let s = Exp::new(j, n);
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| {
                    let i = i as i32 + 1;
                    let scale = Exp::from_integer(1i64 << i);
                    let a = Exp::from_integer(1) - Exp::new(2, 1i64 << i);
                    *x * g.eval(scale * (s - a))
                })
                .fold(Exp::zero(), |acc, y| acc + y)
        })
        .collect()
}

/// `max(max v, 0) − min(min v, 0)`: oscillation including the zero tail.
pub fn osc_sequence(v: &[Exp]) -> Exp {
    let hi = v.iter().copied().fold(Exp::zero(), Exp::max);
    let lo = v.iter().copied().fold(Exp::zero(), Exp::min);
    hi - lo
}

pub fn sup_norm(v: &[Exp]) -> Exp {
    v.iter().map(|x| x.abs()).fold(Exp::zero(), Exp::max)
}

fn osc_values(f: &[Exp]) -> Exp {
    let hi = f.iter().copied().fold(Exp::zero(), Exp::max);
    let lo = f.iter().copied().fold(Exp::zero(), Exp::min);
    hi - lo
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub sup_norm: Exp,
    pub osc: Exp,
    pub neg_min_forward: Exp,
    pub neg_min_backward: Exp,
    pub mm: Exp,
    pub osc_function: Exp,
    /// `max(−min f_{v−w}, −min f_{w−v}) = ‖v − w‖_∞`.
    pub norm_matches: bool,
    /// `osc f_{v−w} = osc(v − w)`.
    pub osc_matches: bool,
}

/// Function-level arithmetic relating `v, w` to `f_{v−w}`.
pub fn embedding_bounds(v: &[Exp], w: &[Exp], g: &BumpProfile) -> EmbeddingReport {
    let len = v.len().max(w.len());
    let at = |x: &[Exp], i: usize| x.get(i).copied().unwrap_or_else(Exp::zero);
    let u: Vec<Exp> = (0..len).map(|i| at(v, i) - at(w, i)).collect();
    let neg: Vec<Exp> = u.iter().map(|x| x.neg()).collect();
    let f = stacked_bumps(&u, g);
    let f_neg = stacked_bumps(&neg, g);
    let min = |f: &[Exp]| f.iter().copied().fold(Exp::zero(), Exp::min);
    let neg_min_forward = -min(&f);
    let neg_min_backward = -min(&f_neg);
    let sup = sup_norm(&u);
    let osc = osc_sequence(&u);
    let osc_function = osc_values(&f);
    EmbeddingReport {
        sup_norm: sup,
        osc,
        neg_min_forward,
        neg_min_backward,
        mm: mm_line(&f),
        osc_function,
        norm_matches: neg_min_forward.max(neg_min_backward) == sup,
        osc_matches: osc_function == osc,
    }
}

/// Depth of the Morse complex as an extended rational, for reporting.
pub fn beta_chain_ext(d: &CircleMorseData) -> Result<ExtRational, MorseError> {
    Ok(ExtRational::Finite(beta_chain(d)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Exp {
        Exp::from_integer(n)
    }

    fn data(v: &[i64]) -> CircleMorseData {
        CircleMorseData::new(v.iter().map(|&x| q(x)).collect()).unwrap()
    }

    #[test]
    fn m1_is_zero() {
        let d = data(&[5, 1]);
        assert_eq!(beta_combinatorial(&d), q(0));
        assert_eq!(beta_chain(&d).unwrap(), q(0));
        assert!(morse_complex(&d).differential(1).is_zero());
    }

    #[test]
    fn m2_example() {
        let d = data(&[3, 0, 2, 1]);
        assert_eq!(beta_combinatorial(&d), q(1));
        assert_eq!(beta_chain(&d).unwrap(), q(1));
        let c = morse_complex(&d);
        let dp = c.differential(1);
        let one = Novikov::one(ExponentGroup::trivial());
        assert_eq!(dp.get(0, 0), &one);
        assert_eq!(dp.get(1, 0), &-&one);
        let w = beta_witness(&d).unwrap();
        assert_eq!(w.gap, q(1));
        // the cheapest primitive is a multiple of p2
        assert!(w.primitive[0].is_zero());
        assert!(!w.primitive[1].is_zero());
    }

    #[test]
    fn rotation_to_global_max() {
        let d = data(&[2, 1, 3, 0]);
        assert_eq!(d.values(), &[q(3), q(0), q(2), q(1)]);
        assert!(CircleMorseData::new(vec![q(1), q(2)]).is_err());
        assert!(CircleMorseData::new(vec![q(1)]).is_err());
    }

    #[test]
    fn periodic_pattern_reaches_osc() {
        for m in 2..6 {
            let v: Vec<i64> = std::iter::repeat_n([1, -1], m).flatten().collect();
            let d = data(&v);
            assert_eq!(beta_combinatorial(&d), q(2));
            assert_eq!(d.osc(), q(2));
        }
    }

    #[test]
    fn continuous_examples() {
        assert_eq!(beta_continuous(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        let s = [3.0, 1.5, 0.0, 1.0, 2.0, 1.5, 1.0, 2.0];
        assert_eq!(beta_continuous(&s).unwrap(), 1.0);
        assert!(beta_continuous(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn mm_examples() {
        let g = BumpProfile::standard();
        let bump: Vec<Exp> = g.knots().to_vec();
        assert_eq!(mm_line(&bump), q(0));
        let neg: Vec<Exp> = bump.iter().map(|x| -x).collect();
        assert_eq!(mm_line(&neg), q(0));
        let min = neg.iter().copied().min().unwrap();
        assert_eq!(mm_line(&neg) - min, q(1));
        assert_eq!(mm_line(&[q(0); 5]), q(0));
    }

    #[test]
    fn stacked_bump_examples() {
        let g = BumpProfile::standard();
        assert!(stacked_bumps(&[q(0), q(0)], &g).iter().all(Zero::is_zero));
        let f = stacked_bumps(&[q(1)], &g);
        assert_eq!(f.iter().copied().max(), Some(q(1)));
        // one bump on [0, 1/2]: the second half vanishes
        assert!(f[f.len() / 2..].iter().all(Zero::is_zero));
        let r = embedding_bounds(&[q(2), q(-3)], &[], &g);
        assert_eq!(r.sup_norm, q(3));
        assert_eq!(r.osc, q(5));
        assert!(r.norm_matches && r.osc_matches);
        let same = embedding_bounds(&[q(1)], &[q(1)], &g);
        assert_eq!((same.sup_norm, same.osc, same.mm), (q(0), q(0), q(0)));
    }

    #[test]
    fn profile_validation() {
        assert!(BumpProfile::new(vec![q(0), q(1), q(0)]).is_ok());
        assert!(BumpProfile::new(vec![q(0), q(2), q(0)]).is_err());
        let dip = vec![q(0), q(1), Exp::new(1, 2), q(1), q(0)];
        assert!(BumpProfile::new(dip).is_err());
    }
}
