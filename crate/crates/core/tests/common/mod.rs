//! Oracles shared by the integration tests. They use their own sparse
//! polynomial arithmetic so they do not lean on the engine under test.

#![allow(dead_code, clippy::type_complexity, clippy::needless_range_loop)]

use std::collections::{BTreeMap, HashMap};

use bdepth::filtered::FilteredLinearMap;
use bdepth::novikov::{Coeff, Exp, ExtRational};
use num_traits::Zero;

/// Finite sum of `c T^e` with rational `e`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(BTreeMap<Exp, Coeff>);

impl Poly {
    pub fn monomial(c: Coeff, e: Exp) -> Self {
        let mut p = Poly::default();
        p.add_term(e, c);
        p
    }

    fn add_term(&mut self, e: Exp, c: Coeff) {
        let v = self.0.entry(e).or_insert_with(Coeff::zero);
        *v += c;
        if v.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Smallest exponent, or `None` for zero.
    pub fn valuation(&self) -> Option<Exp> {
        self.0.keys().next().copied()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &other.0 {
            p.add_term(*e, c.clone());
        }
        p
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(e, c)| (*e, -c)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::default();
        for (a, x) in &self.0 {
            for (b, y) in &other.0 {
                p.add_term(a + b, x * y);
            }
        }
        p
    }

    pub fn shift(&self, s: Exp) -> Poly {
        Poly(self.0.iter().map(|(e, c)| (e + s, c.clone())).collect())
    }
}

/// The map with every generator moved to level 0: entry `(i, j)` is
/// multiplied by `T^{ℓ(source j) − ℓ(target i)}`.
pub fn standardized(f: &FilteredLinearMap) -> Vec<Vec<Poly>> {
    (0..f.target.dim())
        .map(|i| {
            (0..f.source.dim())
                .map(|j| {
                    let x = f.matrix.get(i, j);
                    assert!(x.is_exact(), "oracle needs exact entries");
                    let p = Poly(x.terms().iter().cloned().collect());
                    p.shift(f.source.levels[j] - f.target.levels[i])
                })
                .collect()
        })
        .collect()
}

/// Determinantal divisors: entry `k − 1` is the least valuation of a
/// nonzero `k×k` minor, for `k` up to the rank.
pub fn determinantal_divisors(s: &[Vec<Poly>]) -> Vec<Exp> {
    let rows = s.len();
    let cols = s.first().map_or(0, Vec::len);
    let mut memo: HashMap<(u32, u32), Poly> = HashMap::new();
    let mut best: Vec<Option<Exp>> = vec![None; rows.min(cols)];
    fn minor(s: &[Vec<Poly>], r: u32, c: u32, memo: &mut HashMap<(u32, u32), Poly>) -> Poly {
        if r == 0 {
            return Poly::monomial(Coeff::from_integer(1.into()), Exp::zero());
        }
        if let Some(p) = memo.get(&(r, c)) {
            return p.clone();
        }
        let top = r.trailing_zeros() as usize;
        let rest = r & (r - 1);
        let mut total = Poly::default();
        let mut sign = true;
        for j in (0..32).filter(|j| c >> j & 1 == 1) {
            if !s[top][j].is_zero() {
                let term = s[top][j].mul(&minor(s, rest, c & !(1 << j), memo));
                total = total.add(&if sign { term } else { term.neg() });
            }
            sign = !sign;
        }
        memo.insert((r, c), total.clone());
        total
    }
    for r in 1u32..(1 << rows) {
        let k = r.count_ones() as usize;
        if k > cols {
            continue;
        }
        for c in (1u32..(1 << cols)).filter(|c| c.count_ones() as usize == k) {
            if let Some(v) = minor(s, r, c, &mut memo).valuation() {
                let slot = &mut best[k - 1];
                *slot = Some(slot.map_or(v, |b: Exp| b.min(v)));
            }
        }
    }
    best.into_iter().map_while(|v| v).collect()
}

/// Invariant factors `d_k − d_{k−1}`, ascending.
pub fn invariant_factors(f: &FilteredLinearMap) -> Vec<Exp> {
    let d = determinantal_divisors(&standardized(f));
    (0..d.len())
        .map(|k| if k == 0 { d[0] } else { d[k] - d[k - 1] })
        .collect()
}

/// Depth as the last invariant factor; 0 for the zero map.
pub fn minors_depth(f: &FilteredLinearMap) -> ExtRational {
    ExtRational::Finite(
        invariant_factors(f)
            .last()
            .copied()
            .unwrap_or_else(Exp::zero),
    )
}

pub fn minors_rank(f: &FilteredLinearMap) -> usize {
    determinantal_divisors(&standardized(f)).len()
}

fn level(levels: &[Exp], chain: &[Poly]) -> Option<Exp> {
    levels
        .iter()
        .zip(chain)
        .filter_map(|(l, x)| x.valuation().map(|v| l - v))
        .max()
}

/// The sup-inf of the depth formula with primitives restricted to chains
/// whose coordinates are `0` or `c T^e`, `c ∈ {±1, ±2}`, `e ∈ {0, …, 5}`.
/// Returns `None` when the source is too large to enumerate.
pub fn lattice_depth(f: &FilteredLinearMap, max_source: usize) -> Option<Exp> {
    let n = f.source.dim();
    if n > max_source {
        return None;
    }
    let mut options = vec![Poly::default()];
    for c in [-2, -1, 1, 2] {
        for e in 0..=5 {
            options.push(Poly::monomial(
                Coeff::from_integer(c.into()),
                Exp::from_integer(e),
            ));
        }
    }
    let a: Vec<Vec<Poly>> = (0..f.target.dim())
        .map(|i| {
            (0..n)
                .map(|j| Poly(f.matrix.get(i, j).terms().iter().cloned().collect()))
                .collect()
        })
        .collect();
    // cheapest primitive level found for each boundary
    let mut cheapest: HashMap<Vec<Vec<(Exp, Coeff)>>, (Exp, Exp)> = HashMap::new();
    let mut index = vec![0usize; n];
    loop {
        let y: Vec<Poly> = index.iter().map(|&k| options[k].clone()).collect();
        let x: Vec<Poly> = a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&y)
                    .fold(Poly::default(), |acc, (p, q)| acc.add(&p.mul(q)))
            })
            .collect();
        if let (Some(ly), Some(lx)) = (level(&f.source.levels, &y), level(&f.target.levels, &x)) {
            let key = x
                .iter()
                .map(|p| p.0.iter().map(|(e, c)| (*e, c.clone())).collect())
                .collect();
            let slot = cheapest.entry(key).or_insert((ly, lx));
            slot.0 = slot.0.min(ly);
        }
        let mut k = 0;
        while k < n && index[k] + 1 == options.len() {
            index[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
        index[k] += 1;
    }
    Some(
        cheapest
            .values()
            .map(|(ly, lx)| ly - lx)
            .max()
            .unwrap_or_else(Exp::zero),
    )
}
