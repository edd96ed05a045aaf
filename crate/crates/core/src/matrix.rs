//! Dense matrices over the Novikov field and exact linear algebra over ℚ.

use std::fmt;

use num_traits::{One, Zero};

use crate::novikov::{Coeff, Exp, ExponentGroup, Novikov};

/// Row-major dense matrix of Novikov elements sharing one exponent group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovMatrix {
    rows: usize,
    cols: usize,
    group: ExponentGroup,
    data: Vec<Novikov>,
}

impl NovMatrix {
    pub fn zeros(group: ExponentGroup, rows: usize, cols: usize) -> Self {
        NovMatrix {
            rows,
            cols,
            group,
            data: vec![Novikov::zero(group); rows * cols],
        }
    }

    pub fn identity(group: ExponentGroup, n: usize) -> Self {
        let mut m = Self::zeros(group, n, n);
        for i in 0..n {
            m.set(i, i, Novikov::one(group));
        }
        m
    }

    pub fn from_fn(
        group: ExponentGroup,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Novikov,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        NovMatrix {
            rows,
            cols,
            group,
            data,
        }
    }

    /// Matrix whose `j`-th column is `columns[j]`; every column has length `rows`.
    pub fn from_columns(group: ExponentGroup, rows: usize, columns: &[Vec<Novikov>]) -> Self {
        Self::from_fn(group, rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn group(&self) -> ExponentGroup {
        self.group
    }

    pub fn get(&self, i: usize, j: usize) -> &Novikov {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Novikov) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Novikov)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, x)| (k / self.cols, k % self.cols, x))
    }

    pub fn column(&self, j: usize) -> Vec<Novikov> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Novikov> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Novikov::is_exact_zero)
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Novikov::is_exact)
    }

    pub fn mul(&self, other: &NovMatrix) -> NovMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        let mut out = NovMatrix::zeros(self.group, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_exact_zero() {
                        continue;
                    }
                    let acc = &out.data[i * out.cols + j] + &(a * b);
                    out.data[i * out.cols + j] = acc;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Novikov]) -> Vec<Novikov> {
        assert_eq!(self.cols, v.len(), "vector length does not match");
        (0..self.rows)
            .map(|i| {
                let mut acc = Novikov::zero(self.group);
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_exact_zero() && !x.is_exact_zero() {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &NovMatrix) -> NovMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        NovMatrix {
            rows: self.rows,
            cols: self.cols,
            group: self.group,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &NovMatrix) -> NovMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        NovMatrix {
            rows: self.rows,
            cols: self.cols,
            group: self.group,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Novikov) -> Novikov) -> NovMatrix {
        NovMatrix {
            rows: self.rows,
            cols: self.cols,
            group: self.group,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub(crate) fn with_group_unchecked(&self, group: ExponentGroup) -> NovMatrix {
        NovMatrix {
            rows: self.rows,
            cols: self.cols,
            group,
            data: self
                .data
                .iter()
                .map(|x| x.with_group_unchecked(group))
                .collect(),
        }
    }

    /// Largest exponent of any term, if any entry is nonzero.
    pub fn max_exponent(&self) -> Option<Exp> {
        self.data
            .iter()
            .filter_map(|x| x.terms().last().map(|t| t.0))
            .max()
    }

    /// Smallest valuation of a nonzero entry.
    pub fn min_valuation(&self) -> Option<Exp> {
        self.data
            .iter()
            .filter_map(|x| x.leading().map(|t| t.0))
            .min()
    }
}

impl fmt::Display for NovMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(" | "))?;
        }
        Ok(())
    }
}

/// Row-reduces `m` in place over ℚ and returns the pivot columns.
pub fn rref(m: &mut [Vec<Coeff>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (src, dst) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= &f * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(m: &[Vec<Coeff>]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

/// Basis of the null space `{v : m v = 0}` over ℚ.
pub fn null_space(m: &[Vec<Coeff>], cols: usize) -> Vec<Vec<Coeff>> {
    let mut work = m.to_vec();
    let pivots = rref(&mut work);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Coeff::zero(); cols];
        v[free] = Coeff::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -work[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Incremental test for linear independence of rational vectors.
#[derive(Clone, Debug, Default)]
pub struct RationalSpan {
    // rows in echelon form with the recorded pivot column
    rows: Vec<(usize, Vec<Coeff>)>,
}

impl RationalSpan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Coeff]) -> Vec<Coeff> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Coeff]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns false (and leaves the span unchanged) if `v` is
    /// already in it.
    pub fn insert(&mut self, v: &[Coeff]) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}
