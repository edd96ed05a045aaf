//! Block operators `E + μB` on `V ⊕ V`, fundamental solutions of
//! `dv/ds + (ηE + B(s))v = 0`, and scans for the parameters `η` at which a
//! square-integrable solution exists.
//!
//! Everything here is double precision.

// `!(x <= y)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::par::{map_collect, Execution};

pub type Mat = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("Richardson estimate {estimate:e} exceeds tolerance {tolerance:e}; use more steps")]
    StepTooLarge { estimate: f64, tolerance: f64 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
}

const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn check_symmetric(m: &Mat, what: &str) -> Result<(), AsymptoticError> {
    if !m.is_square() {
        return Err(AsymptoticError::NotSymmetric(format!(
            "{what} is not square"
        )));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > SYMMETRY_TOLERANCE * scale {
        return Err(AsymptoticError::NotSymmetric(what.to_string()));
    }
    Ok(())
}

/// `E(x, y) = (−x, y)`.
pub fn block_e(n: usize) -> Mat {
    Mat::from_fn(2 * n, 2 * n, |i, j| match (i == j, i < n) {
        (true, true) => -1.0,
        (true, false) => 1.0,
        _ => 0.0,
    })
}

/// `B(x, y) = (B₁x + B₂y, B₂x + B₁y)`.
pub fn block_b(b1: &Mat, b2: &Mat) -> Mat {
    let n = b1.nrows();
    let mut b = Mat::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(b1);
    b.view_mut((n, n), (n, n)).copy_from(b1);
    b.view_mut((0, n), (n, n)).copy_from(b2);
    b.view_mut((n, 0), (n, n)).copy_from(b2);
    b
}

/// Operator norm of a symmetric matrix.
pub fn sym_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.amax()
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn admissible(b1: &Mat, b2: &Mat, mu: f64) -> Result<f64, AsymptoticError> {
    check_symmetric(b1, "B1")?;
    check_symmetric(b2, "B2")?;
    if b1.shape() != b2.shape() {
        return Err(AsymptoticError::InvalidFamily(
            "B1 and B2 differ in size".into(),
        ));
    }
    let norm = sym_norm(b1) + sym_norm(b2);
    if mu.abs() * norm >= 1.0 {
        return Err(AsymptoticError::OutOfRange(format!(
            "|μ| = {} is not below 1/(‖B1‖+‖B2‖) = {}",
            mu.abs(),
            1.0 / norm
        )));
    }
    Ok(norm)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub eigenvalues: Vec<f64>,
    /// `1 − |μ|(‖B₁‖ + ‖B₂‖)`, a lower bound for every `|λ|`.
    pub bound: f64,
}

impl Signature {
    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|x| x.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bound_holds(&self) -> bool {
        self.min_abs_eigenvalue() >= self.bound * (1.0 - 1e-12) - 1e-14
    }
}

/// Eigenvalue signs of `E + μB` for admissible `μ`.
pub fn signature_count(b1: &Mat, b2: &Mat, mu: f64) -> Result<Signature, AsymptoticError> {
    let norm = admissible(b1, b2, mu)?;
    let m = block_e(b1.nrows()) + block_b(b1, b2) * mu;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Signature {
        positive: eigenvalues.iter().filter(|&&x| x > 0.0).count(),
        negative: eigenvalues.iter().filter(|&&x| x < 0.0).count(),
        eigenvalues,
        bound: 1.0 - mu.abs() * norm,
    })
}

/// `E + μB` with the orthogonal projections onto its positive and negative
/// eigenspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitOperator {
    pub matrix: Mat,
    pub parameter: f64,
    pub plus: Mat,
    pub minus: Mat,
    /// Orthonormal columns spanning the negative eigenspace.
    pub minus_basis: Mat,
}

impl SplitOperator {
    /// `max ‖Π² − Π‖` over both projections.
    pub fn idempotency_defect(&self) -> f64 {
        let d = |p: &Mat| (p * p - p).amax();
        d(&self.plus).max(d(&self.minus))
    }

    /// `‖Π⁺ + Π⁻ − I‖`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.plus + &self.minus - Mat::identity(n, n)).amax()
    }

    pub fn symmetry_defect(&self) -> f64 {
        let d = |p: &Mat| (p - p.transpose()).amax();
        d(&self.plus).max(d(&self.minus))
    }

    pub fn ranks(&self) -> (usize, usize) {
        let r = |p: &Mat| p.trace().round() as usize;
        (r(&self.plus), r(&self.minus))
    }
}

fn split(matrix: Mat, parameter: f64) -> SplitOperator {
    let dim = matrix.nrows();
    let eig = SymmetricEigen::new(matrix.clone());
    let pick = |neg: bool| -> Mat {
        let cols: Vec<usize> = (0..dim)
            .filter(|&i| (eig.eigenvalues[i] < 0.0) == neg)
            .collect();
        Mat::from_fn(dim, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])])
    };
    let (u_minus, u_plus) = (pick(true), pick(false));
    SplitOperator {
        plus: &u_plus * u_plus.transpose(),
        minus: &u_minus * u_minus.transpose(),
        minus_basis: u_minus,
        matrix,
        parameter,
    }
}

/// Projections of `E + μB` for admissible `μ`.
pub fn spectral_projections(b1: &Mat, b2: &Mat, mu: f64) -> Result<SplitOperator, AsymptoticError> {
    admissible(b1, b2, mu)?;
    Ok(split(block_e(b1.nrows()) + block_b(b1, b2) * mu, mu))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    /// `max ‖Π(μᵢ₊₁) − Π(μᵢ)‖ / Δμ` on the coarse grid.
    pub coarse_constant: f64,
    pub fine_constant: f64,
    pub ranks_constant: bool,
}

impl ContinuityReport {
    /// The fine grid stays within twice the coarse estimate.
    pub fn holds(&self) -> bool {
        self.ranks_constant && self.fine_constant <= 2.0 * self.coarse_constant + 1e-9
    }
}

/// Grid Lipschitz audit of `μ ↦ Π⁻(μ)` on `[−ρ, ρ]` with `ρ` a fraction
/// `margin` of the admissible radius.
pub fn projection_continuity(
    b1: &Mat,
    b2: &Mat,
    margin: f64,
    coarse: usize,
    fine: usize,
) -> Result<ContinuityReport, AsymptoticError> {
    let norm = admissible(b1, b2, 0.0)?;
    let radius = if norm > 0.0 { margin / norm } else { margin };
    let n = b1.nrows();
    let constant = |points: usize, ranks: &mut bool| -> Result<f64, AsymptoticError> {
        let grid = uniform_grid(-radius, radius, points);
        let ops = grid
            .iter()
            .map(|&mu| spectral_projections(b1, b2, mu))
            .collect::<Result<Vec<_>, _>>()?;
        *ranks &= ops.iter().all(|o| o.ranks() == (n, n));
        Ok(ops
            .windows(2)
            .zip(grid.windows(2))
            .map(|(o, g)| spectral_norm(&(&o[1].minus - &o[0].minus)) / (g[1] - g[0]))
            .fold(0.0, f64::max))
    };
    let mut ranks_constant = true;
    let coarse_constant = constant(coarse, &mut ranks_constant)?;
    let fine_constant = constant(fine, &mut ranks_constant)?;
    Ok(ContinuityReport {
        coarse_constant,
        fine_constant,
        ranks_constant,
    })
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Clamped cubic spline through samples of a matrix-valued function, flat
/// at both ends.
#[derive(Clone, Debug, PartialEq)]
struct Spline {
    knots: Vec<f64>,
    values: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Spline {
    fn new(knots: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        let m = knots.len();
        let width = values[0].len();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        // tridiagonal system for the second derivatives, one column per entry
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut lower = vec![0.0; m];
        let mut rhs = vec![vec![0.0; width]; m];
        for i in 0..m {
            let slope = |a: usize| -> Vec<f64> {
                (0..width)
                    .map(|e| (values[a + 1][e] - values[a][e]) / h[a])
                    .collect()
            };
            if i == 0 {
                diag[0] = 2.0 * h[0];
                upper[0] = h[0];
                rhs[0] = slope(0).iter().map(|s| 6.0 * s).collect();
            } else if i == m - 1 {
                lower[i] = h[i - 1];
                diag[i] = 2.0 * h[i - 1];
                rhs[i] = slope(i - 1).iter().map(|s| -6.0 * s).collect();
            } else {
                lower[i] = h[i - 1];
                diag[i] = 2.0 * (h[i - 1] + h[i]);
                upper[i] = h[i];
                let (a, b) = (slope(i - 1), slope(i));
                rhs[i] = (0..width).map(|e| 6.0 * (b[e] - a[e])).collect();
            }
        }
        for i in 1..m {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            for e in 0..width {
                rhs[i][e] -= w * rhs[i - 1][e];
            }
        }
        let mut second = vec![vec![0.0; width]; m];
        for i in (0..m).rev() {
            for e in 0..width {
                let next = if i + 1 < m {
                    upper[i] * second[i + 1][e]
                } else {
                    0.0
                };
                second[i][e] = (rhs[i][e] - next) / diag[i];
            }
        }
        Spline {
            knots,
            values,
            second,
        }
    }

    fn eval(&self, s: f64) -> Vec<f64> {
        let k = &self.knots;
        if s <= k[0] {
            return self.values[0].clone();
        }
        if s >= k[k.len() - 1] {
            return self.values[k.len() - 1].clone();
        }
        let i = k.partition_point(|&x| x <= s) - 1;
        let h = k[i + 1] - k[i];
        let (t, u) = (k[i + 1] - s, s - k[i]);
        let (m0, m1) = (&self.second[i], &self.second[i + 1]);
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        (0..y0.len())
            .map(|e| {
                m0[e] * t * t * t / (6.0 * h)
                    + m1[e] * u * u * u / (6.0 * h)
                    + (y0[e] / h - m0[e] * h / 6.0) * t
                    + (y1[e] / h - m1[e] * h / 6.0) * u
            })
            .collect()
    }
}

/// `s ↦ (B₁(s), B₂(s))` sampled on `[−T, T]` and constant outside.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperatorFamily {
    n: usize,
    t: f64,
    knots: Vec<f64>,
    b1: Vec<Mat>,
    b2: Vec<Mat>,
    spline: Spline,
}

impl BlockOperatorFamily {
    /// Samples at increasing positions; the interval they span is recentred
    /// to `[−T, T]`.
    pub fn new(positions: Vec<f64>, b1: Vec<Mat>, b2: Vec<Mat>) -> Result<Self, AsymptoticError> {
        if positions.len() < 2 || b1.len() != positions.len() || b2.len() != positions.len() {
            return Err(AsymptoticError::InvalidFamily(
                "need at least two samples of both B1 and B2".into(),
            ));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) || positions.iter().any(|x| !x.is_finite())
        {
            return Err(AsymptoticError::InvalidFamily(
                "sample positions must increase strictly".into(),
            ));
        }
        let n = b1[0].nrows();
        for (i, (a, b)) in b1.iter().zip(&b2).enumerate() {
            if a.shape() != (n, n) || b.shape() != (n, n) {
                return Err(AsymptoticError::InvalidFamily(format!(
                    "sample {i} has the wrong size"
                )));
            }
            check_symmetric(a, &format!("B1 at sample {i}"))?;
            check_symmetric(b, &format!("B2 at sample {i}"))?;
        }
        let centre = (positions[0] + positions[positions.len() - 1]) / 2.0;
        let knots: Vec<f64> = positions.iter().map(|x| x - centre).collect();
        let t = knots[knots.len() - 1];
        let values = b1
            .iter()
            .zip(&b2)
            .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
            .collect();
        Ok(BlockOperatorFamily {
            n,
            t,
            spline: Spline::new(knots.clone(), values),
            knots,
            b1,
            b2,
        })
    }

    /// `B ≡ (B₁, B₂)` on `[−T, T]`.
    pub fn constant(b1: Mat, b2: Mat, t: f64) -> Result<Self, AsymptoticError> {
        Self::new(vec![-t, t], vec![b1.clone(), b1], vec![b2.clone(), b2])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn samples(&self) -> (&[Mat], &[Mat]) {
        (&self.b1, &self.b2)
    }

    /// The same family with every sample multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let sc = |v: &[Mat]| v.iter().map(|m| m * alpha).collect();
        Self::new(self.knots.clone(), sc(&self.b1), sc(&self.b2)).expect("scaling keeps validity")
    }

    pub fn at(&self, s: f64) -> (Mat, Mat) {
        let v = self.spline.eval(s);
        let nn = self.n * self.n;
        (
            Mat::from_column_slice(self.n, self.n, &v[..nn]),
            Mat::from_column_slice(self.n, self.n, &v[nn..]),
        )
    }

    /// `B(s)` on `V ⊕ V`.
    pub fn block(&self, s: f64) -> Mat {
        let (a, b) = self.at(s);
        block_b(&a, &b)
    }

    pub fn minus_end(&self) -> (Mat, Mat) {
        (self.b1[0].clone(), self.b2[0].clone())
    }

    pub fn plus_end(&self) -> (Mat, Mat) {
        (
            self.b1[self.b1.len() - 1].clone(),
            self.b2[self.b2.len() - 1].clone(),
        )
    }

    /// `max(‖B₁^±‖ + ‖B₂^±‖)`: scans must start strictly above it.
    pub fn eta0_floor(&self) -> f64 {
        let (a, b) = self.minus_end();
        let (c, d) = self.plus_end();
        (sym_norm(&a) + sym_norm(&b)).max(sym_norm(&c) + sym_norm(&d))
    }

    /// `sup_s ‖B₁(s)‖ + ‖B₂(s)‖` over the nodes an integrator with `steps`
    /// steps evaluates.
    pub fn eta1(&self, steps: usize) -> f64 {
        uniform_grid(-self.t, self.t, 2 * steps + 1)
            .iter()
            .map(|&s| {
                let (a, b) = self.at(s);
                sym_norm(&a) + sym_norm(&b)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub steps: usize,
    /// Relative tolerance for the step-halving audit.
    pub tolerance: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            steps: 4096,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// `Φ_η(T)` from the half-step run.
    pub matrix: Mat,
    /// `‖Φ_h − Φ_{h/2}‖ / (15 ‖Φ_{h/2}‖)`.
    pub richardson: f64,
}

fn rk4(fam: &BlockOperatorFamily, eta: f64, steps: usize) -> Mat {
    let dim = 2 * fam.n;
    let e = block_e(fam.n) * eta;
    let a = |s: f64| -> Mat { -(&e + fam.block(s)) };
    let h = 2.0 * fam.t / steps as f64;
    let mut phi = Mat::identity(dim, dim);
    let mut a0 = a(-fam.t);
    for k in 0..steps {
        let s = -fam.t + h * k as f64;
        let am = a(s + h / 2.0);
        let a1 = a(s + h);
        let k1 = &a0 * &phi;
        let k2 = &am * (&phi + &k1 * (h / 2.0));
        let k3 = &am * (&phi + &k2 * (h / 2.0));
        let k4 = &a1 * (&phi + &k3 * h);
        phi += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        a0 = a1;
    }
    phi
}

/// `Φ_η(T)` for `dΦ/ds + (ηE + B(s))Φ = 0`, `Φ(−T) = I`, by classical
/// fourth-order Runge–Kutta, audited against a run with half the step.
pub fn fundamental_solution(
    fam: &BlockOperatorFamily,
    eta: f64,
    opts: &IntegratorOptions,
) -> Result<Solution, AsymptoticError> {
    let coarse = rk4(fam, eta, opts.steps);
    let fine = rk4(fam, eta, 2 * opts.steps);
    let richardson = spectral_norm(&(&coarse - &fine)) / (15.0 * spectral_norm(&fine));
    if !(richardson <= opts.tolerance) {
        return Err(AsymptoticError::StepTooLarge {
            estimate: richardson,
            tolerance: opts.tolerance,
        });
    }
    Ok(Solution {
        matrix: fine,
        richardson,
    })
}

/// Partial sum of the Picard series with `terms` iterated integrals,
/// each evaluated by Simpson's rule on `steps` intervals.
pub fn picard_solution(fam: &BlockOperatorFamily, eta: f64, terms: usize, steps: usize) -> Mat {
    let dim = 2 * fam.n;
    let nodes = uniform_grid(-fam.t, fam.t, 2 * steps + 1);
    let g = nodes[1] - nodes[0];
    let e = block_e(fam.n) * eta;
    let a: Vec<Mat> = nodes.iter().map(|&s| -(&e + fam.block(s))).collect();
    let mut term: Vec<Mat> = vec![Mat::identity(dim, dim); nodes.len()];
    let mut total = Mat::identity(dim, dim);
    for _ in 0..terms {
        let f: Vec<Mat> = a.iter().zip(&term).map(|(x, y)| x * y).collect();
        let mut next = vec![Mat::zeros(dim, dim); nodes.len()];
        for j in 0..steps {
            let (i0, i1, i2) = (2 * j, 2 * j + 1, 2 * j + 2);
            let base = next[i0].clone();
            next[i1] = &base + (&f[i0] * 5.0 + &f[i1] * 8.0 - &f[i2]) * (g / 12.0);
            next[i2] = &base + (&f[i0] + &f[i1] * 4.0 + &f[i2]) * (g / 3.0);
        }
        total += &next[nodes.len() - 1];
        term = next;
    }
    total
}

/// `Π⁻_{B⁺}(η⁻¹) Φ_η(T) Π⁻_{B⁻}(η⁻¹)` in orthonormal bases of the two
/// negative eigenspaces, with `‖Φ_η(T)‖`.
pub fn composed_operator(
    fam: &BlockOperatorFamily,
    eta: f64,
    opts: &IntegratorOptions,
) -> Result<(Mat, f64), AsymptoticError> {
    let n = fam.n;
    let ends = |(b1, b2): (Mat, Mat)| split(block_e(n) * eta + block_b(&b1, &b2), 1.0 / eta);
    let (minus, plus) = (ends(fam.minus_end()), ends(fam.plus_end()));
    if minus.minus_basis.ncols() != n || plus.minus_basis.ncols() != n {
        return Err(AsymptoticError::OutOfRange(format!(
            "η = {eta} does not split the asymptotic operators evenly"
        )));
    }
    let phi = fundamental_solution(fam, eta, opts)?.matrix;
    let composed = plus.minus_basis.transpose() * &phi * &minus.minus_basis;
    Ok((composed, spectral_norm(&phi)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Grid points across the range.
    pub resolution: usize,
    pub integrator: IntegratorOptions,
    /// Relative threshold: a dip counts when `σ_n < scale · ‖Φ‖`.
    pub threshold_scale: f64,
    pub execution: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            resolution: 200,
            integrator: IntegratorOptions::default(),
            threshold_scale: 1e-6,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub eta: f64,
    /// `n`-th singular value of the composed operator.
    pub sigma: f64,
    pub threshold: f64,
}

impl ScanPoint {
    pub fn is_dip(&self) -> bool {
        self.sigma < self.threshold
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub grid: Vec<ScanPoint>,
    /// Refined minima that fell below threshold, in increasing `η`.
    pub candidates: Vec<ScanPoint>,
    pub eta0_floor: f64,
    pub eta1: f64,
}

impl ScanResult {
    pub fn within_bounds(&self, lo: f64) -> bool {
        self.candidates
            .iter()
            .all(|c| c.eta >= lo && c.eta <= self.eta1 * (1.0 + 1e-9))
    }
}

/// The composed operator's smallest singular value and threshold at `η`.
pub fn scan_point(
    fam: &BlockOperatorFamily,
    eta: f64,
    opts: &ScanOptions,
) -> Result<ScanPoint, AsymptoticError> {
    let (m, phi_norm) = composed_operator(fam, eta, &opts.integrator)?;
    let sigma = singular_values(&m).last().copied().unwrap_or(0.0);
    Ok(ScanPoint {
        eta,
        sigma,
        threshold: opts.threshold_scale * phi_norm,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_minimum(
    fam: &BlockOperatorFamily,
    mut lo: f64,
    mut hi: f64,
    opts: &ScanOptions,
) -> Result<ScanPoint, AsymptoticError> {
    let tol = 1e-12 * hi.abs().max(1.0);
    let mut c = scan_point(fam, hi - INV_PHI * (hi - lo), opts)?;
    let mut d = scan_point(fam, lo + INV_PHI * (hi - lo), opts)?;
    while hi - lo > tol {
        if c.sigma < d.sigma {
            hi = d.eta;
            d = c;
            c = scan_point(fam, hi - INV_PHI * (hi - lo), opts)?;
        } else {
            lo = c.eta;
            c = d;
            d = scan_point(fam, lo + INV_PHI * (hi - lo), opts)?;
        }
    }
    Ok(if c.sigma < d.sigma { c } else { d })
}

/// Grid scan of `[lo, hi]` followed by golden-section refinement of every
/// grid-local minimum; refined minima below threshold are candidates.
pub fn exceptional_set_scan(
    fam: &BlockOperatorFamily,
    lo: f64,
    hi: f64,
    opts: &ScanOptions,
) -> Result<ScanResult, AsymptoticError> {
    let eta0_floor = fam.eta0_floor();
    if !(lo > eta0_floor) || !(hi >= lo) {
        return Err(AsymptoticError::OutOfRange(format!(
            "scan range [{lo}, {hi}] must start above {eta0_floor}"
        )));
    }
    let etas = uniform_grid(lo, hi, opts.resolution.max(2));
    let grid = map_collect(opts.execution, &etas, |&eta| scan_point(fam, eta, opts))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let minima: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let left = i == 0 || grid[i].sigma <= grid[i - 1].sigma;
            let right = i + 1 == grid.len() || grid[i].sigma <= grid[i + 1].sigma;
            left && right
        })
        .collect();
    let refined = map_collect(opts.execution, &minima, |&i| {
        let a = etas[i.saturating_sub(1)];
        let b = etas[(i + 1).min(etas.len() - 1)];
        golden_minimum(fam, a, b, opts)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let spacing = (hi - lo) / (etas.len().max(2) - 1) as f64;
    let mut candidates: Vec<ScanPoint> = Vec::new();
    for p in refined.into_iter().filter(ScanPoint::is_dip) {
        match candidates.last() {
            Some(q) if (p.eta - q.eta).abs() < spacing / 2.0 => {}
            _ => candidates.push(p),
        }
    }
    Ok(ScanResult {
        grid,
        candidates,
        eta0_floor,
        eta1: fam.eta1(opts.integrator.steps),
    })
}

/// Candidate lists agree in length and pairwise within `tol`.
pub fn candidates_agree(a: &[ScanPoint], b: &[ScanPoint], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.eta - y.eta).abs() <= tol)
}

/// `J₀(x, y) = (−y, x)` on `ℝ^{2m}`.
pub fn standard_complex_structure(m: usize) -> Mat {
    Mat::from_fn(2 * m, 2 * m, |i, j| {
        if i >= m && j + m == i {
            1.0
        } else if i < m && j == i + m {
            -1.0
        } else {
            0.0
        }
    })
}

/// `(𝓗^{1,0}, 𝓗^{0,1}) = (½(𝓗 − J𝓗J), ½(𝓗 + J𝓗J))`.
pub fn complex_parts(h: &Mat, j: &Mat) -> (Mat, Mat) {
    let jhj = j * h * j;
    ((h - &jhj) * 0.5, (h + &jhj) * 0.5)
}

/// The block family `B₁ = 𝓗^{1,0}`, `B₂ = 𝓗^{0,1}` of a path of Hessians,
/// and the spectral parameter `2πk/λ`.
pub fn fourier_block_system(
    positions: Vec<f64>,
    hessians: &[Mat],
    k: u32,
    lambda: f64,
) -> Result<(BlockOperatorFamily, f64), AsymptoticError> {
    if k == 0 || !(lambda > 0.0 && lambda <= 1.0) {
        return Err(AsymptoticError::OutOfRange(format!(
            "need k ≥ 1 and λ ∈ (0, 1], got k = {k}, λ = {lambda}"
        )));
    }
    let dim = hessians.first().map_or(0, Mat::nrows);
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(AsymptoticError::InvalidFamily(
            "Hessians must have even size".into(),
        ));
    }
    let j = standard_complex_structure(dim / 2);
    let mut b1 = Vec::with_capacity(hessians.len());
    let mut b2 = Vec::with_capacity(hessians.len());
    for (i, h) in hessians.iter().enumerate() {
        check_symmetric(h, &format!("Hessian at sample {i}"))?;
        let (a, b) = complex_parts(h, &j);
        b1.push(a);
        b2.push(b);
    }
    let fam = BlockOperatorFamily::new(positions, b1, b2)?;
    Ok((fam, 2.0 * std::f64::consts::PI * k as f64 / lambda))
}
