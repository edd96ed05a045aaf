//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Golden files live in `tests/golden/<case>/`; set `BDEPTH_BLESS=1` to
//! regenerate them from the current binary.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use bdepth::asymptotic::{self, Mat, ScanOptions};
use bdepth::filtered::{quasiequivalence_audit, DepthOptions, FilteredComplex, GradingSet};
use bdepth::io;
use bdepth::matrix::NovMatrix;
use bdepth::morse::{self, BumpProfile};
use bdepth::novikov::{Coeff, Exp, ExponentGroup, ExtRational, Novikov};
use bdepth::par::{map_range, Execution};
use bdepth::quantum::Alternative;
use bdepth::random::{self, ComplexShape, CorrectionShape, MapShape};
use bdepth::tensor::{tensor_complex, verify_product_bounds, SignedComplex};
use num_traits::{One, Signed, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fin(x: Exp) -> ExtRational {
    ExtRational::Finite(x)
}

fn int(n: i64) -> Exp {
    Exp::from_integer(n)
}

/// First failure among per-instance results, with its index.
fn first_failure(results: Vec<Result<(), String>>) -> Result<(), String> {
    match results
        .into_iter()
        .enumerate()
        .find_map(|(i, r)| r.err().map(|e| (i, e)))
    {
        Some((i, e)) => Err(format!("instance {i}: {e}")),
        None => Ok(()),
    }
}

fn within(elapsed: Duration, limit: u64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit as f64 {
        Ok(())
    } else {
        Err(format!(
            "took {:.1} s, limit {limit} s",
            elapsed.as_secs_f64()
        ))
    }
}

fn depth_of_complex(c: &FilteredComplex) -> ExtRational {
    (0..c.grading().len())
        .map(|k| common::minors_depth(&c.step_map(k)))
        .max()
        .unwrap_or(fin(Exp::zero()))
}

fn morse_equivalence() -> Verdict {
    let start = Instant::now();
    let mut r = rng(1);
    for i in 0..1000 {
        let d = random::circle_data(&mut r, 10, -20, 20);
        let chain = morse::beta_chain(&d).map_err(|e| e.to_string())?;
        let comb = morse::beta_combinatorial(&d);
        if chain != comb {
            return Err(format!(
                "instance {i}: chain {chain} vs combinatorial {comb}"
            ));
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!(
        "1000 circles agree ({:.2} s)",
        start.elapsed().as_secs_f64()
    ))
}

fn periodic_oscillation() -> Verdict {
    let mut r = rng(2);
    for m in 2..=6 {
        for i in 0..100 {
            let d = random::periodic_circle_data(&mut r, m, -20, 20);
            let chain = morse::beta_chain(&d).map_err(|e| e.to_string())?;
            let comb = morse::beta_combinatorial(&d);
            if chain != d.osc() || comb != d.osc() {
                return Err(format!(
                    "m = {m}, pattern {i}: β {chain} / {comb} vs osc {}",
                    d.osc()
                ));
            }
        }
    }
    Ok("500 periodic patterns have β = osc".into())
}

fn acceptance_maps() -> Vec<bdepth::filtered::FilteredLinearMap> {
    let mut r = rng(3);
    (0..300)
        .map(|_| random::filtered_map(&mut r, &MapShape::default()))
        .collect()
}

fn witness_attainment() -> Verdict {
    let start = Instant::now();
    let opts = DepthOptions::default();
    let maps = acceptance_maps();
    let results = map_range(Execution::Parallel, maps.len(), |i| {
        let f = &maps[i];
        let graded = random::map_complex(f)
            .boundary_depth_graded(0, &opts)
            .map_err(|e| e.to_string())?;
        let oracle = common::minors_depth(f);
        if graded != oracle {
            return Err(format!("graded depth {graded:?} vs oracle {oracle:?}"));
        }
        if common::minors_rank(f) > 0 {
            let w = f.depth_witness(&opts).map_err(|e| e.to_string())?;
            if fin(w.gap) != oracle {
                return Err(format!("witness gap {} vs oracle {oracle:?}", w.gap));
            }
            if f.apply(&w.primitive) != w.boundary {
                return Err("witness primitive does not map to its boundary".into());
            }
        }
        // the lattice only bounds the sup-inf from below when primitives are unique
        let lattice = (common::minors_rank(f) == f.source.dim())
            .then(|| common::lattice_depth(f, 3))
            .flatten();
        match lattice {
            Some(l) if fin(l) > oracle => Err(format!("lattice value {l} above depth {oracle:?}")),
            Some(l) => Ok(Some(fin(l) == oracle)),
            None => Ok(None),
        }
    });
    let mut checked = 0;
    let mut attained = 0;
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.push(r.map(|l| {
            if let Some(hit) = l {
                checked += 1;
                attained += usize::from(hit);
            }
        }));
    }
    first_failure(outcomes)?;
    within(start.elapsed(), 60)?;
    Ok(format!(
        "300 maps: witness = graded = minors oracle; lattice search reaches the depth on {attained} of {checked} injective maps and never exceeds it ({:.1} s)",
        start.elapsed().as_secs_f64()
    ))
}

fn coefficient_extension() -> Verdict {
    let opts = DepthOptions::default();
    let maps = acceptance_maps();
    let results = map_range(Execution::Parallel, maps.len(), |i| {
        let f = &maps[i];
        let base = f.depth(&opts).map_err(|e| e.to_string())?;
        for denom in [2, 4] {
            let g = ExponentGroup::cyclic(Exp::new(1, denom));
            let e = f.extend_coefficients(g).map_err(|e| e.to_string())?;
            let d = e.depth(&opts).map_err(|e| e.to_string())?;
            if d != base || common::minors_depth(&e) != base {
                return Err(format!("depth {base:?} becomes {d:?} over {g}"));
            }
        }
        Ok(())
    });
    first_failure(results)?;
    Ok("300 maps keep their depth over steps 1/2 and 1/4".into())
}

fn shift_and_quasi() -> Verdict {
    let opts = DepthOptions::default();
    let shifts = map_range(Execution::Parallel, 100, |i| {
        let mut r = rng(500 + i as u64);
        let c = random::filtered_complex(&mut r, &ComplexShape::default());
        let (phi, map, sigma) = random::shift_isomorphism(&mut r, &c);
        let d = c
            .apply_shift_isomorphism(&phi, &map, &sigma)
            .map_err(|e| e.to_string())?;
        let (a, b) = (depth_of_complex(&c), depth_of_complex(&d));
        let lib = d.boundary_depth(&opts).map_err(|e| e.to_string())?;
        if a != b || lib != b {
            return Err(format!("depth {a:?} becomes {b:?} (engine {lib:?})"));
        }
        Ok(())
    });
    first_failure(shifts)?;
    let quasi = map_range(Execution::Parallel, 100, |i| {
        let mut r = rng(700 + i as u64);
        let c = random::filtered_complex(&mut r, &ComplexShape::default());
        let budget = Exp::new(r.random_range(1..=8), 2);
        let (d, q) = random::quasi_equivalent(&mut r, &c, budget);
        for k in 0..c.grading().len() {
            for (a, b) in c.piece(k).levels.iter().zip(&d.piece(k).levels) {
                if (a - b).abs() > budget / 2 {
                    return Err(format!(
                        "level {a} moved to {b}, jitter above {}",
                        budget / 2
                    ));
                }
            }
        }
        let audit = quasiequivalence_audit(&c, &d, &q, &opts).map_err(|e| e.to_string())?;
        let (a, b) = (depth_of_complex(&c), depth_of_complex(&d));
        let (Some(a), Some(b)) = (a.finite(), b.finite()) else {
            return Err("infinite depth".into());
        };
        if (a - b).abs() > budget || !audit.within_bound {
            return Err(format!("|{a} − {b}| > {budget}"));
        }
        Ok(())
    });
    first_failure(quasi)?;
    Ok(
        "100 shift-isomorphisms preserve depth; 100 quasi-equivalent pairs move it by at most c"
            .into(),
    )
}

/// `∂w = x` with `ℓ(x) = 0`, `ℓ(w) = gap`.
fn pair(gap: Exp, w: &str, x: &str) -> SignedComplex {
    let g = ExponentGroup::integers();
    let mut d1 = NovMatrix::zeros(g, 1, 1);
    d1.set(0, 0, Novikov::one(g));
    let pieces = vec![
        vec![(x.to_string(), Exp::zero())],
        vec![(w.to_string(), gap)],
    ];
    let c = FilteredComplex::new(
        GradingSet::two_term(),
        g,
        pieces,
        vec![NovMatrix::zeros(g, 1, 1), d1],
    )
    .expect("pair complex");
    SignedComplex::from_two_term(c).expect("two-term")
}

/// Gaps of all pairs and homology dimension of a complex, from minors.
fn pair_structure(c: &FilteredComplex) -> (Vec<Exp>, usize) {
    let mut gaps = Vec::new();
    let mut rank = 0;
    for k in 0..c.grading().len() {
        let inv = common::invariant_factors(&c.step_map(k));
        rank += inv.len();
        gaps.extend(inv);
    }
    (gaps, c.total_dim() - 2 * rank)
}

fn product_bounds() -> Verdict {
    let opts = DepthOptions::default();
    let results = map_range(Execution::Parallel, 300, |i| {
        let mut r = rng(900 + i as u64);
        let c = random::signed_complex(&mut r, 6);
        let d = random::signed_complex(&mut r, 6);
        let (product, rep) = verify_product_bounds(&c, &d, &opts).map_err(|e| e.to_string())?;
        if product.complex().total_dim() > 36 {
            return Err("product larger than 36".into());
        }
        if !rep.holds() {
            return Err(format!("{rep:?}"));
        }
        // split both factors into pairs and homology; the product is the sum
        // of pair⊗pair (depth min), pair⊗homology (depth of the pair) pieces
        let (gc, hc) = pair_structure(c.complex());
        let (gd, hd) = pair_structure(d.complex());
        let mut expected = Exp::zero();
        for a in &gc {
            for b in &gd {
                expected = expected.max(*a.min(b));
            }
            if hd > 0 {
                expected = expected.max(*a);
            }
        }
        if hc > 0 {
            expected = gd.iter().copied().fold(expected, Exp::max);
        }
        let (bc, bd) = (depth_of_complex(c.complex()), depth_of_complex(d.complex()));
        if rep.depth_product != fin(expected) || rep.depth_c != bc || rep.depth_d != bd {
            return Err(format!(
                "product depth {:?}, decomposition gives {expected}",
                rep.depth_product
            ));
        }
        let bp = fin(expected);
        let bound_a = bp >= bc.min(bd);
        let bound_b = (hd == 0 || bp >= bc) && (hc == 0 || bp >= bd);
        if !(bound_a && bound_b) {
            return Err(format!(
                "bounds fail: b(C) {bc:?}, b(D) {bd:?}, b(C⊗D) {bp:?}"
            ));
        }
        Ok(())
    });
    first_failure(results)?;
    let mut examples = 0;
    for (a, b) in [
        (int(2), int(3)),
        (int(5), int(1)),
        (int(4), int(4)),
        (Exp::new(1, 2), int(7)),
        (int(0), int(6)),
    ] {
        let (c, d) = (pair(a, "w", "x"), pair(b, "v", "y"));
        let p = tensor_complex(&c, &d).map_err(|e| e.to_string())?;
        let oracle = depth_of_complex(p.complex());
        if oracle != fin(a.min(b)) {
            return Err(format!("pairs {a}, {b}: product depth {oracle:?}"));
        }
        examples += 1;
    }
    Ok(format!("300 random products satisfy both bounds; {examples} two-pair products have depth min(a, b)"))
}

fn rational_rank(rows: &[Vec<Coeff>]) -> usize {
    let mut m: Vec<Vec<Coeff>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for j in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][j].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][j].is_zero() {
                let f = &m[i][j] / &m[rank][j];
                let pivot = m[rank].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn quantum_dichotomy() -> Verdict {
    let opts = DepthOptions::default();
    let results = map_range(Execution::Parallel, 300, |i| {
        let mut r = rng(1300 + i as u64);
        let q = random::quantum_correction(&mut r, &CorrectionShape::default());
        let g = q.base().grading();
        let n = g.len();
        let def = q.deformed();
        let rank: Vec<usize> = (0..n)
            .map(|k| common::minors_rank(&def.step_map(k)))
            .collect();
        let base_rank: Vec<usize> = (0..n)
            .map(|k| rational_rank(&q.base_matrix(g.succ(k))))
            .collect();
        for k in 0..n {
            if base_rank[k] > rank[k] {
                return Err(format!(
                    "grading {k}: rank {} below base rank {}",
                    rank[k], base_rank[k]
                ));
            }
            if q.rank_compare(k, &opts).map_err(|e| e.to_string())? != (base_rank[k], rank[k]) {
                return Err(format!(
                    "grading {k}: engine ranks disagree with the oracle"
                ));
            }
        }
        for k in 0..n {
            let below = g.pred(k);
            let depth = common::minors_depth(&def.step_map(k));
            let depth_below = common::minors_depth(&def.step_map(below));
            let homology = def.piece(k).dim() - rank[k] - rank[below];
            let base_homology = q.base().piece(k).dim() - base_rank[k] - base_rank[below];
            let zero = fin(Exp::zero());
            let preserved = depth == zero && depth_below == zero && homology == base_homology;
            let lost = (depth >= fin(q.gap()[k]) || depth_below >= fin(q.gap()[below]))
                && homology < base_homology;
            if preserved == lost {
                return Err(format!("grading {k}: neither alternative (depth {depth:?}, homology {homology} of {base_homology})"));
            }
            let verdict = q.classify(k, &opts).map_err(|e| e.to_string())?.alternative;
            let expected = if preserved {
                Alternative::Preserved
            } else {
                Alternative::Lost
            };
            if verdict != expected {
                return Err(format!(
                    "grading {k}: engine says {verdict:?}, oracle {expected:?}"
                ));
            }
        }
        Ok(())
    });
    first_failure(results)?;
    Ok("300 corrections: exactly one alternative holds and rank never drops".into())
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(m: &Mat) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)]).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn signature_grid() -> Verdict {
    let start = Instant::now();
    let mut r = rng(8);
    let mut worst_defect: f64 = 0.0;
    for i in 0..50 {
        let n = r.random_range(1..=4);
        let (b1, b2) = random::block_pair(&mut r, n);
        let norm = asymptotic::sym_norm(&b1) + asymptotic::sym_norm(&b2);
        for j in 0..100 {
            let mu = (-0.99 + 1.98 * j as f64 / 99.0) / norm;
            let s = asymptotic::signature_count(&b1, &b2, mu).map_err(|e| e.to_string())?;
            let m = asymptotic::block_e(n) + asymptotic::block_b(&b1, &b2) * mu;
            let eig = jacobi_eigenvalues(&m);
            let pos = eig.iter().filter(|&&x| x > 0.0).count();
            let neg = eig.iter().filter(|&&x| x < 0.0).count();
            let bound = 1.0 - mu.abs() * norm;
            let smallest = eig.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            if (pos, neg) != (n, n) || (s.positive, s.negative) != (n, n) {
                return Err(format!("pair {i}, μ = {mu}: signature ({pos}, {neg})"));
            }
            if smallest < bound - 1e-10 || !s.bound_holds() {
                return Err(format!(
                    "pair {i}, μ = {mu}: |λ| = {smallest} below {bound}"
                ));
            }
            let p = asymptotic::spectral_projections(&b1, &b2, mu).map_err(|e| e.to_string())?;
            for proj in [&p.plus, &p.minus] {
                let defect = asymptotic::spectral_norm(&(proj * proj - proj));
                worst_defect = worst_defect.max(defect);
            }
        }
    }
    if worst_defect > 1e-10 {
        return Err(format!("idempotency defect {worst_defect:e}"));
    }
    within(start.elapsed(), 30)?;
    Ok(format!(
        "5000 grid points have signature (n, n) above the eigenvalue bound; idempotency defect ≤ {worst_defect:.1e} ({:.2} s)",
        start.elapsed().as_secs_f64()
    ))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn asymptotic_numerics() -> Verdict {
    let mut r = rng(9);
    let integ = asymptotic::IntegratorOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = r.random_range(1..=2);
        let fam = random::block_family(&mut r, n, 1.0, 9, 1.8);
        for eta in [0.0, 0.5] {
            let a = asymptotic::fundamental_solution(&fam, eta, &integ)
                .map_err(|e| e.to_string())?
                .matrix;
            let b = asymptotic::picard_solution(&fam, eta, 30, 2000);
            worst = worst.max(asymptotic::spectral_norm(&(a - b)));
        }
    }
    if worst > 1e-8 {
        return Err(format!("integrator and Picard series differ by {worst:e}"));
    }
    let scan = |fam: &asymptotic::BlockOperatorFamily, lo: f64, hi: f64, resolution: usize| {
        let opts = ScanOptions {
            resolution,
            ..ScanOptions::default()
        };
        asymptotic::exceptional_set_scan(fam, lo, hi, &opts).map_err(|e| e.to_string())
    };
    for i in 0..6 {
        let n = r.random_range(1..=2);
        let fam = random::constant_family(&mut r, n, 1.0);
        let lo = fam.eta0_floor() + 0.25;
        let res = scan(&fam, lo, lo + 4.0, 24)?;
        let low = res
            .grid
            .iter()
            .map(|p| p.sigma)
            .fold(f64::INFINITY, f64::min);
        if !res.candidates.is_empty() || low <= 1e-3 {
            return Err(format!(
                "constant family {i}: {} candidates, smallest σ_n {low:e}",
                res.candidates.len()
            ));
        }
    }
    let crossing = io::parse_family(
        &io::read_text(&data("family_crossing.csv")).map_err(|e| e.to_string())?,
        "crossing",
    )
    .map_err(|e| e.to_string())?;
    let mut families = vec![(crossing, 0.25, 3.0)];
    for _ in 0..3 {
        let fam = random::block_family(&mut r, 2, 1.0, 9, 1.5);
        let lo = fam.eta0_floor() + 0.1;
        families.push((fam, lo, lo + 3.0));
    }
    let mut found = 0;
    for (i, (fam, lo, hi)) in families.iter().enumerate() {
        let coarse = scan(fam, *lo, *hi, 30)?;
        let fine = scan(fam, *lo, *hi, 60)?;
        for res in [&coarse, &fine] {
            if !res.within_bounds(*lo) || *lo <= res.eta0_floor {
                return Err(format!(
                    "family {i}: candidate outside [{lo}, {}]",
                    res.eta1
                ));
            }
        }
        if !asymptotic::candidates_agree(&coarse.candidates, &fine.candidates, 1e-6) {
            return Err(format!(
                "family {i}: {} candidates at resolution 30, {} at 60",
                coarse.candidates.len(),
                fine.candidates.len()
            ));
        }
        found += fine.candidates.len();
    }
    if families[0].0.dim() != 2 || found == 0 {
        return Err("the engineered crossing was not detected".into());
    }
    Ok(format!(
        "Picard gap {worst:.1e}; constant families have no candidates; {found} candidates stable under doubling and within bounds"
    ))
}

/// `f_u` on the dyadic grid of `stacked_bumps`, evaluated from the profile knots.
fn bump_values(u: &[Exp], knots: &[Exp]) -> Vec<Exp> {
    let segments = (knots.len() - 1) as i64;
    let bits = u.len() as u32 + segments.trailing_zeros();
    let n = 1i64 << bits;
    let g = |x: Exp| -> Exp {
        if x <= Exp::zero() || x >= Exp::one() {
            return Exp::zero();
        }
        let pos = x * segments;
        let k = pos.floor().to_integer() as usize;
        knots[k] + (knots[k + 1] - knots[k]) * (pos - pos.floor())
    };
    (0..=n)
        .map(|j| {
            let s = Exp::new(j, n);
            u.iter()
                .enumerate()
                .map(|(i, x)| {
                    let width = Exp::new(1, 1 << (i + 1));
                    let left = Exp::one() - width * 2;
                    *x * g((s - left) / width)
                })
                .fold(Exp::zero(), |a, b| a + b)
        })
        .collect()
}

fn embedding_arithmetic() -> Verdict {
    let mut r = rng(10);
    let knots = BumpProfile::standard().knots().to_vec();
    for i in 0..100 {
        let v = random::sequence(&mut r, 8, 10);
        let w = random::sequence(&mut r, 8, 10);
        let len = v.len().max(w.len());
        let at = |x: &[Exp], k: usize| x.get(k).copied().unwrap_or_else(Exp::zero);
        let u: Vec<Exp> = (0..len).map(|k| at(&v, k) - at(&w, k)).collect();
        let neg: Vec<Exp> = u.iter().map(|x| -x).collect();
        let norm = u.iter().map(|x| x.abs()).fold(Exp::zero(), Exp::max);
        let osc = u.iter().copied().fold(Exp::zero(), Exp::max)
            - u.iter().copied().fold(Exp::zero(), Exp::min);
        let min = |f: Vec<Exp>| f.into_iter().fold(Exp::zero(), Exp::min);
        let fu = bump_values(&u, &knots);
        let osc_f = fu.iter().copied().fold(Exp::zero(), Exp::max)
            - fu.iter().copied().fold(Exp::zero(), Exp::min);
        let side = (-min(fu.clone())).max(-min(bump_values(&neg, &knots)));
        let e = morse::embedding_bounds(&v, &w, &BumpProfile::standard());
        if side != norm
            || osc_f != osc
            || !e.norm_matches
            || !e.osc_matches
            || e.sup_norm != norm
            || e.osc != osc
        {
            return Err(format!(
                "instance {i}: ‖v − w‖ = {norm}, osc = {osc}, function side {side}, {osc_f}"
            ));
        }
    }
    Ok("100 pairs: sup norm and oscillation read off the stacked bumps".into())
}

struct Case {
    name: &'static str,
    args: Vec<String>,
}

fn cases() -> Vec<Case> {
    let d = |n: &str| data(n).display().to_string();
    let case = |name, args: &[String]| Case {
        name,
        args: args.to_vec(),
    };
    let s = |x: &str| x.to_string();
    vec![
        case("depth_pair", &[s("depth"), d("pair.toml")]),
        case("morse_m1", &[s("morse"), d("circle_m1.toml")]),
        case("morse_m2", &[s("morse"), d("circle_m2.toml")]),
        case("morse_embedding", &[s("morse"), d("embedding.toml")]),
        case("morse_samples", &[s("morse"), d("samples.csv")]),
        case(
            "tensor_pairs",
            &[s("tensor"), d("pair.toml"), d("pair_b.toml")],
        ),
        case("qc", &[s("qc"), d("correction.toml")]),
        case(
            "scan_crossing",
            &[
                s("scan"),
                d("family_crossing.csv"),
                s("--lo"),
                s("0.25"),
                s("--hi"),
                s("3"),
                s("--resolution"),
                s("60"),
            ],
        ),
        case(
            "scan_constant",
            &[
                s("scan"),
                d("family_constant.csv"),
                s("--lo"),
                s("1.5"),
                s("--hi"),
                s("4"),
                s("--resolution"),
                s("30"),
            ],
        ),
        case(
            "suite",
            &[s("suite"), s("--seed"), s("0"), s("--count"), s("5")],
        ),
    ]
}

fn run_case(case: &Case, out: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let _ = std::fs::remove_dir_all(out);
    let status = Command::new(env!("CARGO_BIN_EXE_bdepth"))
        .args(&case.args)
        .arg("--out")
        .arg(out)
        .env_clear()
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{}: exit status {status}", case.name));
    }
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(out).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        files.insert(
            name,
            std::fs::read(entry.path()).map_err(|e| e.to_string())?,
        );
    }
    Ok(files)
}

fn read_dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    if let Ok(entries) = std::fs::read_dir(dir) {
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Ok(bytes) = std::fs::read(entry.path()) {
                files.insert(name, bytes);
            }
        }
    }
    files
}

fn cli_determinism() -> Verdict {
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let golden_root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("BDEPTH_BLESS").is_some_and(|v| v == "1");
    let mut files = 0;
    for case in cases() {
        let first = run_case(&case, &tmp.join("first").join(case.name))?;
        let second = run_case(&case, &tmp.join("second").join(case.name))?;
        if first != second {
            return Err(format!("{}: two runs differ", case.name));
        }
        for (name, bytes) in &first {
            let text = String::from_utf8_lossy(bytes);
            let header = text.lines().next().unwrap_or_default();
            if !(header.starts_with("format = \"bdepth-") || header.starts_with("# bdepth-")) {
                return Err(format!("{}/{name}: no version header", case.name));
            }
        }
        let golden = golden_root.join(case.name);
        if bless {
            let _ = std::fs::remove_dir_all(&golden);
            std::fs::create_dir_all(&golden).map_err(|e| e.to_string())?;
            for (name, bytes) in &first {
                std::fs::write(golden.join(name), bytes).map_err(|e| e.to_string())?;
            }
        } else if read_dir_files(&golden) != first {
            return Err(format!(
                "{}: output differs from tests/golden/{}",
                case.name, case.name
            ));
        }
        files += first.len();
    }
    let report = |case: &str, file: &str| -> String {
        String::from_utf8_lossy(&read_dir_files(&golden_root.join(case))[file]).into_owned()
    };
    if !report("depth_pair", "depth.toml").contains("depth = \"3\"") {
        return Err("depth of the single pair is not its gap".into());
    }
    if !report("morse_m1", "morse.toml").contains("beta = \"0\"") {
        return Err("one maximum does not give depth 0".into());
    }
    if !report("suite", "suite.toml").contains("passed = true") {
        return Err("seeded suite did not pass".into());
    }
    let canonical = report("morse_m2", "complex.toml");
    let again =
        io::serialize_complex(&io::parse_complex(&canonical, "golden").map_err(|e| e.to_string())?);
    if again != canonical {
        return Err("m = 2 circle complex does not round-trip".into());
    }
    Ok(format!(
        "{files} files across {} cases identical across runs and to the goldens",
        cases().len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        (
            "Morse chain depth equals the combinatorial formula",
            morse_equivalence,
        ),
        (
            "periodic data has depth equal to the oscillation",
            periodic_oscillation,
        ),
        ("witnesses attain the depth", witness_attainment),
        (
            "depth survives coefficient extension",
            coefficient_extension,
        ),
        ("shift and quasi-equivalence invariance", shift_and_quasi),
        ("tensor product bounds", product_bounds),
        ("quantum correction dichotomy", quantum_dichotomy),
        ("asymptotic signature", signature_grid),
        ("asymptotic numerics", asymptotic_numerics),
        ("embedding arithmetic", embedding_arithmetic),
        ("command-line determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
