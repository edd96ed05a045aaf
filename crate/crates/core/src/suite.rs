//! Seeded randomized property runs. Each instance draws from its own
//! generator, seeded from the run seed, the property and the instance
//! index, so results do not depend on how instances are scheduled.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotic::{self, ScanOptions};
use crate::filtered::{quasiequivalence_audit, DepthOptions};
use crate::io::Report;
use crate::morse::{self, BumpProfile};
use crate::novikov::{Exp, ExponentGroup, ExtRational};
use crate::par::{map_range, Execution};
use crate::quantum::Alternative;
use crate::random;
use crate::tensor::verify_product_bounds;

pub const SUITE_FORMAT: &str = "bdepth-suite";

/// One checked property on one random instance.
type Check = fn(&mut ChaCha8Rng, &DepthOptions) -> Result<(), String>;

pub struct Property {
    pub name: &'static str,
    check: Check,
    /// Instances relative to the suite's base count.
    weight: f64,
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Instances for a weight-one property.
    pub count: usize,
    pub depth: DepthOptions,
    pub execution: Execution,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            count: 50,
            depth: DepthOptions::default(),
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyOutcome {
    pub name: String,
    pub instances: usize,
    pub failures: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub seed: u64,
    pub properties: Vec<PropertyOutcome>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.failures.is_empty())
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new(SUITE_FORMAT);
        r.int("seed", self.seed as i64)
            .bool("passed", self.passed());
        for p in &self.properties {
            r.section("property")
                .str("name", &p.name)
                .int("instances", p.instances as i64)
                .int("failed", p.failures.len() as i64);
            if let Some((i, msg)) = p.failures.first() {
                r.int("first_failure", *i as i64).str("message", msg);
            }
        }
        r
    }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn morse_equivalence(rng: &mut ChaCha8Rng, _: &DepthOptions) -> Result<(), String> {
    let d = random::circle_data(rng, 10, -20, 20);
    let chain = morse::beta_chain(&d).map_err(err)?;
    let comb = morse::beta_combinatorial(&d);
    ensure(chain == comb, || {
        format!("chain {chain} vs combinatorial {comb}")
    })
}

fn periodic_oscillation(rng: &mut ChaCha8Rng, _: &DepthOptions) -> Result<(), String> {
    let copies = rng.random_range(2..=6);
    let d = random::periodic_circle_data(rng, copies, -20, 20);
    let beta = morse::beta_combinatorial(&d);
    ensure(beta == d.osc(), || format!("β {beta} vs osc {}", d.osc()))
}

fn witness_attainment(rng: &mut ChaCha8Rng, opts: &DepthOptions) -> Result<(), String> {
    let f = random::filtered_map(rng, &random::MapShape::default());
    if f.rank(opts).map_err(err)? == 0 {
        return Ok(());
    }
    let depth = f.depth(opts).map_err(err)?;
    let w = f.depth_witness(opts).map_err(err)?;
    ensure(ExtRational::Finite(w.gap) == depth, || {
        format!("witness {} vs depth {depth}", w.gap)
    })?;
    ensure(f.apply(&w.primitive) == w.boundary, || {
        "witness primitive does not map to its boundary".into()
    })
}

fn coefficient_extension(rng: &mut ChaCha8Rng, opts: &DepthOptions) -> Result<(), String> {
    let f = random::filtered_map(rng, &random::MapShape::default());
    let base = f.depth(opts).map_err(err)?;
    for denom in [2, 4] {
        let g = ExponentGroup::cyclic(Exp::new(1, denom));
        let e = f
            .extend_coefficients(g)
            .map_err(err)?
            .depth(opts)
            .map_err(err)?;
        ensure(e == base, || format!("depth {base} becomes {e} over {g}"))?;
    }
    Ok(())
}

fn shift_invariance(rng: &mut ChaCha8Rng, opts: &DepthOptions) -> Result<(), String> {
    let c = random::filtered_complex(rng, &random::ComplexShape::default());
    let (phi, map, sigma) = random::shift_isomorphism(rng, &c);
    let d = c.apply_shift_isomorphism(&phi, &map, &sigma).map_err(err)?;
    let (a, b) = (
        c.boundary_depth(opts).map_err(err)?,
        d.boundary_depth(opts).map_err(err)?,
    );
    ensure(a == b, || format!("depth {a} becomes {b}"))
}

fn quasi_equivalence(rng: &mut ChaCha8Rng, opts: &DepthOptions) -> Result<(), String> {
    let c = random::filtered_complex(rng, &random::ComplexShape::default());
    let budget = Exp::new(rng.random_range(1..=8), 2);
    let (d, q) = random::quasi_equivalent(rng, &c, budget);
    let r = quasiequivalence_audit(&c, &d, &q, opts).map_err(err)?;
    ensure(r.within_bound, || {
        format!("|{} − {}| > {}", r.depth_c, r.depth_d, r.bound)
    })
}

fn product_bounds(rng: &mut ChaCha8Rng, opts: &DepthOptions) -> Result<(), String> {
    let c = random::signed_complex(rng, 6);
    let d = random::signed_complex(rng, 6);
    let (_, r) = verify_product_bounds(&c, &d, opts).map_err(err)?;
    ensure(r.holds(), || format!("{r:?}"))
}

fn quantum_dichotomy(rng: &mut ChaCha8Rng, opts: &DepthOptions) -> Result<(), String> {
    let q = random::quantum_correction(rng, &random::CorrectionShape::default());
    for k in 0..q.base().grading().len() {
        let c = q.classify(k, opts).map_err(err)?;
        ensure(c.alternative != Alternative::Neither, || {
            format!("grading {k}: {c:?}")
        })?;
        let (r0, r) = q.rank_compare(k, opts).map_err(err)?;
        ensure(r >= r0, || {
            format!("grading {k}: rank {r} below base rank {r0}")
        })?;
    }
    Ok(())
}

fn embedding(rng: &mut ChaCha8Rng, _: &DepthOptions) -> Result<(), String> {
    let v = random::sequence(rng, 8, 10);
    let w = random::sequence(rng, 8, 10);
    let r = morse::embedding_bounds(&v, &w, &BumpProfile::standard());
    ensure(r.norm_matches && r.osc_matches, || format!("{r:?}"))
}

fn signature(rng: &mut ChaCha8Rng, _: &DepthOptions) -> Result<(), String> {
    let n = rng.random_range(1..=4);
    let (b1, b2) = random::block_pair(rng, n);
    let limit = 1.0 / (asymptotic::sym_norm(&b1) + asymptotic::sym_norm(&b2));
    let mu = limit * rng.random_range(-0.99..0.99);
    let s = asymptotic::signature_count(&b1, &b2, mu).map_err(err)?;
    ensure(
        s.positive == n && s.negative == n && s.bound_holds(),
        || format!("signature ({}, {}) at μ = {mu}", s.positive, s.negative),
    )?;
    let p = asymptotic::spectral_projections(&b1, &b2, mu).map_err(err)?;
    ensure(p.idempotency_defect() <= 1e-10, || {
        format!("idempotency defect {}", p.idempotency_defect())
    })
}

fn constant_scan(rng: &mut ChaCha8Rng, _: &DepthOptions) -> Result<(), String> {
    let n = rng.random_range(1..=2);
    let fam = random::constant_family(rng, n, 1.0);
    let mut opts = ScanOptions {
        resolution: 16,
        execution: Execution::Sequential,
        ..ScanOptions::default()
    };
    opts.integrator.steps = 1024;
    let lo = fam.eta0_floor() + 0.25;
    let r = asymptotic::exceptional_set_scan(&fam, lo, lo + 4.0, &opts).map_err(err)?;
    ensure(
        r.candidates.is_empty() && r.grid.iter().all(|p| p.sigma > 1e-3),
        || format!("{} candidates on a constant family", r.candidates.len()),
    )
}

pub fn properties() -> Vec<Property> {
    let p = |name, check: Check, weight| Property {
        name,
        check,
        weight,
    };
    vec![
        p("morse_equivalence", morse_equivalence, 4.0),
        p("periodic_oscillation", periodic_oscillation, 1.0),
        p("witness_attainment", witness_attainment, 1.0),
        p("coefficient_extension", coefficient_extension, 1.0),
        p("shift_invariance", shift_invariance, 1.0),
        p("quasi_equivalence", quasi_equivalence, 1.0),
        p("product_bounds", product_bounds, 1.0),
        p("quantum_dichotomy", quantum_dichotomy, 1.0),
        p("embedding", embedding, 2.0),
        p("signature", signature, 1.0),
        p("constant_scan", constant_scan, 0.1),
    ]
}

/// Seed of instance `i` of property `p`.
pub fn instance_seed(seed: u64, p: usize, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((p as u64) << 40) ^ i as u64
}

pub fn run_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let properties = properties()
        .iter()
        .enumerate()
        .map(|(pi, prop)| {
            let instances = ((opts.count as f64 * prop.weight).ceil() as usize).max(1);
            let results = map_range(opts.execution, instances, |i| {
                let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(opts.seed, pi, i));
                (prop.check)(&mut rng, &opts.depth)
            });
            PropertyOutcome {
                name: prop.name.to_string(),
                instances,
                failures: results
                    .into_iter()
                    .enumerate()
                    .filter_map(|(i, r)| r.err().map(|m| (i, m)))
                    .collect(),
            }
        })
        .collect();
    SuiteOutcome {
        seed: opts.seed,
        properties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let opts = SuiteOptions {
            count: 4,
            ..SuiteOptions::default()
        };
        let a = run_suite(&opts);
        assert!(a.passed(), "{}", a.report().render());
        let b = run_suite(&SuiteOptions {
            execution: Execution::Sequential,
            ..opts
        });
        assert_eq!(a.report().render(), b.report().render());
    }
}
