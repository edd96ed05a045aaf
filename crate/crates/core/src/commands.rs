//! The operations behind each command-line subcommand: input text in,
//! report and artifacts out. Nothing here touches the file system.

use thiserror::Error;

use crate::asymptotic::{self, ScanOptions};
use crate::filtered::{Chain, DepthOptions, FilteredComplex, FilteredVectorSpace};
use crate::io::{self, IoError, Report};
use crate::morse::{self, BumpProfile, CircleMorseData};
use crate::quantum::Alternative;
use crate::suite::{self, SuiteOptions};
use crate::tensor::{self, SignedComplex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Compute(String),
}

impl CommandError {
    /// 1 for invariant failures, 2 for unreadable or malformed input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Io(IoError::Invariant { .. }) | CommandError::Compute(_) => 1,
            CommandError::Io(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CommandError::Io(IoError::Parse { .. }) => "parse",
            CommandError::Io(IoError::File { .. }) => "file",
            CommandError::Io(IoError::Invariant { .. }) => "invariant",
            CommandError::Compute(_) => "computation",
        }
    }

    /// Machine-readable failure record.
    pub fn record(&self, command: &str, seed: u64) -> Report {
        let mut r = Report::new("bdepth-failure");
        r.str("command", command)
            .int("seed", seed as i64)
            .str("kind", self.kind())
            .int("exit_code", self.exit_code().into())
            .str("message", self);
        r
    }
}

fn compute(e: impl std::fmt::Display) -> CommandError {
    CommandError::Compute(e.to_string())
}

/// A report, extra files to write next to it, and whether every checked
/// invariant held.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<(String, String)>,
    pub passed: bool,
}

impl Outcome {
    fn passed(report: Report) -> Self {
        Outcome {
            report,
            artifacts: Vec::new(),
            passed: true,
        }
    }
}

fn chain_terms(space: &FilteredVectorSpace, chain: &Chain) -> Vec<String> {
    space
        .names
        .iter()
        .zip(chain)
        .filter(|(_, x)| !x.is_zero())
        .map(|(n, x)| format!("{n}: {x}"))
        .collect()
}

/// Boundary depth, per-grading depths and a witness for the deepest grading.
pub fn depth(
    text: &str,
    origin: &str,
    seed: u64,
    opts: &DepthOptions,
) -> Result<Outcome, CommandError> {
    let c = io::parse_complex(text, origin)?;
    depth_of(&c, seed, opts)
}

pub fn depth_of(
    c: &FilteredComplex,
    seed: u64,
    opts: &DepthOptions,
) -> Result<Outcome, CommandError> {
    let graded = c.graded_depths(opts).map_err(compute)?;
    let b = c.boundary_depth(opts).map_err(compute)?;
    let homology = c.homology_dims(opts).map_err(compute)?;
    let mut r = Report::new("bdepth-depth");
    r.int("seed", seed as i64).str("depth", b);
    let g = c.grading();
    for k in 0..g.len() {
        r.section("grading")
            .str("label", g.label(k))
            .str("depth", graded[k])
            .int("homology", homology[k] as i64);
    }
    let deepest = (0..g.len())
        .filter(|&k| graded[k] == b)
        .find(|&k| c.step_map(k).rank(opts).is_ok_and(|r| r > 0));
    if let Some(k) = deepest {
        let m = c.step_map(k);
        let w = m.depth_witness(opts).map_err(compute)?;
        r.section("witness")
            .str("grading", g.label(k))
            .str("gap", w.gap)
            .list("boundary", chain_terms(&m.target, &w.boundary))
            .list("primitive", chain_terms(&m.source, &w.primitive));
    }
    Ok(Outcome::passed(r))
}

fn circle_report(
    values: Vec<crate::novikov::Exp>,
    origin: &str,
    seed: u64,
) -> Result<Outcome, CommandError> {
    let d = CircleMorseData::new(values).map_err(|e| IoError::Invariant {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    let chain = morse::beta_chain(&d).map_err(compute)?;
    let comb = morse::beta_combinatorial(&d);
    let mut r = Report::new("bdepth-morse");
    r.int("seed", seed as i64)
        .str("input", "circle")
        .int("m", d.m() as i64)
        .str("beta", chain)
        .str("beta_combinatorial", comb)
        .str("osc", d.osc())
        .bool("agree", chain == comb);
    if let Some(q) = morse::best_quadruple(&d.maxima(), &d.minima()) {
        r.section("quadruple")
            .ints("indices", q.indices)
            .str("score", q.score);
    }
    Ok(Outcome {
        report: r,
        artifacts: vec![(
            "complex.toml".into(),
            io::serialize_complex(&morse::morse_complex(&d)),
        )],
        passed: chain == comb,
    })
}

/// Circle data, sampled values or an embedding pair, told apart by format.
pub fn morse(text: &str, origin: &str, seed: u64) -> Result<Outcome, CommandError> {
    match io::sniff_format(text).as_deref() {
        Some(io::CIRCLE_FORMAT) => circle_report(io::parse_circle(text, origin)?, origin, seed),
        Some(io::EMBEDDING_FORMAT) => {
            let (v, w) = io::parse_embedding(text, origin)?;
            let e = morse::embedding_bounds(&v, &w, &BumpProfile::standard());
            let mut r = Report::new("bdepth-morse");
            r.int("seed", seed as i64)
                .str("input", "embedding")
                .str("sup_norm", e.sup_norm)
                .str("osc", e.osc)
                .str("neg_min_forward", e.neg_min_forward)
                .str("neg_min_backward", e.neg_min_backward)
                .str("osc_function", e.osc_function)
                .str("mm", e.mm)
                .bool("norm_matches", e.norm_matches)
                .bool("osc_matches", e.osc_matches);
            Ok(Outcome {
                passed: e.norm_matches && e.osc_matches,
                ..Outcome::passed(r)
            })
        }
        Some(other) => Err(IoError::Parse {
            origin: origin.to_string(),
            line: 1,
            column: 1,
            message: format!("format `{other}` is not Morse input"),
        }
        .into()),
        None => {
            let samples = io::parse_samples(text, origin)?;
            let beta = morse::beta_continuous(&samples).map_err(compute)?;
            let (maxima, minima) = morse::cyclic_extrema(&samples);
            let mut r = Report::new("bdepth-morse");
            r.int("seed", seed as i64)
                .str("input", "samples")
                .int("samples", samples.len() as i64)
                .int("maxima", maxima.len() as i64)
                .int("minima", minima.len() as i64)
                .str("beta", beta);
            if let Some(mm) = morse::mm_circle(&samples) {
                r.str("mm", mm);
            }
            Ok(Outcome::passed(r))
        }
    }
}

/// A two-graded complex carries its grading as parity; others have none.
pub fn signed(c: FilteredComplex) -> SignedComplex {
    if c.grading().len() == 2 {
        SignedComplex::from_two_term(c.clone()).unwrap_or_else(|_| SignedComplex::unsigned(c))
    } else {
        SignedComplex::unsigned(c)
    }
}

/// Product complex and the lower bounds on its depth.
pub fn tensor(
    left: (&str, &str),
    right: (&str, &str),
    seed: u64,
    opts: &DepthOptions,
) -> Result<Outcome, CommandError> {
    let c = signed(io::parse_complex(left.0, left.1)?);
    let d = signed(io::parse_complex(right.0, right.1)?);
    let (product, rep) = tensor::verify_product_bounds(&c, &d, opts).map_err(compute)?;
    let mut r = Report::new("bdepth-tensor");
    let opt = |b: Option<bool>| b.map_or("unchecked".to_string(), |b| b.to_string());
    r.int("seed", seed as i64)
        .str("depth_left", rep.depth_c)
        .str("depth_right", rep.depth_d)
        .str("depth_product", rep.depth_product)
        .int("homology_left", rep.homology_c as i64)
        .int("homology_right", rep.homology_d as i64)
        .bool("min_bound", rep.min_bound)
        .str("left_bound", opt(rep.left_bound))
        .str("right_bound", opt(rep.right_bound))
        .bool("holds", rep.holds());
    Ok(Outcome {
        report: r,
        artifacts: vec![(
            "product.toml".into(),
            io::serialize_complex(product.complex()),
        )],
        passed: rep.holds(),
    })
}

/// Which alternative holds at every grading.
pub fn qc(
    text: &str,
    origin: &str,
    seed: u64,
    opts: &DepthOptions,
) -> Result<Outcome, CommandError> {
    let q = io::parse_correction(text, origin)?;
    let mut r = Report::new("bdepth-qc");
    r.int("seed", seed as i64);
    let g = q.base().grading();
    let mut passed = true;
    for k in 0..g.len() {
        let c = q.classify(k, opts).map_err(compute)?;
        let (r0, r1) = q.rank_compare(k, opts).map_err(compute)?;
        let verdict = match c.alternative {
            Alternative::Preserved => "preserved",
            Alternative::Lost => "lost",
            Alternative::Neither => "neither",
        };
        passed &= c.alternative != Alternative::Neither && r1 >= r0;
        r.section("grading")
            .str("label", g.label(k))
            .str("verdict", verdict)
            .str("depth", c.depth)
            .str("depth_below", c.depth_below)
            .str("gap", c.gap)
            .str("gap_below", c.gap_below)
            .int("homology", c.homology as i64)
            .int("base_homology", c.base_homology as i64)
            .int("base_rank", r0 as i64)
            .int("rank", r1 as i64);
    }
    Ok(Outcome {
        passed,
        ..Outcome::passed(r)
    })
}

/// Exceptional-set scan of `[lo, hi]`; the CSV is the artifact.
pub fn scan(
    text: &str,
    origin: &str,
    range: (f64, f64),
    seed: u64,
    opts: &ScanOptions,
) -> Result<Outcome, CommandError> {
    let fam = io::parse_family(text, origin)?;
    let res = asymptotic::exceptional_set_scan(&fam, range.0, range.1, opts).map_err(compute)?;
    let mut r = Report::new("bdepth-scan-summary");
    r.int("seed", seed as i64)
        .int("n", fam.dim() as i64)
        .str("t", format!("{:.12e}", fam.t()))
        .str("eta0_floor", format!("{:.12e}", res.eta0_floor))
        .str("eta1", format!("{:.12e}", res.eta1))
        .int("resolution", opts.resolution as i64)
        .int("candidates", res.candidates.len() as i64)
        .list(
            "candidate_eta",
            res.candidates.iter().map(|p| format!("{:.12e}", p.eta)),
        )
        .bool("within_bounds", res.within_bounds(range.0));
    Ok(Outcome {
        report: r,
        artifacts: vec![("scan.csv".into(), io::serialize_scan(&res, Some(seed)))],
        passed: res.within_bounds(range.0),
    })
}

pub fn suite(opts: &SuiteOptions) -> Outcome {
    let out = suite::run_suite(opts);
    Outcome {
        report: out.report(),
        artifacts: Vec::new(),
        passed: out.passed(),
    }
}
