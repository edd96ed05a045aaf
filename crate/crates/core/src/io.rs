//! Text formats: TOML for complexes, corrections and circle data, CSV for
//! sampled functions, operator families and scans. Every file carries a
//! format name and version; writers emit one canonical layout so that
//! reading and rewriting a canonical file reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::asymptotic::{BlockOperatorFamily, Mat, ScanResult};
use crate::filtered::{FilteredComplex, FilteredError, GradingSet};
use crate::matrix::NovMatrix;
use crate::novikov::{parse_exp, Exp, ExponentGroup, Novikov};
use crate::quantum::{QuantumCorrection, QuantumError};

pub const COMPLEX_FORMAT: &str = "bdepth-complex";
pub const CORRECTION_FORMAT: &str = "bdepth-correction";
pub const CIRCLE_FORMAT: &str = "bdepth-circle";
pub const EMBEDDING_FORMAT: &str = "bdepth-embedding";
pub const VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: invariant violated: {message}")]
    Invariant { origin: String, message: String },
    #[error("{origin}: {message}")]
    File { origin: String, message: String },
}

impl IoError {
    fn file(origin: &str, e: impl std::fmt::Display) -> Self {
        IoError::File {
            origin: origin.to_string(),
            message: e.to_string(),
        }
    }

    fn invariant(origin: &str, e: impl std::fmt::Display) -> Self {
        IoError::Invariant {
            origin: origin.to_string(),
            message: e.to_string(),
        }
    }
}

/// 1-based line and column of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.chars().count(), |i| before[i + 1..].chars().count())
        + 1;
    (line, column)
}

struct Source<'a> {
    origin: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn err_at(&self, offset: usize, message: impl Into<String>) -> IoError {
        let (line, column) = position(self.text, offset);
        IoError::Parse {
            origin: self.origin.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn err_span<T>(&self, s: &Spanned<T>, message: impl Into<String>) -> IoError {
        self.err_at(s.span().start, message)
    }

    fn toml<T: for<'de> Deserialize<'de>>(&self) -> Result<T, IoError> {
        toml::from_str(self.text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            self.err_at(offset, e.message().to_string())
        })
    }

    fn header(
        &self,
        format: &Spanned<String>,
        version: &Spanned<i64>,
        expected: &str,
    ) -> Result<(), IoError> {
        if format.get_ref() != expected {
            return Err(self.err_span(format, format!("expected format `{expected}`")));
        }
        if *version.get_ref() != VERSION {
            return Err(self.err_span(version, format!("unsupported version, expected {VERSION}")));
        }
        Ok(())
    }

    fn exp(&self, s: &Spanned<String>) -> Result<Exp, IoError> {
        parse_exp(s.get_ref())
            .ok_or_else(|| self.err_span(s, format!("bad rational `{}`", s.get_ref())))
    }

    fn group(&self, s: &Spanned<String>) -> Result<ExponentGroup, IoError> {
        let step = self.exp(s)?;
        if step < Exp::from_integer(0) {
            return Err(self.err_span(s, "group step must be nonnegative"));
        }
        Ok(ExponentGroup::cyclic(step))
    }

    fn novikov(&self, group: ExponentGroup, s: &Spanned<String>) -> Result<Novikov, IoError> {
        Novikov::parse(group, s.get_ref()).map_err(|e| match e {
            crate::novikov::NovikovError::Parse { column, message } => {
                // the value sits after its opening quote
                self.err_at(s.span().start + 1 + column.saturating_sub(1), message)
            }
            other => self.err_span(s, other.to_string()),
        })
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::file(&path.display().to_string(), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| IoError::file(&dir.display().to_string(), e))?;
    }
    std::fs::write(path, text).map_err(|e| IoError::file(&path.display().to_string(), e))
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn group_text(g: ExponentGroup) -> String {
    if g.is_trivial() {
        "0".into()
    } else {
        g.step().to_string()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRec {
    name: Spanned<String>,
    level: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GradingRec {
    label: Spanned<String>,
    succ: Spanned<String>,
    #[serde(default)]
    generators: Vec<GeneratorRec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRec {
    source: Spanned<String>,
    target: Spanned<String>,
    value: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexFile {
    format: Spanned<String>,
    version: Spanned<i64>,
    group: Spanned<String>,
    grading: Vec<GradingRec>,
    #[serde(default)]
    differential: Vec<EntryRec>,
}

fn grading_set(
    src: &Source,
    recs: &[(&Spanned<String>, &Spanned<String>)],
) -> Result<GradingSet, IoError> {
    let labels: Vec<String> = recs.iter().map(|(l, _)| l.get_ref().clone()).collect();
    let mut succ = Vec::with_capacity(recs.len());
    for (_, s) in recs {
        let k = labels
            .iter()
            .position(|l| l == s.get_ref())
            .ok_or_else(|| src.err_span(s, format!("unknown grading `{}`", s.get_ref())))?;
        succ.push(k);
    }
    GradingSet::new(labels, succ).map_err(|e| src.err_span(recs[0].0, e.to_string()))
}

/// Places `entries` into per-grading differential matrices, checking that
/// each maps a generator of grading `k` into grading `pred(k)`.
fn differential(
    src: &Source,
    grading: &GradingSet,
    group: ExponentGroup,
    names: &[Vec<String>],
    entries: &[EntryRec],
) -> Result<Vec<NovMatrix>, IoError> {
    let n = grading.len();
    let mut d: Vec<NovMatrix> = (0..n)
        .map(|k| NovMatrix::zeros(group, names[grading.pred(k)].len(), names[k].len()))
        .collect();
    let find = |s: &Spanned<String>| -> Result<(usize, usize), IoError> {
        names
            .iter()
            .enumerate()
            .find_map(|(k, v)| v.iter().position(|x| x == s.get_ref()).map(|i| (k, i)))
            .ok_or_else(|| src.err_span(s, format!("unknown generator `{}`", s.get_ref())))
    };
    let mut seen = std::collections::BTreeSet::new();
    for e in entries {
        let (k, j) = find(&e.source)?;
        let (t, i) = find(&e.target)?;
        if t != grading.pred(k) {
            return Err(src.err_span(
                &e.target,
                format!(
                    "`{}` is not in the grading below `{}`",
                    e.target.get_ref(),
                    e.source.get_ref()
                ),
            ));
        }
        if !seen.insert((k, i, j)) {
            return Err(src.err_span(&e.source, "entry given twice"));
        }
        d[k].set(i, j, src.novikov(group, &e.value)?);
    }
    Ok(d)
}

fn complex_error(origin: &str, src: &Source, e: FilteredError) -> IoError {
    match e {
        FilteredError::Novikov(_)
        | FilteredError::InvalidGrading(_)
        | FilteredError::DuplicateGenerator(_) => src.err_at(0, e.to_string()),
        other => IoError::invariant(origin, other),
    }
}

/// Reads a complex, validating `∂² = 0` and the level condition on load.
pub fn parse_complex(text: &str, origin: &str) -> Result<FilteredComplex, IoError> {
    let src = Source { origin, text };
    let f: ComplexFile = src.toml()?;
    src.header(&f.format, &f.version, COMPLEX_FORMAT)?;
    let group = src.group(&f.group)?;
    if f.grading.is_empty() {
        return Err(src.err_at(0, "at least one grading is required"));
    }
    let recs: Vec<_> = f.grading.iter().map(|g| (&g.label, &g.succ)).collect();
    let grading = grading_set(&src, &recs)?;
    let mut pieces = Vec::with_capacity(f.grading.len());
    for g in &f.grading {
        let mut piece = Vec::with_capacity(g.generators.len());
        for gen in &g.generators {
            piece.push((gen.name.get_ref().clone(), src.exp(&gen.level)?));
        }
        pieces.push(piece);
    }
    let names: Vec<Vec<String>> = pieces
        .iter()
        .map(|p| p.iter().map(|(n, _)| n.clone()).collect())
        .collect();
    let d = differential(&src, &grading, group, &names, &f.differential)?;
    FilteredComplex::new(grading, group, pieces, d).map_err(|e| complex_error(origin, &src, e))
}

fn write_entries(
    out: &mut String,
    table: &str,
    c: &FilteredComplex,
    matrices: impl Fn(usize) -> NovMatrix,
) {
    let g = c.grading();
    for k in 0..g.len() {
        let m = matrices(k);
        let (src, tgt) = (c.piece(k), c.piece(g.pred(k)));
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                let x = m.get(i, j);
                if x.is_zero() {
                    continue;
                }
                let _ = write!(
                    out,
                    "\n[[{table}]]\nsource = {}\ntarget = {}\nvalue = {}\n",
                    quote(&src.names[j]),
                    quote(&tgt.names[i]),
                    quote(&x.to_string())
                );
            }
        }
    }
}

/// Canonical text of a complex.
pub fn serialize_complex(c: &FilteredComplex) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format = {}", quote(COMPLEX_FORMAT));
    let _ = writeln!(out, "version = {VERSION}");
    let _ = writeln!(out, "group = {}", quote(&group_text(c.group())));
    let g = c.grading();
    for k in 0..g.len() {
        let p = c.piece(k);
        let _ = write!(
            out,
            "\n[[grading]]\nlabel = {}\nsucc = {}\n",
            quote(g.label(k)),
            quote(g.label(g.succ(k)))
        );
        if p.dim() == 0 {
            out.push_str("generators = []\n");
            continue;
        }
        out.push_str("generators = [\n");
        for (name, level) in p.names.iter().zip(&p.levels) {
            let _ = writeln!(
                out,
                "    {{ name = {}, level = {} }},",
                quote(name),
                quote(&level.to_string())
            );
        }
        out.push_str("]\n");
    }
    write_entries(&mut out, "differential", c, |k| c.differential(k).clone());
    out
}

pub fn read_complex(path: &Path) -> Result<FilteredComplex, IoError> {
    parse_complex(&read_text(path)?, &path.display().to_string())
}

pub fn write_complex(c: &FilteredComplex, path: &Path) -> Result<(), IoError> {
    write_text(path, &serialize_complex(c))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrectionGradingRec {
    label: Spanned<String>,
    succ: Spanned<String>,
    gap: Spanned<String>,
    #[serde(default)]
    generators: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrectionFile {
    format: Spanned<String>,
    version: Spanned<i64>,
    group: Spanned<String>,
    grading: Vec<CorrectionGradingRec>,
    #[serde(default)]
    base: Vec<EntryRec>,
    #[serde(default)]
    deformed: Vec<EntryRec>,
}

/// Reads a correction: level-0 generators per grading with the gap of the
/// differential into that grading, the base `∂₀` and the deformed `∂`.
pub fn parse_correction(text: &str, origin: &str) -> Result<QuantumCorrection, IoError> {
    let src = Source { origin, text };
    let f: CorrectionFile = src.toml()?;
    src.header(&f.format, &f.version, CORRECTION_FORMAT)?;
    let group = src.group(&f.group)?;
    if f.grading.is_empty() {
        return Err(src.err_at(0, "at least one grading is required"));
    }
    let recs: Vec<_> = f.grading.iter().map(|g| (&g.label, &g.succ)).collect();
    let grading = grading_set(&src, &recs)?;
    let names: Vec<Vec<String>> = f
        .grading
        .iter()
        .map(|g| g.generators.iter().map(|s| s.get_ref().clone()).collect())
        .collect();
    let gap = f
        .grading
        .iter()
        .map(|g| src.exp(&g.gap))
        .collect::<Result<Vec<_>, _>>()?;
    let pieces = || -> Vec<Vec<(String, Exp)>> {
        names
            .iter()
            .map(|v| {
                v.iter()
                    .map(|n| (n.clone(), Exp::from_integer(0)))
                    .collect()
            })
            .collect()
    };
    let d0 = differential(&src, &grading, group, &names, &f.base)?;
    let d = differential(&src, &grading, group, &names, &f.deformed)?;
    let base = FilteredComplex::new(grading.clone(), group, pieces(), d0)
        .map_err(|e| complex_error(origin, &src, e))?;
    let deformed = FilteredComplex::new(grading, group, pieces(), d)
        .map_err(|e| complex_error(origin, &src, e))?;
    let q = QuantumCorrection::new(base, deformed, gap).map_err(|e| match e {
        QuantumError::Filtered(e) => complex_error(origin, &src, e),
        other => IoError::invariant(origin, other),
    })?;
    q.validate_gap()
        .map_err(|e| IoError::invariant(origin, e))?;
    Ok(q)
}

pub fn serialize_correction(q: &QuantumCorrection) -> String {
    let c = q.base();
    let mut out = String::new();
    let _ = writeln!(out, "format = {}", quote(CORRECTION_FORMAT));
    let _ = writeln!(out, "version = {VERSION}");
    let _ = writeln!(out, "group = {}", quote(&group_text(c.group())));
    let g = c.grading();
    for k in 0..g.len() {
        let names: Vec<String> = c.piece(k).names.iter().map(|n| quote(n)).collect();
        let _ = write!(
            out,
            "\n[[grading]]\nlabel = {}\nsucc = {}\ngap = {}\ngenerators = [{}]\n",
            quote(g.label(k)),
            quote(g.label(g.succ(k))),
            quote(&q.gap()[k].to_string()),
            names.join(", ")
        );
    }
    write_entries(&mut out, "base", c, |k| c.differential(k).clone());
    write_entries(&mut out, "deformed", c, |k| {
        q.deformed().differential(k).clone()
    });
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleFile {
    format: Spanned<String>,
    version: Spanned<i64>,
    values: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingFile {
    format: Spanned<String>,
    version: Spanned<i64>,
    v: Vec<Spanned<String>>,
    w: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
struct FormatOnly {
    format: Option<String>,
}

/// The `format` key of a TOML document, if any.
pub fn sniff_format(text: &str) -> Option<String> {
    toml::from_str::<FormatOnly>(text)
        .ok()
        .and_then(|f| f.format)
}

/// Critical values `p₁, q₁, …, p_m, q_m` around the circle.
pub fn parse_circle(text: &str, origin: &str) -> Result<Vec<Exp>, IoError> {
    let src = Source { origin, text };
    let f: CircleFile = src.toml()?;
    src.header(&f.format, &f.version, CIRCLE_FORMAT)?;
    f.values.iter().map(|v| src.exp(v)).collect()
}

pub fn serialize_circle(values: &[Exp]) -> String {
    let v: Vec<String> = values.iter().map(|x| quote(&x.to_string())).collect();
    format!(
        "format = {}\nversion = {VERSION}\nvalues = [{}]\n",
        quote(CIRCLE_FORMAT),
        v.join(", ")
    )
}

/// Two finitely supported sequences `v, w`.
pub fn parse_embedding(text: &str, origin: &str) -> Result<(Vec<Exp>, Vec<Exp>), IoError> {
    let src = Source { origin, text };
    let f: EmbeddingFile = src.toml()?;
    src.header(&f.format, &f.version, EMBEDDING_FORMAT)?;
    let seq = |v: &[Spanned<String>]| v.iter().map(|x| src.exp(x)).collect::<Result<Vec<_>, _>>();
    Ok((seq(&f.v)?, seq(&f.w)?))
}

pub fn serialize_embedding(v: &[Exp], w: &[Exp]) -> String {
    let seq = |x: &[Exp]| {
        x.iter()
            .map(|e| quote(&e.to_string()))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "format = {}\nversion = {VERSION}\nv = [{}]\nw = [{}]\n",
        quote(EMBEDDING_FORMAT),
        seq(v),
        seq(w)
    )
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(src: &Source, e: &csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    IoError::Parse {
        origin: src.origin.to_string(),
        line,
        column: 1,
        message: e.to_string(),
    }
}

fn record_err(src: &Source, rec: &csv::StringRecord, column: usize, message: String) -> IoError {
    IoError::Parse {
        origin: src.origin.to_string(),
        line: rec.position().map_or(0, |p| p.line() as usize),
        column,
        message,
    }
}

/// Samples `(position, value)` of a function on the circle, returned in
/// increasing position.
pub fn parse_samples(text: &str, origin: &str) -> Result<Vec<Exp>, IoError> {
    let src = Source { origin, text };
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_error(&src, &e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["position", "value"] {
        return Err(src.err_at(0, "expected header `position,value`"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&src, &e))?;
        let field = |i: usize| {
            parse_exp(&rec[i])
                .ok_or_else(|| record_err(&src, &rec, i + 1, format!("bad rational `{}`", &rec[i])))
        };
        rows.push((field(0)?, field(1)?));
    }
    rows.sort_by_key(|r| r.0);
    if rows.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(src.err_at(0, "repeated sample position"));
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// A family CSV: columns `s`, then `b1_i_j` and `b2_i_j` in row-major
/// order. The sampled interval is recentred to `[−T, T]`.
pub fn parse_family(text: &str, origin: &str) -> Result<BlockOperatorFamily, IoError> {
    let src = Source { origin, text };
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_error(&src, &e))?.clone();
    let entries = headers.len().saturating_sub(1);
    let n = (1..=16).find(|n| 2 * n * n == entries).ok_or_else(|| {
        src.err_at(
            0,
            format!("{entries} matrix columns do not form two n×n blocks"),
        )
    })?;
    let expected = family_header(n);
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(src.err_at(0, format!("expected header `{}`", expected.join(","))));
    }
    let (mut pos, mut b1, mut b2) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&src, &e))?;
        let vals = (0..rec.len())
            .map(|i| {
                rec[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        record_err(&src, &rec, i + 1, format!("bad number `{}`", &rec[i]))
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        pos.push(vals[0]);
        b1.push(DMatrix::from_row_slice(n, n, &vals[1..1 + n * n]));
        b2.push(DMatrix::from_row_slice(n, n, &vals[1 + n * n..]));
    }
    BlockOperatorFamily::new(pos, b1, b2).map_err(|e| IoError::invariant(origin, e))
}

fn family_header(n: usize) -> Vec<String> {
    let mut h = vec!["s".to_string()];
    for b in ["b1", "b2"] {
        for i in 0..n {
            for j in 0..n {
                h.push(format!("{b}_{i}_{j}"));
            }
        }
    }
    h
}

fn float(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn serialize_family(f: &BlockOperatorFamily) -> String {
    let n = f.dim();
    let mut out = format!(
        "# bdepth-family {VERSION}\n{}\n",
        family_header(n).join(",")
    );
    let (b1, b2) = f.samples();
    let flat = |m: &Mat| {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| float(m[(i, j)]))
            .collect::<Vec<_>>()
    };
    for ((s, a), b) in f.knots().iter().zip(b1).zip(b2) {
        let mut row = vec![float(*s)];
        row.extend(flat(a));
        row.extend(flat(b));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Grid rows followed by refined candidates.
pub fn serialize_scan(r: &ScanResult, seed: Option<u64>) -> String {
    let mut out = format!("# bdepth-scan {VERSION}");
    if let Some(s) = seed {
        let _ = write!(out, " seed={s}");
    }
    let _ = writeln!(
        out,
        " eta0_floor={} eta1={}",
        float(r.eta0_floor),
        float(r.eta1)
    );
    out.push_str("kind,eta,sigma_n,threshold,candidate\n");
    for (kind, points) in [("grid", &r.grid), ("refined", &r.candidates)] {
        for p in points {
            let _ = writeln!(
                out,
                "{kind},{},{},{},{}",
                float(p.eta),
                float(p.sigma),
                float(p.threshold),
                u8::from(kind == "refined" || p.is_dip())
            );
        }
    }
    out
}

/// Ordered `key = value` report rendered as TOML.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    header: Vec<(String, String)>,
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Report {
    pub fn new(format: &str) -> Self {
        let mut r = Report::default();
        r.header.push(("format".into(), quote(format)));
        r.header.push(("version".into(), VERSION.to_string()));
        r
    }

    fn slot(&mut self) -> &mut Vec<(String, String)> {
        match self.sections.last_mut() {
            Some((_, v)) => v,
            None => &mut self.header,
        }
    }

    /// Starts a `[[name]]` table; later fields go into it.
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    pub fn str(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let v = quote(&value.to_string());
        self.slot().push((key.to_string(), v));
        self
    }

    pub fn int(&mut self, key: &str, value: i64) -> &mut Self {
        self.slot().push((key.to_string(), value.to_string()));
        self
    }

    pub fn bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.slot().push((key.to_string(), value.to_string()));
        self
    }

    pub fn list(
        &mut self,
        key: &str,
        values: impl IntoIterator<Item = impl std::fmt::Display>,
    ) -> &mut Self {
        let v: Vec<String> = values.into_iter().map(|x| quote(&x.to_string())).collect();
        self.slot()
            .push((key.to_string(), format!("[{}]", v.join(", "))));
        self
    }

    pub fn ints(&mut self, key: &str, values: impl IntoIterator<Item = usize>) -> &mut Self {
        let v: Vec<String> = values.into_iter().map(|x| x.to_string()).collect();
        self.slot()
            .push((key.to_string(), format!("[{}]", v.join(", "))));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (name, fields) in &self.sections {
            let _ = writeln!(out, "\n[[{name}]]");
            for (k, v) in fields {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"format = "bdepth-complex"
version = 1
group = "1"

[[grading]]
label = "0"
succ = "1"
generators = [
    { name = "x", level = "0" },
]

[[grading]]
label = "1"
succ = "0"
generators = [
    { name = "y", level = "5/2" },
]

[[differential]]
source = "y"
target = "x"
value = "1*T^2"
"#;

    #[test]
    fn canonical_round_trip() {
        let c = parse_complex(PAIR, "pair").unwrap();
        assert_eq!(c.total_dim(), 2);
        assert_eq!(serialize_complex(&c), PAIR);
    }

    #[test]
    fn level_increase_is_an_invariant_violation() {
        let bad = PAIR.replace("\"5/2\"", "\"-3\"");
        match parse_complex(&bad, "bad") {
            Err(IoError::Invariant { message, .. }) => {
                assert!(message.contains("raises the level"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_locate_the_value() {
        let bad = PAIR.replace("1*T^2", "1*T^x");
        match parse_complex(&bad, "bad") {
            Err(IoError::Parse { line, column, .. }) => {
                assert_eq!(line, 22);
                assert_eq!(column, 10);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_complex(&PAIR.replace("version = 1", "version = 2"), "v"),
            Err(IoError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn circle_and_embedding_round_trip() {
        let v: Vec<Exp> = ["3", "-1", "1/2", "0"]
            .iter()
            .map(|s| parse_exp(s).unwrap())
            .collect();
        let text = serialize_circle(&v);
        assert_eq!(parse_circle(&text, "c").unwrap(), v);
        assert_eq!(sniff_format(&text).as_deref(), Some(CIRCLE_FORMAT));
        let text = serialize_embedding(&v, &v[..2]);
        assert_eq!(
            parse_embedding(&text, "e").unwrap(),
            (v.clone(), v[..2].to_vec())
        );
    }

    #[test]
    fn samples_sort_by_position() {
        let v = parse_samples("position,value\n1/2,3\n0,1\n", "s").unwrap();
        assert_eq!(v, vec![Exp::from_integer(1), Exp::from_integer(3)]);
        assert!(parse_samples("position,value\n0,1\n0,2\n", "s").is_err());
    }

    #[test]
    fn family_round_trip() {
        let b = DMatrix::from_row_slice(1, 1, &[0.5]);
        let f = BlockOperatorFamily::constant(b.clone(), b * 0.5, 1.0).unwrap();
        let text = serialize_family(&f);
        let g = parse_family(&text, "f").unwrap();
        assert_eq!(g.t(), 1.0);
        assert_eq!(serialize_family(&g), text);
    }

    #[test]
    fn report_layout() {
        let mut r = Report::new("bdepth-depth");
        r.int("seed", 0)
            .str("depth", "2")
            .section("grading")
            .str("label", "0");
        assert_eq!(
            r.render(),
            "format = \"bdepth-depth\"\nversion = 1\nseed = 0\ndepth = \"2\"\n\n[[grading]]\nlabel = \"0\"\n"
        );
    }
}
