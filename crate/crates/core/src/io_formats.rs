//! Transcription parsers and report serialisers.
//!
//! Inputs are either TIMIT-style `.phn` files (`start end phone` per line)
//! or one utterance per line (`utt_id ph1 ph2 ...`). Reports are JSON with a
//! `schema_version`, or plot-ready CSV.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::confusion::{rank_confusions, ConfusionError, ConfusionMatrix};
use crate::error_analysis::{AnalysisError, ErrorBreakdown, ErrorCounts, GainReport};
use crate::phoneset::{self, BpcCategorization, CategorizationName, FoldError, FoldMap, Phone};
use crate::sinc2net::{FilterBankSpec, Spectrum, Window};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("no phones in utterance")]
    EmptyUtterance,
    #[error("line {line}: duplicate utterance id {id:?}")]
    DuplicateId { id: String, line: usize },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<ParseError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("utterance {id:?}: {source}")]
    Phones {
        id: String,
        #[source]
        source: FoldError,
    },
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error("invalid report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Confusion(#[from] ConfusionError),
    #[error("report field {field} of {categorization}/{class} is {found}, counts give {expected}")]
    Inconsistent {
        categorization: CategorizationName,
        class: String,
        field: &'static str,
        found: f64,
        expected: f64,
    },
}

impl ParseError {
    fn in_file(self, path: &Path) -> ParseError {
        ParseError::File {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: u64,
    pub end: u64,
}

/// One transcribed utterance. Tokens are kept verbatim; they become
/// [`Phone`]s only after folding/validation, so unknown symbols are reported
/// with their position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub tokens: Vec<String>,
    pub timing: Option<Vec<Segment>>,
}

impl Utterance {
    pub fn phones(&self, fold: Option<&FoldMap>) -> Result<Vec<Phone>, ParseError> {
        phoneset::fold(&self.tokens, fold).map_err(|source| ParseError::Phones {
            id: self.id.clone(),
            source,
        })
    }
}

/// Utterances in input order, keyed by unique id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    utterances: Vec<Utterance>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(utterances: Vec<Utterance>) -> Result<Self, ParseError> {
        let mut corpus = Corpus::default();
        for (i, u) in utterances.into_iter().enumerate() {
            corpus.push(u, i + 1)?;
        }
        Ok(corpus)
    }

    fn push(&mut self, u: Utterance, line: usize) -> Result<(), ParseError> {
        if self.index.contains_key(&u.id) {
            return Err(ParseError::DuplicateId { id: u.id, line });
        }
        self.index.insert(u.id.clone(), self.utterances.len());
        self.utterances.push(u);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Utterance> {
        self.index.get(id).map(|&i| &self.utterances[i])
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Utterance> {
        self.utterances.iter()
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

/// Parses a `.phn` file: `start end phone` per line, sample offsets.
pub fn parse_phn(id: &str, text: &str) -> Result<Utterance, ParseError> {
    let mut tokens = Vec::new();
    let mut timing = Vec::new();
    for (line, content) in lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [start, end, phone] = fields[..] else {
            return Err(ParseError::Line {
                line,
                reason: format!("expected \"start end phone\", found {} field(s)", fields.len()),
            });
        };
        let sample = |s: &str, what: &str| {
            s.parse::<u64>().map_err(|_| ParseError::Line {
                line,
                reason: format!("{what} {s:?} is not a sample index"),
            })
        };
        let seg = Segment {
            start: sample(start, "start")?,
            end: sample(end, "end")?,
        };
        if seg.end < seg.start {
            return Err(ParseError::Line {
                line,
                reason: format!("segment ends ({}) before it starts ({})", seg.end, seg.start),
            });
        }
        if let Some(prev) = timing.last().map(|s: &Segment| s.start) {
            if seg.start < prev {
                return Err(ParseError::Line {
                    line,
                    reason: format!("start {} precedes previous start {prev}", seg.start),
                });
            }
        }
        tokens.push(phone.to_string());
        timing.push(seg);
    }
    if tokens.is_empty() {
        return Err(ParseError::EmptyUtterance);
    }
    Ok(Utterance {
        id: id.to_string(),
        tokens,
        timing: Some(timing),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedCorpus {
    pub corpus: Corpus,
    /// Blank lines skipped while parsing.
    pub blank_lines: usize,
}

/// Parses the one-utterance-per-line format. An id with no phones is an
/// empty utterance, not an error.
pub fn parse_transcripts(text: &str) -> Result<ParsedCorpus, ParseError> {
    let mut corpus = Corpus::default();
    let mut blank_lines = 0;
    let total = text.split('\n').count();
    for (line, content) in lines(text) {
        let mut fields = content.split_whitespace();
        let Some(id) = fields.next() else {
            // the empty tail after a final newline is not a blank line
            if !(line == total && content.is_empty()) {
                blank_lines += 1;
            }
            continue;
        };
        let u = Utterance {
            id: id.to_string(),
            tokens: fields.map(str::to_string).collect(),
            timing: None,
        };
        corpus.push(u, line)?;
    }
    Ok(ParsedCorpus {
        corpus,
        blank_lines,
    })
}

/// Hypothesis files use the one-utterance-per-line format only.
pub fn parse_hyp(text: &str) -> Result<ParsedCorpus, ParseError> {
    parse_transcripts(text)
}

fn read_text(path: &Path) -> Result<String, ParseError> {
    let bytes = fs::read(path).map_err(|source| ParseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| ParseError::Utf8.in_file(path))
}

/// Reads every `.phn` file under `dir`. Utterance ids are the relative
/// path without extension, `/`-separated (e.g. `dr1/fcjf0/si1027`).
pub fn load_phn_tree(dir: &Path) -> Result<Corpus, ParseError> {
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| ParseError::Io {
            path: e.path().unwrap_or(dir).to_path_buf(),
            source: e.into(),
        })?;
        let path = entry.path();
        let is_phn = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("phn"));
        if !entry.file_type().is_file() || !is_phn {
            continue;
        }
        let rel = path.strip_prefix(dir).unwrap_or(path).with_extension("");
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        files.push((id, path.to_path_buf()));
    }
    files.sort();

    let mut corpus = Corpus::default();
    for (i, (id, path)) in files.into_iter().enumerate() {
        let text = read_text(&path)?;
        let u = parse_phn(&id, &text).map_err(|e| e.in_file(&path))?;
        corpus.push(u, i + 1)?;
    }
    Ok(corpus)
}

/// Reference input: a directory of `.phn` files or a transcript file.
pub fn load_reference(path: &Path) -> Result<ParsedCorpus, ParseError> {
    if path.is_dir() {
        Ok(ParsedCorpus {
            corpus: load_phn_tree(path)?,
            blank_lines: 0,
        })
    } else {
        load_hypothesis(path)
    }
}

pub fn load_hypothesis(path: &Path) -> Result<ParsedCorpus, ParseError> {
    parse_transcripts(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn load_fold_map(path: &Path) -> Result<FoldMap, ParseError> {
    FoldMap::parse(&read_text(path)?).map_err(|e| ParseError::Fold(e).in_file(path))
}

/// Fraction to percent, one decimal.
pub fn percent(fraction: f64) -> f64 {
    (fraction * 1000.0).round() / 10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: String,
    pub display: String,
    pub sub: u64,
    pub del: u64,
    pub ins: u64,
    pub per_raw: f64,
    pub per_percent: f64,
    pub sub_percent: f64,
    pub del_percent: f64,
    pub ins_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotalsRow {
    pub sub: u64,
    pub del: u64,
    pub ins: u64,
    pub ref_count: u64,
    pub per_raw: f64,
    pub per_percent: f64,
    pub sub_percent: f64,
    pub del_percent: f64,
    pub ins_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownSection {
    pub categorization: CategorizationName,
    pub per_class: Vec<ClassRow>,
    pub totals: TotalsRow,
}

impl From<&ErrorBreakdown> for BreakdownSection {
    fn from(b: &ErrorBreakdown) -> Self {
        let cat = BpcCategorization::get(b.categorization);
        let n = b.totals.ref_count as f64;
        let pct = |count: u64| percent(count as f64 / n);
        BreakdownSection {
            categorization: b.categorization,
            per_class: b
                .per_class
                .iter()
                .map(|c| ClassRow {
                    class: c.class.clone(),
                    display: cat.class(&c.class).map_or("", |k| k.display).to_string(),
                    sub: c.counts.sub,
                    del: c.counts.del,
                    ins: c.counts.ins,
                    per_raw: c.per_share,
                    per_percent: percent(c.per_share),
                    sub_percent: pct(c.counts.sub),
                    del_percent: pct(c.counts.del),
                    ins_percent: pct(c.counts.ins),
                })
                .collect(),
            totals: TotalsRow {
                sub: b.totals.counts.sub,
                del: b.totals.counts.del,
                ins: b.totals.counts.ins,
                ref_count: b.totals.ref_count,
                per_raw: b.totals.per,
                per_percent: percent(b.totals.per),
                sub_percent: pct(b.totals.counts.sub),
                del_percent: pct(b.totals.counts.del),
                ins_percent: pct(b.totals.counts.ins),
            },
        }
    }
}

impl TryFrom<&BreakdownSection> for ErrorBreakdown {
    type Error = ParseError;

    fn try_from(s: &BreakdownSection) -> Result<Self, ParseError> {
        let counts = s
            .per_class
            .iter()
            .map(|c| {
                let counts = ErrorCounts {
                    sub: c.sub,
                    del: c.del,
                    ins: c.ins,
                };
                (c.class.clone(), counts)
            })
            .collect();
        let b = ErrorBreakdown::from_counts(s.categorization, counts, s.totals.ref_count)?;
        let mismatch = |class: &str, field, found: f64, expected: f64| ParseError::Inconsistent {
            categorization: s.categorization,
            class: class.to_string(),
            field,
            found,
            expected,
        };
        for (row, c) in s.per_class.iter().zip(&b.per_class) {
            if row.per_raw != c.per_share {
                return Err(mismatch(&row.class, "per_raw", row.per_raw, c.per_share));
            }
        }
        let t = &b.totals;
        if (s.totals.sub, s.totals.del, s.totals.ins) != (t.counts.sub, t.counts.del, t.counts.ins)
        {
            return Err(AnalysisError::InconsistentTotals(s.categorization).into());
        }
        if s.totals.per_raw != t.per {
            return Err(mismatch("total", "per_raw", s.totals.per_raw, t.per));
        }
        Ok(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRow {
    pub class: String,
    pub first: Vec<String>,
    pub second: Vec<String>,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionSection {
    pub categorization: CategorizationName,
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub rankings: Vec<RankingRow>,
}

impl From<&ConfusionMatrix> for ConfusionSection {
    fn from(m: &ConfusionMatrix) -> Self {
        ConfusionSection {
            categorization: m.categorization,
            labels: m.labels.clone(),
            counts: m.counts.clone(),
            rankings: rank_confusions(m)
                .per_class
                .into_iter()
                .map(|r| RankingRow {
                    rendered: r.render(),
                    class: r.class,
                    first: r.first,
                    second: r.second,
                })
                .collect(),
        }
    }
}

impl TryFrom<&ConfusionSection> for ConfusionMatrix {
    type Error = ParseError;

    fn try_from(s: &ConfusionSection) -> Result<Self, ParseError> {
        Ok(ConfusionMatrix::from_parts(
            s.categorization,
            s.labels.clone(),
            s.counts.clone(),
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub class: String,
    pub baseline_raw: f64,
    pub improved_raw: f64,
    /// `null` when the baseline share is zero.
    pub gain_raw: Option<f64>,
    pub gain_percent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSection {
    pub categorization: CategorizationName,
    pub per_class: Vec<GainRow>,
    pub average_raw: Option<f64>,
    pub average_percent: Option<f64>,
    pub overall_raw: Option<f64>,
    pub overall_percent: Option<f64>,
}

impl From<&GainReport> for GainSection {
    fn from(g: &GainReport) -> Self {
        GainSection {
            categorization: g.categorization,
            per_class: g
                .per_class
                .iter()
                .map(|c| GainRow {
                    class: c.class.clone(),
                    baseline_raw: c.baseline,
                    improved_raw: c.improved,
                    gain_raw: c.gain,
                    gain_percent: c.gain.map(percent),
                })
                .collect(),
            average_raw: g.average,
            average_percent: g.average.map(percent),
            overall_raw: g.overall,
            overall_percent: g.overall.map(percent),
        }
    }
}

impl From<&GainSection> for GainReport {
    fn from(s: &GainSection) -> Self {
        GainReport {
            categorization: s.categorization,
            per_class: s
                .per_class
                .iter()
                .map(|r| crate::error_analysis::ClassGain {
                    class: r.class.clone(),
                    baseline: r.baseline_raw,
                    improved: r.improved_raw,
                    gain: r.gain_raw,
                })
                .collect(),
            average: s.average_raw,
            overall: s.overall_raw,
        }
    }
}

/// Top-level JSON document written by `score`, `confusion` and `compare`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterances: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakdowns: Vec<BreakdownSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub confusion: Vec<ConfusionSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gains: Vec<GainSection>,
}

impl Report {
    pub fn new(
        breakdowns: &[ErrorBreakdown],
        matrices: &[ConfusionMatrix],
        gains: &[GainReport],
    ) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            utterances: None,
            breakdowns: breakdowns.iter().map(Into::into).collect(),
            confusion: matrices.iter().map(Into::into).collect(),
            gains: gains.iter().map(Into::into).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialise");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let report: Report = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(ParseError::Schema(report.schema_version));
        }
        Ok(report)
    }

    pub fn error_breakdowns(&self) -> Result<Vec<ErrorBreakdown>, ParseError> {
        self.breakdowns.iter().map(TryFrom::try_from).collect()
    }

    pub fn matrices(&self) -> Result<Vec<ConfusionMatrix>, ParseError> {
        self.confusion.iter().map(TryFrom::try_from).collect()
    }

    pub fn gain_reports(&self) -> Vec<GainReport> {
        self.gains.iter().map(Into::into).collect()
    }
}

/// JSON report for the given sections.
pub fn write_report(
    breakdowns: &[ErrorBreakdown],
    matrices: &[ConfusionMatrix],
    gains: &[GainReport],
) -> String {
    Report::new(breakdowns, matrices, gains).to_json()
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV of UTF-8 fields")
}

/// One row per class plus a `total` row, for each breakdown.
pub fn breakdown_csv(breakdowns: &[ErrorBreakdown]) -> String {
    let header = [
        "categorization",
        "class",
        "sub",
        "del",
        "ins",
        "ref_count",
        "per_raw",
        "per_percent",
        "sub_percent",
        "del_percent",
        "ins_percent",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = vec![header];
    for b in breakdowns {
        let s = BreakdownSection::from(b);
        let name = s.categorization.to_string();
        for c in &s.per_class {
            rows.push(vec![
                name.clone(),
                c.class.clone(),
                c.sub.to_string(),
                c.del.to_string(),
                c.ins.to_string(),
                s.totals.ref_count.to_string(),
                c.per_raw.to_string(),
                c.per_percent.to_string(),
                c.sub_percent.to_string(),
                c.del_percent.to_string(),
                c.ins_percent.to_string(),
            ]);
        }
        let t = &s.totals;
        rows.push(vec![
            name,
            "total".into(),
            t.sub.to_string(),
            t.del.to_string(),
            t.ins.to_string(),
            t.ref_count.to_string(),
            t.per_raw.to_string(),
            t.per_percent.to_string(),
            t.sub_percent.to_string(),
            t.del_percent.to_string(),
            t.ins_percent.to_string(),
        ]);
    }
    csv_string(rows)
}

/// Header `ref,<labels...>`, then one row per reference class.
pub fn matrix_csv(m: &ConfusionMatrix) -> String {
    let header = std::iter::once("ref".to_string())
        .chain(m.labels.iter().cloned())
        .collect();
    let rows = m.labels.iter().zip(&m.counts).map(|(label, row)| {
        std::iter::once(label.clone())
            .chain(row.iter().map(u64::to_string))
            .collect()
    });
    csv_string(std::iter::once(header).chain(rows))
}

pub fn parse_matrix_csv(
    categorization: CategorizationName,
    text: &str,
) -> Result<ConfusionMatrix, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let labels: Vec<String> = reader.headers()?.iter().skip(1).map(String::from).collect();
    let mut counts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.get(0) != labels.get(i).map(String::as_str) {
            return Err(ParseError::Line {
                line,
                reason: format!("row label {:?} out of order", record.get(0).unwrap_or("")),
            });
        }
        let row = record
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<u64>().map_err(|_| ParseError::Line {
                    line,
                    reason: format!("{v:?} is not a count"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        counts.push(row);
    }
    Ok(ConfusionMatrix::from_parts(categorization, labels, counts)?)
}

pub fn ranking_csv(matrices: &[ConfusionMatrix]) -> String {
    let header = ["categorization", "class", "first", "second", "rendered"]
        .map(String::from)
        .to_vec();
    let rows = matrices.iter().flat_map(|m| {
        rank_confusions(m).per_class.into_iter().map(move |r| {
            vec![
                m.categorization.to_string(),
                r.class.clone(),
                r.first.join("/"),
                r.second.join("/"),
                r.render(),
            ]
        })
    });
    csv_string(std::iter::once(header).chain(rows))
}

pub fn gain_csv(gains: &[GainReport]) -> String {
    let header = [
        "categorization",
        "class",
        "baseline_raw",
        "improved_raw",
        "gain_raw",
        "gain_percent",
    ]
    .map(String::from)
    .to_vec();
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut rows = vec![header];
    for g in gains {
        let name = g.categorization.to_string();
        for c in &g.per_class {
            rows.push(vec![
                name.clone(),
                c.class.clone(),
                c.baseline.to_string(),
                c.improved.to_string(),
                opt(c.gain),
                opt(c.gain.map(percent)),
            ]);
        }
        rows.push(vec![
            name,
            "average".into(),
            String::new(),
            String::new(),
            opt(g.average),
            opt(g.average.map(percent)),
        ]);
    }
    csv_string(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterEntry {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
}

/// `{sample_rate, length, window, filters: [{center_hz, bandwidth_hz}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterBankDump {
    pub sample_rate: f64,
    pub length: usize,
    pub window: Window,
    pub filters: Vec<FilterEntry>,
}

impl From<&FilterBankSpec> for FilterBankDump {
    fn from(bank: &FilterBankSpec) -> Self {
        FilterBankDump {
            sample_rate: bank.kernel.sample_rate_hz(),
            length: bank.kernel.length(),
            window: bank.kernel.window(),
            filters: bank
                .filters
                .iter()
                .map(|f| FilterEntry {
                    center_hz: f.center_hz,
                    bandwidth_hz: f.bandwidth_hz,
                })
                .collect(),
        }
    }
}

/// One kernel per row, no header.
pub fn taps_csv(kernels: &[Vec<f64>]) -> String {
    csv_string(
        kernels
            .iter()
            .map(|k| k.iter().map(f64::to_string).collect()),
    )
}

/// Long format: `filter,freq_hz,magnitude`.
pub fn response_csv(spectra: &[(usize, Spectrum)]) -> String {
    let header = ["filter", "freq_hz", "magnitude"].map(String::from).to_vec();
    let rows = spectra.iter().flat_map(|(i, s)| {
        s.freqs_hz
            .iter()
            .zip(&s.magnitude)
            .map(move |(f, m)| vec![i.to_string(), f.to_string(), m.to_string()])
    });
    csv_string(std::iter::once(header).chain(rows))
}
