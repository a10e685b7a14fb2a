//! File formats: tabulated models, count data and the CSV/JSON record tables.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use qestim_core::bayes::{JointPosterior, Posterior};
use qestim_core::model::TabulatedModel;
use qestim_core::montecarlo::{BiasRow, HolevoPoint, SweepRow};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn data_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Data {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses a whitespace-separated matrix: grid value, then one probability per outcome.
pub fn parse_table_model(text: &str) -> Result<TabulatedModel, (usize, String)> {
    let mut grid = Vec::new();
    let mut rows = Vec::new();
    let mut width = None;
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| (line_no, format!("not a number: {t:?}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() < 2 {
            return Err((
                line_no,
                "expected a grid value and at least one probability".into(),
            ));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err((
                    line_no,
                    format!("expected {w} columns, found {}", values.len()),
                ))
            }
            _ => {}
        }
        grid.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    TabulatedModel::new(grid, rows).map_err(|e| (last_line, e.to_string()))
}

pub fn read_table_model(path: &Path) -> Result<TabulatedModel> {
    let text = fs::read_to_string(path).map_err(CliError::file(path))?;
    parse_table_model(&text).map_err(|(line, msg)| data_error(path, line, msg))
}

/// Parses count data. Each row is either `outcome,count` or a single outcome
/// label; `#` starts a comment and an `outcome,count` header is allowed.
pub fn parse_counts(text: &str, outcome_count: usize) -> Result<Vec<u64>, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut histogram = vec![0u64; outcome_count];
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| (e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields[0].eq_ignore_ascii_case("outcome") {
            continue;
        }
        let outcome: usize = fields[0].parse().map_err(|_| {
            (
                line,
                format!("outcome must be a nonnegative integer, got {:?}", fields[0]),
            )
        })?;
        if outcome >= outcome_count {
            return Err((
                line,
                format!("outcome {outcome} outside 0..{outcome_count}"),
            ));
        }
        let count: u64 = match fields.get(1..) {
            Some([]) => 1,
            Some([c]) => c.parse().map_err(|_| {
                (
                    line,
                    format!("count must be a nonnegative integer, got {c:?}"),
                )
            })?,
            _ => return Err((line, "expected `outcome,count` or a single outcome".into())),
        };
        histogram[outcome] += count;
    }
    Ok(histogram)
}

pub fn read_counts(path: &Path, outcome_count: usize) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path).map_err(CliError::file(path))?;
    parse_counts(&text, outcome_count).map_err(|(line, msg)| data_error(path, line, msg))
}

/// A row type with a fixed CSV header.
pub trait CsvRecord: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<W: Write, T: CsvRecord>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, rows: &[T]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "M")]
    pub measurements: usize,
    pub beta: f64,
    pub xi_mean: f64,
    pub xi_std: f64,
    pub gaussian_limit: Option<f64>,
    pub bound_floor: f64,
    pub estimate_mean: f64,
    pub estimate_std: f64,
    pub n_valid: usize,
}

impl From<&SweepRow> for SweepRecord {
    fn from(r: &SweepRow) -> Self {
        Self {
            measurements: r.measurements,
            beta: r.beta,
            xi_mean: r.xi_mean,
            xi_std: r.xi_std,
            gaussian_limit: r.gaussian_limit,
            bound_floor: r.bound_floor,
            estimate_mean: r.estimate_mean,
            estimate_std: r.estimate_std,
            n_valid: r.n_valid,
        }
    }
}

impl CsvRecord for SweepRecord {
    const HEADER: &'static [&'static str] = &[
        "M",
        "beta",
        "xi_mean",
        "xi_std",
        "gaussian_limit",
        "bound_floor",
        "estimate_mean",
        "estimate_std",
        "n_valid",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.measurements.to_string(),
            fmt_f64(self.beta),
            fmt_f64(self.xi_mean),
            fmt_f64(self.xi_std),
            fmt_opt(self.gaussian_limit),
            fmt_f64(self.bound_floor),
            fmt_f64(self.estimate_mean),
            fmt_f64(self.estimate_std),
            self.n_valid.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    #[serde(rename = "M")]
    pub measurements: usize,
    pub estimate_mean: f64,
    pub estimate_std: f64,
    pub estimate_stderr: f64,
    pub n_valid: usize,
}

impl From<&BiasRow> for BiasRecord {
    fn from(r: &BiasRow) -> Self {
        Self {
            measurements: r.measurements,
            estimate_mean: r.estimate_mean,
            estimate_std: r.estimate_std,
            estimate_stderr: r.estimate_stderr,
            n_valid: r.n_valid,
        }
    }
}

impl CsvRecord for BiasRecord {
    const HEADER: &'static [&'static str] = &[
        "M",
        "estimate_mean",
        "estimate_std",
        "estimate_stderr",
        "n_valid",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.measurements.to_string(),
            fmt_f64(self.estimate_mean),
            fmt_f64(self.estimate_std),
            fmt_f64(self.estimate_stderr),
            self.n_valid.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoRecord {
    pub shots: usize,
    pub holevo_variance: Option<f64>,
    pub runs: usize,
    pub informative_runs: usize,
    /// `ok`, `no_information` (no defined estimate) or `unbounded` (estimates cancel).
    pub status: String,
}

impl From<&HolevoPoint> for HolevoRecord {
    fn from(p: &HolevoPoint) -> Self {
        let status = match (p.holevo_variance, p.informative_runs) {
            (Some(_), _) => "ok",
            (None, 0) => "no_information",
            (None, _) => "unbounded",
        };
        Self {
            shots: p.shots,
            holevo_variance: p.holevo_variance,
            runs: p.runs,
            informative_runs: p.informative_runs,
            status: status.into(),
        }
    }
}

impl CsvRecord for HolevoRecord {
    const HEADER: &'static [&'static str] = &[
        "shots",
        "holevo_variance",
        "runs",
        "informative_runs",
        "status",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.shots.to_string(),
            fmt_opt(self.holevo_variance),
            self.runs.to_string(),
            self.informative_runs.to_string(),
            self.status.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherRecord {
    pub parameter: String,
    pub alpha: f64,
    pub f_alpha: f64,
}

impl CsvRecord for FisherRecord {
    const HEADER: &'static [&'static str] = &["parameter", "alpha", "f_alpha"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.parameter.clone(),
            fmt_f64(self.alpha),
            fmt_f64(self.f_alpha),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    #[serde(rename = "M")]
    pub measurements: usize,
    pub beta: f64,
    pub alpha: f64,
    pub fisher: f64,
    pub generalized_fisher: f64,
    pub crb: Option<f64>,
    pub barankin_bound: Option<f64>,
    pub gaussian_limit: Option<f64>,
    /// Quantum Cramér-Rao bound `1/(M·Q)` for a user-supplied quantum Fisher information `Q`.
    pub qcrb: Option<f64>,
}

impl CsvRecord for BoundRecord {
    const HEADER: &'static [&'static str] = &[
        "M",
        "beta",
        "alpha",
        "fisher",
        "generalized_fisher",
        "crb",
        "barankin_bound",
        "gaussian_limit",
        "qcrb",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.measurements.to_string(),
            fmt_f64(self.beta),
            fmt_f64(self.alpha),
            fmt_f64(self.fisher),
            fmt_f64(self.generalized_fisher),
            fmt_opt(self.crb),
            fmt_opt(self.barankin_bound),
            fmt_opt(self.gaussian_limit),
            fmt_opt(self.qcrb),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub parameter: String,
    pub method: String,
    #[serde(rename = "M")]
    pub measurements: u64,
    pub estimate: Option<f64>,
    /// Posterior variance (bayes) or squared curvature error (mle).
    pub variance: Option<f64>,
    pub std_error: Option<f64>,
    pub crb: Option<f64>,
    pub note: String,
}

impl CsvRecord for EstimateRecord {
    const HEADER: &'static [&'static str] = &[
        "parameter",
        "method",
        "M",
        "estimate",
        "variance",
        "std_error",
        "crb",
        "note",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.parameter.clone(),
            self.method.clone(),
            self.measurements.to_string(),
            fmt_opt(self.estimate),
            fmt_opt(self.variance),
            fmt_opt(self.std_error),
            fmt_opt(self.crb),
            self.note.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRecord {
    pub lambda: f64,
    pub weight: f64,
}

impl CsvRecord for PosteriorRecord {
    const HEADER: &'static [&'static str] = &["lambda", "weight"];

    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.lambda), fmt_f64(self.weight)]
    }
}

pub fn posterior_records(post: &Posterior) -> Vec<PosteriorRecord> {
    post.grid()
        .nodes()
        .zip(post.weights())
        .map(|(lambda, &weight)| PosteriorRecord { lambda, weight })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPosteriorRecord {
    pub phi: f64,
    pub vis: f64,
    pub weight: f64,
}

impl CsvRecord for JointPosteriorRecord {
    const HEADER: &'static [&'static str] = &["phi", "vis", "weight"];

    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.phi), fmt_f64(self.vis), fmt_f64(self.weight)]
    }
}

pub fn joint_posterior_records(post: &JointPosterior) -> Vec<JointPosteriorRecord> {
    let (first, second) = post.grids();
    let mut out = Vec::with_capacity(first.len() * second.len());
    for (i, phi) in first.nodes().enumerate() {
        for (j, vis) in second.nodes().enumerate() {
            out.push(JointPosteriorRecord {
                phi,
                vis,
                weight: post.weight(i, j),
            });
        }
    }
    out
}
