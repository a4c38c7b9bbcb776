//! Report documents and their file forms.
//!
//! Every command emits one document. The JSON form is the contract: stable
//! field order (struct order, maps sorted), a tool/version stamp, shortest
//! round-trip float formatting, and no wall-clock data unless timings were
//! explicitly requested. Identical inputs therefore produce byte-identical
//! JSON. CSV is for density samples (external tools plot them), and text is
//! a terminal-friendly summary of the same content.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use filterlab_core::gallery::{ExperimentInfo, Report, ReportStatus};
use filterlab_core::natset::DensityEstimate;
use filterlab_core::spaces::Vector;
use filterlab_core::verdict::{Outcome, Verdict};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write `{path}`: {source}")]
    Unwritable { path: PathBuf, source: std::io::Error },
    #[error("report serialization failed: {source}")]
    Serialize {
        #[from]
        source: serde_json::Error,
    },
    #[error("format `{format}` cannot carry this document; use {usable}")]
    WrongFormat { format: Format, usable: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("format `{other}` is not one of json, csv, text")),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        })
    }
}

pub const TOOL: &str = "filterlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON document wrapper: what produced it and what it holds.
#[derive(Serialize)]
pub struct Document<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Document<T> {
    pub fn new(body: T) -> Document<T> {
        Document { tool: TOOL, version: VERSION, body }
    }
}

/// A vector in report form: dense coordinates or a sorted key map.
#[derive(Serialize)]
#[serde(untagged)]
pub enum VectorView {
    Dense(Vec<f64>),
    Sparse(std::collections::BTreeMap<String, f64>),
}

impl From<&Vector> for VectorView {
    fn from(v: &Vector) -> VectorView {
        match v {
            Vector::Dense(coords) => VectorView::Dense(coords.clone()),
            Vector::Sparse(entries) => {
                VectorView::Sparse(entries.iter().map(|(k, &v)| (k.clone(), v)).collect())
            }
        }
    }
}

/// Body of `gallery run` and `gallery run-all` documents.
#[derive(Serialize)]
pub struct GalleryBody {
    pub seed: u64,
    pub reports: Vec<Report>,
    /// Wall-clock milliseconds per experiment; present only when timings
    /// were requested, because they break byte-reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Vec<(String, u64)>>,
}

/// Body of `gallery list`.
#[derive(Serialize)]
pub struct CatalogBody {
    pub experiments: Vec<ExperimentInfo>,
}

/// Body of a single-verdict document (filter member, converge limit, ...).
#[derive(Serialize)]
pub struct VerdictBody {
    pub subject: Vec<(String, String)>,
    pub verdict: Verdict,
}

/// Body of a density estimate document.
#[derive(Serialize)]
pub struct DensityBody {
    pub set: String,
    pub modulus: String,
    pub estimate: DensityEstimate,
}

/// Render any document as pretty JSON with a trailing newline.
pub fn render_json<T: Serialize>(doc: &Document<T>) -> Result<String, ReportError> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}

/// Density samples as CSV: comment lines with the run context, then
/// `n,ratio` rows. Floats use shortest round-trip formatting.
pub fn render_density_csv(body: &DensityBody) -> String {
    let est = &body.estimate;
    let mut out = String::new();
    let _ = writeln!(out, "# tool={TOOL} version={VERSION}");
    let _ = writeln!(out, "# set={} modulus={} horizon={}", body.set, body.modulus, est.horizon);
    let status = match est.status {
        filterlab_core::natset::DensityStatus::Converged => "converged",
        filterlab_core::natset::DensityStatus::Oscillating => "oscillating",
        filterlab_core::natset::DensityStatus::Inconclusive => "inconclusive",
    };
    match est.value {
        Some(v) => {
            let _ = writeln!(out, "# status={status} value={v}");
        }
        None => {
            let _ = writeln!(out, "# status={status}");
        }
    }
    let _ = writeln!(out, "# tail_inf={} tail_sup={}", est.tail_inf, est.tail_sup);
    out.push_str("n,ratio\n");
    for (n, ratio) in &est.samples {
        let _ = writeln!(out, "{n},{ratio}");
    }
    out
}

fn outcome_tag(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Holds => "holds",
        Outcome::Fails => "fails",
        Outcome::Inconclusive => "inconclusive",
    }
}

fn status_tag(status: ReportStatus) -> &'static str {
    match status {
        ReportStatus::Pass => "pass",
        ReportStatus::Fail => "fail",
        ReportStatus::Inconclusive => "inconclusive",
    }
}

/// A verdict as indented terminal text.
pub fn render_verdict_text(verdict: &Verdict) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", outcome_tag(verdict.outcome));
    for check in &verdict.checks {
        let _ = writeln!(out, "  [{}] {}: {}", outcome_tag(check.outcome), check.label, check.note);
    }
    for warning in &verdict.warnings {
        let _ = writeln!(out, "  warning: {warning}");
    }
    out
}

/// A gallery report as terminal text: status line, then each sub-verdict.
pub fn render_report_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} ... {}", report.name, status_tag(report.status));
    for (key, value) in &report.parameters {
        let _ = writeln!(out, "  {key} = {value}");
    }
    for sv in &report.sub_verdicts {
        let _ = writeln!(out, "  {} ... {}", sv.label, outcome_tag(sv.verdict.outcome));
        for check in &sv.verdict.checks {
            let _ =
                writeln!(out, "    [{}] {}: {}", outcome_tag(check.outcome), check.label, check.note);
        }
        for warning in &sv.verdict.warnings {
            let _ = writeln!(out, "    warning: {warning}");
        }
    }
    for note in &report.notes {
        let _ = writeln!(out, "  note: {note}");
    }
    out
}

/// Write to the path, or stdout when no path is given.
pub fn write_out(path: Option<&Path>, content: &str) -> Result<(), ReportError> {
    match path {
        Some(path) => fs::write(path, content)
            .map_err(|source| ReportError::Unwritable { path: path.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| ReportError::Unwritable { path: PathBuf::from("-"), source })
        }
    }
}
