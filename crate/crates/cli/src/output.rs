//! Report documents and their json, csv and text renderings.

use std::fmt::Write;

use serde::Serialize;

use pi1_core::certify::{CertificationCase, CertificationReport, Expectation};
use pi1_core::verify::PropertyResult;

use crate::config::{CaseConfig, Format, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct ListRow {
    pub id: String,
    pub manifold: String,
    pub kernel: String,
    pub action: String,
    pub section: String,
}

impl ListRow {
    pub fn of(case: &CertificationCase) -> Self {
        Self {
            id: case.id.clone(),
            manifold: case.manifold.name.clone(),
            kernel: case.kernel_name.clone(),
            action: case.action_name.clone(),
            section: case.section.clone(),
        }
    }
}

/// A certification report, or the error that stopped the pipeline for one case.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CaseOutcome {
    Report {
        #[serde(flatten)]
        report: CertificationReport,
        config: CaseConfig,
        #[serde(skip_serializing_if = "Option::is_none")]
        wall_time_ms: Option<u64>,
    },
    Error {
        case: String,
        paper_section: String,
        verdict: &'static str,
        error: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        expected: Option<Expectation>,
        expectation_met: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        config: Option<CaseConfig>,
        #[serde(skip_serializing_if = "Option::is_none")]
        wall_time_ms: Option<u64>,
    },
}

impl CaseOutcome {
    pub fn error(
        case: &str,
        section: &str,
        meta: Option<(Expectation, CaseConfig)>,
        error: String,
        wall_time_ms: Option<u64>,
    ) -> Self {
        CaseOutcome::Error {
            case: case.into(),
            paper_section: section.into(),
            verdict: "ERROR",
            error,
            expected: meta.map(|m| m.0),
            expectation_met: false,
            config: meta.map(|m| m.1),
            wall_time_ms,
        }
    }

    pub fn expectation_met(&self) -> bool {
        match self {
            CaseOutcome::Report { report, .. } => report.expectation_met,
            CaseOutcome::Error { .. } => false,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertifyDocument<'a> {
    pub config: &'a RunConfig,
    pub reports: Vec<CaseOutcome>,
    pub all_expectations_met: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyDocument {
    pub all_passed: bool,
    pub properties: Vec<PropertyResult>,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

/// Shortest round-trip float formatting.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn render_list(rows: &[ListRow], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out =
                csv_line(&["id", "manifold", "kernel", "action", "section"].map(String::from));
            for r in rows {
                out += &csv_line(&[
                    r.id.clone(),
                    r.manifold.clone(),
                    r.kernel.clone(),
                    r.action.clone(),
                    r.section.clone(),
                ]);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<22} {:<6} {:<20} {:<22} SECTION",
                "ID", "M", "KERNEL", "ACTION"
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:<22} {:<6} {:<20} {:<22} {}",
                    r.id, r.manifold, r.kernel, r.action, r.section
                );
            }
            out
        }
    }
}

const CSV_HEADER: [&str; 14] = [
    "case",
    "section",
    "verdict",
    "expected",
    "expectation_met",
    "membership_max_residual",
    "invariance_C",
    "invariance_max_residual",
    "obstruction_value",
    "obstruction_error",
    "obstruction_nodes",
    "reduction_residual",
    "error",
    "wall_time_ms",
];

pub fn render_certify(doc: &CertifyDocument<'_>, format: Format) -> String {
    match format {
        Format::Json => json(doc),
        Format::Csv => {
            let mut out = csv_line(&CSV_HEADER.map(String::from));
            for o in &doc.reports {
                out += &csv_line(&csv_row(o));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for o in &doc.reports {
                let _ = writeln!(out, "{}", text_row(o));
            }
            let _ = writeln!(
                out,
                "all expectations met: {}",
                if doc.all_expectations_met {
                    "yes"
                } else {
                    "no"
                }
            );
            out
        }
    }
}

fn expected_str(e: Expectation) -> &'static str {
    match e {
        Expectation::Certified => "CERTIFIED",
        Expectation::NotCertified => "NOT_CERTIFIED",
    }
}

fn csv_row(o: &CaseOutcome) -> Vec<String> {
    match o {
        CaseOutcome::Report {
            report: r,
            wall_time_ms,
            ..
        } => vec![
            r.case.clone(),
            r.paper_section.clone(),
            r.verdict.to_string(),
            expected_str(r.expected).into(),
            r.expectation_met.to_string(),
            num(r.membership.max_residual),
            r.invariance.map(|f| num(f.c)).unwrap_or_default(),
            r.invariance
                .map(|f| num(f.max_residual))
                .unwrap_or_default(),
            num(r.obstruction.value),
            num(r.obstruction.error),
            r.obstruction.nodes.to_string(),
            num(r.reduction_residual),
            String::new(),
            wall_time_ms.map(|t| t.to_string()).unwrap_or_default(),
        ],
        CaseOutcome::Error {
            case,
            paper_section,
            verdict,
            error,
            expected,
            wall_time_ms,
            ..
        } => {
            let mut row = vec![String::new(); CSV_HEADER.len()];
            row[0] = case.clone();
            row[1] = paper_section.clone();
            row[2] = verdict.to_string();
            row[3] = expected.map(expected_str).unwrap_or_default().into();
            row[4] = "false".into();
            row[12] = error.clone();
            row[13] = wall_time_ms.map(|t| t.to_string()).unwrap_or_default();
            row
        }
    }
}

fn text_row(o: &CaseOutcome) -> String {
    match o {
        CaseOutcome::Report {
            report: r,
            wall_time_ms,
            ..
        } => {
            let inv = r
                .invariance
                .map(|f| format!("C={:.6} inv={:.2e}", f.c, f.max_residual))
                .unwrap_or_else(|| "C=- inv=-".into());
            let t = wall_time_ms.map(|t| format!(" {t} ms")).unwrap_or_default();
            format!(
                "{:<22} {:<12} {:<14} I={:.10e} ± {:.2e} mem={:.2e} {}{}{}",
                r.case,
                r.verdict.to_string(),
                format!("(expect {})", expected_str(r.expected)),
                r.obstruction.value,
                r.obstruction.error,
                r.membership.max_residual,
                inv,
                if r.expectation_met {
                    ""
                } else {
                    " [UNEXPECTED]"
                },
                t
            )
        }
        CaseOutcome::Error { case, error, .. } => format!("{case:<22} ERROR        {error}"),
    }
}

pub fn render_verify(doc: &VerifyDocument, format: Format) -> String {
    match format {
        Format::Json => json(doc),
        Format::Csv => {
            let mut out = csv_line(
                &["suite", "name", "passed", "measured", "tolerance", "detail"].map(String::from),
            );
            for p in &doc.properties {
                out += &csv_line(&[
                    p.suite.clone(),
                    p.name.clone(),
                    p.passed.to_string(),
                    num(p.measured),
                    num(p.tolerance),
                    p.detail.clone(),
                ]);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for p in &doc.properties {
                let _ = writeln!(
                    out,
                    "{} {:<11} {:<62} {:.3e} < {:.1e}  {}",
                    if p.passed { "PASS" } else { "FAIL" },
                    p.suite,
                    p.name,
                    p.measured,
                    p.tolerance,
                    p.detail
                );
            }
            out
        }
    }
}
