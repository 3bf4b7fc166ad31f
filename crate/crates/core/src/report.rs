//! The six-table report and its text, markdown, CSV and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::{IngestAudit, SourceKind};
use crate::varselect::LagChoice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Format::Text),
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub symbol: String,
    pub code: String,
    pub file: String,
    pub kind: SourceKind,
    pub description: String,
    pub source: String,
    /// SHA-256 of the raw file, when the data came from disk.
    pub file_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DolsOrder {
    pub leads: usize,
    pub lags: usize,
    /// True when the order came from the SC search.
    pub selected_by_sc: bool,
    pub bandwidth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub version: String,
    pub config: PipelineConfig,
    pub sources: Vec<SourceInfo>,
    pub ingest: Option<IngestAudit>,
    /// SHA-256 over the analysed dataset (names, start years, f64 bits).
    pub data_sha256: String,
    pub first_year: i32,
    pub last_year: i32,
    pub n_obs: usize,
    pub units: String,
    /// ADF with constant, levels and first differences, at the config level.
    pub integrated_of_order_one: BTreeMap<String, bool>,
    pub var_lag_choice: Option<LagChoice>,
    pub johansen_diff_lags: Option<usize>,
    pub johansen_case: u8,
    pub decided_rank: Option<usize>,
    pub dols_order: Option<DolsOrder>,
    pub caveats: Vec<String>,
    pub decisions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub variable: String,
    pub unit: String,
    pub obs: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Level,
    FirstDifference,
}

impl Transform {
    pub fn label(self) -> &'static str {
        match self {
            Transform::Level => "level",
            Transform::FirstDifference => "first difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub variable: String,
    pub transform: Transform,
    pub test: String,
    pub spec: String,
    pub statistic: f64,
    pub lags_or_bandwidth: usize,
    pub n_obs: usize,
    pub cv_1: f64,
    pub cv_5: f64,
    pub cv_10: f64,
    pub stars: String,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Row {
    pub variable: String,
    pub transform: Transform,
    pub model: String,
    pub break_year: i32,
    pub statistic: f64,
    pub lags: usize,
    pub cv_1: f64,
    pub cv_5: f64,
    pub cv_10: f64,
    pub stars: String,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Row {
    pub lag: usize,
    pub loglik: f64,
    pub lr: Option<f64>,
    pub fpe: f64,
    pub aic: f64,
    pub sc: f64,
    pub hq: f64,
    /// Criteria whose optimum is this row.
    pub selected_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    /// Which regression the test was run on.
    pub equation: String,
    pub test: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub equation: String,
    pub test: String,
    pub level: String,
    pub stable: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReportRow {
    pub hypothesis: String,
    pub null_rank: usize,
    pub eigenvalue: f64,
    pub trace_stat: f64,
    pub trace_cv: f64,
    pub trace_stars: String,
    pub trace_reject: bool,
    pub maxeig_stat: f64,
    pub maxeig_cv: f64,
    pub maxeig_stars: String,
    pub maxeig_reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "section", rename_all = "lowercase")]
pub enum Table5Row {
    Rank(RankReportRow),
    Diagnostic(DiagnosticRow),
    Stability(StabilityRow),
    Skipped(SkippedRow),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub variable: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_ratio: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "section", rename_all = "lowercase")]
pub enum Table6Row {
    Coefficient(CoefficientRow),
    Diagnostic(DiagnosticRow),
    Stability(StabilityRow),
    Skipped(SkippedRow),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub meta: ReportMeta,
    pub table1: Vec<Table1Row>,
    pub table2: Vec<Table2Row>,
    pub table3: Vec<Table3Row>,
    pub table4: Vec<Table4Row>,
    pub table5: Vec<Table5Row>,
    pub table6: Vec<Table6Row>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<PipelineReport> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("report JSON: {e}")))
    }

    pub fn coefficient(&self, variable: &str) -> Option<&CoefficientRow> {
        self.table6.iter().find_map(|r| match r {
            Table6Row::Coefficient(c) if c.variable == variable => Some(c),
            _ => None,
        })
    }

    pub fn rank_rows(&self) -> impl Iterator<Item = &RankReportRow> {
        self.table5.iter().filter_map(|r| match r {
            Table5Row::Rank(r) => Some(r),
            _ => None,
        })
    }
}

pub fn emit(report: &PipelineReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => render_text(&grids(report, Style::Display), &preamble(report)),
        Format::Markdown => render_markdown(&grids(report, Style::Display), &preamble(report)),
        Format::Csv => render_csv(&grids(report, Style::Raw)),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Style {
    /// Three decimals, stars attached.
    Display,
    /// Shortest round-trip numbers, stars in their own column.
    Raw,
}

impl Style {
    fn num(self, x: f64) -> String {
        match self {
            Style::Display => format!("{x:.3}"),
            Style::Raw => format!("{x}"),
        }
    }

    fn starred(self, x: f64, stars: &str) -> String {
        match self {
            Style::Display => format!("{x:.3}{stars}"),
            Style::Raw => format!("{x}"),
        }
    }
}

struct Grid {
    name: &'static str,
    title: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

const STAR_NOTE: &str = "***, **, * denote significance at 1%, 5%, 10%.";

fn preamble(r: &PipelineReport) -> Vec<String> {
    let m = &r.meta;
    let mut lines = vec![
        format!(
            "Dependent: {}; regressors: {}; {}–{} ({} obs); units: {}",
            m.config.dependent,
            m.config.regressors.join(", "),
            m.first_year,
            m.last_year,
            m.n_obs,
            m.units
        ),
        format!("Data SHA-256: {}", m.data_sha256),
    ];
    if let Some(rank) = m.decided_rank {
        lines.push(format!(
            "Cointegration rank (trace, {}): {rank}",
            m.config.level
        ));
    }
    for c in &m.caveats {
        lines.push(format!("CAVEAT: {c}"));
    }
    lines
}

fn grids(r: &PipelineReport, st: Style) -> Vec<Grid> {
    let raw = st == Style::Raw;
    let mut out = Vec::new();

    out.push(Grid {
        name: "table1",
        title: "Descriptive statistics".into(),
        header: strings(&["variable", "unit", "obs", "mean", "sd", "min", "max"]),
        rows: r
            .table1
            .iter()
            .map(|t| {
                vec![
                    t.variable.clone(),
                    t.unit.clone(),
                    t.obs.to_string(),
                    st.num(t.mean),
                    st.num(t.sd),
                    st.num(t.min),
                    st.num(t.max),
                ]
            })
            .collect(),
        notes: vec![],
    });

    let mut h2 = strings(&["variable", "transform", "test", "spec", "statistic"]);
    if raw {
        h2.push("stars".into());
    }
    h2.extend(strings(&["lags/bw", "n", "cv 1%", "cv 5%", "cv 10%"]));
    out.push(Grid {
        name: "table2",
        title: "Unit root tests (ADF, PP)".into(),
        header: h2,
        rows: r
            .table2
            .iter()
            .map(|t| {
                let mut row = vec![
                    t.variable.clone(),
                    t.transform.label().into(),
                    t.test.clone(),
                    t.spec.clone(),
                    st.starred(t.statistic, &t.stars),
                ];
                if raw {
                    row.push(t.stars.clone());
                }
                row.extend([
                    t.lags_or_bandwidth.to_string(),
                    t.n_obs.to_string(),
                    st.num(t.cv_1),
                    st.num(t.cv_5),
                    st.num(t.cv_10),
                ]);
                row
            })
            .collect(),
        notes: vec![STAR_NOTE.into()],
    });

    let mut h3 = strings(&["variable", "transform", "model", "break", "statistic"]);
    if raw {
        h3.push("stars".into());
    }
    h3.extend(strings(&["lags", "cv 1%", "cv 5%", "cv 10%"]));
    out.push(Grid {
        name: "table3",
        title: "Zivot-Andrews structural break unit root tests".into(),
        header: h3,
        rows: r
            .table3
            .iter()
            .map(|t| {
                let mut row = vec![
                    t.variable.clone(),
                    t.transform.label().into(),
                    t.model.clone(),
                    t.break_year.to_string(),
                    st.starred(t.statistic, &t.stars),
                ];
                if raw {
                    row.push(t.stars.clone());
                }
                row.extend([
                    t.lags.to_string(),
                    st.num(t.cv_1),
                    st.num(t.cv_5),
                    st.num(t.cv_10),
                ]);
                row
            })
            .collect(),
        notes: vec![STAR_NOTE.into()],
    });

    let mark = |t: &Table4Row, crit: &str, x: String| {
        if !raw && t.selected_by.iter().any(|c| c == crit) {
            x + "*"
        } else {
            x
        }
    };
    let mut h4 = strings(&["lag", "logL", "LR", "FPE", "AIC", "SC", "HQ"]);
    if raw {
        h4.push("selected_by".into());
    }
    out.push(Grid {
        name: "table4",
        title: "VAR lag order selection".into(),
        header: h4,
        rows: r
            .table4
            .iter()
            .map(|t| {
                let fpe = if raw {
                    format!("{}", t.fpe)
                } else {
                    format!("{:.3e}", t.fpe)
                };
                let mut row = vec![
                    t.lag.to_string(),
                    st.num(t.loglik),
                    mark(t, "lr", t.lr.map_or("NA".into(), |v| st.num(v))),
                    mark(t, "fpe", fpe),
                    mark(t, "aic", st.num(t.aic)),
                    mark(t, "sc", st.num(t.sc)),
                    mark(t, "hq", st.num(t.hq)),
                ];
                if raw {
                    row.push(t.selected_by.join(" "));
                }
                row
            })
            .collect(),
        notes: vec!["* marks the order selected by each criterion.".into()],
    });

    let level = r.meta.config.level;
    let mut h5 = strings(&["section", "H0", "eigenvalue"]);
    if raw {
        h5.extend(strings(&[
            "trace",
            "trace cv",
            "trace stars",
            "maxeig",
            "maxeig cv",
            "maxeig stars",
            "p value",
            "verdict",
        ]));
    } else {
        h5.extend([
            format!("trace > cv ({level})"),
            format!("maxeig > cv ({level})"),
            "p value".into(),
            "verdict".into(),
        ]);
    }
    let width5 = h5.len();
    let mut rows5 = Vec::new();
    for row in &r.table5 {
        rows5.push(match row {
            Table5Row::Rank(k) => {
                let mut v = vec!["rank".into(), k.hypothesis.clone(), st.num(k.eigenvalue)];
                if raw {
                    v.extend([
                        st.num(k.trace_stat),
                        st.num(k.trace_cv),
                        k.trace_stars.clone(),
                        st.num(k.maxeig_stat),
                        st.num(k.maxeig_cv),
                        k.maxeig_stars.clone(),
                        String::new(),
                        String::new(),
                    ]);
                } else {
                    v.extend([
                        compare(k.trace_stat, k.trace_cv, &k.trace_stars),
                        compare(k.maxeig_stat, k.maxeig_cv, &k.maxeig_stars),
                        String::new(),
                        String::new(),
                    ]);
                }
                v
            }
            Table5Row::Diagnostic(d) => side_row(
                width5,
                "diagnostic",
                &diag_label(d),
                Some(st.num(d.p_value)),
                None,
            ),
            Table5Row::Stability(s) => side_row(
                width5,
                "stability",
                &stab_label(s),
                None,
                Some(s.verdict.clone()),
            ),
            Table5Row::Skipped(s) => {
                side_row(width5, "skipped", &s.stage, None, Some(s.reason.clone()))
            }
        });
    }
    out.push(Grid {
        name: "table5",
        title: format!(
            "Johansen cointegration test (case {})",
            r.meta.johansen_case
        ),
        header: h5,
        rows: rows5,
        notes: vec![
            STAR_NOTE.into(),
            "Diagnostics refer to the static levels equation of the dependent variable.".into(),
        ],
    });

    let mut h6 = strings(&["section", "variable", "coefficient"]);
    if raw {
        h6.push("stars".into());
    }
    h6.extend(strings(&["std. error", "t", "p value", "verdict"]));
    let width6 = h6.len();
    let mut rows6 = Vec::new();
    for row in &r.table6 {
        rows6.push(match row {
            Table6Row::Coefficient(c) => {
                let mut v = vec![
                    "coefficient".into(),
                    c.variable.clone(),
                    st.starred(c.coefficient, &c.stars),
                ];
                if raw {
                    v.push(c.stars.clone());
                }
                v.extend([
                    st.num(c.std_error),
                    st.num(c.t_ratio),
                    st.num(c.p_value),
                    String::new(),
                ]);
                v
            }
            Table6Row::Diagnostic(d) => side_row(
                width6,
                "diagnostic",
                &diag_label(d),
                Some(st.num(d.p_value)),
                None,
            ),
            Table6Row::Stability(s) => side_row(
                width6,
                "stability",
                &stab_label(s),
                None,
                Some(s.verdict.clone()),
            ),
            Table6Row::Skipped(s) => {
                side_row(width6, "skipped", &s.stage, None, Some(s.reason.clone()))
            }
        });
    }
    let order = r
        .meta
        .dols_order
        .as_ref()
        .map(|o| {
            format!(
                " (leads {}, lags {}, bandwidth {})",
                o.leads, o.lags, o.bandwidth
            )
        })
        .unwrap_or_default();
    out.push(Grid {
        name: "table6",
        title: format!(
            "DOLS long-run estimates, dependent {}{order}",
            r.meta.config.dependent
        ),
        header: h6,
        rows: rows6,
        notes: vec![
            STAR_NOTE.into(),
            "Diagnostics refer to the DOLS regression including leads and lags.".into(),
        ],
    });
    out
}

/// `75.344 > 69.819***`
fn compare(stat: f64, cv: f64, stars: &str) -> String {
    let op = if stat > cv { ">" } else { "<" };
    format!("{stat:.3} {op} {cv:.3}{stars}")
}

fn diag_label(d: &DiagnosticRow) -> String {
    format!("χ²({}) {}", d.dof, d.test)
}

fn stab_label(s: &StabilityRow) -> String {
    format!("{} ({})", s.test, s.level)
}

/// Non-numeric rows: section, label, blanks, then p value and verdict in
/// the last two of `width` columns.
fn side_row(
    width: usize,
    section: &str,
    label: &str,
    p: Option<String>,
    verdict: Option<String>,
) -> Vec<String> {
    let mut v = vec![section.to_string(), label.to_string()];
    v.resize(width - 2, String::new());
    v.push(p.unwrap_or_default());
    v.push(verdict.unwrap_or_default());
    v
}

fn widths(g: &Grid) -> Vec<usize> {
    let mut w: Vec<usize> = g.header.iter().map(|h| h.chars().count()).collect();
    for row in &g.rows {
        for (i, c) in row.iter().enumerate() {
            if i < w.len() {
                w[i] = w[i].max(c.chars().count());
            }
        }
    }
    w
}

fn pad(s: &str, w: usize) -> String {
    let n = s.chars().count();
    format!("{s}{}", " ".repeat(w.saturating_sub(n)))
}

fn render_text(grids: &[Grid], preamble: &[String]) -> String {
    let mut out = String::new();
    for l in preamble {
        let _ = writeln!(out, "{l}");
    }
    for g in grids {
        let w = widths(g);
        let line = |cells: &[String]| {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| pad(c, w[i]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let total: usize = w.iter().sum::<usize>() + 2 * w.len().saturating_sub(1);
        let _ = writeln!(out, "\n{}: {}", g.name, g.title);
        let _ = writeln!(out, "{}", "-".repeat(total));
        let _ = writeln!(out, "{}", line(&g.header));
        let _ = writeln!(out, "{}", "-".repeat(total));
        for row in &g.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        for n in &g.notes {
            let _ = writeln!(out, "{n}");
        }
    }
    out
}

fn render_markdown(grids: &[Grid], preamble: &[String]) -> String {
    let mut out = String::from("# Results\n\n");
    for l in preamble {
        let _ = writeln!(out, "- {l}");
    }
    let cell = |s: &str| s.replace('|', "\\|").replace('*', "\\*");
    for g in grids {
        let _ = writeln!(out, "\n## {}: {}\n", g.name, g.title);
        let _ = writeln!(
            out,
            "| {} |",
            g.header
                .iter()
                .map(|h| cell(h))
                .collect::<Vec<_>>()
                .join(" | ")
        );
        let _ = writeln!(out, "|{}", "---|".repeat(g.header.len()));
        for row in &g.rows {
            let _ = writeln!(
                out,
                "| {} |",
                row.iter().map(|c| cell(c)).collect::<Vec<_>>().join(" | ")
            );
        }
        if !g.notes.is_empty() {
            out.push('\n');
            for n in &g.notes {
                let _ = writeln!(out, "{}", cell(n));
            }
        }
    }
    out
}

/// One block per table, each with its own header and a leading `table` column.
fn render_csv(grids: &[Grid]) -> String {
    grids
        .iter()
        .map(|g| {
            let mut w = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(Vec::new());
            w.write_record(std::iter::once("table").chain(g.header.iter().map(String::as_str)))
                .expect("in-memory write");
            for row in &g.rows {
                w.write_record(std::iter::once(g.name).chain(row.iter().map(String::as_str)))
                    .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_cell() {
        assert_eq!(compare(75.344, 69.819, "***"), "75.344 > 69.819***");
        assert_eq!(compare(12.154, 15.495, ""), "12.154 < 15.495");
    }

    #[test]
    fn format_names() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
