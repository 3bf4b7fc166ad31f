//! CSV readers for World Bank WDI wide exports, CBRT EVDS long exports and
//! plain `year,value` files, and assembly of the analysis dataset.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Dataset, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Wdi,
    Evds,
    Plain,
}

impl std::str::FromStr for SourceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<SourceKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wdi" => Ok(SourceKind::Wdi),
            "evds" => Ok(SourceKind::Evds),
            "plain" => Ok(SourceKind::Plain),
            other => Err(Error::Config(format!("unknown source kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub source: SourceKind,
    pub series_code: String,
    pub year: i32,
    pub value: Option<f64>,
}

const YEAR_RANGE: std::ops::RangeInclusive<i32> = 1900..=2100;

fn check_year(year: i32, line: u64) -> Result<i32> {
    if YEAR_RANGE.contains(&year) {
        Ok(year)
    } else {
        Err(Error::Parse {
            line,
            message: format!("year {year} outside 1900–2100"),
        })
    }
}

/// Missing markers: empty and `..` (WDI).
fn parse_cell(raw: &str, line: u64, column: &str) -> Result<Option<f64>> {
    let t = raw.trim();
    if t.is_empty() || t == ".." {
        return Ok(None);
    }
    let v: f64 = t.parse().map_err(|_| Error::Parse {
        line,
        message: format!("column `{column}`: `{t}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("column `{column}`: non-finite value `{t}`"),
        });
    }
    Ok(Some(v))
}

/// First run of four digits, e.g. `1995 [YR1995]`, `1995-01-01`, `01-01-1995`.
fn leading_year(s: &str) -> Option<i32> {
    let b = s.as_bytes();
    (0..b.len().saturating_sub(3))
        .find(|&i| {
            b[i..i + 4].iter().all(u8::is_ascii_digit)
                && (i == 0 || !b[i - 1].is_ascii_digit())
                && b.get(i + 4).is_none_or(|c| !c.is_ascii_digit())
        })
        .and_then(|i| s[i..i + 4].parse().ok())
}

fn reader(input: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input.trim_start_matches('\u{feff}').as_bytes())
}

fn headers(rdr: &mut csv::Reader<&[u8]>) -> Result<Vec<String>> {
    Ok(rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .iter()
        .map(|s| s.to_string())
        .collect())
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Guess the layout from the header row.
pub fn detect_kind(input: &str) -> Result<SourceKind> {
    let h = headers(&mut reader(input))?;
    let lower: Vec<String> = h.iter().map(|s| s.to_ascii_lowercase()).collect();
    if lower.len() >= 5 && lower[3] == "series code" {
        Ok(SourceKind::Wdi)
    } else if lower.first().is_some_and(|c| c == "date" || c == "tarih") {
        Ok(SourceKind::Evds)
    } else if lower.len() == 2 && lower[0] == "year" {
        Ok(SourceKind::Plain)
    } else {
        Err(Error::Format(format!(
            "unrecognised CSV header: {}",
            h.join(",")
        )))
    }
}

/// Parse one export. `plain_name` names the series of a plain file.
pub fn parse_csv(
    kind: SourceKind,
    input: &str,
    plain_name: Option<&str>,
) -> Result<Vec<RawRecord>> {
    match kind {
        SourceKind::Wdi => parse_wdi(input),
        SourceKind::Evds => parse_evds(input),
        SourceKind::Plain => parse_plain(
            input,
            plain_name
                .ok_or_else(|| Error::Config("plain CSV input needs a series name".into()))?,
        ),
    }
}

fn parse_wdi(input: &str) -> Result<Vec<RawRecord>> {
    let mut rdr = reader(input);
    let h = headers(&mut rdr)?;
    let wdi_fixed = ["country name", "country code", "series name", "series code"];
    if h.len() < 5
        || h.iter()
            .take(4)
            .map(|s| s.to_ascii_lowercase())
            .ne(wdi_fixed)
    {
        return Err(Error::Format(
            "WDI export must start with Country Name, Country Code, Series Name, Series Code"
                .into(),
        ));
    }
    let years = h[4..]
        .iter()
        .map(|c| {
            leading_year(c)
                .ok_or_else(|| Error::Format(format!("WDI column `{c}` does not name a year")))
                .and_then(|y| check_year(y, 1))
        })
        .collect::<Result<Vec<i32>>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&rec);
        // footer lines ("Data from database: …", "Last Updated: …") and blanks
        let code = rec.get(3).unwrap_or("");
        if rec.len() < 5 || code.is_empty() {
            continue;
        }
        for (j, &year) in years.iter().enumerate() {
            let cell = rec.get(4 + j).unwrap_or("");
            out.push(RawRecord {
                source: SourceKind::Wdi,
                series_code: code.to_string(),
                year,
                value: parse_cell(cell, line, &h[4 + j])?,
            });
        }
    }
    Ok(out)
}

fn parse_evds(input: &str) -> Result<Vec<RawRecord>> {
    let mut rdr = reader(input);
    let h = headers(&mut rdr)?;
    let first = h
        .first()
        .map(|s| s.to_ascii_lowercase())
        .unwrap_or_default();
    if h.len() < 2 || (first != "date" && first != "tarih") {
        return Err(Error::Format(
            "EVDS export must start with a Date (Tarih) column".into(),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&rec);
        let date = rec.get(0).unwrap_or("");
        if date.is_empty() {
            continue;
        }
        let year = leading_year(date).ok_or_else(|| Error::Parse {
            line,
            message: format!("column `{}`: `{date}` is not an annual date", h[0]),
        })?;
        let year = check_year(year, line)?;
        for (j, code) in h.iter().enumerate().skip(1) {
            out.push(RawRecord {
                source: SourceKind::Evds,
                series_code: code.clone(),
                year,
                value: parse_cell(rec.get(j).unwrap_or(""), line, code)?,
            });
        }
    }
    Ok(out)
}

fn parse_plain(input: &str, name: &str) -> Result<Vec<RawRecord>> {
    let mut rdr = reader(input);
    let h = headers(&mut rdr)?;
    if h.len() != 2 || !h[0].eq_ignore_ascii_case("year") {
        return Err(Error::Format(format!(
            "plain CSV header must be `year,value`, found `{}`",
            h.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&rec);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let y = rec.get(0).unwrap_or("");
        let year: i32 = y.parse().map_err(|_| Error::Parse {
            line,
            message: format!("column `{}`: `{y}` is not a year", h[0]),
        })?;
        out.push(RawRecord {
            source: SourceKind::Plain,
            series_code: name.to_string(),
            year: check_year(year, line)?,
            value: parse_cell(rec.get(1).unwrap_or(""), line, &h[1])?,
        });
    }
    Ok(out)
}

/// One variable of the analysis and where it comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSource {
    /// Symbol used in the analysis (`EXP`, `EXC`, …).
    pub symbol: String,
    /// Series code in the source file.
    pub code: String,
    pub kind: SourceKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestAudit {
    pub non_missing_records: usize,
    pub used_cells: usize,
    pub rejected_cells: usize,
    /// `(series code, reason)` counts behind `rejected_cells`.
    pub rejected: BTreeMap<String, usize>,
}

impl IngestAudit {
    pub fn balanced(&self) -> bool {
        self.non_missing_records == self.used_cells + self.rejected_cells
    }
}

/// Align the configured variables over `from..=to`, optionally taking
/// base-10 logs, renaming each to its symbol.
pub fn build_dataset(
    records: &[RawRecord],
    variables: &[VariableSource],
    from: i32,
    to: i32,
    log10: bool,
) -> Result<(Dataset, IngestAudit)> {
    if from > to {
        return Err(Error::Config(format!("empty year range {from}–{to}")));
    }
    let mut by_key: BTreeMap<(SourceKind, &str), BTreeMap<i32, Option<f64>>> = BTreeMap::new();
    for r in records {
        let cells = by_key
            .entry((r.source, r.series_code.as_str()))
            .or_default();
        if cells.insert(r.year, r.value).is_some() {
            return Err(Error::Ingest(format!(
                "series {} has more than one record for {}",
                r.series_code, r.year
            )));
        }
    }
    let wanted: BTreeSet<(SourceKind, &str)> = variables
        .iter()
        .map(|v| (v.kind, v.code.as_str()))
        .collect();

    let mut absent: Vec<(String, i32)> = Vec::new();
    let mut series = Vec::with_capacity(variables.len());
    for v in variables {
        let Some(cells) = by_key.get(&(v.kind, v.code.as_str())) else {
            absent.extend((from..=to).map(|y| (v.symbol.clone(), y)));
            continue;
        };
        let mut values = Vec::with_capacity((to - from + 1) as usize);
        for year in from..=to {
            match cells.get(&year).copied().flatten() {
                Some(x) => values.push(x),
                None => absent.push((v.symbol.clone(), year)),
            }
        }
        if values.len() == (to - from + 1) as usize {
            let s = TimeSeries::new(v.symbol.clone(), from, values)?;
            series.push(if log10 {
                s.log10()?.renamed(v.symbol.clone())
            } else {
                s
            });
        }
    }
    if !absent.is_empty() {
        let list: Vec<String> = absent.iter().map(|(s, y)| format!("({s}, {y})")).collect();
        return Err(Error::Ingest(format!(
            "missing observations for {}",
            list.join(", ")
        )));
    }

    let mut rejected: BTreeMap<String, usize> = BTreeMap::new();
    let mut non_missing = 0;
    for r in records.iter().filter(|r| r.value.is_some()) {
        non_missing += 1;
        let key = (r.source, r.series_code.as_str());
        let reason = if !wanted.contains(&key) {
            "series not configured"
        } else if r.year < from || r.year > to {
            "outside year range"
        } else {
            continue;
        };
        *rejected
            .entry(format!("{}: {reason}", r.series_code))
            .or_default() += 1;
    }
    let rejected_cells = rejected.values().sum();
    // a (kind, code) pair configured under two symbols is one set of cells
    let audit = IngestAudit {
        non_missing_records: non_missing,
        used_cells: wanted.len() * (to - from + 1) as usize,
        rejected_cells,
        rejected,
    };
    Ok((Dataset::new(series)?, audit))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WDI: &str = "\u{feff}Country Name,Country Code,Series Name,Series Code,1995 [YR1995],1996 [YR1996],1997 [YR1997]
Turkiye,TUR,Exports,NE.EXP.GNFS.ZS,19.89,21.54,..
Turkiye,TUR,Inflation,FP.CPI.TOTL.ZG,89.11,,85.67


Data from database: World Development Indicators
Last Updated: 07/01/2024
";

    #[test]
    fn plain_rows() {
        let r = parse_csv(
            SourceKind::Plain,
            "year,value\n1995,19.89\n1996,21.54\n",
            Some("EXP"),
        )
        .unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].year, r[0].value), (1995, Some(19.89)));
        assert_eq!((r[1].year, r[1].value), (1996, Some(21.54)));
        assert_eq!(r[0].series_code, "EXP");
    }

    #[test]
    fn wdi_missing_cells_and_footer() {
        let r = parse_csv(SourceKind::Wdi, WDI, None).unwrap();
        assert_eq!(r.len(), 6);
        assert_eq!(r[2].value, None);
        assert_eq!(r[4].value, None);
        assert_eq!(r[3].value, Some(89.11));
        assert_eq!(detect_kind(WDI).unwrap(), SourceKind::Wdi);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let bad = WDI.replace("89.11", "n/a");
        match parse_csv(SourceKind::Wdi, &bad, None) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(
                    message.contains("1995 [YR1995]") && message.contains("n/a"),
                    "{message}"
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn evds_layout() {
        let csv = "Tarih,TP.RK.T1.Y,OTHER\n1995,81.03,1\n1996-01-01,77.98,\n\n";
        let r = parse_csv(SourceKind::Evds, csv, None).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(
            (r[2].series_code.as_str(), r[2].year, r[2].value),
            ("TP.RK.T1.Y", 1996, Some(77.98))
        );
        assert_eq!(r[3].value, None);
        assert_eq!(detect_kind(csv).unwrap(), SourceKind::Evds);
    }

    #[test]
    fn unknown_layout() {
        assert!(matches!(
            detect_kind("a,b,c\n1,2,3\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_csv(SourceKind::Evds, "year,value\n", None),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_csv(SourceKind::Plain, "year,value\n1850,1\n", Some("x")),
            Err(Error::Parse { .. })
        ));
    }

    fn vars() -> Vec<VariableSource> {
        vec![VariableSource {
            symbol: "INF".into(),
            code: "FP.CPI.TOTL.ZG".into(),
            kind: SourceKind::Plain,
        }]
    }

    fn plain(years: &[(i32, f64)]) -> Vec<RawRecord> {
        years
            .iter()
            .map(|&(year, v)| RawRecord {
                source: SourceKind::Plain,
                series_code: "FP.CPI.TOTL.ZG".into(),
                year,
                value: Some(v),
            })
            .collect()
    }

    #[test]
    fn logs_and_renames() {
        let recs = plain(&[(1994, 100.0), (1995, 89.11), (1996, 80.41)]);
        let (d, audit) = build_dataset(&recs, &vars(), 1995, 1996, true).unwrap();
        let s = d.get("INF").unwrap();
        assert!((s.values()[0] - 1.9499).abs() < 1e-4);
        assert_eq!(s.start_year(), 1995);
        assert!(audit.balanced());
        assert_eq!((audit.used_cells, audit.rejected_cells), (2, 1));
    }

    #[test]
    fn gap_is_named() {
        let recs = plain(&[(2005, 1.0), (2006, 1.0), (2008, 1.0)]);
        match build_dataset(&recs, &vars(), 2005, 2008, true) {
            Err(Error::Ingest(m)) => assert!(m.contains("(INF, 2007)"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_positive_value_is_a_domain_error() {
        let recs = plain(&[(2005, 1.0), (2006, -0.5)]);
        assert!(matches!(
            build_dataset(&recs, &vars(), 2005, 2006, true),
            Err(Error::Domain(_))
        ));
    }
}
