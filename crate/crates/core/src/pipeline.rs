//! End-to-end run: load the configured sources, then describe, unit-root
//! and break tests, lag selection, Johansen rank, DOLS and diagnostics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::diagnostics::{
    breusch_godfrey, cusum, cusumsq, het_test, jarque_bera, ramsey_reset, CusumPath,
    DiagnosticEntry,
};
use crate::dols::{dols_fit, select_leads_lags};
use crate::error::{Error, Result};
use crate::ingest::{build_dataset, parse_csv, IngestAudit, RawRecord};
use crate::johansen::johansen_eigen;
use crate::linreg::{ols_fit, CovarianceKind};
use crate::report::{
    CoefficientRow, DiagnosticRow, DolsOrder, PipelineReport, RankReportRow, ReportMeta,
    SkippedRow, SourceInfo, StabilityRow, Table1Row, Table2Row, Table3Row, Table4Row, Table5Row,
    Table6Row, Transform,
};
use crate::series::{describe, Dataset, TimeSeries};
use crate::significance::{p_value_stars, Level};
use crate::unitroot::{adf_test, pp_test, DeterministicSpec, UnitRootResult, UnitRootTest};
use crate::varselect::lag_selection_table;
use crate::zabreak::za_test;

pub const DATA_DIR_ENV: &str = "COINTEGRA_DATA_DIR";

/// Fixture directory, unless `COINTEGRA_DATA_DIR` is set.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/turkiye")))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of names, start years and the exact bits of every value.
pub fn dataset_sha256(d: &Dataset) -> String {
    let mut h = Sha256::new();
    for s in d.series() {
        h.update(s.name().as_bytes());
        h.update([0u8]);
        h.update(s.start_year().to_le_bytes());
        h.update((s.len() as u64).to_le_bytes());
        for v in s.values() {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex(&h.finalize())
}

/// Parse every file the config references, each once.
pub fn load_records(cfg: &PipelineConfig, dir: &Path) -> Result<(Vec<RawRecord>, Vec<SourceInfo>)> {
    let mut hashes: BTreeMap<&str, String> = BTreeMap::new();
    let mut records = Vec::new();
    for v in &cfg.variables {
        if hashes.contains_key(v.file.as_str()) {
            continue;
        }
        let path = dir.join(&v.file);
        let bytes = std::fs::read(&path)
            .map_err(|e| Error::Ingest(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))?;
        let plain_name = Some(v.code.as_str());
        records.extend(
            parse_csv(v.kind, &text, plain_name)
                .map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?,
        );
        hashes.insert(v.file.as_str(), hex(&Sha256::digest(&bytes)));
    }
    let sources = cfg
        .variables
        .iter()
        .map(|v| SourceInfo {
            symbol: v.symbol.clone(),
            code: v.code.clone(),
            file: v.file.clone(),
            kind: v.kind,
            description: v.description.clone(),
            source: v.source.clone(),
            file_sha256: hashes.get(v.file.as_str()).cloned(),
        })
        .collect();
    Ok((records, sources))
}

/// Model variables over the configured years, optionally in base-10 logs.
pub fn load_dataset(
    cfg: &PipelineConfig,
    dir: &Path,
    log10: bool,
) -> Result<(Dataset, IngestAudit, Vec<SourceInfo>)> {
    cfg.validate()?;
    let (records, sources) = load_records(cfg, dir)?;
    let wanted = cfg
        .model_variables()
        .into_iter()
        .map(|s| cfg.variable(s).map(|v| v.source_spec()))
        .collect::<Result<Vec<_>>>()?;
    let (d, audit) = build_dataset(&records, &wanted, cfg.start_year, cfg.end_year, log10)?;
    Ok((d, audit, sources))
}

/// Load from `dir` and run the full pipeline on the logged data.
pub fn run_pipeline_from_dir(cfg: &PipelineConfig, dir: &Path) -> Result<PipelineReport> {
    let (d, audit, sources) = load_dataset(cfg, dir, true).map_err(|e| e.in_stage("ingest"))?;
    run_pipeline_with_sources(&d, cfg, sources, Some(audit))
}

pub fn run_pipeline(d: &Dataset, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let sources = cfg
        .variables
        .iter()
        .map(|v| SourceInfo {
            symbol: v.symbol.clone(),
            code: v.code.clone(),
            file: v.file.clone(),
            kind: v.kind,
            description: v.description.clone(),
            source: v.source.clone(),
            file_sha256: None,
        })
        .collect();
    run_pipeline_with_sources(d, cfg, sources, None)
}

fn unit_root_row(
    variable: &str,
    transform: Transform,
    r: &UnitRootResult,
    level: Level,
) -> Table2Row {
    Table2Row {
        variable: variable.to_string(),
        transform,
        test: match r.test {
            UnitRootTest::Adf => "ADF".into(),
            UnitRootTest::Pp => "PP".into(),
        },
        spec: r.spec.label().into(),
        statistic: r.statistic,
        lags_or_bandwidth: r.lags_or_bandwidth,
        n_obs: r.n_obs,
        cv_1: r.critical_values.pct1,
        cv_5: r.critical_values.pct5,
        cv_10: r.critical_values.pct10,
        stars: r.stars().into(),
        reject: r.reject(level),
    }
}

fn diag_row(equation: &str, e: &DiagnosticEntry) -> DiagnosticRow {
    DiagnosticRow {
        equation: equation.into(),
        test: e.test_name.clone(),
        statistic: e.statistic,
        dof: e.dof,
        p_value: e.p_value,
    }
}

fn stability_row(equation: &str, p: &CusumPath) -> StabilityRow {
    StabilityRow {
        equation: equation.into(),
        test: match p.kind {
            crate::diagnostics::PathKind::Cusum => "CUSUM".into(),
            crate::diagnostics::PathKind::Cusumsq => "CUSUMSQ".into(),
        },
        level: p.level.label().into(),
        stable: p.stable,
        verdict: p.verdict().into(),
    }
}

enum SideRow {
    Diagnostic(DiagnosticRow),
    Stability(StabilityRow),
    Skipped(SkippedRow),
}

/// Each test on its own so one failure becomes a skipped row instead of
/// losing the rest.
fn diagnostic_rows(
    equation: &str,
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    cfg: &PipelineConfig,
) -> Vec<SideRow> {
    let skipped = |test: &str, e: Error| {
        SideRow::Skipped(SkippedRow {
            stage: format!("{equation} {test}"),
            reason: e.to_string(),
        })
    };
    let fit = match ols_fit(y, x, CovarianceKind::Classical) {
        Ok(f) => f,
        Err(e) => return vec![skipped("diagnostics", e)],
    };
    let dc = cfg.diagnostics_config();
    let tests: [(&str, Result<DiagnosticEntry>); 4] = [
        ("serial correlation", breusch_godfrey(&fit, x, dc.bg_order)),
        ("heteroskedasticity", het_test(&fit, x, dc.het)),
        ("normality", jarque_bera(fit.residuals.as_slice())),
        ("functional form", ramsey_reset(&fit, x, &dc.reset_powers)),
    ];
    let mut rows: Vec<SideRow> = tests
        .into_iter()
        .map(|(name, r)| match r {
            Ok(e) => SideRow::Diagnostic(diag_row(equation, &e)),
            Err(e) => skipped(name, e),
        })
        .collect();
    for (name, r) in [
        ("CUSUM", cusum(y, x, cfg.level)),
        ("CUSUMSQ", cusumsq(y, x, cfg.level)),
    ] {
        rows.push(match r {
            Ok(p) => SideRow::Stability(stability_row(equation, &p)),
            Err(e) => skipped(name, e),
        });
    }
    rows
}

fn hypothesis(r: usize) -> String {
    if r == 0 {
        "r = 0".into()
    } else {
        format!("r ≤ {r}")
    }
}

fn static_levels(d: &Dataset, cfg: &PipelineConfig) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let y = DVector::from_column_slice(d.get(&cfg.dependent)?.values());
    let regs = cfg
        .regressors
        .iter()
        .map(|r| d.get(r).map(TimeSeries::values))
        .collect::<Result<Vec<_>>>()?;
    let x = DMatrix::from_fn(y.len(), regs.len() + 1, |t, j| {
        if j == 0 {
            1.0
        } else {
            regs[j - 1][t]
        }
    });
    Ok((y, x))
}

pub fn run_pipeline_with_sources(
    data: &Dataset,
    cfg: &PipelineConfig,
    sources: Vec<SourceInfo>,
    ingest: Option<IngestAudit>,
) -> Result<PipelineReport> {
    cfg.validate()?;
    let vars = cfg.model_variables();
    let d = data
        .select(&vars)
        .and_then(|d| d.window(cfg.start_year, cfg.end_year))
        .map_err(|e| e.in_stage("dataset"))?;
    let level = cfg.level;
    let mut caveats = Vec::new();

    let table1 = describe(&d)
        .into_iter()
        .map(|s| {
            let unit = cfg
                .variable(&s.name)
                .map(|v| v.unit.clone())
                .unwrap_or_default();
            Table1Row {
                unit: if unit.is_empty() {
                    "log10".into()
                } else {
                    format!("log10 of {unit}")
                },
                variable: s.name,
                obs: s.n,
                mean: s.mean,
                sd: s.sd,
                min: s.min,
                max: s.max,
                degenerate: s.degenerate,
            }
        })
        .collect();

    let mut table2 = Vec::new();
    let mut i1 = BTreeMap::new();
    let lag_policy = cfg.unitroot.lag_policy();
    let bw_policy = cfg.unitroot.bandwidth_policy();
    for s in d.series() {
        let diff = s.difference(1).map_err(|e| e.in_stage("unit-root"))?;
        for (transform, series) in [(Transform::Level, s), (Transform::FirstDifference, &diff)] {
            for &spec in &cfg.unitroot.specs {
                let adf =
                    adf_test(series, spec, lag_policy).map_err(|e| e.in_stage("unit-root"))?;
                table2.push(unit_root_row(s.name(), transform, &adf, level));
                let pp = pp_test(series, spec, bw_policy).map_err(|e| e.in_stage("unit-root"))?;
                table2.push(unit_root_row(s.name(), transform, &pp, level));
            }
        }
        let lvl = adf_test(s, DeterministicSpec::Constant, lag_policy)
            .map_err(|e| e.in_stage("unit-root"))?;
        let dif = adf_test(&diff, DeterministicSpec::Constant, lag_policy)
            .map_err(|e| e.in_stage("unit-root"))?;
        let is_i1 = !lvl.reject(level) && dif.reject(level);
        if !is_i1 {
            caveats.push(format!(
                "{} is not classified I(1) by ADF with constant at {level} (level {:.3}, first difference {:.3}); \
                 cointegration results that include it should be read with care",
                s.name(),
                lvl.statistic,
                dif.statistic
            ));
        }
        i1.insert(s.name().to_string(), is_i1);
    }

    let mut table3 = Vec::new();
    let za_policy = cfg.za.lag_policy();
    for s in d.series() {
        let diff = s.difference(1).map_err(|e| e.in_stage("zivot-andrews"))?;
        for (transform, series) in [(Transform::Level, s), (Transform::FirstDifference, &diff)] {
            for &model in &cfg.za.models {
                let z = za_test(series, model, cfg.za.trimming, za_policy)
                    .map_err(|e| e.in_stage("zivot-andrews"))?;
                table3.push(Table3Row {
                    variable: s.name().to_string(),
                    transform,
                    model: format!("{model:?}"),
                    break_year: z.break_year,
                    statistic: z.min_statistic,
                    lags: z.lags,
                    cv_1: z.critical_values.pct1,
                    cv_5: z.critical_values.pct5,
                    cv_10: z.critical_values.pct10,
                    stars: z.stars().into(),
                    reject: z.reject(level),
                });
            }
        }
    }

    let lags = lag_selection_table(&d, cfg.pmax).map_err(|e| e.in_stage("lag selection"))?;
    let choice = lags.selected;
    let table4 = lags
        .rows
        .iter()
        .map(|r| {
            let picks = [
                ("lr", choice.lr),
                ("fpe", choice.fpe),
                ("aic", choice.aic),
                ("sc", choice.sc),
                ("hq", choice.hq),
            ];
            Table4Row {
                lag: r.lag,
                loglik: r.loglik,
                lr: r.lr,
                fpe: r.fpe,
                aic: r.aic,
                sc: r.sc,
                hq: r.hq,
                selected_by: picks
                    .iter()
                    .filter(|(_, p)| *p == r.lag)
                    .map(|(c, _)| c.to_string())
                    .collect(),
            }
        })
        .collect();

    let vecm = cfg
        .johansen
        .spec(choice.aic)
        .map_err(|e| e.in_stage("johansen"))?;
    let eig = johansen_eigen(&d, vecm).map_err(|e| e.in_stage("johansen"))?;
    let mut table5 = Vec::new();
    let mut decided_rank = None;
    match eig.rank_test(level) {
        Ok(rt) => {
            decided_rank = Some(rt.decided_rank);
            for r in &rt.rows {
                table5.push(Table5Row::Rank(RankReportRow {
                    hypothesis: hypothesis(r.null_rank),
                    null_rank: r.null_rank,
                    eigenvalue: r.eigenvalue,
                    trace_stat: r.trace_stat,
                    trace_cv: r.trace_cv.get(level),
                    trace_stars: r.trace_stars().into(),
                    trace_reject: r.trace_reject,
                    maxeig_stat: r.maxeig_stat,
                    maxeig_cv: r.maxeig_cv.get(level),
                    maxeig_stars: r.maxeig_stars().into(),
                    maxeig_reject: r.maxeig_reject,
                }));
            }
            if rt.decided_rank == 0 {
                caveats.push(format!(
                    "no cointegration at {level} by the trace test; the DOLS estimates below assume a long-run relation"
                ));
            }
        }
        Err(e) => {
            caveats.push(format!("rank test skipped: {e}"));
            table5.push(Table5Row::Skipped(SkippedRow {
                stage: "rank test".into(),
                reason: e.to_string(),
            }));
        }
    }
    let (ys, xs) = static_levels(&d, cfg).map_err(|e| e.in_stage("diagnostics"))?;
    for row in diagnostic_rows("levels", &ys, &xs, cfg) {
        table5.push(match row {
            SideRow::Diagnostic(r) => Table5Row::Diagnostic(r),
            SideRow::Stability(r) => Table5Row::Stability(r),
            SideRow::Skipped(r) => Table5Row::Skipped(r),
        });
    }

    let regressors: Vec<&str> = cfg.regressors.iter().map(String::as_str).collect();
    let (spec, selected_by_sc) = match cfg.dols.select_max_order {
        Some(max) => {
            let mut s = select_leads_lags(&d, &cfg.dependent, &regressors, max)
                .map_err(|e| e.in_stage("dols"))?;
            s.bandwidth = cfg.dols.bandwidth_policy();
            (s, true)
        }
        None => (cfg.dols.fixed_spec(), false),
    };
    let fit = dols_fit(&d, &cfg.dependent, &regressors, spec).map_err(|e| e.in_stage("dols"))?;
    let mut table6: Vec<Table6Row> = fit
        .longrun
        .iter()
        .map(|c| {
            Table6Row::Coefficient(CoefficientRow {
                variable: c.name.clone(),
                coefficient: c.coefficient,
                std_error: c.std_error,
                t_ratio: c.t_ratio,
                p_value: c.p_value,
                stars: p_value_stars(c.p_value).into(),
            })
        })
        .collect();
    for row in diagnostic_rows("dols", &fit.response, &fit.design, cfg) {
        table6.push(match row {
            SideRow::Diagnostic(r) => Table6Row::Diagnostic(r),
            SideRow::Stability(r) => Table6Row::Stability(r),
            SideRow::Skipped(r) => Table6Row::Skipped(r),
        });
    }

    let dc = cfg.diagnostics_config();
    let decisions = vec![
        "all series enter in base-10 logarithms".to_string(),
        format!(
            "ADF lags chosen by {:?} up to {}; PP bandwidth {}",
            cfg.unitroot.criterion,
            cfg.unitroot.max_lag.map_or("floor(12 (T/100)^(1/4))".into(), |m| m.to_string()),
            cfg.unitroot.pp_bandwidth.map_or("floor(4 (T/100)^(2/9))".into(), |b| b.to_string())
        ),
        "ADF/PP critical values from MacKinnon (2010) response surfaces at the regression sample size".into(),
        format!(
            "Zivot-Andrews trimming {}, lags chosen per break date by {:?}",
            cfg.za.trimming, cfg.za.criterion
        ),
        format!(
            "Johansen deterministic case {} (unrestricted constant, no trend in the relation for case 3); {} lagged differences ({})",
            cfg.johansen.det_case,
            vecm.diff_lags,
            if cfg.johansen.diff_lags.is_some() { "configured" } else { "AIC lag order minus one" }
        ),
        "rank decided by the first non-rejected trace null".into(),
        "DOLS augments with leads and lags of the differenced regressors".into(),
        format!(
            "DOLS standard errors from the Bartlett long-run variance of the residuals, bandwidth {}",
            fit.bandwidth
        ),
        format!(
            "serial correlation: Breusch-Godfrey order {}; heteroskedasticity: {:?}; functional form: RESET (LM form) powers {:?}",
            dc.bg_order, dc.het, dc.reset_powers
        ),
        "table5 diagnostics use the static levels regression; table6 diagnostics use the DOLS regression".into(),
        format!("CUSUM/CUSUMSQ bounds at {level}"),
    ];

    let meta = ReportMeta {
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        sources,
        ingest,
        data_sha256: dataset_sha256(&d),
        first_year: d.start_year(),
        last_year: d.end_year(),
        n_obs: d.n_obs(),
        units: "log10 of % of GDP (EXC: log10 of index; INF: log10 of annual %)".into(),
        integrated_of_order_one: i1,
        var_lag_choice: Some(choice),
        johansen_diff_lags: Some(vecm.diff_lags),
        johansen_case: cfg.johansen.det_case,
        decided_rank,
        dols_order: Some(DolsOrder {
            leads: fit.spec.leads,
            lags: fit.spec.lags,
            selected_by_sc,
            bandwidth: fit.bandwidth,
        }),
        caveats,
        decisions,
    };
    Ok(PipelineReport {
        meta,
        table1,
        table2,
        table3,
        table4,
        table5,
        table6,
    })
}
