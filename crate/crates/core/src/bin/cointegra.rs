use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cointegra::config::PipelineConfig;
use cointegra::diagnostics::{run_diagnostics, DiagnosticsReport};
use cointegra::dols::{dols_fit, select_leads_lags, DolsSpec};
use cointegra::ingest::{build_dataset, detect_kind, parse_csv, VariableSource};
use cointegra::johansen::{johansen_eigen, DetCase, VecmSpec};
use cointegra::mc::{
    simulate_quantiles, validate_tables, EmbeddedTables, McConfig, McTarget, ValidationConfig,
};
use cointegra::pipeline::{default_data_dir, load_dataset, load_records, run_pipeline_from_dir};
use cointegra::report::{emit, Format};
use cointegra::series::describe;
use cointegra::significance::Level;
use cointegra::unitroot::{adf_test, pp_test, BandwidthPolicy, DeterministicSpec, LagPolicy};
use cointegra::varselect::lag_selection_table;
use cointegra::zabreak::{za_test, ZaModel};
use cointegra::{Dataset, Error, Result};

/// `println!` that reports write failures instead of panicking.
macro_rules! out {
    ($($t:tt)*) => {
        writeln!(std::io::stdout(), $($t)*)?
    };
}

#[derive(Parser)]
#[command(
    name = "cointegra",
    version,
    about = "Unit roots, cointegration and DOLS for annual macro series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Directory holding the source CSV files [env: COINTEGRA_DATA_DIR]
    #[arg(long)]
    data: Option<PathBuf>,
    /// Pipeline TOML; defaults to `pipeline.toml` in the data directory if present
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the raw values instead of base-10 logs
    #[arg(long)]
    no_log: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestKind {
    Adf,
    Pp,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and print the six report tables
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "text")]
        format: String,
        /// Write to a file instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Summary statistics of the model variables
    Describe {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// ADF and Phillips-Perron tests
    Unitroot {
        #[command(flatten)]
        data: DataArgs,
        /// Series to test (default: every model variable)
        #[arg(long, alias = "vars", value_delimiter = ',')]
        series: Vec<String>,
        /// Plain `year,value` CSV to test instead of the configured sources
        #[arg(long)]
        file: Option<PathBuf>,
        /// Name for `--file` (default: file stem)
        #[arg(long)]
        name: Option<String>,
        /// none, constant or constant-trend (default: those in the config)
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, value_enum, default_value = "both")]
        test: TestKind,
        /// Test first differences
        #[arg(long)]
        diff: bool,
        /// Fixed ADF lag count instead of selection
        #[arg(long)]
        lags: Option<usize>,
        /// Fixed PP bandwidth
        #[arg(long)]
        bandwidth: Option<usize>,
        #[arg(long, default_value = "5%")]
        level: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Zivot-Andrews unit root test with one endogenous break
    Za {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, alias = "vars", value_delimiter = ',')]
        series: Vec<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        /// A, B or C (default: those in the config)
        #[arg(long, alias = "spec")]
        model: Option<String>,
        #[arg(long)]
        trimming: Option<f64>,
        #[arg(long)]
        diff: bool,
        #[arg(long)]
        lags: Option<usize>,
        #[arg(long, default_value = "5%")]
        level: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// VAR lag order selection table
    Lagselect {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, alias = "series", value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        pmax: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Johansen trace and maximum-eigenvalue rank tests
    Johansen {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, alias = "series", value_delimiter = ',')]
        vars: Vec<String>,
        /// Deterministic case 1–4
        #[arg(long, alias = "spec")]
        case: Option<String>,
        /// Lagged differences in the VECM
        #[arg(long)]
        diff_lags: Option<usize>,
        #[arg(long, default_value = "5%")]
        level: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Dynamic OLS long-run estimates
    Dols {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        dependent: Option<String>,
        /// Regressors
        #[arg(long, alias = "series", value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        leads: Option<usize>,
        #[arg(long)]
        lags: Option<usize>,
        /// Choose a symmetric order by SC up to this bound
        #[arg(long)]
        select_max: Option<usize>,
        #[arg(long)]
        bandwidth: Option<usize>,
        #[arg(long, default_value = "5%")]
        level: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Residual diagnostics and CUSUM/CUSUMSQ on the static levels regression
    Diagnose {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        dependent: Option<String>,
        #[arg(long, alias = "series", value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, default_value = "5%")]
        level: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Monte Carlo critical values
    #[command(name = "mc-cv")]
    McCv(McCvArgs),
    /// EXP, EXC and INF in raw units as CSV, ready for plotting
    Figure1 {
        #[command(flatten)]
        data: DataArgs,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct McCvArgs {
    #[command(subcommand)]
    action: Option<McAction>,
    /// df-<none|constant|constant-trend>, za-<a|b|c>, johansen-<trace|maxeig>-<n−r>
    #[arg(long)]
    target: Option<String>,
    #[arg(long = "T", alias = "sample-size", default_value_t = 500)]
    t: usize,
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
    /// Only report this level
    #[arg(long)]
    level: Option<String>,
    #[arg(long, default_value_t = 0.15)]
    trimming: f64,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutFormat,
}

#[derive(Subcommand)]
enum McAction {
    /// Check every embedded DF, ZA and Johansen constant by simulation
    #[command(name = "validate", alias = "validate_tables")]
    Validate {
        #[arg(long = "T", alias = "sample-size", default_value_t = 500)]
        t: usize,
        #[arg(long, default_value_t = 5000)]
        reps: usize,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn level_arg(s: &str) -> Result<Level> {
    s.parse::<Level>().map_err(config_error)
}

struct Loaded {
    cfg: PipelineConfig,
    dir: PathBuf,
}

fn load_config(args: &DataArgs) -> Result<Loaded> {
    let dir = args.data.clone().unwrap_or_else(default_data_dir);
    let cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            PipelineConfig::from_toml(&text)?
        }
        None => {
            let p = dir.join("pipeline.toml");
            match std::fs::read_to_string(&p) {
                Ok(text) => PipelineConfig::from_toml(&text)?,
                Err(_) => PipelineConfig::default(),
            }
        }
    };
    Ok(Loaded { cfg, dir })
}

fn dataset(args: &DataArgs) -> Result<(Loaded, Dataset)> {
    let l = load_config(args)?;
    let (d, _, _) = load_dataset(&l.cfg, &l.dir, !args.no_log)?;
    Ok((l, d))
}

fn pick<'a>(requested: &'a [String], fallback: Vec<&'a str>) -> Vec<&'a str> {
    if requested.is_empty() {
        fallback
    } else {
        requested.iter().map(String::as_str).collect()
    }
}

/// A single plain `year,value` file as a one-series dataset.
fn plain_file(path: &Path, name: Option<&str>, log10: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("series");
    let name = name.unwrap_or(stem);
    let kind = detect_kind(&text)?;
    let records = parse_csv(kind, &text, Some(name))?;
    let years: Vec<i32> = records.iter().map(|r| r.year).collect();
    let (from, to) = match (years.iter().min(), years.iter().max()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => {
            return Err(Error::InsufficientData(format!(
                "{} has no rows",
                path.display()
            )))
        }
    };
    let code = records[0].series_code.clone();
    let var = VariableSource {
        symbol: name.to_string(),
        code,
        kind,
    };
    Ok(build_dataset(&records, &[var], from, to, log10)?.0)
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    out!(
        "{}",
        serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?
    );
    Ok(())
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline {
            data,
            format,
            output,
        } => {
            let format: Format = format.parse()?;
            let l = load_config(&data)?;
            let report = run_pipeline_from_dir(&l.cfg, &l.dir)?;
            let text = emit(&report, format);
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::Describe { data, vars, format } => {
            let (l, d) = dataset(&data)?;
            let d = d.select(&pick(&vars, l.cfg.model_variables()))?;
            let rows = describe(&d);
            match format {
                OutFormat::Json => print_json(&rows)?,
                OutFormat::Text => {
                    out!(
                        "{:<8} {:>4} {:>9} {:>9} {:>9} {:>9}",
                        "variable",
                        "obs",
                        "mean",
                        "sd",
                        "min",
                        "max"
                    );
                    for r in rows {
                        out!(
                            "{:<8} {:>4} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                            r.name,
                            r.n,
                            r.mean,
                            r.sd,
                            r.min,
                            r.max
                        );
                    }
                }
            }
        }
        Command::Unitroot {
            data,
            series,
            file,
            name,
            spec,
            test,
            diff,
            lags,
            bandwidth,
            level,
            format,
        } => {
            let level = level_arg(&level)?;
            let l = load_config(&data)?;
            let d = match &file {
                Some(p) => plain_file(p, name.as_deref(), !data.no_log)?,
                None => load_dataset(&l.cfg, &l.dir, !data.no_log)?.0,
            };
            let specs: Vec<DeterministicSpec> = match spec {
                Some(s) => vec![s.parse()?],
                None => l.cfg.unitroot.specs.clone(),
            };
            let lag_policy = lags.map_or(l.cfg.unitroot.lag_policy(), |lags| LagPolicy::Fixed {
                lags,
            });
            let bw = bandwidth.map_or(l.cfg.unitroot.bandwidth_policy(), |bandwidth| {
                BandwidthPolicy::Fixed { bandwidth }
            });
            let names = if file.is_some() {
                d.names()
            } else {
                pick(&series, l.cfg.model_variables())
            };
            let mut out = Vec::new();
            for n in names {
                let s = d.get(n)?;
                let s = if diff { s.difference(1)? } else { s.clone() };
                for &sp in &specs {
                    if matches!(test, TestKind::Adf | TestKind::Both) {
                        out.push((n.to_string(), adf_test(&s, sp, lag_policy)?));
                    }
                    if matches!(test, TestKind::Pp | TestKind::Both) {
                        out.push((n.to_string(), pp_test(&s, sp, bw)?));
                    }
                }
            }
            match format {
                OutFormat::Json => print_json(&out)?,
                OutFormat::Text => {
                    out!(
                        "{:<8} {:<4} {:<15} {:>12} {:>7} {:>4} {:>8} {:>8} {:>8}  reject@{level}",
                        "series",
                        "test",
                        "spec",
                        "statistic",
                        "lags/bw",
                        "n",
                        "cv 1%",
                        "cv 5%",
                        "cv 10%"
                    );
                    for (n, r) in &out {
                        out!(
                            "{:<8} {:<4} {:<15} {:>12} {:>7} {:>4} {:>8.3} {:>8.3} {:>8.3}  {}",
                            n,
                            format!("{:?}", r.test).to_uppercase(),
                            r.spec.label(),
                            format!("{:.3}{}", r.statistic, r.stars()),
                            r.lags_or_bandwidth,
                            r.n_obs,
                            r.critical_values.pct1,
                            r.critical_values.pct5,
                            r.critical_values.pct10,
                            r.reject(level)
                        );
                    }
                }
            }
        }
        Command::Za {
            data,
            series,
            file,
            name,
            model,
            trimming,
            diff,
            lags,
            level,
            format,
        } => {
            let level = level_arg(&level)?;
            let l = load_config(&data)?;
            let d = match &file {
                Some(p) => plain_file(p, name.as_deref(), !data.no_log)?,
                None => load_dataset(&l.cfg, &l.dir, !data.no_log)?.0,
            };
            let models: Vec<ZaModel> = match model {
                Some(m) => vec![m.parse()?],
                None => l.cfg.za.models.clone(),
            };
            let trimming = trimming.unwrap_or(l.cfg.za.trimming);
            let policy = lags.map_or(l.cfg.za.lag_policy(), |lags| LagPolicy::Fixed { lags });
            let names = if file.is_some() {
                d.names()
            } else {
                pick(&series, l.cfg.model_variables())
            };
            let mut out = Vec::new();
            for n in names {
                let s = d.get(n)?;
                let s = if diff { s.difference(1)? } else { s.clone() };
                for &m in &models {
                    out.push((n.to_string(), za_test(&s, m, trimming, policy)?));
                }
            }
            match format {
                OutFormat::Json => print_json(&out)?,
                OutFormat::Text => {
                    out!(
                        "{:<8} {:<5} {:>6} {:>12} {:>4} {:>7} {:>7} {:>7}  reject@{level}",
                        "series",
                        "model",
                        "break",
                        "statistic",
                        "lags",
                        "cv 1%",
                        "cv 5%",
                        "cv 10%"
                    );
                    for (n, r) in &out {
                        out!(
                            "{:<8} {:<5} {:>6} {:>12} {:>4} {:>7.2} {:>7.2} {:>7.2}  {}",
                            n,
                            format!("{:?}", r.model),
                            r.break_year,
                            format!("{:.3}{}", r.min_statistic, r.stars()),
                            r.lags,
                            r.critical_values.pct1,
                            r.critical_values.pct5,
                            r.critical_values.pct10,
                            r.reject(level)
                        );
                    }
                }
            }
        }
        Command::Lagselect {
            data,
            vars,
            pmax,
            format,
        } => {
            let (l, d) = dataset(&data)?;
            let d = d.select(&pick(&vars, l.cfg.model_variables()))?;
            let t = lag_selection_table(&d, pmax.unwrap_or(l.cfg.pmax))?;
            match format {
                OutFormat::Json => print_json(&t)?,
                OutFormat::Text => {
                    let s = t.selected;
                    let mark = |lag: usize, pick: usize| if lag == pick { "*" } else { " " };
                    out!(
                        "{:>3} {:>10} {:>10} {:>11} {:>9} {:>9} {:>9}",
                        "lag",
                        "logL",
                        "LR",
                        "FPE",
                        "AIC",
                        "SC",
                        "HQ"
                    );
                    for r in &t.rows {
                        let lr = r.lr.map_or("NA".to_string(), |v| format!("{v:.3}"));
                        out!(
                            "{:>3} {:>10.3} {:>9}{} {:>10.3e}{} {:>8.3}{} {:>8.3}{} {:>8.3}{}",
                            r.lag,
                            r.loglik,
                            lr,
                            mark(r.lag, s.lr),
                            r.fpe,
                            mark(r.lag, s.fpe),
                            r.aic,
                            mark(r.lag, s.aic),
                            r.sc,
                            mark(r.lag, s.sc),
                            r.hq,
                            mark(r.lag, s.hq)
                        );
                    }
                    out!("n = {}; * marks each criterion's choice", t.n_obs);
                }
            }
        }
        Command::Johansen {
            data,
            vars,
            case,
            diff_lags,
            level,
            format,
        } => {
            let level = level_arg(&level)?;
            let (l, d) = dataset(&data)?;
            let d = d.select(&pick(&vars, l.cfg.model_variables()))?;
            let det_case: DetCase = match case {
                Some(c) => c.parse()?,
                None => DetCase::from_number(l.cfg.johansen.det_case)?,
            };
            let diff_lags = match diff_lags.or(l.cfg.johansen.diff_lags) {
                Some(k) => k,
                None => lag_selection_table(&d, l.cfg.pmax)?.selected.aic.max(1) - 1,
            };
            let eig = johansen_eigen(
                &d,
                VecmSpec {
                    diff_lags,
                    det_case,
                },
            )?;
            let rt = eig.rank_test(level)?;
            match format {
                OutFormat::Json => print_json(&rt)?,
                OutFormat::Text => {
                    out!(
                        "case {}, {} lagged differences, n = {}",
                        det_case.number(),
                        diff_lags,
                        rt.n_obs
                    );
                    out!(
                        "{:<7} {:>10} {:>24} {:>24}",
                        "H0",
                        "eigenvalue",
                        format!("trace > cv {level}"),
                        format!("maxeig > cv {level}")
                    );
                    for r in &rt.rows {
                        let cmp = |s: f64, cv: f64, st: &str| {
                            format!("{s:.3} {} {cv:.3}{st}", if s > cv { ">" } else { "<" })
                        };
                        let h = if r.null_rank == 0 {
                            "r = 0".to_string()
                        } else {
                            format!("r ≤ {}", r.null_rank)
                        };
                        out!(
                            "{:<7} {:>10.4} {:>24} {:>24}",
                            h,
                            r.eigenvalue,
                            cmp(r.trace_stat, r.trace_cv.get(level), r.trace_stars()),
                            cmp(r.maxeig_stat, r.maxeig_cv.get(level), r.maxeig_stars())
                        );
                    }
                    out!(
                        "rank (trace): {}; rank (maxeig): {}",
                        rt.decided_rank,
                        rt.maxeig_rank
                    );
                }
            }
        }
        Command::Dols {
            data,
            dependent,
            vars,
            leads,
            lags,
            select_max,
            bandwidth,
            level: _,
            format,
        } => {
            let (l, d) = dataset(&data)?;
            let dep = dependent.unwrap_or(l.cfg.dependent.clone());
            let regs = pick(&vars, l.cfg.regressors.iter().map(String::as_str).collect());
            let bw = bandwidth
                .map(|bandwidth| BandwidthPolicy::Fixed { bandwidth })
                .unwrap_or(l.cfg.dols.bandwidth_policy());
            let spec = match select_max.or(l.cfg.dols.select_max_order) {
                Some(m) if leads.is_none() && lags.is_none() => DolsSpec {
                    bandwidth: bw,
                    ..select_leads_lags(&d, &dep, &regs, m)?
                },
                _ => DolsSpec {
                    leads: leads.unwrap_or(l.cfg.dols.leads),
                    lags: lags.unwrap_or(l.cfg.dols.lags),
                    bandwidth: bw,
                },
            };
            let fit = dols_fit(&d, &dep, &regs, spec)?;
            match format {
                OutFormat::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        dependent: &'a str,
                        leads: usize,
                        lags: usize,
                        bandwidth: usize,
                        first_year: i32,
                        last_year: i32,
                        longrun: &'a [cointegra::dols::LongRunCoefficient],
                        nuisance: &'a [(String, f64)],
                    }
                    print_json(&Out {
                        dependent: &fit.dependent,
                        leads: fit.spec.leads,
                        lags: fit.spec.lags,
                        bandwidth: fit.bandwidth,
                        first_year: fit.first_year,
                        last_year: fit.last_year,
                        longrun: &fit.longrun,
                        nuisance: &fit.nuisance,
                    })?
                }
                OutFormat::Text => {
                    out!(
                        "dependent {}; leads {}, lags {}; bandwidth {}; {}–{}",
                        fit.dependent,
                        fit.spec.leads,
                        fit.spec.lags,
                        fit.bandwidth,
                        fit.first_year,
                        fit.last_year
                    );
                    out!(
                        "{:<8} {:>12} {:>10} {:>9} {:>8}",
                        "",
                        "coefficient",
                        "std.err",
                        "t",
                        "p"
                    );
                    for c in &fit.longrun {
                        out!(
                            "{:<8} {:>12} {:>10.3} {:>9.3} {:>8.3}",
                            c.name,
                            format!(
                                "{:.3}{}",
                                c.coefficient,
                                cointegra::significance::p_value_stars(c.p_value)
                            ),
                            c.std_error,
                            c.t_ratio,
                            c.p_value
                        );
                    }
                }
            }
        }
        Command::Diagnose {
            data,
            dependent,
            vars,
            level,
            format,
        } => {
            let level = level_arg(&level)?;
            let (l, d) = dataset(&data)?;
            let dep = dependent.unwrap_or(l.cfg.dependent.clone());
            let regs = pick(&vars, l.cfg.regressors.iter().map(String::as_str).collect());
            let y = nalgebra::DVector::from_column_slice(d.get(&dep)?.values());
            let cols = regs
                .iter()
                .map(|r| d.get(r).map(|s| s.values()))
                .collect::<Result<Vec<_>>>()?;
            let x = nalgebra::DMatrix::from_fn(y.len(), cols.len() + 1, |t, j| {
                if j == 0 {
                    1.0
                } else {
                    cols[j - 1][t]
                }
            });
            let mut dc = l.cfg.diagnostics_config();
            dc.level = level;
            let rep: DiagnosticsReport = run_diagnostics(&y, &x, &dc)?;
            match format {
                OutFormat::Json => print_json(&rep)?,
                OutFormat::Text => {
                    for e in rep.entries() {
                        out!(
                            "{:<28} stat {:>9.3}  χ²({})  p {:.3}",
                            e.test_name,
                            e.statistic,
                            e.dof,
                            e.p_value
                        );
                    }
                    out!("{:<28} {}", format!("CUSUM ({level})"), rep.cusum.verdict());
                    out!(
                        "{:<28} {}",
                        format!("CUSUMSQ ({level})"),
                        rep.cusumsq.verdict()
                    );
                }
            }
        }
        Command::McCv(a) => match a.action {
            Some(McAction::Validate {
                t,
                reps,
                seed,
                threads,
                format,
            }) => {
                let cfg = ValidationConfig {
                    sample_size: t,
                    replications: reps,
                    seed,
                    ..ValidationConfig::default()
                };
                let rep = with_threads(threads, || {
                    validate_tables(&cfg, &EmbeddedTables::default())
                })??;
                match format {
                    OutFormat::Json => print_json(&rep)?,
                    OutFormat::Text => {
                        out!("T = {t}, R = {reps}, seed {seed}");
                        out!(
                            "{:<32} {:>5} {:>10} {:>10} {:>8} {:>9}  result",
                            "target",
                            "level",
                            "embedded",
                            "simulated",
                            "mc se",
                            "diff"
                        );
                        for e in &rep.entries {
                            out!(
                                "{:<32} {:>5} {:>10.3} {:>10.3} {:>8.3} {:>9.3}  {}",
                                e.target,
                                e.level.label(),
                                e.embedded,
                                e.simulated,
                                e.mc_std_error,
                                e.difference,
                                if e.pass { "pass" } else { "FAIL" }
                            );
                        }
                        let failed = rep.failures().count();
                        out!(
                            "{} of {} constants pass",
                            rep.entries.len() - failed,
                            rep.entries.len()
                        );
                    }
                }
            }
            None => {
                let target = a.target.as_deref().ok_or_else(|| {
                    Error::Config("mc-cv needs --target or the `validate` subcommand".into())
                })?;
                let cfg = McConfig {
                    sample_size: a.t,
                    replications: a.reps,
                    seed: a.seed,
                    target: McTarget::parse(target, a.trimming)?,
                };
                let only = a.level.as_deref().map(level_arg).transpose()?;
                let mut table = with_threads(a.threads, || simulate_quantiles(&cfg))??;
                if let Some(lv) = only {
                    table.rows.retain(|r| r.level == lv);
                }
                match a.format {
                    OutFormat::Json => print_json(&table)?,
                    OutFormat::Text => {
                        out!("{} T = {} R = {} seed {}", table.label, a.t, a.reps, a.seed);
                        for r in &table.rows {
                            out!(
                                "{:>4} {:>10.4} (se {:.4})",
                                r.level.label(),
                                r.quantile,
                                r.std_error
                            );
                        }
                    }
                }
            }
        },
        Command::Figure1 { data } => {
            let l = load_config(&data)?;
            let (records, _) = load_records(&l.cfg, &l.dir)?;
            let wanted = ["EXP", "EXC", "INF"]
                .iter()
                .map(|s| l.cfg.variable(s).map(|v| v.source_spec()))
                .collect::<Result<Vec<_>>>()?;
            let (d, _) = build_dataset(&records, &wanted, l.cfg.start_year, l.cfg.end_year, false)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let header: Vec<&str> = std::iter::once("year").chain(d.names()).collect();
            w.write_record(&header)
                .map_err(|e| Error::Format(e.to_string()))?;
            for t in 0..d.n_obs() {
                let mut row = vec![(d.start_year() + t as i32).to_string()];
                row.extend(d.series().iter().map(|s| s.values()[t].to_string()));
                w.write_record(&row)
                    .map_err(|e| Error::Format(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
