//! Monte Carlo null distributions for the Dickey-Fuller, Zivot-Andrews and
//! Johansen statistics, and a check of every embedded critical value
//! against them.
//!
//! Replication `i` draws from its own ChaCha stream derived from
//! `(seed, target, i)`, so results do not depend on how rayon schedules
//! the work.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::johansen::{
    johansen_eigen_matrix, rank_statistics, DetCase, VecmSpec, CASE3_MAXEIG, CASE3_TRACE,
    MAX_TABLE_DIM,
};
use crate::linreg::{ols_fit, CovarianceKind};
use crate::significance::{CriticalValues, Level};
use crate::unitroot::{df_regression, df_surface, eval_surface, DeterministicSpec, LagPolicy};
use crate::zabreak::{za_critical_values, za_search, ZaModel};

/// Burn-in discarded before the Zivot-Andrews sample.
pub const ZA_BURN_IN: usize = 50;
/// Per-period drift of the Johansen null random walks; the case 3
/// asymptotics assume the constant generates a linear trend in the levels.
pub const JOHANSEN_DRIFT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JohansenStat {
    Trace,
    Maxeig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum McTarget {
    Df {
        spec: DeterministicSpec,
    },
    Za {
        model: ZaModel,
        trimming: f64,
    },
    Johansen {
        k: usize,
        det_case: DetCase,
        statistic: JohansenStat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Lower,
    Upper,
}

impl McTarget {
    pub fn tail(&self) -> Tail {
        match self {
            McTarget::Johansen { .. } => Tail::Upper,
            _ => Tail::Lower,
        }
    }

    pub fn label(&self) -> String {
        match self {
            McTarget::Df { spec } => format!("df({})", spec.label()),
            McTarget::Za { model, trimming } => format!("za({model:?}, {trimming})"),
            McTarget::Johansen {
                k,
                det_case,
                statistic,
            } => format!(
                "johansen({}, n-r={k}, case {})",
                match statistic {
                    JohansenStat::Trace => "trace",
                    JohansenStat::Maxeig => "maxeig",
                },
                det_case.number()
            ),
        }
    }

    /// Parse `df-<spec>`, `za-<model>` or `johansen-<trace|maxeig>-<n−r>`
    /// (case 3). `trimming` applies to Zivot-Andrews targets.
    pub fn parse(s: &str, trimming: f64) -> Result<McTarget> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("unknown Monte Carlo target `{s}`"));
        if let Some(spec) = t.strip_prefix("df-") {
            return Ok(McTarget::Df {
                spec: spec.parse()?,
            });
        }
        if let Some(model) = t.strip_prefix("za-") {
            return Ok(McTarget::Za {
                model: model.parse()?,
                trimming,
            });
        }
        if let Some(rest) = t.strip_prefix("johansen-") {
            let (stat, k) = rest.rsplit_once('-').ok_or_else(bad)?;
            let statistic = match stat {
                "trace" => JohansenStat::Trace,
                "maxeig" | "max-eig" => JohansenStat::Maxeig,
                _ => return Err(bad()),
            };
            let k = k.parse().map_err(|_| bad())?;
            return Ok(McTarget::Johansen {
                k,
                det_case: DetCase::UnrestrictedConstant,
                statistic,
            });
        }
        Err(bad())
    }

    /// Stable identifier mixed into the random stream.
    fn stream_tag(&self) -> u64 {
        match self {
            McTarget::Df { spec } => 0x100 + spec.n_terms() as u64,
            McTarget::Za { model, trimming } => {
                0x200 + *model as u64 * 0x10 + (trimming * 1000.0).round() as u64 * 0x100
            }
            // trace and maxeig come from the same draws
            McTarget::Johansen { k, det_case, .. } => {
                0x300 + *k as u64 + det_case.number() as u64 * 0x100
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub sample_size: usize,
    pub replications: usize,
    pub seed: u64,
    pub target: McTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub level: Level,
    pub quantile: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub target: McTarget,
    pub label: String,
    pub tail: Tail,
    pub sample_size: usize,
    pub replications: usize,
    pub seed: u64,
    pub rows: Vec<QuantileRow>,
}

impl QuantileTable {
    pub fn get(&self, level: Level) -> &QuantileRow {
        self.rows
            .iter()
            .find(|r| r.level == level)
            .expect("every level is simulated")
    }
}

fn rng_for(seed: u64, tag: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 40) | rep as u64);
    rng
}

fn walk(rng: &mut ChaCha8Rng, n: usize, drift: f64) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            acc += drift + rng.sample::<f64, _>(StandardNormal);
            acc
        })
        .collect()
}

fn df_draw(rng: &mut ChaCha8Rng, n: usize, spec: DeterministicSpec) -> Result<f64> {
    let y = walk(rng, n, 0.0);
    let (dep, x, n_det) = df_regression(&y, spec, 0, 1);
    let fit = ols_fit(&dep, &x, CovarianceKind::Classical)?;
    Ok(fit.t_ratio(n_det))
}

fn za_draw(rng: &mut ChaCha8Rng, n: usize, model: ZaModel, trimming: f64) -> Result<f64> {
    let y = walk(rng, n + ZA_BURN_IN, 0.0);
    let s = za_search(
        &y[ZA_BURN_IN..],
        model,
        trimming,
        LagPolicy::Fixed { lags: 0 },
    )?;
    Ok(s.min_statistic)
}

fn johansen_draw(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    det_case: DetCase,
) -> Result<(f64, f64)> {
    let mut m = DMatrix::zeros(n, k);
    for j in 0..k {
        for (i, v) in walk(rng, n, JOHANSEN_DRIFT).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let names: Vec<String> = (0..k).map(|j| format!("y{j}")).collect();
    let e = johansen_eigen_matrix(
        &m,
        &names,
        VecmSpec {
            diff_lags: 0,
            det_case,
        },
    )?;
    let (trace, maxeig) = rank_statistics(&e.eigenvalues, e.n_obs)?;
    Ok((trace[0], maxeig[0]))
}

fn validate_config(cfg: &McConfig) -> Result<()> {
    if cfg.replications < 10 {
        return Err(Error::Config(format!(
            "at least 10 replications are needed, got {}",
            cfg.replications
        )));
    }
    if cfg.sample_size < 20 {
        return Err(Error::Config(format!(
            "simulated samples must have at least 20 observations, got {}",
            cfg.sample_size
        )));
    }
    if let McTarget::Johansen { k, .. } = cfg.target {
        if k == 0 || k > MAX_TABLE_DIM {
            return Err(Error::Config(format!(
                "n − r must be in 1..={MAX_TABLE_DIM}, got {k}"
            )));
        }
    }
    Ok(())
}

/// Raw statistics, one per replication, in replication order.
pub fn simulate_statistics(cfg: &McConfig) -> Result<Vec<f64>> {
    validate_config(cfg)?;
    let tag = cfg.target.stream_tag();
    let n = cfg.sample_size;
    (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(cfg.seed, tag, rep);
            match cfg.target {
                McTarget::Df { spec } => df_draw(&mut rng, n, spec),
                McTarget::Za { model, trimming } => za_draw(&mut rng, n, model, trimming),
                McTarget::Johansen {
                    k,
                    det_case,
                    statistic,
                } => {
                    let (t, m) = johansen_draw(&mut rng, n, k, det_case)?;
                    Ok(match statistic {
                        JohansenStat::Trace => t,
                        JohansenStat::Maxeig => m,
                    })
                }
            }
        })
        .collect()
}

/// Empirical quantile at probability `p` and its order-statistic standard
/// error, from the ±1 binomial-sd window around the quantile index.
pub fn quantile_with_se(sorted: &[f64], p: f64) -> (f64, f64) {
    let r = sorted.len();
    let rf = r as f64;
    let idx = ((rf * p).ceil() as usize).clamp(1, r) - 1;
    let half = (rf * p * (1.0 - p)).sqrt();
    let lo = ((rf * p - half).floor().max(1.0) as usize - 1).min(r - 1);
    let hi = ((rf * p + half).ceil() as usize).clamp(1, r) - 1;
    (sorted[idx], (sorted[hi] - sorted[lo]) / 2.0)
}

fn table_from(cfg: &McConfig, mut stats: Vec<f64>) -> QuantileTable {
    stats.sort_by(|a, b| a.total_cmp(b));
    let tail = cfg.target.tail();
    let rows = Level::ALL
        .into_iter()
        .map(|level| {
            let p = match tail {
                Tail::Lower => level.alpha(),
                Tail::Upper => 1.0 - level.alpha(),
            };
            let (quantile, std_error) = quantile_with_se(&stats, p);
            QuantileRow {
                level,
                quantile,
                std_error,
            }
        })
        .collect();
    QuantileTable {
        target: cfg.target,
        label: cfg.target.label(),
        tail,
        sample_size: cfg.sample_size,
        replications: cfg.replications,
        seed: cfg.seed,
        rows,
    }
}

pub fn simulate_quantiles(cfg: &McConfig) -> Result<QuantileTable> {
    let stats = simulate_statistics(cfg)?;
    Ok(table_from(cfg, stats))
}

/// The constants checked by [`validate_tables`]; `Default` is what the
/// crate ships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedTables {
    /// Response-surface rows `[b0..b3]` per spec, indexed 1%, 5%, 10%.
    pub df: Vec<(DeterministicSpec, [[f64; 4]; 3])>,
    pub za: Vec<(ZaModel, CriticalValues)>,
    /// Case 3, indexed by `n − r − 1`, columns 10%, 5%, 1%.
    pub johansen_trace: [[f64; 3]; MAX_TABLE_DIM],
    pub johansen_maxeig: [[f64; 3]; MAX_TABLE_DIM],
}

impl Default for EmbeddedTables {
    fn default() -> Self {
        let df = [
            DeterministicSpec::None,
            DeterministicSpec::Constant,
            DeterministicSpec::ConstantTrend,
        ]
        .into_iter()
        .map(|s| {
            (
                s,
                [
                    df_surface(s, Level::One),
                    df_surface(s, Level::Five),
                    df_surface(s, Level::Ten),
                ],
            )
        })
        .collect();
        let za = [ZaModel::A, ZaModel::B, ZaModel::C]
            .into_iter()
            .map(|m| (m, za_critical_values(m)))
            .collect();
        EmbeddedTables {
            df,
            za,
            johansen_trace: CASE3_TRACE,
            johansen_maxeig: CASE3_MAXEIG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub sample_size: usize,
    pub replications: usize,
    pub seed: u64,
    pub za_trimming: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            sample_size: 500,
            replications: 5000,
            seed: 20_240_601,
            za_trimming: crate::zabreak::DEFAULT_TRIMMING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub target: String,
    pub level: Level,
    pub embedded: f64,
    pub simulated: f64,
    pub mc_std_error: f64,
    pub allowance: f64,
    pub difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

pub const DF_ZA_ALLOWANCE: f64 = 0.1;
pub const JOHANSEN_ALLOWANCE: f64 = 1.0;

fn compare(
    table: &QuantileTable,
    embedded: impl Fn(Level) -> f64,
    allowance: f64,
) -> Vec<ValidationEntry> {
    table
        .rows
        .iter()
        .map(|row| {
            let e = embedded(row.level);
            let difference = row.quantile - e;
            ValidationEntry {
                target: table.label.clone(),
                level: row.level,
                embedded: e,
                simulated: row.quantile,
                mc_std_error: row.std_error,
                allowance,
                difference,
                pass: difference.abs() < 3.0 * row.std_error + allowance,
            }
        })
        .collect()
}

fn level_index(level: Level) -> usize {
    match level {
        Level::One => 0,
        Level::Five => 1,
        Level::Ten => 2,
    }
}

/// Simulate every null distribution behind `tables` and compare.
pub fn validate_tables(
    cfg: &ValidationConfig,
    tables: &EmbeddedTables,
) -> Result<ValidationReport> {
    let mut entries = Vec::new();
    let base = |target| McConfig {
        sample_size: cfg.sample_size,
        replications: cfg.replications,
        seed: cfg.seed,
        target,
    };
    for (spec, rows) in &tables.df {
        let mc = base(McTarget::Df { spec: *spec });
        let table = simulate_quantiles(&mc)?;
        // the surface is evaluated at the regression sample size
        let n_reg = cfg.sample_size - 1;
        entries.extend(compare(
            &table,
            |l| eval_surface(&rows[level_index(l)], n_reg),
            DF_ZA_ALLOWANCE,
        ));
    }
    for (model, cv) in &tables.za {
        let mc = base(McTarget::Za {
            model: *model,
            trimming: cfg.za_trimming,
        });
        let table = simulate_quantiles(&mc)?;
        entries.extend(compare(&table, |l| cv.get(l), DF_ZA_ALLOWANCE));
    }
    for k in 1..=MAX_TABLE_DIM {
        let trace_cfg = base(McTarget::Johansen {
            k,
            det_case: DetCase::UnrestrictedConstant,
            statistic: JohansenStat::Trace,
        });
        validate_config(&trace_cfg)?;
        let draws = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = rng_for(cfg.seed, trace_cfg.target.stream_tag(), rep);
                johansen_draw(&mut rng, cfg.sample_size, k, DetCase::UnrestrictedConstant)
            })
            .collect::<Result<Vec<_>>>()?;
        let (trace, maxeig): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
        let col = |l: Level| 2 - level_index(l);
        let t = table_from(&trace_cfg, trace);
        entries.extend(compare(
            &t,
            |l| tables.johansen_trace[k - 1][col(l)],
            JOHANSEN_ALLOWANCE,
        ));
        let maxeig_cfg = base(McTarget::Johansen {
            k,
            det_case: DetCase::UnrestrictedConstant,
            statistic: JohansenStat::Maxeig,
        });
        let m = table_from(&maxeig_cfg, maxeig);
        entries.extend(compare(
            &m,
            |l| tables.johansen_maxeig[k - 1][col(l)],
            JOHANSEN_ALLOWANCE,
        ));
    }
    Ok(ValidationReport {
        config: *cfg,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn df_cfg(reps: usize, seed: u64) -> McConfig {
        McConfig {
            sample_size: 100,
            replications: reps,
            seed,
            target: McTarget::Df {
                spec: DeterministicSpec::Constant,
            },
        }
    }

    #[test]
    fn target_names() {
        assert_eq!(
            McTarget::parse("df-constant", 0.15).unwrap(),
            McTarget::Df {
                spec: DeterministicSpec::Constant
            }
        );
        assert_eq!(
            McTarget::parse("ZA-C", 0.1).unwrap(),
            McTarget::Za {
                model: ZaModel::C,
                trimming: 0.1
            }
        );
        assert_eq!(
            McTarget::parse("johansen-maxeig-3", 0.15).unwrap(),
            McTarget::Johansen {
                k: 3,
                det_case: DetCase::UnrestrictedConstant,
                statistic: JohansenStat::Maxeig
            }
        );
        assert!(McTarget::parse("johansen-trace-x", 0.15).is_err());
        assert!(McTarget::parse("kpss", 0.15).is_err());
    }

    #[test]
    fn seed_determines_output() {
        let a = simulate_statistics(&df_cfg(200, 7)).unwrap();
        let b = simulate_statistics(&df_cfg(200, 7)).unwrap();
        let c = simulate_statistics(&df_cfg(200, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invariant_to_worker_count() {
        let cfg = McConfig {
            sample_size: 60,
            replications: 300,
            seed: 3,
            target: McTarget::Za {
                model: ZaModel::C,
                trimming: 0.15,
            },
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_quantiles(&cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn quantile_index_and_window() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let (q, se) = quantile_with_se(&v, 0.05);
        assert_eq!(q, 5.0);
        // ranks ⌊5 − 2.18⌋ = 2 and ⌈5 + 2.18⌉ = 8
        assert!((se - 3.0).abs() < 1e-12);
        assert_eq!(quantile_with_se(&v, 0.99).0, 99.0);
    }

    #[test]
    fn tails_are_ordered() {
        let t = simulate_quantiles(&df_cfg(1000, 1)).unwrap();
        assert!(t.get(Level::One).quantile < t.get(Level::Five).quantile);
        assert!(t.get(Level::Five).quantile < t.get(Level::Ten).quantile);
        let j = simulate_quantiles(&McConfig {
            sample_size: 100,
            replications: 1000,
            seed: 1,
            target: McTarget::Johansen {
                k: 2,
                det_case: DetCase::UnrestrictedConstant,
                statistic: JohansenStat::Trace,
            },
        })
        .unwrap();
        assert!(j.get(Level::One).quantile > j.get(Level::Five).quantile);
        assert!(j.get(Level::Five).quantile > j.get(Level::Ten).quantile);
    }

    #[test]
    fn config_errors() {
        assert!(simulate_statistics(&df_cfg(5, 1)).is_err());
        let bad = McConfig {
            target: McTarget::Johansen {
                k: 13,
                det_case: DetCase::UnrestrictedConstant,
                statistic: JohansenStat::Trace,
            },
            ..df_cfg(100, 1)
        };
        assert!(simulate_statistics(&bad).is_err());
    }
}
