//! Zivot-Andrews unit-root test with one endogenous break.
//!
//! For every candidate break index `TB` in the trimmed window the ADF-type
//! regression
//!
//! ```text
//! Δy_t = μ + β t + α y_{t−1} + θ DU_t + γ DT_t + Σ c_j Δy_{t−j} + e_t
//! ```
//!
//! is fitted, with `DU_t = 1[t > TB]` (models A, C) and
//! `DT_t = (t − TB)·1[t > TB]` (models B, C). The statistic is the smallest
//! t-ratio of `α` over candidates; the reported year is the first
//! post-break year.
//!
//! Candidate regressions share everything but the break columns, so the
//! search works on precomputed cross products plus suffix sums and solves a
//! small normal-equation system per candidate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::linreg::{gaussian_loglik, info_criteria_from};
use crate::series::TimeSeries;
use crate::significance::{lower_tail_stars, CriticalValues, Level};
use crate::unitroot::{check_not_constant, default_max_lag, feasible_max_lag, LagPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZaModel {
    /// Break in the intercept.
    A,
    /// Break in the trend.
    B,
    /// Break in both.
    C,
}

impl ZaModel {
    fn has_level_shift(self) -> bool {
        matches!(self, ZaModel::A | ZaModel::C)
    }

    fn has_trend_shift(self) -> bool {
        matches!(self, ZaModel::B | ZaModel::C)
    }

    fn n_break_terms(self) -> usize {
        self.has_level_shift() as usize + self.has_trend_shift() as usize
    }
}

impl std::str::FromStr for ZaModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_uppercase()
            .trim_start_matches("MODEL")
            .trim()
        {
            "A" => Ok(ZaModel::A),
            "B" => Ok(ZaModel::B),
            "C" => Ok(ZaModel::C),
            other => Err(Error::Config(format!(
                "unknown Zivot-Andrews model {other}"
            ))),
        }
    }
}

pub const DEFAULT_TRIMMING: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateStat {
    pub year: i32,
    pub statistic: f64,
    pub lags: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZaResult {
    pub model: ZaModel,
    pub trimming: f64,
    pub min_statistic: f64,
    /// First year after the break.
    pub break_year: i32,
    pub lags: usize,
    pub per_candidate: Vec<CandidateStat>,
    pub critical_values: CriticalValues,
}

impl ZaResult {
    pub fn reject(&self, level: Level) -> bool {
        self.min_statistic < self.critical_values.get(level)
    }

    pub fn stars(&self) -> &'static str {
        lower_tail_stars(self.min_statistic, &self.critical_values)
    }
}

/// Zivot-Andrews critical values. Model A at 5% is -4.93 here; the
/// original 1992 table has -4.80.
pub fn za_critical_values(model: ZaModel) -> CriticalValues {
    match model {
        ZaModel::A => CriticalValues {
            pct1: -5.34,
            pct5: -4.93,
            pct10: -4.58,
        },
        ZaModel::B => CriticalValues {
            pct1: -4.93,
            pct5: -4.42,
            pct10: -4.11,
        },
        ZaModel::C => CriticalValues {
            pct1: -5.57,
            pct5: -5.08,
            pct10: -4.82,
        },
    }
}

pub fn za_critical_value(model: ZaModel, level: Level) -> f64 {
    za_critical_values(model).get(level)
}

/// Cross products of one (lag order, sample) regression, ready for
/// per-break augmentation.
struct BreakGram {
    first_t: usize,
    /// Base regressors: const, trend, y(-1), dy lags; dependent appended last.
    gram: DMatrix<f64>,
    n_base: usize,
    /// suffix[c][r] = Σ_{i ≥ r} z_ic, suffix_t[c][r] = Σ_{i ≥ r} t_i z_ic.
    suffix: Vec<Vec<f64>>,
    suffix_t: Vec<Vec<f64>>,
    count: Vec<f64>,
    sum_t: Vec<f64>,
    sum_t2: Vec<f64>,
}

impl BreakGram {
    fn new(y: &[f64], k: usize, first_t: usize) -> Self {
        let n = y.len();
        let m = n - first_t;
        let n_base = 3 + k;
        let ncol = n_base + 1;
        let z = DMatrix::from_fn(m, ncol, |r, c| {
            let t = first_t + r;
            match c {
                0 => 1.0,
                1 => (t + 1) as f64,
                2 => y[t - 1],
                c if c < n_base => {
                    let i = c - 2;
                    y[t - i] - y[t - i - 1]
                }
                _ => y[t] - y[t - 1],
            }
        });
        let gram = z.transpose() * &z;
        let mut suffix = vec![vec![0.0; m + 1]; ncol];
        let mut suffix_t = vec![vec![0.0; m + 1]; ncol];
        let mut count = vec![0.0; m + 1];
        let mut sum_t = vec![0.0; m + 1];
        let mut sum_t2 = vec![0.0; m + 1];
        for r in (0..m).rev() {
            let t = (first_t + r) as f64;
            for c in 0..ncol {
                suffix[c][r] = suffix[c][r + 1] + z[(r, c)];
                suffix_t[c][r] = suffix_t[c][r + 1] + t * z[(r, c)];
            }
            count[r] = count[r + 1] + 1.0;
            sum_t[r] = sum_t[r + 1] + t;
            sum_t2[r] = sum_t2[r + 1] + t * t;
        }
        Self {
            first_t,
            gram,
            n_base,
            suffix,
            suffix_t,
            count,
            sum_t,
            sum_t2,
        }
    }

    fn n_rows(&self) -> usize {
        self.count[0] as usize
    }

    /// (τ of y(-1), RSS, parameter count) for a break after index `tb`.
    fn fit(&self, model: ZaModel, tb: usize) -> Option<(f64, f64, usize)> {
        let r0 = tb + 1 - self.first_t;
        let nb = self.n_base;
        let dep = nb;
        let tbf = tb as f64;
        let cnt = self.count[r0];
        let st = self.sum_t[r0];
        let du_du = cnt;
        let du_dt = st - tbf * cnt;
        let dt_dt = self.sum_t2[r0] - 2.0 * tbf * st + tbf * tbf * cnt;

        // cross products of each break column with base columns and the dependent
        let mut cross: Vec<Vec<f64>> = Vec::with_capacity(2);
        if model.has_level_shift() {
            cross.push((0..=nb).map(|c| self.suffix[c][r0]).collect());
        }
        if model.has_trend_shift() {
            cross.push(
                (0..=nb)
                    .map(|c| self.suffix_t[c][r0] - tbf * self.suffix[c][r0])
                    .collect(),
            );
        }
        let p = nb + cross.len();
        let mut a = DMatrix::<f64>::zeros(p, p);
        let mut b = DVector::<f64>::zeros(p);
        for i in 0..nb {
            for j in 0..nb {
                a[(i, j)] = self.gram[(i, j)];
            }
            b[i] = self.gram[(i, dep)];
        }
        for (bi, col) in cross.iter().enumerate() {
            let i = nb + bi;
            for j in 0..nb {
                a[(i, j)] = col[j];
                a[(j, i)] = col[j];
            }
            b[i] = col[dep];
        }
        match (model.has_level_shift(), model.has_trend_shift()) {
            (true, true) => {
                a[(nb, nb)] = du_du;
                a[(nb, nb + 1)] = du_dt;
                a[(nb + 1, nb)] = du_dt;
                a[(nb + 1, nb + 1)] = dt_dt;
            }
            (true, false) => a[(nb, nb)] = du_du,
            (false, true) => a[(nb, nb)] = dt_dt,
            (false, false) => {}
        }
        let chol = Cholesky::new(&a).ok()?;
        let beta = chol.solve(&b);
        let yy = self.gram[(dep, dep)];
        let rss = (yy - beta.dot(&b)).max(0.0);
        let m = self.n_rows();
        if m <= p {
            return None;
        }
        let s2 = rss / (m - p) as f64;
        let inv = chol.inverse();
        let se = (s2 * inv[(2, 2)]).sqrt();
        Some((beta[2] / se, rss, p))
    }
}

/// Search outcome on raw values; `za_test` attaches calendar years.
pub(crate) struct ZaSearch {
    pub min_statistic: f64,
    pub break_index: usize,
    pub lags: usize,
    pub per_candidate: Vec<(usize, f64, usize)>,
}

/// Inclusive range of break indices for a series of length `n` whose
/// regressions start at `first_t`. At least two observations are kept on
/// each side of the break; with fewer, model C's dummies are collinear with
/// the constant and trend.
pub(crate) fn candidate_window(n: usize, trimming: f64, first_t: usize) -> Option<(usize, usize)> {
    let lo = ((trimming * n as f64).ceil() as usize).max(first_t + 1);
    let hi = (((1.0 - trimming) * n as f64).floor() as usize).min(n.saturating_sub(3));
    (lo <= hi).then_some((lo, hi))
}

pub(crate) fn za_search(
    y: &[f64],
    model: ZaModel,
    trimming: f64,
    lag_policy: LagPolicy,
) -> Result<ZaSearch> {
    if !(trimming > 0.0 && trimming < 0.5) {
        return Err(Error::Config(format!(
            "trimming {trimming} must lie in (0, 0.5)"
        )));
    }
    let n = y.len();
    let n_fixed = 3 + model.n_break_terms();
    if n < n_fixed + 4 {
        return Err(Error::InsufficientData(format!(
            "{n} observations are too few for a Zivot-Andrews regression"
        )));
    }
    // candidates must be valid under the longest lag so the window is fixed
    let (max_lag, criterion) = match lag_policy {
        LagPolicy::Fixed { lags } => (lags, None),
        LagPolicy::Select { max, criterion } => {
            let feasible = feasible_max_lag(n, n_fixed - 1);
            (
                max.unwrap_or_else(|| default_max_lag(n)).min(feasible),
                Some(criterion),
            )
        }
    };
    if n < max_lag + n_fixed + 4 {
        return Err(Error::InsufficientData(format!(
            "{n} observations cannot support {max_lag} augmentation lags"
        )));
    }
    let (lo, hi) = candidate_window(n, trimming, max_lag + 1).ok_or_else(|| {
        Error::InsufficientData(format!(
            "trimmed break window is empty for {n} observations at trimming {trimming}"
        ))
    })?;

    let own: Vec<BreakGram> = match criterion {
        None => vec![BreakGram::new(y, max_lag, max_lag + 1)],
        Some(_) => (0..=max_lag).map(|k| BreakGram::new(y, k, k + 1)).collect(),
    };
    let common: Vec<BreakGram> = match criterion {
        None => Vec::new(),
        Some(_) => (0..=max_lag)
            .map(|k| BreakGram::new(y, k, max_lag + 1))
            .collect(),
    };

    let mut per_candidate = Vec::with_capacity(hi - lo + 1);
    let mut best: Option<(f64, usize, usize)> = None;
    for tb in lo..=hi {
        let k = match criterion {
            None => max_lag,
            Some(c) => {
                let mut pick = (f64::INFINITY, 0usize);
                for (k, g) in common.iter().enumerate() {
                    let (_, rss, p) = g.fit(model, tb).ok_or_else(|| collinear(tb))?;
                    let m = g.n_rows();
                    let ic = info_criteria_from(gaussian_loglik(rss, m), m, p).get(c);
                    if ic < pick.0 {
                        pick = (ic, k);
                    }
                }
                pick.1
            }
        };
        let g = if criterion.is_some() {
            &own[k]
        } else {
            &own[0]
        };
        let (tau, _, _) = g.fit(model, tb).ok_or_else(|| collinear(tb))?;
        per_candidate.push((tb, tau, k));
        if best.is_none_or(|(b, _, _)| tau < b) {
            best = Some((tau, tb, k));
        }
    }
    let (min_statistic, break_index, lags) = best.expect("window is non-empty");
    Ok(ZaSearch {
        min_statistic,
        break_index,
        lags,
        per_candidate,
    })
}

fn collinear(tb: usize) -> Error {
    Error::Collinear(format!(
        "break regression at index {tb} has a singular design"
    ))
}

/// Zivot-Andrews test on `s`.
pub fn za_test(
    s: &TimeSeries,
    model: ZaModel,
    trimming: f64,
    lag_policy: LagPolicy,
) -> Result<ZaResult> {
    check_not_constant(s)?;
    let search = za_search(s.values(), model, trimming, lag_policy)?;
    Ok(ZaResult {
        model,
        trimming,
        min_statistic: search.min_statistic,
        break_year: s.year(search.break_index + 1),
        lags: search.lags,
        per_candidate: search
            .per_candidate
            .into_iter()
            .map(|(tb, statistic, lags)| CandidateStat {
                year: s.year(tb + 1),
                statistic,
                lags,
            })
            .collect(),
        critical_values: za_critical_values(model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linreg::{ols_fit, CovarianceKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn walk(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        (0..n)
            .map(|_| {
                acc += rng.sample::<f64, _>(StandardNormal);
                acc
            })
            .collect()
    }

    /// Same regression through an explicit design and QR.
    fn reference_tau(y: &[f64], model: ZaModel, k: usize, tb: usize) -> f64 {
        let n = y.len();
        let first = k + 1;
        let rows = n - first;
        let mut cols = 3 + k;
        if model.has_level_shift() {
            cols += 1;
        }
        if model.has_trend_shift() {
            cols += 1;
        }
        let x = DMatrix::from_fn(rows, cols, |r, c| {
            let t = first + r;
            let post = t > tb;
            match c {
                0 => 1.0,
                1 => (t + 1) as f64,
                2 => y[t - 1],
                c if c < 3 + k => y[t - (c - 2)] - y[t - (c - 2) - 1],
                c => {
                    let is_du = model.has_level_shift() && c == 3 + k;
                    if !post {
                        0.0
                    } else if is_du {
                        1.0
                    } else {
                        (t - tb) as f64
                    }
                }
            }
        });
        let dep = DVector::from_fn(rows, |r, _| y[first + r] - y[first + r - 1]);
        ols_fit(&dep, &x, CovarianceKind::Classical)
            .unwrap()
            .t_ratio(2)
    }

    #[test]
    fn gram_path_matches_explicit_regression() {
        let y = walk(42, 60);
        for model in [ZaModel::A, ZaModel::B, ZaModel::C] {
            for k in [0, 2] {
                let s = za_search(&y, model, 0.15, LagPolicy::Fixed { lags: k }).unwrap();
                for &(tb, tau, _) in &s.per_candidate {
                    let r = reference_tau(&y, model, k, tb);
                    assert!(
                        (tau - r).abs() < 1e-7 * (1.0 + r.abs()),
                        "{model:?} k={k} tb={tb}: {tau} vs {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn minimum_is_min_of_candidates() {
        let y = walk(1, 40);
        let s = TimeSeries::new("y", 1980, y).unwrap();
        let r = za_test(&s, ZaModel::C, 0.15, LagPolicy::default()).unwrap();
        let m = r
            .per_candidate
            .iter()
            .map(|c| c.statistic)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(m, r.min_statistic);
        let hit = r.per_candidate.iter().find(|c| c.statistic == m).unwrap();
        assert_eq!(hit.year, r.break_year);
        let first = r.per_candidate.first().unwrap().year;
        let last = r.per_candidate.last().unwrap().year;
        assert!(r.break_year >= first && r.break_year <= last);
    }

    #[test]
    fn table_critical_values() {
        assert_eq!(za_critical_value(ZaModel::A, Level::One), -5.34);
        assert_eq!(za_critical_value(ZaModel::C, Level::Five), -5.08);
        assert_eq!(za_critical_value(ZaModel::A, Level::Ten), -4.58);
        for m in [ZaModel::A, ZaModel::B, ZaModel::C] {
            let cv = za_critical_values(m);
            assert!(cv.pct1 < cv.pct5 && cv.pct5 < cv.pct10);
        }
    }

    #[test]
    fn empty_window_and_bad_trimming() {
        let y = walk(2, 13);
        let s = TimeSeries::new("y", 2000, y).unwrap();
        assert!(za_test(&s, ZaModel::A, 0.6, LagPolicy::Fixed { lags: 0 }).is_err());
        // ceil(0.49·13) = 7 > floor(0.51·13) = 6
        assert!(matches!(
            za_test(&s, ZaModel::A, 0.49, LagPolicy::Fixed { lags: 0 }),
            Err(Error::InsufficientData(_))
        ));
        let flat = TimeSeries::new("f", 2000, vec![1.0; 30]).unwrap();
        assert!(matches!(
            za_test(&flat, ZaModel::A, 0.15, LagPolicy::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn recovers_mean_shift_date() {
        // iid N(0,1) plus a shift of 5 from observation 60 of 120.
        let reps = 500;
        let mut hits = 0;
        for rep in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + rep);
            let y: Vec<f64> = (0..120)
                .map(|t| rng.sample::<f64, _>(StandardNormal) + if t >= 60 { 5.0 } else { 0.0 })
                .collect();
            let s = TimeSeries::new("y", 1, y).unwrap();
            let r = za_test(&s, ZaModel::A, 0.15, LagPolicy::Fixed { lags: 0 }).unwrap();
            // year(i) = 1 + i, so the first shifted observation is year 61
            if (r.break_year - 61).abs() <= 2 {
                hits += 1;
            }
        }
        assert!(hits as f64 / reps as f64 >= 0.8, "hits {hits}");
    }

    proptest! {
        #[test]
        fn wider_window_never_raises_minimum(seed in 0u64..60) {
            let s = TimeSeries::new("y", 1900, walk(seed, 50)).unwrap();
            for m in [ZaModel::A, ZaModel::C] {
                let narrow = za_test(&s, m, 0.25, LagPolicy::default()).unwrap();
                let wide = za_test(&s, m, 0.10, LagPolicy::default()).unwrap();
                prop_assert!(wide.min_statistic <= narrow.min_statistic);
            }
        }

        #[test]
        fn affine_invariant(seed in 0u64..60, a in 0.1f64..20.0, b in -10f64..10.0) {
            let y = walk(seed, 45);
            let z: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            for m in [ZaModel::A, ZaModel::B, ZaModel::C] {
                let r1 = za_search(&y, m, 0.15, LagPolicy::Fixed { lags: 1 }).unwrap();
                let r2 = za_search(&z, m, 0.15, LagPolicy::Fixed { lags: 1 }).unwrap();
                prop_assert!((r1.min_statistic - r2.min_statistic).abs() < 1e-6);
            }
        }
    }
}
