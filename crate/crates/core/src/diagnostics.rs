//! Residual diagnostics for a single-equation fit: serial correlation LM,
//! heteroskedasticity LM, normality, RESET, and CUSUM/CUSUMSQ stability
//! paths built from recursive residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::linalg::Qr;
use crate::linreg::{ols_fit, CovarianceKind, RegressionFit};
use crate::significance::Level;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub test_name: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl DiagnosticEntry {
    fn chi2(test_name: impl Into<String>, statistic: f64, dof: usize) -> DiagnosticEntry {
        DiagnosticEntry {
            test_name: test_name.into(),
            statistic,
            dof,
            p_value: chi2_sf(statistic, dof),
        }
    }
}

/// Upper-tail χ² probability, clamped to `[0, 1]`.
pub fn chi2_sf(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    d.sf(statistic).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HetKind {
    #[default]
    BreuschPagan,
    WhiteNoCross,
}

impl std::str::FromStr for HetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<HetKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "breusch-pagan" | "bp" | "bpg" | "breusch-pagan-godfrey" => Ok(HetKind::BreuschPagan),
            "white-no-cross" | "white" => Ok(HetKind::WhiteNoCross),
            other => Err(Error::Config(format!(
                "unknown heteroskedasticity test `{other}`"
            ))),
        }
    }
}

fn negligible(u: &DVector<f64>, scale: f64) -> bool {
    u.norm() <= 1e-12 * (1.0 + scale)
}

fn is_constant(col: &[f64]) -> bool {
    col.iter().all(|&v| v == col[0])
}

/// `n·R²` of `dep` on `aux`, with the design error relabelled.
fn lm_statistic(dep: &DVector<f64>, aux: &DMatrix<f64>, labels: &[String]) -> Result<f64> {
    let fit = ols_fit(dep, aux, CovarianceKind::Classical).map_err(|e| match e {
        Error::SingularDesign { column, .. } => Error::Degenerate(format!(
            "auxiliary regressor {} is an exact combination of the others",
            labels.get(column).map_or("?", |s| s.as_str())
        )),
        e => e,
    })?;
    Ok(dep.len() as f64 * fit.r2)
}

fn columns(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.ncols())
        .map(|j| x.column(j).iter().copied().collect())
        .collect()
}

/// Breusch-Godfrey LM test for serial correlation up to `order`; missing
/// initial lags are zero-filled.
pub fn breusch_godfrey(
    fit: &RegressionFit,
    x: &DMatrix<f64>,
    order: usize,
) -> Result<DiagnosticEntry> {
    let n = fit.residuals.len();
    if order == 0 || order >= n {
        return Err(Error::Domain(format!(
            "serial-correlation order must be in 1..{n}, got {order}"
        )));
    }
    let u = &fit.residuals;
    let name = format!("Breusch-Godfrey LM({order})");
    if negligible(u, fit.fitted.norm()) {
        return Ok(DiagnosticEntry::chi2(name, 0.0, order));
    }
    let k = x.ncols();
    let aux = DMatrix::from_fn(n, k + order, |t, c| {
        if c < k {
            x[(t, c)]
        } else {
            let lag = c - k + 1;
            if t >= lag {
                u[t - lag]
            } else {
                0.0
            }
        }
    });
    let mut labels: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
    labels.extend((1..=order).map(|l| format!("u(-{l})")));
    let stat = lm_statistic(u, &aux, &labels)?;
    Ok(DiagnosticEntry::chi2(name, stat, order))
}

/// Breusch-Pagan-Godfrey (squared residuals on the regressors) or White
/// without cross terms (regressors and their squares).
pub fn het_test(fit: &RegressionFit, x: &DMatrix<f64>, kind: HetKind) -> Result<DiagnosticEntry> {
    let n = fit.residuals.len();
    let u2 = fit.residuals.map(|v| v * v);
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut labels = vec!["const".to_string()];
    let varying: Vec<(usize, Vec<f64>)> = columns(x)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !is_constant(c))
        .collect();
    for (j, c) in &varying {
        cols.push(c.clone());
        labels.push(format!("x{j}"));
    }
    if kind == HetKind::WhiteNoCross {
        for (j, c) in &varying {
            let binary = c.iter().all(|&v| v == 0.0 || v == 1.0);
            if !binary {
                cols.push(c.iter().map(|v| v * v).collect());
                labels.push(format!("x{j}^2"));
            }
        }
    }
    let dof = cols.len() - 1;
    let name = match kind {
        HetKind::BreuschPagan => "Breusch-Pagan-Godfrey",
        HetKind::WhiteNoCross => "White (no cross terms)",
    };
    if dof == 0 {
        return Err(Error::Degenerate(
            "heteroskedasticity test needs at least one non-constant regressor".into(),
        ));
    }
    if n <= cols.len() {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {} auxiliary regressors",
            cols.len()
        )));
    }
    if negligible(&fit.residuals, fit.fitted.norm()) {
        return Ok(DiagnosticEntry::chi2(name, 0.0, dof));
    }
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let aux = crate::linreg::design(&refs);
    let stat = lm_statistic(&u2, &aux, &labels)?;
    Ok(DiagnosticEntry::chi2(name, stat, dof))
}

/// Jarque-Bera from population moments, χ²(2).
pub fn jarque_bera(u: &[f64]) -> Result<DiagnosticEntry> {
    let n = u.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "normality test needs at least 4 residuals, have {n}"
        )));
    }
    let nf = n as f64;
    let mean = u.iter().sum::<f64>() / nf;
    let moment = |p: i32| u.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / nf;
    let m2 = moment(2);
    if m2 <= 0.0 || m2 <= 1e-24 * (1.0 + mean * mean) {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    let skew = moment(3) / m2.powf(1.5);
    let kurt = moment(4) / (m2 * m2);
    let jb = nf * (skew * skew / 6.0 + (kurt - 3.0).powi(2) / 24.0);
    Ok(DiagnosticEntry::chi2("Jarque-Bera", jb, 2))
}

/// RESET in LM form: residuals on the regressors plus powers of the
/// fitted values, `n·R²` against χ²(number of powers).
pub fn ramsey_reset(
    fit: &RegressionFit,
    x: &DMatrix<f64>,
    powers: &[u32],
) -> Result<DiagnosticEntry> {
    if powers.is_empty() || powers.iter().any(|&p| p < 2) {
        return Err(Error::Domain(format!(
            "RESET powers must be non-empty and at least 2, got {powers:?}"
        )));
    }
    let yhat = &fit.fitted;
    let scale = yhat.amax();
    let mean = yhat.mean();
    let spread = yhat.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * (1.0 + scale) {
        return Err(Error::Degenerate(
            "fitted values are constant; RESET terms would duplicate the intercept".into(),
        ));
    }
    let n = yhat.len();
    let k = x.ncols();
    let aux = DMatrix::from_fn(n, k + powers.len(), |t, c| {
        if c < k {
            x[(t, c)]
        } else {
            (yhat[t] / scale).powi(powers[c - k] as i32)
        }
    });
    let mut labels: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
    labels.extend(powers.iter().map(|p| format!("fitted^{p}")));
    let name = format!(
        "Ramsey RESET ({})",
        powers
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    if negligible(&fit.residuals, yhat.norm()) {
        return Ok(DiagnosticEntry::chi2(name, 0.0, powers.len()));
    }
    let stat = lm_statistic(&fit.residuals, &aux, &labels)?;
    Ok(DiagnosticEntry::chi2(name, stat, powers.len()))
}

/// One-step-ahead standardized forecast errors `w_t`, `t = k .. T−1`
/// (zero-based), each from the fit on rows `0 .. t−1`.
pub fn recursive_residuals(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = x.nrows();
    let k = x.ncols();
    if n <= k + 1 {
        return Err(Error::InsufficientData(format!(
            "recursive residuals need more than {} observations, have {n}",
            k + 1
        )));
    }
    let mut w = Vec::with_capacity(n - k);
    for t in k..n {
        let xs = x.rows(0, t).into_owned();
        let qr = Qr::new(&xs).map_err(|column| {
            Error::Degenerate(format!(
                "expanding window ending at observation {t} is singular in column {column}"
            ))
        })?;
        let ys = DMatrix::from_column_slice(t, 1, &y.as_slice()[..t]);
        let b = qr.solve(&ys);
        let xt = x.row(t).transpose();
        let pred = (xt.transpose() * &b)[(0, 0)];
        let xtx_inv = qr.xtx_inverse();
        let f = 1.0 + (xt.transpose() * &xtx_inv * &xt)[(0, 0)];
        w.push((y[t] - pred) / f.sqrt());
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Cusum,
    Cusumsq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CusumPath {
    pub kind: PathKind,
    pub level: Level,
    /// One-based observation numbers `k+1 .. T`.
    pub index: Vec<usize>,
    pub statistic: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub stable: bool,
}

impl CusumPath {
    fn new(
        kind: PathKind,
        level: Level,
        k: usize,
        statistic: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> CusumPath {
        let stable = statistic
            .iter()
            .zip(lower.iter().zip(&upper))
            .all(|(s, (lo, hi))| s >= lo && s <= hi);
        CusumPath {
            kind,
            level,
            index: (k + 1..=k + statistic.len()).collect(),
            statistic,
            lower,
            upper,
            stable,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.stable {
            "Stable"
        } else {
            "Unstable"
        }
    }
}

pub fn cusum_coefficient(level: Level) -> f64 {
    match level {
        Level::One => 1.143,
        Level::Five => 0.948,
        Level::Ten => 0.850,
    }
}

/// Half-width of the CUSUM band at one-based observation `t`.
pub fn cusum_bound(t: usize, k: usize, n: usize, level: Level) -> f64 {
    let m = (n - k) as f64;
    cusum_coefficient(level) * (m.sqrt() + 2.0 * (t as f64 - k as f64) / m.sqrt())
}

pub fn cusum(y: &DVector<f64>, x: &DMatrix<f64>, level: Level) -> Result<CusumPath> {
    let w = recursive_residuals(y, x)?;
    let k = x.ncols();
    let n = x.nrows();
    let m = w.len() as f64;
    let mean = w.iter().sum::<f64>() / m;
    let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let degenerate = DVector::from_column_slice(&w).norm() <= 1e-12 * (1.0 + y.norm());
    let mut acc = 0.0;
    let stat: Vec<f64> = w
        .iter()
        .map(|v| {
            acc += v;
            if sd > 0.0 && !degenerate {
                acc / sd
            } else {
                0.0
            }
        })
        .collect();
    let upper: Vec<f64> = (k + 1..=n).map(|t| cusum_bound(t, k, n, level)).collect();
    let lower = upper.iter().map(|b| -b).collect();
    Ok(CusumPath::new(
        PathKind::Cusum,
        level,
        k,
        stat,
        lower,
        upper,
    ))
}

pub fn cusumsq(y: &DVector<f64>, x: &DMatrix<f64>, level: Level) -> Result<CusumPath> {
    let w = recursive_residuals(y, x)?;
    let k = x.ncols();
    let m = w.len();
    let total: f64 = w.iter().map(|v| v * v).sum();
    let degenerate = total.sqrt() <= 1e-12 * (1.0 + y.norm());
    let line = |r: usize| r as f64 / m as f64;
    let mut acc = 0.0;
    let mut stat: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v * v;
            if degenerate {
                line(i + 1)
            } else {
                acc / total
            }
        })
        .collect();
    if let Some(last) = stat.last_mut() {
        *last = 1.0;
    }
    let c0 = cusumsq_c0(level, m);
    let lower = (1..=m).map(|r| line(r) - c0).collect();
    let upper = (1..=m).map(|r| line(r) + c0).collect();
    Ok(CusumPath::new(
        PathKind::Cusumsq,
        level,
        k,
        stat,
        lower,
        upper,
    ))
}

/// Kolmogorov quantiles used past the end of the table.
fn kolmogorov(level: Level) -> f64 {
    match level {
        Level::One => 1.6276,
        Level::Five => 1.3581,
        Level::Ten => 1.2238,
    }
}

/// Two-sided band half-width for the CUSUMSQ path with `m = T − k`
/// recursive residuals: the `1 − α` quantile of `max_r |S_r − r/m|` under
/// i.i.d. normal errors, interpolated linearly in `m`.
pub fn cusumsq_c0(level: Level, m: usize) -> f64 {
    let col = match level {
        Level::One => 0,
        Level::Five => 1,
        Level::Ten => 2,
    };
    let (first, last) = (CUSUMSQ_C0[0], CUSUMSQ_C0[CUSUMSQ_C0.len() - 1]);
    if m <= first.0 {
        return first.1[col];
    }
    if m > last.0 {
        return (2.0 / m as f64).sqrt() * kolmogorov(level);
    }
    let i = CUSUMSQ_C0.partition_point(|(g, _)| *g < m);
    let (g1, v1) = CUSUMSQ_C0[i];
    if g1 == m {
        return v1[col];
    }
    let (g0, v0) = CUSUMSQ_C0[i - 1];
    let f = (m - g0) as f64 / (g1 - g0) as f64;
    v0[col] + f * (v1[col] - v0[col])
}

// Generated by `examples/cusumsq_table.rs` (200 000 replications per row),
// columns 1%, 5%, 10%.
#[allow(clippy::approx_constant)]
pub(crate) const CUSUMSQ_C0: [(usize, [f64; 3]); 57] = [
    (2, [0.4999, 0.4985, 0.4939]),
    (3, [0.6564, 0.6174, 0.5695]),
    (4, [0.6987, 0.6052, 0.5235]),
    (5, [0.6883, 0.5698, 0.5158]),
    (6, [0.6545, 0.5517, 0.4882]),
    (7, [0.6361, 0.5291, 0.4722]),
    (8, [0.6101, 0.5078, 0.4531]),
    (9, [0.5917, 0.4897, 0.4355]),
    (10, [0.5720, 0.4744, 0.4232]),
    (11, [0.5541, 0.4575, 0.4077]),
    (12, [0.5386, 0.4444, 0.3953]),
    (13, [0.5196, 0.4313, 0.3850]),
    (14, [0.5093, 0.4209, 0.3749]),
    (15, [0.4974, 0.4100, 0.3655]),
    (16, [0.4846, 0.4010, 0.3572]),
    (17, [0.4742, 0.3911, 0.3491]),
    (18, [0.4635, 0.3821, 0.3409]),
    (19, [0.4537, 0.3731, 0.3335]),
    (20, [0.4432, 0.3665, 0.3273]),
    (21, [0.4363, 0.3601, 0.3207]),
    (22, [0.4269, 0.3524, 0.3149]),
    (23, [0.4195, 0.3471, 0.3095]),
    (24, [0.4131, 0.3405, 0.3041]),
    (25, [0.4060, 0.3351, 0.2990]),
    (26, [0.3987, 0.3293, 0.2943]),
    (27, [0.3932, 0.3246, 0.2894]),
    (28, [0.3866, 0.3193, 0.2852]),
    (29, [0.3816, 0.3140, 0.2805]),
    (30, [0.3762, 0.3097, 0.2766]),
    (31, [0.3705, 0.3055, 0.2730]),
    (32, [0.3659, 0.3015, 0.2693]),
    (33, [0.3610, 0.2977, 0.2655]),
    (34, [0.3557, 0.2934, 0.2623]),
    (35, [0.3524, 0.2901, 0.2593]),
    (36, [0.3475, 0.2869, 0.2564]),
    (37, [0.3428, 0.2828, 0.2530]),
    (38, [0.3391, 0.2801, 0.2497]),
    (39, [0.3351, 0.2770, 0.2476]),
    (40, [0.3318, 0.2734, 0.2440]),
    (45, [0.3157, 0.2605, 0.2327]),
    (50, [0.3009, 0.2482, 0.2223]),
    (55, [0.2864, 0.2370, 0.2120]),
    (60, [0.2763, 0.2285, 0.2044]),
    (65, [0.2662, 0.2208, 0.1975]),
    (70, [0.2579, 0.2131, 0.1903]),
    (75, [0.2486, 0.2057, 0.1846]),
    (80, [0.2425, 0.2006, 0.1795]),
    (85, [0.2348, 0.1946, 0.1745]),
    (90, [0.2289, 0.1896, 0.1699]),
    (95, [0.2231, 0.1850, 0.1657]),
    (100, [0.2174, 0.1807, 0.1621]),
    (120, [0.1999, 0.1661, 0.1488]),
    (150, [0.1796, 0.1493, 0.1337]),
    (200, [0.1572, 0.1302, 0.1168]),
    (300, [0.1290, 0.1070, 0.0962]),
    (400, [0.1126, 0.0935, 0.0840]),
    (500, [0.1007, 0.0838, 0.0753]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub bg_order: usize,
    pub het: HetKind,
    pub reset_powers: Vec<u32>,
    pub level: Level,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            bg_order: 2,
            het: HetKind::BreuschPagan,
            reset_powers: vec![2],
            level: Level::Five,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub serial_correlation: DiagnosticEntry,
    pub heteroskedasticity: DiagnosticEntry,
    pub normality: DiagnosticEntry,
    pub functional_form: DiagnosticEntry,
    pub cusum: CusumPath,
    pub cusumsq: CusumPath,
}

impl DiagnosticsReport {
    pub fn entries(&self) -> [&DiagnosticEntry; 4] {
        [
            &self.serial_correlation,
            &self.heteroskedasticity,
            &self.normality,
            &self.functional_form,
        ]
    }
}

/// Full battery on the least-squares fit of `y` on `x`.
pub fn run_diagnostics(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    cfg: &DiagnosticsConfig,
) -> Result<DiagnosticsReport> {
    let fit = ols_fit(y, x, CovarianceKind::Classical)?;
    Ok(DiagnosticsReport {
        serial_correlation: breusch_godfrey(&fit, x, cfg.bg_order)?,
        heteroskedasticity: het_test(&fit, x, cfg.het)?,
        normality: jarque_bera(fit.residuals.as_slice())?,
        functional_form: ramsey_reset(&fit, x, &cfg.reset_powers)?,
        cusum: cusum(y, x, cfg.level)?,
        cusumsq: cusumsq(y, x, cfg.level)?,
    })
}
