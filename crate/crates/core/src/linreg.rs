//! Ordinary least squares with classical, White (HC0) and Newey-West
//! covariance, Bartlett long-run variance, and per-observation
//! information criteria.
//!
//! Conventions:
//! - autocovariances use the `1/n` normalisation, so every Bartlett
//!   long-run variance is non-negative;
//! - `loglik = −n/2 · (1 + ln 2π + ln(RSS/n))`;
//! - information criteria are divided by `n` (per-observation form).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Qr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CovarianceKind {
    Classical,
    WhiteHc0,
    NeweyWest { bandwidth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Sc,
    Hq,
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "sc" | "bic" | "sic" | "schwarz" => Ok(Criterion::Sc),
            "hq" | "hqic" => Ok(Criterion::Hq),
            other => Err(Error::Config(format!(
                "unknown information criterion {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    pub coefficients: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub covariance_kind: CovarianceKind,
    pub residuals: DVector<f64>,
    pub fitted: DVector<f64>,
    /// RSS / (n − k).
    pub sigma2: f64,
    pub rss: f64,
    pub loglik: f64,
    pub n_obs: usize,
    pub n_params: usize,
    /// Centred R²; 0 when the dependent variable has no variation.
    pub r2: f64,
}

impl RegressionFit {
    pub fn std_error(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.n_params).map(|i| self.std_error(i)).collect()
    }

    pub fn t_ratio(&self, i: usize) -> f64 {
        self.coefficients[i] / self.std_error(i)
    }

    pub fn t_ratios(&self) -> Vec<f64> {
        (0..self.n_params).map(|i| self.t_ratio(i)).collect()
    }

    pub fn info_criteria(&self) -> InfoCriteria {
        info_criteria(self)
    }
}

/// Least-squares fit of `y` on the columns of `x`.
pub fn ols_fit(y: &DVector<f64>, x: &DMatrix<f64>, cov: CovarianceKind) -> Result<RegressionFit> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(Error::Domain(format!(
            "response has {} rows but design has {n}",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} parameters"
        )));
    }
    let qr = Qr::new(x).map_err(|column| Error::SingularDesign {
        column,
        label: None,
    })?;
    let ymat = DMatrix::from_column_slice(n, 1, y.as_slice());
    let beta = DVector::from_column_slice(qr.solve(&ymat).as_slice());
    let fitted = x * &beta;
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();
    let sigma2 = rss / (n - k) as f64;
    let mean_y = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let loglik = gaussian_loglik(rss, n);
    let xtx_inv = qr.xtx_inverse();

    let covariance = match cov {
        CovarianceKind::Classical => &xtx_inv * sigma2,
        CovarianceKind::WhiteHc0 => sandwich(&xtx_inv, &score_longrun(x, &residuals, 0)),
        CovarianceKind::NeweyWest { bandwidth } => {
            if bandwidth >= n {
                return Err(Error::Domain(format!(
                    "Newey-West bandwidth {bandwidth} must be below the sample size {n}"
                )));
            }
            sandwich(&xtx_inv, &score_longrun(x, &residuals, bandwidth))
        }
    };

    Ok(RegressionFit {
        coefficients: beta,
        covariance,
        covariance_kind: cov,
        residuals,
        fitted,
        sigma2,
        rss,
        loglik,
        n_obs: n,
        n_params: k,
        r2,
    })
}

pub fn gaussian_loglik(rss: f64, n: usize) -> f64 {
    let n = n as f64;
    -0.5 * n * (1.0 + (2.0 * PI).ln() + (rss / n).ln())
}

// Σ_t Σ_s w(|t-s|) x_t u_t u_s x_s' (not divided by n).
fn score_longrun(x: &DMatrix<f64>, u: &DVector<f64>, bandwidth: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let k = x.ncols();
    let mut scores = x.clone();
    for t in 0..n {
        for j in 0..k {
            scores[(t, j)] *= u[t];
        }
    }
    let mut s = scores.transpose() * &scores;
    for lag in 1..=bandwidth {
        let w = bartlett_weight(lag, bandwidth);
        let head = scores.rows(lag, n - lag);
        let tail = scores.rows(0, n - lag);
        let gamma = head.transpose() * tail;
        s += (&gamma + gamma.transpose()) * w;
    }
    s
}

fn sandwich(bread: &DMatrix<f64>, meat: &DMatrix<f64>) -> DMatrix<f64> {
    let c = bread * meat * bread;
    (&c + c.transpose()) * 0.5
}

pub fn bartlett_weight(lag: usize, bandwidth: usize) -> f64 {
    1.0 - lag as f64 / (bandwidth as f64 + 1.0)
}

/// Default Newey-West truncation lag, `floor(4 (n/100)^(2/9))`.
pub fn auto_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Sample autocovariance at `lag` about zero with the `1/n` normalisation.
pub fn autocovariance(u: &[f64], lag: usize) -> f64 {
    let n = u.len();
    if lag >= n {
        return 0.0;
    }
    u[lag..]
        .iter()
        .zip(&u[..n - lag])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / n as f64
}

/// Bartlett-kernel long-run variance `γ₀ + 2 Σ w_j γ_j`.
pub fn newey_west_longrun_variance(u: &[f64], bandwidth: usize) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InsufficientData("empty residual vector".into()));
    }
    if bandwidth >= u.len() {
        return Err(Error::Domain(format!(
            "bandwidth {bandwidth} must be below the sample size {}",
            u.len()
        )));
    }
    let mut lrv = autocovariance(u, 0);
    for j in 1..=bandwidth {
        lrv += 2.0 * bartlett_weight(j, bandwidth) * autocovariance(u, j);
    }
    // The Bartlett kernel is positive semidefinite; clip rounding noise.
    Ok(lrv.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoCriteria {
    pub aic: f64,
    pub sc: f64,
    pub hq: f64,
}

impl InfoCriteria {
    pub fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Aic => self.aic,
            Criterion::Sc => self.sc,
            Criterion::Hq => self.hq,
        }
    }
}

pub fn info_criteria(fit: &RegressionFit) -> InfoCriteria {
    info_criteria_from(fit.loglik, fit.n_obs, fit.n_params)
}

/// Criteria for log-likelihood `loglik` on `n` observations with `k` free parameters.
pub fn info_criteria_from(loglik: f64, n: usize, k: usize) -> InfoCriteria {
    let nf = n as f64;
    let kf = k as f64;
    let base = -2.0 * loglik / nf;
    InfoCriteria {
        aic: base + 2.0 * kf / nf,
        sc: base + kf * nf.ln() / nf,
        hq: base + 2.0 * kf * nf.ln().ln() / nf,
    }
}

/// Design matrix from column slices.
pub fn design(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}
