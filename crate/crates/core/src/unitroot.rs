//! Augmented Dickey-Fuller and Phillips-Perron unit-root tests.
//!
//! Both tests are built on the Dickey-Fuller regression
//!
//! ```text
//! Δy_t = d_t + γ·y_{t−1} + Σ_{i=1..k} δ_i Δy_{t−i} + ε_t
//! ```
//!
//! with `d_t` empty, a constant, or a constant and linear trend. The ADF
//! statistic is the t-ratio of `γ`; Phillips-Perron uses `k = 0` and
//! corrects the t-ratio with a Bartlett long-run variance of the residuals.
//! Critical values come from the MacKinnon (2010) response surfaces.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linreg::{
    auto_bandwidth, info_criteria, newey_west_longrun_variance, ols_fit, CovarianceKind, Criterion,
    RegressionFit,
};
use crate::series::TimeSeries;
use crate::significance::{lower_tail_stars, CriticalValues, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeterministicSpec {
    None,
    Constant,
    ConstantTrend,
}

impl DeterministicSpec {
    pub fn n_terms(self) -> usize {
        match self {
            DeterministicSpec::None => 0,
            DeterministicSpec::Constant => 1,
            DeterministicSpec::ConstantTrend => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DeterministicSpec::None => "none",
            DeterministicSpec::Constant => "constant",
            DeterministicSpec::ConstantTrend => "constant+trend",
        }
    }
}

impl std::str::FromStr for DeterministicSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "n" | "nc" => Ok(DeterministicSpec::None),
            "constant" | "c" | "const" | "intercept" => Ok(DeterministicSpec::Constant),
            "constant+trend" | "constant-trend" | "ct" | "trend" => {
                Ok(DeterministicSpec::ConstantTrend)
            }
            other => Err(Error::Config(format!("unknown deterministic spec {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy")]
pub enum LagPolicy {
    Fixed {
        lags: usize,
    },
    /// Search `0..=max` (default `floor(12 (T/100)^(1/4))`) on a common sample.
    Select {
        max: Option<usize>,
        criterion: Criterion,
    },
}

impl Default for LagPolicy {
    fn default() -> Self {
        LagPolicy::Select {
            max: None,
            criterion: Criterion::Sc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy")]
pub enum BandwidthPolicy {
    Fixed {
        bandwidth: usize,
    },
    #[default]
    Automatic,
}

impl BandwidthPolicy {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            BandwidthPolicy::Fixed { bandwidth } => bandwidth,
            BandwidthPolicy::Automatic => auto_bandwidth(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitRootTest {
    Adf,
    Pp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub test: UnitRootTest,
    pub statistic: f64,
    pub spec: DeterministicSpec,
    /// ADF: augmentation lags. PP: Bartlett bandwidth.
    pub lags_or_bandwidth: usize,
    pub n_obs: usize,
    pub critical_values: CriticalValues,
}

impl UnitRootResult {
    pub fn reject(&self, level: Level) -> bool {
        self.statistic < self.critical_values.get(level)
    }

    pub fn stars(&self) -> &'static str {
        lower_tail_stars(self.statistic, &self.critical_values)
    }
}

/// Schwert's rule `floor(12 (n/100)^(1/4))`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub(crate) fn check_not_constant(s: &TimeSeries) -> Result<()> {
    let v = s.values();
    let first = v[0];
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if v.iter().all(|x| (x - first).abs() <= 1e-14 * scale) {
        return Err(Error::Degenerate(format!(
            "series {} is constant",
            s.name()
        )));
    }
    Ok(())
}

/// Dependent vector and design for the DF regression with `k` lagged
/// differences over `t = first_t .. n−1` (indices into the levels).
pub(crate) fn df_regression(
    y: &[f64],
    spec: DeterministicSpec,
    k: usize,
    first_t: usize,
) -> (DVector<f64>, DMatrix<f64>, usize) {
    let n = y.len();
    let rows = n - first_t;
    let n_det = spec.n_terms();
    let cols = n_det + 1 + k;
    let dep = DVector::from_fn(rows, |r, _| {
        let t = first_t + r;
        y[t] - y[t - 1]
    });
    let x = DMatrix::from_fn(rows, cols, |r, c| {
        let t = first_t + r;
        if c < n_det {
            if c == 0 {
                1.0
            } else {
                (t + 1) as f64
            }
        } else if c == n_det {
            y[t - 1]
        } else {
            let i = c - n_det;
            y[t - i] - y[t - i - 1]
        }
    });
    (dep, x, n_det)
}

fn df_labels(spec: DeterministicSpec, k: usize) -> Vec<String> {
    let mut l = Vec::new();
    if spec.n_terms() >= 1 {
        l.push("const".into());
    }
    if spec.n_terms() == 2 {
        l.push("trend".into());
    }
    l.push("y(-1)".into());
    for i in 1..=k {
        l.push(format!("dy(-{i})"));
    }
    l
}

/// Largest augmentation order that leaves at least two residual degrees of freedom.
pub(crate) fn feasible_max_lag(n: usize, n_det: usize) -> usize {
    // rows n-1-k, params n_det+1+k
    let mut k = 0;
    while n > 2 + k && (n - 1 - (k + 1)) > n_det + 1 + (k + 1) + 1 {
        k += 1;
    }
    k
}

/// Pick the augmentation order by information criterion on the common
/// sample `t = max+1 .. n−1`.
pub(crate) fn select_df_lag(
    y: &[f64],
    spec: DeterministicSpec,
    max: usize,
    criterion: Criterion,
) -> Result<usize> {
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..=max {
        let (dep, x, _) = df_regression(y, spec, k, max + 1);
        let fit = ols_fit(&dep, &x, CovarianceKind::Classical)
            .map_err(|e| e.with_column_labels(&df_labels(spec, k)))?;
        let ic = info_criteria(&fit).get(criterion);
        if ic < best.0 {
            best = (ic, k);
        }
    }
    Ok(best.1)
}

pub(crate) fn resolve_lags(y: &[f64], spec: DeterministicSpec, policy: LagPolicy) -> Result<usize> {
    let n = y.len();
    let feasible = feasible_max_lag(n, spec.n_terms());
    match policy {
        LagPolicy::Fixed { lags } => {
            if n < lags + 2 || n - 1 - lags <= spec.n_terms() + 1 + lags {
                return Err(Error::InsufficientData(format!(
                    "{n} observations cannot support {lags} augmentation lags"
                )));
            }
            Ok(lags)
        }
        LagPolicy::Select { max, criterion } => {
            if n < 4 + spec.n_terms() {
                return Err(Error::InsufficientData(format!(
                    "{n} observations are too few for a unit-root regression"
                )));
            }
            let max = max.unwrap_or_else(|| default_max_lag(n)).min(feasible);
            select_df_lag(y, spec, max, criterion)
        }
    }
}

fn fit_df(y: &[f64], spec: DeterministicSpec, k: usize) -> Result<RegressionFit> {
    let (dep, x, _) = df_regression(y, spec, k, k + 1);
    ols_fit(&dep, &x, CovarianceKind::Classical)
        .map_err(|e| e.with_column_labels(&df_labels(spec, k)))
}

/// ADF τ statistic.
pub fn adf_test(
    s: &TimeSeries,
    spec: DeterministicSpec,
    lag_policy: LagPolicy,
) -> Result<UnitRootResult> {
    check_not_constant(s)?;
    let y = s.values();
    let k = resolve_lags(y, spec, lag_policy)?;
    let fit = fit_df(y, spec, k)?;
    let idx = spec.n_terms();
    Ok(UnitRootResult {
        test: UnitRootTest::Adf,
        statistic: fit.t_ratio(idx),
        spec,
        lags_or_bandwidth: k,
        n_obs: fit.n_obs,
        critical_values: df_critical_values(spec, fit.n_obs),
    })
}

/// Phillips-Perron `Z_τ`.
pub fn pp_test(
    s: &TimeSeries,
    spec: DeterministicSpec,
    bandwidth_policy: BandwidthPolicy,
) -> Result<UnitRootResult> {
    check_not_constant(s)?;
    let y = s.values();
    if y.len() < 4 + spec.n_terms() {
        return Err(Error::InsufficientData(format!(
            "{} observations are too few for a unit-root regression",
            y.len()
        )));
    }
    let fit = fit_df(y, spec, 0)?;
    let t = fit.n_obs;
    let bandwidth = bandwidth_policy.resolve(t);
    let u = fit.residuals.as_slice();
    let gamma0 = fit.rss / t as f64;
    let lambda = newey_west_longrun_variance(u, bandwidth)?;
    if !(lambda > 0.0) {
        return Err(Error::Numerical(format!(
            "long-run variance is {lambda} at bandwidth {bandwidth}"
        )));
    }
    let idx = spec.n_terms();
    let tau = fit.t_ratio(idx);
    let se = fit.std_error(idx);
    let s = fit.sigma2.sqrt();
    let z = tau * (gamma0 / lambda).sqrt()
        - (lambda - gamma0) * t as f64 * se / (2.0 * lambda.sqrt() * s);
    Ok(UnitRootResult {
        test: UnitRootTest::Pp,
        statistic: z,
        spec,
        lags_or_bandwidth: bandwidth,
        n_obs: t,
        critical_values: df_critical_values(spec, t),
    })
}

// MacKinnon (2010), Table 2, one-variable case: cv(T) = b0 + b1/T + b2/T² + b3/T³.
const DF_SURFACE_NONE: [[f64; 4]; 3] = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 25.364],
];
const DF_SURFACE_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const DF_SURFACE_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// Response-surface coefficients `[b0, b1, b2, b3]` for a spec and level.
pub fn df_surface(spec: DeterministicSpec, level: Level) -> [f64; 4] {
    let table = match spec {
        DeterministicSpec::None => &DF_SURFACE_NONE,
        DeterministicSpec::Constant => &DF_SURFACE_CONSTANT,
        DeterministicSpec::ConstantTrend => &DF_SURFACE_TREND,
    };
    table[match level {
        Level::One => 0,
        Level::Five => 1,
        Level::Ten => 2,
    }]
}

pub fn eval_surface(b: &[f64; 4], n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    b[0] + b[1] * inv + b[2] * inv * inv + b[3] * inv * inv * inv
}

/// Dickey-Fuller critical value for a regression on `n` observations.
pub fn df_critical_value(spec: DeterministicSpec, n: usize, level: Level) -> f64 {
    eval_surface(&df_surface(spec, level), n)
}

pub fn df_critical_values(spec: DeterministicSpec, n: usize) -> CriticalValues {
    CriticalValues {
        pct1: df_critical_value(spec, n, Level::One),
        pct5: df_critical_value(spec, n, Level::Five),
        pct10: df_critical_value(spec, n, Level::Ten),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_walk(seed: u64, n: usize) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        let v = (0..n)
            .map(|_| {
                acc += rng.sample::<f64, _>(StandardNormal);
                acc
            })
            .collect();
        TimeSeries::new("rw", 1900, v).unwrap()
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = TimeSeries::new("c", 2000, vec![3.0; 30]).unwrap();
        assert!(matches!(
            adf_test(&s, DeterministicSpec::Constant, LagPolicy::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            pp_test(&s, DeterministicSpec::Constant, BandwidthPolicy::Automatic),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn too_short_series() {
        let s = TimeSeries::new("s", 2000, vec![1.0, 2.0, 1.5]).unwrap();
        assert!(matches!(
            adf_test(
                &s,
                DeterministicSpec::Constant,
                LagPolicy::Fixed { lags: 1 }
            ),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn large_sample_critical_values() {
        let n = 100_000;
        assert!(
            (df_critical_value(DeterministicSpec::Constant, n, Level::Five) + 2.86).abs() < 0.03
        );
        assert!(
            (df_critical_value(DeterministicSpec::ConstantTrend, n, Level::Five) + 3.41).abs()
                < 0.03
        );
        assert!((df_critical_value(DeterministicSpec::None, n, Level::Five) + 1.94).abs() < 0.03);
    }

    #[test]
    fn critical_values_are_ordered() {
        for spec in [
            DeterministicSpec::None,
            DeterministicSpec::Constant,
            DeterministicSpec::ConstantTrend,
        ] {
            for n in [20, 29, 50, 100, 500, 10_000] {
                let cv = df_critical_values(spec, n);
                assert!(cv.pct1 < cv.pct5 && cv.pct5 < cv.pct10, "{spec:?} {n}");
            }
        }
    }

    #[test]
    fn pp_with_zero_bandwidth_is_df_tau() {
        let s = random_walk(3, 80);
        for spec in [
            DeterministicSpec::None,
            DeterministicSpec::Constant,
            DeterministicSpec::ConstantTrend,
        ] {
            let adf = adf_test(&s, spec, LagPolicy::Fixed { lags: 0 }).unwrap();
            let pp = pp_test(&s, spec, BandwidthPolicy::Fixed { bandwidth: 0 }).unwrap();
            assert!((adf.statistic - pp.statistic).abs() < 1e-12);
        }
    }

    #[test]
    fn lag_selection_uses_bounded_search() {
        let s = random_walk(11, 29);
        let r = adf_test(&s, DeterministicSpec::ConstantTrend, LagPolicy::default()).unwrap();
        assert!(r.lags_or_bandwidth <= default_max_lag(29));
        assert_eq!(r.n_obs, 29 - 1 - r.lags_or_bandwidth);
    }

    #[test]
    fn stationary_noise_rejects() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
        let s = TimeSeries::new("e", 1800, v).unwrap();
        let r = pp_test(&s, DeterministicSpec::Constant, BandwidthPolicy::Automatic).unwrap();
        assert!(r.reject(Level::One));
        assert_eq!(r.stars(), "***");
    }

    proptest! {
        #[test]
        fn adf_affine_invariant(seed in 0u64..100, a in 0.01f64..100.0, b in -50f64..50.0) {
            let s = random_walk(seed, 60);
            let t = TimeSeries::new("t", 1900, s.values().iter().map(|v| a * v + b).collect()).unwrap();
            for spec in [DeterministicSpec::Constant, DeterministicSpec::ConstantTrend] {
                let r1 = adf_test(&s, spec, LagPolicy::Fixed { lags: 2 }).unwrap();
                let r2 = adf_test(&t, spec, LagPolicy::Fixed { lags: 2 }).unwrap();
                prop_assert!((r1.statistic - r2.statistic).abs() < 1e-8);
            }
        }

        #[test]
        fn decisions_are_nested(seed in 0u64..200) {
            let s = random_walk(seed, 50);
            let r = adf_test(&s, DeterministicSpec::Constant, LagPolicy::default()).unwrap();
            if r.reject(Level::Five) { prop_assert!(r.reject(Level::Ten)); }
            if r.reject(Level::One) { prop_assert!(r.reject(Level::Five)); }
        }
    }
}
