//! Dynamic OLS: a static cointegrating regression augmented with leads and
//! lags of the differenced regressors, with long-run-variance scaled
//! standard errors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::linalg::Qr;
use crate::linreg::{newey_west_longrun_variance, ols_fit, CovarianceKind, RegressionFit};
use crate::series::Dataset;
use crate::unitroot::BandwidthPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DolsSpec {
    pub leads: usize,
    pub lags: usize,
    pub bandwidth: BandwidthPolicy,
}

impl DolsSpec {
    pub fn symmetric(order: usize) -> DolsSpec {
        DolsSpec {
            leads: order,
            lags: order,
            bandwidth: BandwidthPolicy::Automatic,
        }
    }
}

impl Default for DolsSpec {
    fn default() -> Self {
        DolsSpec::symmetric(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRunCoefficient {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_ratio: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DolsFit {
    pub dependent: String,
    pub spec: DolsSpec,
    pub bandwidth: usize,
    /// Regressors in the order given, then the intercept `C`.
    pub longrun: Vec<LongRunCoefficient>,
    /// Lead/lag terms as `(label, coefficient)`; not for interpretation.
    pub nuisance: Vec<(String, f64)>,
    pub longrun_variance: f64,
    pub first_year: i32,
    pub last_year: i32,
    /// Underlying least-squares fit with classical covariance.
    pub regression: RegressionFit,
    pub response: DVector<f64>,
    pub design: DMatrix<f64>,
    pub design_labels: Vec<String>,
}

impl DolsFit {
    pub fn coefficient(&self, name: &str) -> Option<&LongRunCoefficient> {
        self.longrun.iter().find(|c| c.name == name)
    }

    pub fn residuals(&self) -> &DVector<f64> {
        &self.regression.residuals
    }
}

struct Augmented {
    y: DVector<f64>,
    x: DMatrix<f64>,
    labels: Vec<String>,
    first: usize,
}

/// Design rows `t = first .. last` (inclusive) of `[1, x, Δx_{t−lags..t+leads}]`.
fn augmented(
    d: &Dataset,
    dependent: &str,
    regressors: &[&str],
    leads: usize,
    lags: usize,
    first: usize,
    last: usize,
) -> Result<Augmented> {
    let y = d.get(dependent)?.values();
    let xs = regressors
        .iter()
        .map(|r| d.get(r).map(|s| s.values()))
        .collect::<Result<Vec<_>>>()?;
    let augment = leads + lags > 0;
    let shifts: Vec<isize> = if augment {
        (-(lags as isize)..=leads as isize).collect()
    } else {
        Vec::new()
    };
    let mut labels = vec!["C".to_string()];
    labels.extend(regressors.iter().map(|r| r.to_string()));
    for &j in &shifts {
        for r in regressors {
            labels.push(match j {
                0 => format!("Δ{r}"),
                j if j < 0 => format!("Δ{r}(-{})", -j),
                j => format!("Δ{r}(+{j})"),
            });
        }
    }
    let n = last + 1 - first;
    let m = regressors.len();
    let x = DMatrix::from_fn(n, labels.len(), |r, c| {
        let t = first + r;
        if c == 0 {
            1.0
        } else if c <= m {
            xs[c - 1][t]
        } else {
            let c = c - 1 - m;
            let s = (t as isize + shifts[c / m]) as usize;
            xs[c % m][s] - xs[c % m][s - 1]
        }
    });
    let y = DVector::from_fn(n, |r, _| y[first + r]);
    Ok(Augmented {
        y,
        x,
        labels,
        first,
    })
}

fn check_roles(dependent: &str, regressors: &[&str]) -> Result<()> {
    if regressors.is_empty() {
        return Err(Error::Config("at least one regressor is required".into()));
    }
    if regressors.contains(&dependent) {
        return Err(Error::Config(format!(
            "{dependent} is both the dependent variable and a regressor"
        )));
    }
    Ok(())
}

/// Usable row range for a given augmentation.
fn sample_bounds(total: usize, leads: usize, lags: usize) -> Result<(usize, usize)> {
    let (first, tail) = if leads + lags > 0 {
        (lags + 1, leads)
    } else {
        (0, 0)
    };
    if total < first + tail + 1 {
        return Err(Error::InsufficientData(format!(
            "{total} observations leave nothing after {lags} lags and {leads} leads"
        )));
    }
    Ok((first, total - 1 - tail))
}

pub fn dols_fit(
    d: &Dataset,
    dependent: &str,
    regressors: &[&str],
    spec: DolsSpec,
) -> Result<DolsFit> {
    check_roles(dependent, regressors)?;
    let (first, last) = sample_bounds(d.n_obs(), spec.leads, spec.lags)?;
    let aug = augmented(d, dependent, regressors, spec.leads, spec.lags, first, last)?;
    fit_augmented(d, dependent, regressors, spec, aug)
}

fn fit_augmented(
    d: &Dataset,
    dependent: &str,
    regressors: &[&str],
    spec: DolsSpec,
    aug: Augmented,
) -> Result<DolsFit> {
    let n = aug.x.nrows();
    let k = aug.x.ncols();
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "DOLS with {} leads and {} lags has {n} usable observations for {k} parameters",
            spec.leads, spec.lags
        )));
    }
    let qr = Qr::new(&aug.x).map_err(|column| Error::SingularDesign {
        column,
        label: Some(aug.labels[column].clone()),
    })?;
    let regression = ols_fit(&aug.y, &aug.x, CovarianceKind::Classical)?;
    let bandwidth = spec.bandwidth.resolve(n);
    if bandwidth >= n {
        return Err(Error::Domain(format!(
            "bandwidth {bandwidth} must be below the sample size {n}"
        )));
    }
    let lrv = newey_west_longrun_variance(regression.residuals.as_slice(), bandwidth)?;
    let cov = qr.xtx_inverse() * (lrv * n as f64 / (n - k) as f64);
    let dist = StudentsT::new(0.0, 1.0, (n - k) as f64).expect("positive degrees of freedom");
    let coef = |i: usize| {
        let b = regression.coefficients[i];
        let se = cov[(i, i)].max(0.0).sqrt();
        let t = b / se;
        LongRunCoefficient {
            name: aug.labels[i].clone(),
            coefficient: b,
            std_error: se,
            t_ratio: t,
            p_value: if t.is_finite() {
                2.0 * dist.sf(t.abs())
            } else {
                f64::NAN
            },
        }
    };
    let m = regressors.len();
    let mut longrun: Vec<LongRunCoefficient> = (1..=m).map(coef).collect();
    longrun.push(coef(0));
    let nuisance = (m + 1..k)
        .map(|i| (aug.labels[i].clone(), regression.coefficients[i]))
        .collect();
    Ok(DolsFit {
        dependent: dependent.to_string(),
        spec,
        bandwidth,
        longrun,
        nuisance,
        longrun_variance: lrv,
        first_year: d.start_year() + aug.first as i32,
        last_year: d.start_year() + (aug.first + n - 1) as i32,
        regression,
        response: aug.y,
        design: aug.x,
        design_labels: aug.labels,
    })
}

/// Symmetric lead/lag order minimising SC over `0..=max_order`, every
/// candidate fitted on the sample the largest order allows.
pub fn select_leads_lags(
    d: &Dataset,
    dependent: &str,
    regressors: &[&str],
    max_order: usize,
) -> Result<DolsSpec> {
    check_roles(dependent, regressors)?;
    let (first, last) = sample_bounds(d.n_obs(), max_order, max_order)?;
    let mut best = (f64::INFINITY, 0);
    for order in 0..=max_order {
        let aug = augmented(d, dependent, regressors, order, order, first, last)?;
        if aug.x.nrows() <= aug.x.ncols() {
            return Err(Error::InsufficientData(format!(
                "order {order} needs more than {} observations, have {}",
                aug.x.ncols(),
                aug.x.nrows()
            )));
        }
        let fit = ols_fit(&aug.y, &aug.x, CovarianceKind::Classical).map_err(|e| match e {
            Error::SingularDesign { column, .. } => Error::SingularDesign {
                column,
                label: Some(aug.labels[column].clone()),
            },
            e => e,
        })?;
        let sc = fit.info_criteria().sc;
        if sc < best.0 {
            best = (sc, order);
        }
    }
    Ok(DolsSpec::symmetric(best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TimeSeries;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn system(seed: u64, n: usize, phi: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x1 = Vec::with_capacity(n);
        let mut x2 = Vec::with_capacity(n);
        let (mut a, mut b, mut u) = (0.0, 0.0, 0.0);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            a += rng.sample::<f64, _>(StandardNormal);
            b += rng.sample::<f64, _>(StandardNormal);
            u = phi * u + rng.sample::<f64, _>(StandardNormal);
            x1.push(a);
            x2.push(b);
            y.push(1.0 + 0.5 * a - 0.3 * b + u);
        }
        Dataset::new(vec![
            TimeSeries::new("y", 2000, y).unwrap(),
            TimeSeries::new("x1", 2000, x1).unwrap(),
            TimeSeries::new("x2", 2000, x2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn no_augmentation_is_static_ols() {
        let d = system(1, 60, 0.3);
        let spec = DolsSpec {
            leads: 0,
            lags: 0,
            bandwidth: BandwidthPolicy::Fixed { bandwidth: 0 },
        };
        let f = dols_fit(&d, "y", &["x1", "x2"], spec).unwrap();
        let x = crate::linreg::design(&[
            &[1.0; 60],
            d.get("x1").unwrap().values(),
            d.get("x2").unwrap().values(),
        ]);
        let y = DVector::from_column_slice(d.get("y").unwrap().values());
        let s = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
        let order = [1, 2, 0];
        for (c, &i) in f.longrun.iter().zip(&order) {
            assert!((c.coefficient - s.coefficients[i]).abs() < 1e-8);
            assert!((c.std_error - s.std_error(i)).abs() < 1e-8);
        }
        assert!(f.nuisance.is_empty());
    }

    #[test]
    fn effective_sample_and_labels() {
        let d = system(2, 40, 0.0);
        let f = dols_fit(&d, "y", &["x1", "x2"], DolsSpec::symmetric(2)).unwrap();
        assert_eq!(f.regression.n_obs, 40 - 2 - 2 - 1);
        assert_eq!(f.first_year, 2003);
        assert_eq!(f.last_year, 2037);
        assert_eq!(f.nuisance.len(), 2 * 5);
        assert_eq!(f.nuisance[0].0, "Δx1(-2)");
        assert_eq!(f.nuisance.last().unwrap().0, "Δx2(+2)");
        assert_eq!(f.longrun.last().unwrap().name, "C");
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let d = system(3, 80, 0.5);
        let f = dols_fit(&d, "y", &["x1", "x2"], DolsSpec::default()).unwrap();
        let g = f.design.transpose() * f.residuals();
        assert!(g.amax() < 1e-8 * f.response.amax() * 80.0);
    }

    #[test]
    fn role_and_sample_errors() {
        let d = system(4, 12, 0.0);
        assert!(matches!(
            dols_fit(&d, "y", &["y", "x1"], DolsSpec::default()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            dols_fit(&d, "y", &["x1", "x2"], DolsSpec::symmetric(3)),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            dols_fit(&d, "y", &["zz"], DolsSpec::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn collinear_regressor_named() {
        let d = system(5, 50, 0.0);
        let x1 = d.get("x1").unwrap().clone();
        let d = Dataset::new(vec![
            d.get("y").unwrap().clone(),
            x1.clone(),
            x1.renamed("twin"),
        ])
        .unwrap();
        match dols_fit(&d, "y", &["x1", "twin"], DolsSpec::symmetric(0)) {
            Err(Error::SingularDesign { label, .. }) => assert_eq!(label.as_deref(), Some("twin")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn max_order_zero_selects_zero() {
        let d = system(6, 50, 0.0);
        assert_eq!(
            select_leads_lags(&d, "y", &["x1"], 0).unwrap(),
            DolsSpec::symmetric(0)
        );
    }

    #[test]
    fn white_noise_errors_favour_order_zero() {
        let zero = (0..100)
            .filter(|&s| {
                let d = system(1000 + s, 120, 0.0);
                select_leads_lags(&d, "y", &["x1", "x2"], 3).unwrap().leads == 0
            })
            .count();
        assert!(zero > 50, "{zero}");
    }

    #[test]
    fn hac_interval_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let reps = 500;
        let mut covered = 0;
        for _ in 0..reps {
            let n = 300;
            let (mut x, mut u) = (0.0, 0.0);
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for _ in 0..n {
                x += rng.sample::<f64, _>(StandardNormal);
                u = 0.3 * u + rng.sample::<f64, _>(StandardNormal);
                xs.push(x);
                ys.push(1.0 + 0.5 * x + u);
            }
            let d = Dataset::new(vec![
                TimeSeries::new("y", 1, ys).unwrap(),
                TimeSeries::new("x", 1, xs).unwrap(),
            ])
            .unwrap();
            let f = dols_fit(&d, "y", &["x"], DolsSpec::symmetric(1)).unwrap();
            let c = &f.longrun[0];
            if (c.coefficient - 0.5).abs() < 1.96 * c.std_error {
                covered += 1;
            }
        }
        assert!(covered >= 450, "{covered}/{reps}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn regressor_scaling(seed in 0u64..500, a in 0.05f64..20.0) {
            let d = system(seed, 50, 0.4);
            let f = dols_fit(&d, "y", &["x1", "x2"], DolsSpec::default()).unwrap();
            let s = d.series();
            let scaled = Dataset::new(vec![
                s[0].clone(),
                TimeSeries::new("x1", 2000, s[1].values().iter().map(|v| v * a).collect()).unwrap(),
                s[2].clone(),
            ]).unwrap();
            let g = dols_fit(&scaled, "y", &["x1", "x2"], DolsSpec::default()).unwrap();
            prop_assert!((g.longrun[0].coefficient * a - f.longrun[0].coefficient).abs() < 1e-8 * (1.0 + f.longrun[0].coefficient.abs()));
            for (u, v) in f.longrun.iter().zip(&g.longrun) {
                prop_assert!((u.t_ratio - v.t_ratio).abs() < 1e-8 * (1.0 + u.t_ratio.abs()));
            }
        }
    }
}
