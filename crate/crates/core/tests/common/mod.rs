#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, StudentT};

use cointegra::diagnostics::{
    breusch_godfrey, cusum, cusumsq, het_test, jarque_bera, ramsey_reset, HetKind,
};
use cointegra::linreg::{ols_fit, CovarianceKind};
use cointegra::significance::Level;
use cointegra::unitroot::{adf_test, pp_test, BandwidthPolicy, DeterministicSpec, LagPolicy};
use cointegra::TimeSeries;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/turkiye"))
}

pub fn test_fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures")).join(name)
}

/// A simulated rejection frequency and the band it must fall in.
#[derive(Debug, Clone)]
pub struct RateCheck {
    pub name: &'static str,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RateCheck {
    pub fn ok(&self) -> bool {
        self.rate >= self.lo && self.rate <= self.hi
    }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn walk(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    normals(rng, n)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}

fn rate(reps: usize, seed: u64, mut reject: impl FnMut(&mut ChaCha8Rng) -> bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps).filter(|_| reject(&mut rng)).count() as f64 / reps as f64
}

fn series(v: Vec<f64>) -> TimeSeries {
    TimeSeries::new("s", 1, v).unwrap()
}

/// `[1, x1, x2]` with standard normal regressors.
fn design(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, 3, |_, c| {
        if c == 0 {
            1.0
        } else {
            rng.sample(StandardNormal)
        }
    })
}

fn linear(x: &DMatrix<f64>, e: &[f64]) -> DVector<f64> {
    DVector::from_fn(x.nrows(), |t, _| 1.0 + 2.0 * x[(t, 1)] - x[(t, 2)] + e[t])
}

const SIZE_BAND: (f64, f64) = (0.03, 0.07);

fn band(name: &'static str, rate: f64, (lo, hi): (f64, f64)) -> RateCheck {
    RateCheck { name, rate, lo, hi }
}

/// Sizes at 5% under each null, 2000 replications.
pub fn size_checks() -> Vec<RateCheck> {
    let reps = 2000;
    let lvl = Level::Five;
    let sel = LagPolicy::default();
    vec![
        band(
            "ADF size (random walk, T=100, constant)",
            rate(reps, 11, |r| {
                adf_test(&series(walk(r, 100)), DeterministicSpec::Constant, sel)
                    .unwrap()
                    .reject(lvl)
            }),
            SIZE_BAND,
        ),
        band(
            "PP size (random walk, T=100, constant)",
            rate(reps, 12, |r| {
                pp_test(
                    &series(walk(r, 100)),
                    DeterministicSpec::Constant,
                    BandwidthPolicy::Automatic,
                )
                .unwrap()
                .reject(lvl)
            }),
            SIZE_BAND,
        ),
        band(
            "BG(2) size (iid errors, T=100)",
            rate(reps, 13, |r| {
                let x = design(r, 100);
                let y = linear(&x, &normals(r, 100));
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                breusch_godfrey(&fit, &x, 2).unwrap().p_value < 0.05
            }),
            SIZE_BAND,
        ),
        band(
            "BPG size (homoskedastic, T=200)",
            rate(reps, 14, |r| {
                let x = design(r, 200);
                let y = linear(&x, &normals(r, 200));
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                het_test(&fit, &x, HetKind::BreuschPagan).unwrap().p_value < 0.05
            }),
            SIZE_BAND,
        ),
        band(
            "JB size (normal errors, T=200)",
            rate(reps, 15, |r| {
                let x = design(r, 200);
                let y = linear(&x, &normals(r, 200));
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                jarque_bera(fit.residuals.as_slice()).unwrap().p_value < 0.05
            }),
            SIZE_BAND,
        ),
        band(
            "RESET(2) size (linear DGP, T=200)",
            rate(reps, 16, |r| {
                let x = design(r, 200);
                let y = linear(&x, &normals(r, 200));
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                ramsey_reset(&fit, &x, &[2]).unwrap().p_value < 0.05
            }),
            SIZE_BAND,
        ),
    ]
}

/// Powers under the listed alternatives.
pub fn power_checks() -> Vec<RateCheck> {
    let lvl = Level::Five;
    let sel = LagPolicy::default();
    vec![
        band(
            "ADF power (iid normal, T=200)",
            rate(1000, 21, |r| {
                adf_test(&series(normals(r, 200)), DeterministicSpec::Constant, sel)
                    .unwrap()
                    .reject(lvl)
            }),
            (0.95, 1.0),
        ),
        band(
            "PP power (iid normal, T=200)",
            rate(1000, 22, |r| {
                pp_test(
                    &series(normals(r, 200)),
                    DeterministicSpec::Constant,
                    BandwidthPolicy::Automatic,
                )
                .unwrap()
                .reject(lvl)
            }),
            (0.95, 1.0),
        ),
        band(
            "BG(2) power (AR(1) errors, phi=0.8, T=100)",
            rate(1000, 23, |r| {
                let x = design(r, 100);
                let mut u = 0.0;
                let e: Vec<f64> = normals(r, 100)
                    .into_iter()
                    .map(|v| {
                        u = 0.8 * u + v;
                        u
                    })
                    .collect();
                let y = linear(&x, &e);
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                breusch_godfrey(&fit, &x, 2).unwrap().p_value < 0.05
            }),
            (0.9, 1.0),
        ),
        band(
            "BPG power (variance proportional to a regressor, T=200)",
            rate(1000, 24, |r| {
                let n = 200;
                let x = DMatrix::<f64>::from_fn(n, 2, |_, c| {
                    if c == 0 {
                        1.0
                    } else {
                        r.random_range(1.0..10.0)
                    }
                });
                let y = DVector::from_fn(n, |t, _| {
                    let sd = x[(t, 1)].sqrt();
                    1.0 + 0.5 * x[(t, 1)] + sd * r.sample::<f64, _>(StandardNormal)
                });
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                het_test(&fit, &x, HetKind::BreuschPagan).unwrap().p_value < 0.05
            }),
            (0.8, 1.0),
        ),
        band(
            "JB power (t(3) errors, T=500)",
            rate(1000, 25, |r| {
                let t3 = StudentT::new(3.0).unwrap();
                let u: Vec<f64> = (0..500).map(|_| r.sample(t3)).collect();
                jarque_bera(&u).unwrap().p_value < 0.05
            }),
            (0.9, 1.0),
        ),
        band(
            "RESET(2) power (quadratic DGP, T=200)",
            rate(1000, 26, |r| {
                let x = design(r, 200);
                let y = DVector::from_fn(200, |t, _| {
                    1.0 + x[(t, 1)] + x[(t, 1)] * x[(t, 1)] - x[(t, 2)]
                        + r.sample::<f64, _>(StandardNormal)
                });
                let fit = ols_fit(&y, &x, CovarianceKind::Classical).unwrap();
                ramsey_reset(&fit, &x, &[2]).unwrap().p_value < 0.05
            }),
            (0.9, 1.0),
        ),
    ]
}

/// Share of stable DGPs judged stable by CUSUM and CUSUMSQ together, and
/// share of mid-sample slope doublings flagged by either. The regressor is
/// N(1, 1): with a zero-mean regressor a slope change barely moves the
/// recursive residuals' mean.
pub fn stability_rates(reps: usize, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stable_ok = 0;
    let mut break_found = 0;
    for _ in 0..reps {
        let x = DMatrix::from_fn(n, 2, |_, c| {
            if c == 0 {
                1.0
            } else {
                1.0 + rng.sample::<f64, _>(StandardNormal)
            }
        });
        let e = normals(&mut rng, n);
        let y0 = DVector::from_fn(n, |t, _| 1.0 + x[(t, 1)] + e[t]);
        let y1 = DVector::from_fn(n, |t, _| {
            let slope = if t < n / 2 { 1.0 } else { 2.0 };
            1.0 + slope * x[(t, 1)] + e[t]
        });
        let both = |y: &DVector<f64>| {
            cusum(y, &x, Level::Five).unwrap().stable && cusumsq(y, &x, Level::Five).unwrap().stable
        };
        stable_ok += both(&y0) as usize;
        break_found += !both(&y1) as usize;
    }
    (
        stable_ok as f64 / reps as f64,
        break_found as f64 / reps as f64,
    )
}
