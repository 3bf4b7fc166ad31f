//! Johansen reduced-rank analysis of a VECM: concentrated moment matrices,
//! the symmetrised eigenproblem, and trace / maximum-eigenvalue rank tests.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Qr};
use crate::series::Dataset;
use crate::significance::{CriticalValues, Level};

/// Deterministic terms of the VECM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetCase {
    /// Case 1: no deterministic terms.
    None,
    /// Case 2: constant inside the cointegrating relation only.
    RestrictedConstant,
    /// Case 3: unrestricted constant, no trend in the relation.
    UnrestrictedConstant,
    /// Case 4: unrestricted constant, trend inside the relation.
    RestrictedTrend,
}

impl DetCase {
    pub fn number(self) -> u8 {
        match self {
            DetCase::None => 1,
            DetCase::RestrictedConstant => 2,
            DetCase::UnrestrictedConstant => 3,
            DetCase::RestrictedTrend => 4,
        }
    }

    pub fn from_number(n: u8) -> Result<DetCase> {
        match n {
            1 => Ok(DetCase::None),
            2 => Ok(DetCase::RestrictedConstant),
            3 => Ok(DetCase::UnrestrictedConstant),
            4 => Ok(DetCase::RestrictedTrend),
            _ => Err(Error::Config(format!(
                "deterministic case must be 1, 2, 3 or 4, got {n}"
            ))),
        }
    }

    fn short_run_constant(self) -> bool {
        matches!(
            self,
            DetCase::UnrestrictedConstant | DetCase::RestrictedTrend
        )
    }
}

impl std::str::FromStr for DetCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<DetCase> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "none" => Ok(DetCase::None),
            "2" | "restricted-constant" => Ok(DetCase::RestrictedConstant),
            "3" | "unrestricted-constant" | "constant" => Ok(DetCase::UnrestrictedConstant),
            "4" | "restricted-trend" => Ok(DetCase::RestrictedTrend),
            other => Err(Error::Config(format!(
                "unknown deterministic case `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VecmSpec {
    /// Number of lagged differences (VAR order minus one).
    pub diff_lags: usize,
    pub det_case: DetCase,
}

impl Default for VecmSpec {
    fn default() -> Self {
        VecmSpec {
            diff_lags: 1,
            det_case: DetCase::UnrestrictedConstant,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSolution {
    pub names: Vec<String>,
    pub spec: VecmSpec,
    /// Descending, one per variable.
    pub eigenvalues: Vec<f64>,
    /// Columns are the candidate cointegrating vectors, normalised so that
    /// `β' S11 β = I`. Restricted cases carry an extra deterministic row.
    pub eigenvectors: DMatrix<f64>,
    pub s00: DMatrix<f64>,
    pub s01: DMatrix<f64>,
    pub s11: DMatrix<f64>,
    /// Effective sample size `T`.
    pub n_obs: usize,
}

impl EigenSolution {
    pub fn rank_test(&self, level: Level) -> Result<RankTestResult> {
        rank_test(&self.eigenvalues, self.n_obs, self.spec.det_case, level)
    }
}

/// Eigen-analysis of the VECM in `d`.
pub fn johansen_eigen(d: &Dataset, spec: VecmSpec) -> Result<EigenSolution> {
    if d.n_vars() < 2 {
        return Err(Error::Domain(format!(
            "cointegration analysis needs at least two variables, got {}",
            d.n_vars()
        )));
    }
    let names: Vec<String> = d.names().iter().map(|s| s.to_string()).collect();
    johansen_eigen_matrix(&d.to_matrix(), &names, spec)
}

/// Same as [`johansen_eigen`] on a `T × k` matrix of levels. A single
/// column is accepted here (the simulator needs `n − r = 1`).
pub fn johansen_eigen_matrix(
    levels: &DMatrix<f64>,
    names: &[String],
    spec: VecmSpec,
) -> Result<EigenSolution> {
    let total = levels.nrows();
    let k = levels.ncols();
    if k == 0 || names.len() != k {
        return Err(Error::Domain(format!(
            "{k} columns with {} names",
            names.len()
        )));
    }
    let p = spec.diff_lags;
    let first_t = p + 1;
    if total <= first_t {
        return Err(Error::InsufficientData(format!(
            "{total} observations leave nothing after {p} lagged differences"
        )));
    }
    let n = total - first_t;
    let short_const = spec.det_case.short_run_constant();
    let n_z = k * p + usize::from(short_const);
    let restricted = match spec.det_case {
        DetCase::RestrictedConstant | DetCase::RestrictedTrend => 1,
        _ => 0,
    };
    let k1 = k + restricted;
    if n <= n_z + k1 {
        return Err(Error::InsufficientData(format!(
            "effective sample {n} too small for {n_z} short-run regressors and {k1} levels"
        )));
    }

    let diff = |t: usize, j: usize| levels[(t, j)] - levels[(t - 1, j)];
    let dy = DMatrix::from_fn(n, k, |r, j| diff(first_t + r, j));
    let y1 = DMatrix::from_fn(n, k1, |r, j| {
        let t = first_t + r;
        if j < k {
            levels[(t - 1, j)]
        } else if spec.det_case == DetCase::RestrictedTrend {
            t as f64
        } else {
            1.0
        }
    });
    let z_label = |c: usize| -> String {
        if short_const && c == 0 {
            "const".into()
        } else {
            let c = c - usize::from(short_const);
            format!("Δ{}(-{})", names[c % k], c / k + 1)
        }
    };
    let (r0, r1) = if n_z == 0 {
        (dy, y1)
    } else {
        let z = DMatrix::from_fn(n, n_z, |r, c| {
            if short_const && c == 0 {
                1.0
            } else {
                let c = c - usize::from(short_const);
                diff(first_t + r - (c / k + 1), c % k)
            }
        });
        let qr = Qr::new(&z).map_err(|c| {
            Error::Collinear(format!(
                "short-run regressor {} is an exact combination of the others",
                z_label(c)
            ))
        })?;
        let r0 = &dy - &z * qr.solve(&dy);
        let r1 = &y1 - &z * qr.solve(&y1);
        (r0, r1)
    };

    let nf = n as f64;
    let s00 = r0.transpose() * &r0 / nf;
    let s01 = r0.transpose() * &r1 / nf;
    let s11 = r1.transpose() * &r1 / nf;
    let level_label = |j: usize| -> String {
        if j < k {
            names[j].clone()
        } else if spec.det_case == DetCase::RestrictedTrend {
            "trend".into()
        } else {
            "const".into()
        }
    };
    let c11 = Cholesky::new(&s11).map_err(|j| {
        Error::Collinear(format!(
            "lagged levels are collinear: {} is an exact combination of the others",
            level_label(j)
        ))
    })?;
    let c00 = Cholesky::new(&s00).map_err(|j| {
        Error::Collinear(format!(
            "differences are collinear: Δ{} is an exact combination of the others",
            names[j]
        ))
    })?;

    // L⁻¹ S10 S00⁻¹ S01 L⁻ᵀ with L L' = S11
    let a = c00.solve_lower(&s01);
    let b = c11.solve_lower(&a.transpose());
    let mut m = &b * b.transpose();
    m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..k1).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lt = c11.l().transpose();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = DMatrix::zeros(k1, k);
    for (col, &i) in order.iter().take(k).enumerate() {
        let lam = eig.eigenvalues[i];
        if !lam.is_finite() || lam >= 1.0 {
            return Err(Error::Numerical(format!("eigenvalue {lam} outside [0, 1)")));
        }
        eigenvalues.push(lam.max(0.0));
        let v = eig.eigenvectors.column(i).into_owned();
        let beta = lt
            .solve_upper_triangular(&v)
            .expect("cholesky factor has a positive diagonal");
        vectors.set_column(col, &beta);
    }
    Ok(EigenSolution {
        names: names.to_vec(),
        spec,
        eigenvalues,
        eigenvectors: vectors,
        s00,
        s01,
        s11,
        n_obs: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    /// Null hypothesis `r ≤ null_rank` (`r = 0` for the first row).
    pub null_rank: usize,
    pub eigenvalue: f64,
    pub trace_stat: f64,
    pub trace_cv: CriticalValues,
    pub maxeig_stat: f64,
    pub maxeig_cv: CriticalValues,
    pub trace_reject: bool,
    pub maxeig_reject: bool,
}

impl RankRow {
    pub fn trace_stars(&self) -> &'static str {
        crate::significance::upper_tail_stars(self.trace_stat, &self.trace_cv)
    }

    pub fn maxeig_stars(&self) -> &'static str {
        crate::significance::upper_tail_stars(self.maxeig_stat, &self.maxeig_cv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTestResult {
    pub det_case: DetCase,
    pub level: Level,
    pub n_obs: usize,
    pub rows: Vec<RankRow>,
    /// First `r` whose trace null is not rejected; `k` if all are.
    pub decided_rank: usize,
    /// Same rule applied to the maximum-eigenvalue sequence.
    pub maxeig_rank: usize,
}

/// `trace(r)` for `r = 0..k−1` and `maxeig(r)`.
pub fn rank_statistics(eigenvalues: &[f64], n_obs: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = n_obs as f64;
    let terms = eigenvalues
        .iter()
        .map(|&l| {
            if !(0.0..1.0).contains(&l) {
                Err(Error::Numerical(format!("eigenvalue {l} outside [0, 1)")))
            } else {
                Ok(-t * (-l).ln_1p())
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = terms.len();
    let mut trace = vec![0.0; k];
    let mut acc = 0.0;
    for r in (0..k).rev() {
        acc += terms[r];
        trace[r] = acc;
    }
    Ok((trace, terms))
}

pub fn rank_test(
    eigenvalues: &[f64],
    n_obs: usize,
    det_case: DetCase,
    level: Level,
) -> Result<RankTestResult> {
    let k = eigenvalues.len();
    let (trace, maxeig) = rank_statistics(eigenvalues, n_obs)?;
    let mut rows = Vec::with_capacity(k);
    for r in 0..k {
        let (trace_cv, maxeig_cv) = johansen_critical_values(k - r, det_case)?;
        rows.push(RankRow {
            null_rank: r,
            eigenvalue: eigenvalues[r],
            trace_stat: trace[r],
            trace_cv,
            maxeig_stat: maxeig[r],
            maxeig_cv,
            trace_reject: trace[r] > trace_cv.get(level),
            maxeig_reject: maxeig[r] > maxeig_cv.get(level),
        });
    }
    let decided_rank = rows.iter().position(|r| !r.trace_reject).unwrap_or(k);
    let maxeig_rank = rows.iter().position(|r| !r.maxeig_reject).unwrap_or(k);
    Ok(RankTestResult {
        det_case,
        level,
        n_obs,
        rows,
        decided_rank,
        maxeig_rank,
    })
}

pub const MAX_TABLE_DIM: usize = 12;

/// Case 3 asymptotic quantiles indexed by `n − r − 1`: `[10%, 5%, 1%]`.
pub const CASE3_TRACE: [[f64; 3]; MAX_TABLE_DIM] = [
    [2.705545, 3.841466, 6.634897],
    [13.42878, 15.49471, 19.93711],
    [27.06695, 29.79707, 35.45817],
    [44.49359, 47.85613, 54.68150],
    [65.81970, 69.81889, 77.81884],
    [91.10970, 95.75366, 104.9615],
    [120.3673, 125.6154, 135.9732],
    [153.6341, 159.5297, 171.0905],
    [190.8714, 197.3709, 210.0366],
    [232.1030, 239.2354, 253.2604],
    [277.3740, 285.1425, 300.2838],
    [326.5354, 334.9837, 351.2150],
];

pub const CASE3_MAXEIG: [[f64; 3]; MAX_TABLE_DIM] = [
    [2.705545, 3.841466, 6.634897],
    [12.29652, 14.26460, 18.52001],
    [18.89282, 21.13162, 25.86121],
    [25.12408, 27.58434, 32.71527],
    [31.23922, 33.87687, 39.37049],
    [37.27779, 40.07757, 45.86900],
    [43.29543, 46.23142, 52.30821],
    [49.28536, 52.36261, 58.66273],
    [55.24578, 58.43354, 64.99605],
    [61.20117, 64.50472, 71.26407],
    [67.14167, 70.53513, 77.48421],
    [73.06720, 76.57843, 83.68168],
];

/// `(trace, maxeig)` critical values for `n − r` stochastic trends, rounded
/// to three decimals as usually tabulated.
pub fn johansen_critical_values(
    n_minus_r: usize,
    det_case: DetCase,
) -> Result<(CriticalValues, CriticalValues)> {
    if det_case != DetCase::UnrestrictedConstant {
        return Err(Error::Unsupported(format!(
            "critical values are embedded for case 3 only (got case {})",
            det_case.number()
        )));
    }
    if !(1..=MAX_TABLE_DIM).contains(&n_minus_r) {
        return Err(Error::Domain(format!(
            "n − r must be in 1..={MAX_TABLE_DIM}, got {n_minus_r}"
        )));
    }
    let cv = |row: [f64; 3]| CriticalValues {
        pct1: round3(row[2]),
        pct5: round3(row[1]),
        pct10: round3(row[0]),
    };
    Ok((
        cv(CASE3_TRACE[n_minus_r - 1]),
        cv(CASE3_MAXEIG[n_minus_r - 1]),
    ))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TimeSeries;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn walks(seed: u64, n: usize, k: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Dataset::new(
            (0..k)
                .map(|j| {
                    let mut acc = 0.0;
                    let v = (0..n)
                        .map(|_| {
                            acc += rng.sample::<f64, _>(StandardNormal);
                            acc
                        })
                        .collect();
                    TimeSeries::new(format!("y{j}"), 1, v).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn table_five_percent_constants() {
        let (t, m) = johansen_critical_values(5, DetCase::UnrestrictedConstant).unwrap();
        assert_eq!((t.pct5, m.pct5), (69.819, 33.877));
        let (t, m) = johansen_critical_values(2, DetCase::UnrestrictedConstant).unwrap();
        assert_eq!((t.pct5, m.pct5), (15.495, 14.265));
        let (t, m) = johansen_critical_values(3, DetCase::UnrestrictedConstant).unwrap();
        assert_eq!((t.pct5, m.pct5), (29.797, 21.132));
        assert!(johansen_critical_values(0, DetCase::UnrestrictedConstant).is_err());
        assert!(johansen_critical_values(13, DetCase::UnrestrictedConstant).is_err());
        assert!(matches!(
            johansen_critical_values(2, DetCase::None),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_eigenvalues() {
        let r = rank_test(
            &[0.0, 0.0, 0.0],
            50,
            DetCase::UnrestrictedConstant,
            Level::Five,
        )
        .unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.trace_stat == 0.0 && row.maxeig_stat == 0.0));
        assert_eq!(r.decided_rank, 0);
    }

    #[test]
    fn closed_form_maxeig() {
        let lam = 1.0 - (-1.0f64).exp();
        let (tr, me) = rank_statistics(&[lam, 0.0], 10).unwrap();
        assert!((me[0] - 10.0).abs() < 1e-12);
        assert!((tr[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_one_is_rejected() {
        assert!(matches!(
            rank_statistics(&[1.0, 0.2], 30),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn exact_copy_is_named() {
        let d = walks(3, 60, 1);
        let y = d.series()[0].clone();
        let d = Dataset::new(vec![y.clone(), y.renamed("copy")]).unwrap();
        let spec = VecmSpec {
            diff_lags: 0,
            det_case: DetCase::UnrestrictedConstant,
        };
        match johansen_eigen(&d, spec) {
            Err(Error::Collinear(msg)) => assert!(msg.contains("copy"), "{msg}"),
            other => panic!("expected collinearity error, got {other:?}"),
        }
    }

    #[test]
    fn eigenvalues_sorted_in_unit_interval() {
        for case in [
            DetCase::None,
            DetCase::RestrictedConstant,
            DetCase::UnrestrictedConstant,
            DetCase::RestrictedTrend,
        ] {
            let d = walks(5, 80, 3);
            let e = johansen_eigen(
                &d,
                VecmSpec {
                    diff_lags: 2,
                    det_case: case,
                },
            )
            .unwrap();
            assert_eq!(e.eigenvalues.len(), 3);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            assert!(e.eigenvalues.iter().all(|&l| (0.0..1.0).contains(&l)));
            let ortho = e.eigenvectors.transpose() * &e.s11 * &e.eigenvectors;
            assert!((ortho - DMatrix::identity(3, 3)).amax() < 1e-8);
        }
    }

    #[test]
    fn generalized_eigen_equation_holds() {
        let d = walks(8, 70, 3);
        let e = johansen_eigen(&d, VecmSpec::default()).unwrap();
        let s00inv = e.s00.clone().try_inverse().unwrap();
        let lhs = e.s01.transpose() * &s00inv * &e.s01;
        for (i, &lam) in e.eigenvalues.iter().enumerate() {
            let v = e.eigenvectors.column(i);
            let resid = &lhs * v - &e.s11 * v * lam;
            assert!(resid.amax() < 1e-8);
        }
    }

    #[test]
    fn cointegrated_pair_separates_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let reps = 100;
        let mut hits = 0;
        for _ in 0..reps {
            let n = 500;
            let mut x = Vec::with_capacity(n);
            let mut acc = 0.0;
            for _ in 0..n {
                acc += rng.sample::<f64, _>(StandardNormal);
                x.push(acc);
            }
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let d = Dataset::new(vec![
                TimeSeries::new("y", 1, y).unwrap(),
                TimeSeries::new("x", 1, x).unwrap(),
            ])
            .unwrap();
            let e = johansen_eigen(
                &d,
                VecmSpec {
                    diff_lags: 1,
                    det_case: DetCase::UnrestrictedConstant,
                },
            )
            .unwrap();
            if e.eigenvalues[0] > 10.0 * e.eigenvalues[1] {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits}/{reps}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn trace_identities(lams in proptest::collection::vec(0.0f64..0.99, 1..8), n in 10usize..400) {
            let mut lams = lams;
            lams.sort_by(|a, b| b.total_cmp(a));
            let (tr, me) = rank_statistics(&lams, n).unwrap();
            for r in 0..lams.len() {
                prop_assert!(tr[r] >= me[r]);
                prop_assert!(me[r] >= 0.0);
                let next = if r + 1 < lams.len() { tr[r + 1] } else { 0.0 };
                prop_assert!((tr[r] - next - me[r]).abs() < 1e-9);
            }
        }

        #[test]
        fn scale_invariance(seed in 0u64..1000, a in 0.01f64..100.0, b in 0.01f64..100.0) {
            let d = walks(seed, 60, 3);
            let e = johansen_eigen(&d, VecmSpec::default()).unwrap();
            let s = d.series();
            let scaled = Dataset::new(vec![
                TimeSeries::new("y0", 1, s[0].values().iter().map(|v| v * a).collect()).unwrap(),
                TimeSeries::new("y1", 1, s[1].values().iter().map(|v| v * b).collect()).unwrap(),
                s[2].clone(),
            ]).unwrap();
            let f = johansen_eigen(&scaled, VecmSpec::default()).unwrap();
            let (t1, _) = rank_statistics(&e.eigenvalues, e.n_obs).unwrap();
            let (t2, _) = rank_statistics(&f.eigenvalues, f.n_obs).unwrap();
            for (x, y) in t1.iter().zip(&t2) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }
    }
}
