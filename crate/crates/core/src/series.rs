//! Annual time-series containers and the transforms every estimator consumes.
//!
//! A [`TimeSeries`] is a gap-free run of yearly observations; a [`Dataset`]
//! is a set of such series that share one year range. Everything here is
//! immutable: transforms return new values.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    start_year: i32,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, start_year: i32, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("series {name} is empty")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "series {name} has a non-finite value in {}",
                start_year + i as i32
            )));
        }
        Ok(Self {
            name,
            start_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn year(&self, index: usize) -> i32 {
        self.start_year + index as i32
    }

    pub fn value_at_year(&self, year: i32) -> Option<f64> {
        let offset = year - self.start_year;
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied()
    }

    pub fn renamed(&self, name: impl Into<String>) -> TimeSeries {
        TimeSeries {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Base-10 logarithm of every value. The name gains a `log10(...)` wrapper.
    pub fn log10(&self) -> Result<TimeSeries> {
        if let Some(i) = self.values.iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "log10 of non-positive value {} in series {} at year {}",
                self.values[i],
                self.name,
                self.year(i)
            )));
        }
        Ok(TimeSeries {
            name: format!("log10({})", self.name),
            start_year: self.start_year,
            values: self.values.iter().map(|v| v.log10()).collect(),
        })
    }

    /// `order`-th difference; the first `order` years are dropped.
    pub fn difference(&self, order: usize) -> Result<TimeSeries> {
        if order == 0 {
            return Ok(self.clone());
        }
        if order >= self.len() {
            return Err(Error::InsufficientData(format!(
                "cannot take difference of order {order} of {} ({} observations)",
                self.name,
                self.len()
            )));
        }
        let mut values = self.values.clone();
        for _ in 0..order {
            values = values.windows(2).map(|w| w[1] - w[0]).collect();
        }
        Ok(TimeSeries {
            name: format!("d{order}({})", self.name),
            start_year: self.start_year + order as i32,
            values,
        })
    }

    /// Positive `k` lags the series (value of year `y` re-dated to `y + k`),
    /// negative `k` leads it. The result is `|k|` observations shorter.
    pub fn shift(&self, k: isize) -> Result<TimeSeries> {
        let n = self.len();
        let magnitude = k.unsigned_abs();
        if magnitude >= n {
            return Err(Error::InsufficientData(format!(
                "shift by {k} needs more than {n} observations in {}",
                self.name
            )));
        }
        if k == 0 {
            return Ok(self.clone());
        }
        let (start_year, values) = if k > 0 {
            (
                self.start_year + k as i32,
                self.values[..n - magnitude].to_vec(),
            )
        } else {
            (self.start_year, self.values[magnitude..].to_vec())
        };
        Ok(TimeSeries {
            name: self.name.clone(),
            start_year,
            values,
        })
    }

    /// Restrict to the inclusive year range `[from, to]`.
    pub fn window(&self, from: i32, to: i32) -> Result<TimeSeries> {
        if from > to || from < self.start_year || to > self.end_year() {
            return Err(Error::InsufficientData(format!(
                "series {} covers {}-{}, requested {from}-{to}",
                self.name,
                self.start_year,
                self.end_year()
            )));
        }
        let a = (from - self.start_year) as usize;
        let b = (to - self.start_year) as usize;
        Ok(TimeSeries {
            name: self.name.clone(),
            start_year: from,
            values: self.values[a..=b].to_vec(),
        })
    }
}

/// Series sharing an identical year range, addressable by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn new(series: Vec<TimeSeries>) -> Result<Self> {
        let Some(first) = series.first() else {
            return Err(Error::InsufficientData("dataset has no series".into()));
        };
        for s in &series[1..] {
            if s.start_year != first.start_year || s.len() != first.len() {
                return Err(Error::Domain(format!(
                    "series {} covers {}-{} but {} covers {}-{}",
                    s.name,
                    s.start_year,
                    s.end_year(),
                    first.name,
                    first.start_year,
                    first.end_year()
                )));
            }
        }
        for (i, s) in series.iter().enumerate() {
            if series[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::Domain(format!("duplicate series name {}", s.name)));
            }
        }
        Ok(Self { series })
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn names(&self) -> Vec<&str> {
        self.series.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&TimeSeries> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("no series named {name} in dataset")))
    }

    pub fn n_obs(&self) -> usize {
        self.series[0].len()
    }

    pub fn n_vars(&self) -> usize {
        self.series.len()
    }

    pub fn start_year(&self) -> i32 {
        self.series[0].start_year
    }

    pub fn end_year(&self) -> i32 {
        self.series[0].end_year()
    }

    /// Sub-dataset with the named series, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Dataset> {
        let picked = names
            .iter()
            .map(|n| self.get(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(picked)
    }

    /// Observations as a `n_obs × n_vars` matrix, columns in dataset order.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_obs(), self.n_vars(), |t, j| self.series[j].values[t])
    }

    /// Restrict every series to `[from, to]`.
    pub fn window(&self, from: i32, to: i32) -> Result<Dataset> {
        Dataset::new(
            self.series
                .iter()
                .map(|s| s.window(from, to))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n−1 denominator); 0 when `degenerate`.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// True when n = 1 and the standard deviation is undefined.
    pub degenerate: bool,
}

pub fn summarize(s: &TimeSeries) -> SummaryRow {
    let n = s.len();
    let mean = s.values.iter().sum::<f64>() / n as f64;
    let (sd, degenerate) = if n < 2 {
        (0.0, true)
    } else {
        let ss: f64 = s.values.iter().map(|v| (v - mean).powi(2)).sum();
        ((ss / (n - 1) as f64).sqrt(), false)
    };
    SummaryRow {
        name: s.name.clone(),
        n,
        mean,
        sd,
        min: s.values.iter().copied().fold(f64::INFINITY, f64::min),
        max: s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        degenerate,
    }
}

/// Per-series n, mean, sd, min and max.
pub fn describe(d: &Dataset) -> Vec<SummaryRow> {
    d.series.iter().map(summarize).collect()
}
