//! Time-series econometrics for small annual macro panels: unit-root tests
//! (ADF, Phillips-Perron, Zivot-Andrews), VAR lag selection, Johansen rank
//! tests, dynamic OLS, residual diagnostics, and Monte Carlo validation of
//! the embedded critical-value tables.

pub mod config;
pub mod diagnostics;
pub mod dols;
pub mod error;
pub mod ingest;
pub mod johansen;
pub mod linalg;
pub mod linreg;
pub mod mc;
pub mod pipeline;
pub mod report;
pub mod series;
pub mod significance;
pub mod unitroot;
pub mod varselect;
pub mod zabreak;

pub use error::{Error, Result};
pub use series::{Dataset, TimeSeries};
