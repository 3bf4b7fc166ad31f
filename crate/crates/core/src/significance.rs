use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conventional test sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "1%")]
    One,
    #[serde(rename = "5%")]
    Five,
    #[serde(rename = "10%")]
    Ten,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Five, Level::Ten];

    pub fn alpha(self) -> f64 {
        match self {
            Level::One => 0.01,
            Level::Five => 0.05,
            Level::Ten => 0.10,
        }
    }

    pub fn from_alpha(alpha: f64) -> Result<Level> {
        Level::ALL
            .into_iter()
            .find(|l| (l.alpha() - alpha).abs() < 1e-9)
            .ok_or_else(|| Error::Unsupported(format!("significance level {alpha}")))
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::One => "1%",
            Level::Five => "5%",
            Level::Ten => "10%",
        }
    }
}

impl std::str::FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Level> {
        let t = s.trim().trim_end_matches('%');
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Unsupported(format!("significance level {s}")))?;
        Level::from_alpha(if v >= 1.0 { v / 100.0 } else { v })
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Critical values at the three conventional levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub pct1: f64,
    pub pct5: f64,
    pub pct10: f64,
}

impl CriticalValues {
    pub fn get(&self, level: Level) -> f64 {
        match level {
            Level::One => self.pct1,
            Level::Five => self.pct5,
            Level::Ten => self.pct10,
        }
    }
}

/// `***`, `**`, `*` for rejection at 1%, 5%, 10%. `reject` decides one level.
pub fn stars(reject: impl Fn(Level) -> bool) -> &'static str {
    if reject(Level::One) {
        "***"
    } else if reject(Level::Five) {
        "**"
    } else if reject(Level::Ten) {
        "*"
    } else {
        ""
    }
}

/// Stars for a lower-tail statistic against its critical values.
pub fn lower_tail_stars(statistic: f64, cv: &CriticalValues) -> &'static str {
    stars(|l| statistic < cv.get(l))
}

/// Stars for an upper-tail statistic against its critical values.
pub fn upper_tail_stars(statistic: f64, cv: &CriticalValues) -> &'static str {
    stars(|l| statistic > cv.get(l))
}

/// Stars from a p-value.
pub fn p_value_stars(p: f64) -> &'static str {
    stars(|l| p < l.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_levels() {
        assert_eq!("5%".parse::<Level>().unwrap(), Level::Five);
        assert_eq!("0.01".parse::<Level>().unwrap(), Level::One);
        assert_eq!("10".parse::<Level>().unwrap(), Level::Ten);
        assert!("2.5%".parse::<Level>().is_err());
    }

    #[test]
    fn star_rendering() {
        let cv = CriticalValues {
            pct1: -3.5,
            pct5: -2.9,
            pct10: -2.6,
        };
        assert_eq!(lower_tail_stars(-4.0, &cv), "***");
        assert_eq!(lower_tail_stars(-3.0, &cv), "**");
        assert_eq!(lower_tail_stars(-2.7, &cv), "*");
        assert_eq!(lower_tail_stars(-1.0, &cv), "");
        assert_eq!(p_value_stars(0.004), "***");
    }
}
