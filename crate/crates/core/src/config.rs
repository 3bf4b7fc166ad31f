//! Pipeline configuration, read from TOML. Every field has a default so a
//! config file only needs the parts it changes.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsConfig, HetKind};
use crate::dols::DolsSpec;
use crate::error::{Error, Result};
use crate::ingest::{SourceKind, VariableSource};
use crate::johansen::{DetCase, VecmSpec};
use crate::linreg::Criterion;
use crate::significance::Level;
use crate::unitroot::{BandwidthPolicy, DeterministicSpec, LagPolicy};
use crate::zabreak::ZaModel;

/// Fewest years the full pipeline accepts.
pub const MIN_YEARS: i32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableConfig {
    pub symbol: String,
    pub code: String,
    pub file: String,
    pub kind: SourceKind,
    #[serde(default)]
    pub description: String,
    /// Unit of the raw series, before any log transform.
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub source: String,
}

impl VariableConfig {
    pub fn source_spec(&self) -> VariableSource {
        VariableSource {
            symbol: self.symbol.clone(),
            code: self.code.clone(),
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitRootConfig {
    pub specs: Vec<DeterministicSpec>,
    pub criterion: Criterion,
    /// Upper bound of the ADF lag search; default is Schwert's rule.
    pub max_lag: Option<usize>,
    /// PP Bartlett bandwidth; automatic when absent.
    pub pp_bandwidth: Option<usize>,
}

impl Default for UnitRootConfig {
    fn default() -> Self {
        UnitRootConfig {
            specs: vec![
                DeterministicSpec::Constant,
                DeterministicSpec::ConstantTrend,
            ],
            criterion: Criterion::Sc,
            max_lag: None,
            pp_bandwidth: None,
        }
    }
}

impl UnitRootConfig {
    pub fn lag_policy(&self) -> LagPolicy {
        LagPolicy::Select {
            max: self.max_lag,
            criterion: self.criterion,
        }
    }

    pub fn bandwidth_policy(&self) -> BandwidthPolicy {
        self.pp_bandwidth
            .map_or(BandwidthPolicy::Automatic, |bandwidth| {
                BandwidthPolicy::Fixed { bandwidth }
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZaConfig {
    pub models: Vec<ZaModel>,
    pub trimming: f64,
    pub criterion: Criterion,
    pub max_lag: Option<usize>,
}

impl Default for ZaConfig {
    fn default() -> Self {
        ZaConfig {
            models: vec![ZaModel::A, ZaModel::C],
            trimming: crate::zabreak::DEFAULT_TRIMMING,
            criterion: Criterion::Sc,
            max_lag: None,
        }
    }
}

impl ZaConfig {
    pub fn lag_policy(&self) -> LagPolicy {
        LagPolicy::Select {
            max: self.max_lag,
            criterion: self.criterion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JohansenConfig {
    /// 1–4; only case 3 has embedded critical values.
    pub det_case: u8,
    /// Lagged differences; absent means `max(AIC lag, 1) − 1`.
    pub diff_lags: Option<usize>,
}

impl Default for JohansenConfig {
    fn default() -> Self {
        JohansenConfig {
            det_case: 3,
            diff_lags: None,
        }
    }
}

impl JohansenConfig {
    pub fn spec(&self, aic_lag: usize) -> Result<VecmSpec> {
        Ok(VecmSpec {
            diff_lags: self.diff_lags.unwrap_or(aic_lag.max(1) - 1),
            det_case: DetCase::from_number(self.det_case)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DolsConfig {
    pub leads: usize,
    pub lags: usize,
    /// When set, a symmetric order is chosen by SC up to this bound and
    /// `leads`/`lags` are ignored.
    pub select_max_order: Option<usize>,
    /// Bartlett bandwidth for the long-run variance; automatic when absent.
    pub bandwidth: Option<usize>,
}

impl Default for DolsConfig {
    fn default() -> Self {
        DolsConfig {
            leads: 1,
            lags: 1,
            select_max_order: None,
            bandwidth: None,
        }
    }
}

impl DolsConfig {
    pub fn bandwidth_policy(&self) -> BandwidthPolicy {
        self.bandwidth
            .map_or(BandwidthPolicy::Automatic, |bandwidth| {
                BandwidthPolicy::Fixed { bandwidth }
            })
    }

    pub fn fixed_spec(&self) -> DolsSpec {
        DolsSpec {
            leads: self.leads,
            lags: self.lags,
            bandwidth: self.bandwidth_policy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub bg_order: usize,
    pub het: HetKind,
    pub reset_powers: Vec<u32>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            bg_order: 2,
            het: HetKind::BreuschPagan,
            reset_powers: vec![2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub start_year: i32,
    pub end_year: i32,
    pub dependent: String,
    pub regressors: Vec<String>,
    /// Level used for decisions (I(1) classification, rank, stability).
    pub level: Level,
    /// Largest VAR order in the lag-selection table.
    pub pmax: usize,
    pub variables: Vec<VariableConfig>,
    pub unitroot: UnitRootConfig,
    pub za: ZaConfig,
    pub johansen: JohansenConfig,
    pub dols: DolsConfig,
    pub diagnostics: DiagnosticsSection,
}

fn wdi(symbol: &str, code: &str, description: &str, unit: &str) -> VariableConfig {
    VariableConfig {
        symbol: symbol.into(),
        code: code.into(),
        file: "wdi_turkiye.csv".into(),
        kind: SourceKind::Wdi,
        description: description.into(),
        unit: unit.into(),
        source: "World Bank, World Development Indicators".into(),
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            start_year: 1995,
            end_year: 2023,
            dependent: "EXP".into(),
            regressors: ["EXC", "INF", "FDI", "IMP"].map(String::from).to_vec(),
            level: Level::Five,
            pmax: 2,
            variables: vec![
                wdi(
                    "EXP",
                    "NE.EXP.GNFS.ZS",
                    "Exports of goods and services",
                    "% of GDP",
                ),
                VariableConfig {
                    symbol: "EXC".into(),
                    code: "TP.RK.T1.Y".into(),
                    file: "evds_reer.csv".into(),
                    kind: SourceKind::Evds,
                    description: "CPI-based real effective exchange rate".into(),
                    unit: "index, 2003=100".into(),
                    source: "Central Bank of the Republic of Türkiye, EVDS".into(),
                },
                wdi(
                    "INF",
                    "FP.CPI.TOTL.ZG",
                    "Inflation, consumer prices",
                    "annual %",
                ),
                wdi(
                    "FDI",
                    "BX.KLT.DINV.WD.GD.ZS",
                    "Foreign direct investment, net inflows",
                    "% of GDP",
                ),
                wdi(
                    "IMP",
                    "NE.IMP.GNFS.ZS",
                    "Imports of goods and services",
                    "% of GDP",
                ),
            ],
            unitroot: UnitRootConfig::default(),
            za: ZaConfig::default(),
            johansen: JohansenConfig::default(),
            dols: DolsConfig::default(),
            diagnostics: DiagnosticsSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("invalid pipeline config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// Dependent first, then regressors.
    pub fn model_variables(&self) -> Vec<&str> {
        std::iter::once(self.dependent.as_str())
            .chain(self.regressors.iter().map(String::as_str))
            .collect()
    }

    pub fn variable(&self, symbol: &str) -> Result<&VariableConfig> {
        self.variables
            .iter()
            .find(|v| v.symbol == symbol)
            .ok_or_else(|| Error::Config(format!("variable {symbol} has no source definition")))
    }

    pub fn diagnostics_config(&self) -> DiagnosticsConfig {
        DiagnosticsConfig {
            bg_order: self.diagnostics.bg_order,
            het: self.diagnostics.het,
            reset_powers: self.diagnostics.reset_powers.clone(),
            level: self.level,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.regressors.is_empty() {
            return Err(Error::Config("at least one regressor is required".into()));
        }
        if self.regressors.contains(&self.dependent) {
            return Err(Error::Config(format!(
                "dependent variable {} is also listed among the regressors",
                self.dependent
            )));
        }
        let vars = self.model_variables();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Config(format!("variable {v} is listed twice")));
            }
            self.variable(v)?;
        }
        for (i, v) in self.variables.iter().enumerate() {
            if self.variables[..i].iter().any(|w| w.symbol == v.symbol) {
                return Err(Error::Config(format!(
                    "variable {} is defined twice",
                    v.symbol
                )));
            }
        }
        let years = self.end_year - self.start_year + 1;
        if years < MIN_YEARS {
            return Err(Error::Config(format!(
                "year range {}–{} covers {years} years; the pipeline needs at least {MIN_YEARS}",
                self.start_year, self.end_year
            )));
        }
        if self.unitroot.specs.is_empty() {
            return Err(Error::Config(
                "no unit-root deterministic specs configured".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.za.trimming) || self.za.trimming == 0.0 {
            return Err(Error::Config(format!(
                "ZA trimming must be in (0, 0.5), got {}",
                self.za.trimming
            )));
        }
        DetCase::from_number(self.johansen.det_case)?;
        if self.diagnostics.bg_order == 0 {
            return Err(Error::Config(
                "serial-correlation order must be at least 1".into(),
            ));
        }
        if self.diagnostics.reset_powers.is_empty()
            || self.diagnostics.reset_powers.iter().any(|&p| p < 2)
        {
            return Err(Error::Config(
                "RESET powers must be non-empty and at least 2".into(),
            ));
        }
        Ok(())
    }
}
