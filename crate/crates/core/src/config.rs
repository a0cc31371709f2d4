//! Run configuration file (TOML).
//!
//! Relative input paths resolve against the directory holding the config
//! file; relative output paths resolve against the output directory, which
//! defaults to the same place.
//!
//! ```toml
//! pv_path = "pv.csv"
//! load_path = "load.csv"
//! strategy = "scm_rr_wf"
//!
//! [battery]
//! soc_min = 0.20
//! soc_max = 0.70
//!
//! [ems]
//! night_charge_power_w = 2700.0
//! charge_start_time = "01:30"
//!
//! [ems.ramp]
//! window_s = 20
//!
//! [forecast]
//! mode = "fixture"
//! fixture_path = "forecast_week.json"
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::battery::BatteryParams;
use crate::ems::{EmsConfig, StrategyKind};
use crate::error::{Error, Result};
use crate::forecast::{
    ChargeDecisionPolicy, FixtureForecast, ForecastProvider, HttpForecastClient, NoForecast, UnknownBehavior,
    DEFAULT_CHARGE_IDS, DEFAULT_PATH_TEMPLATE,
};
use crate::timeseries::{PowerUnit, ResampleMethod};

pub const ENDPOINT_ENV: &str = "VRFB_EMS_FORECAST_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMode {
    Live,
    Fixture,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub mode: ForecastMode,
    pub endpoint_base: Option<String>,
    pub path_template: String,
    pub fixture_path: Option<PathBuf>,
    /// IPMA `globalIdLocal`; required for live mode.
    pub region_id: Option<i64>,
    pub charge_ids: Vec<i32>,
    pub unknown_behavior: UnknownBehavior,
    pub retries: u32,
    pub timeout_s: u64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            mode: ForecastMode::None,
            endpoint_base: None,
            path_template: DEFAULT_PATH_TEMPLATE.into(),
            fixture_path: None,
            region_id: None,
            charge_ids: DEFAULT_CHARGE_IDS.to_vec(),
            unknown_behavior: UnknownBehavior::NoCharge,
            retries: 2,
            timeout_s: 10,
        }
    }
}

impl ForecastConfig {
    pub fn policy(&self) -> ChargeDecisionPolicy {
        ChargeDecisionPolicy {
            charge_ids: self.charge_ids.iter().copied().collect(),
            unknown_behavior: self.unknown_behavior,
        }
    }

    pub fn provider(&self) -> Result<Box<dyn ForecastProvider>> {
        let region = self.region_id.unwrap_or(0);
        Ok(match self.mode {
            ForecastMode::None => Box::new(NoForecast),
            ForecastMode::Fixture => {
                let path = self
                    .fixture_path
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParams("forecast.fixture_path is required in fixture mode".into()))?;
                Box::new(FixtureForecast::from_path(path, region)?)
            }
            ForecastMode::Live => {
                let base = self
                    .endpoint_base
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParams("forecast.endpoint_base is required in live mode".into()))?;
                let region = self
                    .region_id
                    .ok_or_else(|| Error::InvalidParams("forecast.region_id is required in live mode".into()))?;
                let mut client = HttpForecastClient::new(base.clone(), region);
                client.path_template = self.path_template.clone();
                client.retries = self.retries;
                client.timeout = Duration::from_secs(self.timeout_s);
                Box::new(client)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub trace_csv: PathBuf,
    pub kpi_json: PathBuf,
    pub histogram_csv: PathBuf,
    pub sweep_csv: PathBuf,
    pub comparison_csv: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trace_csv: "trace.csv".into(),
            kpi_json: "kpi.json".into(),
            histogram_csv: "ramp_histogram.csv".into(),
            sweep_csv: "window_sweep.csv".into(),
            comparison_csv: "comparison.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pv_path: PathBuf,
    pub load_path: PathBuf,
    pub pv_unit: PowerUnit,
    pub load_unit: PowerUnit,
    /// Multiplier mapping the load file onto watts (1.0 when already in W).
    pub load_scale_w: f64,
    /// How coarse load profiles are brought onto the control tick.
    pub load_resample: ResampleMethod,
    /// Overrides `ems.strategy` when set.
    pub strategy: Option<StrategyKind>,
    pub battery: BatteryParams,
    pub ems: EmsConfig,
    pub forecast: ForecastConfig,
    pub outputs: OutputConfig,
    /// Window lengths for the ramp sweep, s.
    pub sweep_windows_s: Vec<u32>,
    /// Directory for relative output paths; the config file's directory
    /// unless overridden.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pv_path: "pv.csv".into(),
            load_path: "load.csv".into(),
            pv_unit: PowerUnit::Watt,
            load_unit: PowerUnit::Watt,
            load_scale_w: 1.0,
            load_resample: ResampleMethod::Hold,
            strategy: None,
            battery: BatteryParams::default(),
            ems: EmsConfig::default(),
            forecast: ForecastConfig::default(),
            outputs: OutputConfig::default(),
            sweep_windows_s: vec![20],
            out_dir: PathBuf::new(),
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.resolve_inputs(&base);
        cfg.out_dir = base;
        Ok(cfg)
    }

    pub fn resolve_inputs(&mut self, base: &Path) {
        rebase(base, &mut self.pv_path);
        rebase(base, &mut self.load_path);
        if let Some(p) = self.forecast.fixture_path.as_mut() {
            rebase(base, p);
        }
    }

    /// Location of an output file: relative paths land in `out_dir`.
    pub fn output_path(&self, p: &Path) -> PathBuf {
        if p.is_relative() {
            self.out_dir.join(p)
        } else {
            p.to_path_buf()
        }
    }

    pub fn effective_ems(&self) -> EmsConfig {
        let mut ems = self.ems.clone();
        if let Some(s) = self.strategy {
            ems.strategy = s;
        }
        ems
    }

    pub fn validate(&self) -> Result<()> {
        self.effective_ems().validate(&self.battery)?;
        self.forecast.policy().validate()?;
        if !(self.load_scale_w.is_finite() && self.load_scale_w > 0.0) {
            return Err(Error::InvalidParams("load_scale_w must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidParams(e.to_string()))
    }
}
