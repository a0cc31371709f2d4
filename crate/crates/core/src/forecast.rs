//! Day-ahead weather-type forecasts and the night-charge verdict.
//!
//! Payloads follow the IPMA open-data daily city forecast:
//!
//! ```json
//! {"owner": "IPMA", "country": "PT", "globalIdLocal": 1070500,
//!  "data": [{"forecastDate": "2018-01-02", "idWeatherType": 4, ...}, ...]}
//! ```
//!
//! The live client and the fixture loader share one parser, so identical bytes
//! always produce identical [`ForecastDay`] values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// IPMA weather-type codes and their descriptions.
pub const WEATHER_TYPES: [(i32, &str); 29] = [
    (-99, "---"),
    (0, "No information"),
    (1, "Clear sky"),
    (2, "Partly cloudy"),
    (3, "Sunny intervals"),
    (4, "Cloudy"),
    (5, "Cloudy (High cloud)"),
    (6, "Showers"),
    (7, "Light showers"),
    (8, "Heavy showers"),
    (9, "Rain"),
    (10, "Light rain"),
    (11, "Heavy rain"),
    (12, "Intermittent rain"),
    (13, "Intermittent light rain"),
    (14, "Intermittent heavy rain"),
    (15, "Drizzle"),
    (16, "Mist"),
    (17, "Fog"),
    (18, "Snow"),
    (19, "Thunderstorms"),
    (20, "Showers and thunderstorms"),
    (21, "Hail"),
    (22, "Frost"),
    (23, "Rain and thunderstorms"),
    (24, "Convective clouds"),
    (25, "Partly cloudy"),
    (26, "Fog"),
    (27, "Cloudy"),
];

/// Codes that trigger a night charge unless configured otherwise.
pub const DEFAULT_CHARGE_IDS: [i32; 6] = [4, 5, 14, 16, 17, 18];

pub fn weather_description(id: i32) -> Option<&'static str> {
    WEATHER_TYPES.iter().find(|(c, _)| *c == id).map(|(_, d)| *d)
}

/// True for codes that carry an actual weather description.
pub fn is_informative(id: i32) -> bool {
    id > 0 && weather_description(id).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecastDay {
    pub date: NaiveDate,
    pub weather_type_id: i32,
    pub region_id: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownBehavior {
    #[default]
    NoCharge,
    Charge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChargeDecisionPolicy {
    pub charge_ids: BTreeSet<i32>,
    /// Applies to `-99`, `0` and codes outside the table.
    pub unknown_behavior: UnknownBehavior,
}

impl Default for ChargeDecisionPolicy {
    fn default() -> Self {
        Self {
            charge_ids: DEFAULT_CHARGE_IDS.into_iter().collect(),
            unknown_behavior: UnknownBehavior::NoCharge,
        }
    }
}

impl ChargeDecisionPolicy {
    pub fn validate(&self) -> Result<()> {
        match self.charge_ids.iter().find(|&&id| !is_informative(id)) {
            Some(id) => Err(Error::InvalidParams(format!(
                "forecast: charge id {id} is not a weather-type code"
            ))),
            None => Ok(()),
        }
    }
}

pub fn should_night_charge(day: &ForecastDay, policy: &ChargeDecisionPolicy) -> bool {
    if is_informative(day.weather_type_id) {
        policy.charge_ids.contains(&day.weather_type_id)
    } else {
        policy.unknown_behavior == UnknownBehavior::Charge
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(rename_all = "camelCase")]
struct Payload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    owner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    global_id_local: Option<i64>,
    data: Vec<PayloadDay>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(rename_all = "camelCase")]
struct PayloadDay {
    forecast_date: NaiveDate,
    id_weather_type: i32,
}

/// Parses every day of a payload. `region_id` is used when the payload does
/// not carry `globalIdLocal`.
pub fn parse_payload(bytes: &[u8], region_id: i64) -> Result<Vec<ForecastDay>> {
    let payload: Payload = serde_json::from_slice(bytes).map_err(|e| Error::ForecastPayload(e.to_string()))?;
    let region_id = payload.global_id_local.unwrap_or(region_id);
    Ok(payload
        .data
        .into_iter()
        .map(|d| ForecastDay {
            date: d.forecast_date,
            weather_type_id: d.id_weather_type,
            region_id,
        })
        .collect())
}

/// Picks the entry for `date` out of a payload.
pub fn parse_day(bytes: &[u8], region_id: i64, date: NaiveDate) -> Result<ForecastDay> {
    parse_payload(bytes, region_id)?
        .into_iter()
        .find(|d| d.date == date)
        .ok_or(Error::ForecastDateMissing { date })
}

/// Builds a payload in the same schema, one entry per day.
///
/// All days must share a region.
pub fn synthesize_payload(days: &[ForecastDay]) -> Result<String> {
    let region = days.first().map(|d| d.region_id);
    if days.iter().any(|d| Some(d.region_id) != region) {
        return Err(Error::InvalidParams("payload days span several regions".into()));
    }
    let payload = Payload {
        owner: Some("IPMA".into()),
        country: Some("PT".into()),
        global_id_local: region,
        data: days
            .iter()
            .map(|d| PayloadDay {
                forecast_date: d.date,
                id_weather_type: d.weather_type_id,
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&payload)?)
}

/// Source of day-ahead forecasts for the simulator.
pub trait ForecastProvider {
    fn forecast(&self, date: NaiveDate) -> Result<ForecastDay>;
}

/// Forecasts read from a payload stored on disk.
#[derive(Debug, Clone, Default)]
pub struct FixtureForecast {
    days: BTreeMap<NaiveDate, ForecastDay>,
}

impl FixtureForecast {
    pub fn from_bytes(bytes: &[u8], region_id: i64) -> Result<Self> {
        Ok(Self {
            days: parse_payload(bytes, region_id)?
                .into_iter()
                .map(|d| (d.date, d))
                .collect(),
        })
    }

    pub fn from_path(path: impl AsRef<Path>, region_id: i64) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, region_id)
    }

    pub fn from_days(days: impl IntoIterator<Item = ForecastDay>) -> Self {
        Self {
            days: days.into_iter().map(|d| (d.date, d)).collect(),
        }
    }

    pub fn days(&self) -> impl Iterator<Item = &ForecastDay> {
        self.days.values()
    }
}

impl ForecastProvider for FixtureForecast {
    fn forecast(&self, date: NaiveDate) -> Result<ForecastDay> {
        self.days.get(&date).copied().ok_or(Error::ForecastDateMissing { date })
    }
}

/// Provider that never has a forecast; every night falls back to no charge.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForecast;

impl ForecastProvider for NoForecast {
    fn forecast(&self, date: NaiveDate) -> Result<ForecastDay> {
        Err(Error::ForecastDateMissing { date })
    }
}

/// Minimal blocking GET used by [`HttpForecastClient`].
pub trait Transport {
    fn get(&self, url: &str, timeout: Duration) -> std::result::Result<Vec<u8>, String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn get(&self, url: &str, timeout: Duration) -> std::result::Result<Vec<u8>, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        let mut resp = agent.get(url).call().map_err(|e| e.to_string())?;
        resp.body_mut().read_to_vec().map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct HttpForecastClient<T = UreqTransport> {
    pub endpoint_base: String,
    /// `{base}` and `{region}` are substituted.
    pub path_template: String,
    pub region_id: i64,
    pub retries: u32,
    pub timeout: Duration,
    pub transport: T,
}

pub const DEFAULT_PATH_TEMPLATE: &str = "{base}/{region}.json";

impl HttpForecastClient<UreqTransport> {
    pub fn new(endpoint_base: impl Into<String>, region_id: i64) -> Self {
        Self::with_transport(endpoint_base, region_id, UreqTransport)
    }
}

impl<T: Transport> HttpForecastClient<T> {
    pub fn with_transport(endpoint_base: impl Into<String>, region_id: i64, transport: T) -> Self {
        Self {
            endpoint_base: endpoint_base.into(),
            path_template: DEFAULT_PATH_TEMPLATE.into(),
            region_id,
            retries: 2,
            timeout: Duration::from_secs(10),
            transport,
        }
    }

    pub fn url(&self) -> String {
        self.path_template
            .replace("{base}", self.endpoint_base.trim_end_matches('/'))
            .replace("{region}", &self.region_id.to_string())
    }

    /// Downloads the raw payload, retrying `retries` times after the first try.
    pub fn fetch_payload(&self) -> Result<Vec<u8>> {
        let url = self.url();
        let attempts = self.retries + 1;
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.transport.get(&url, self.timeout) {
                Ok(bytes) => return Ok(bytes),
                Err(e) => {
                    log::warn!("forecast GET {url} attempt {attempt}/{attempts} failed: {e}");
                    last = e;
                }
            }
        }
        Err(Error::Http {
            url,
            attempts,
            message: last,
        })
    }
}

impl<T: Transport> ForecastProvider for HttpForecastClient<T> {
    fn forecast(&self, date: NaiveDate) -> Result<ForecastDay> {
        parse_day(&self.fetch_payload()?, self.region_id, date)
    }
}

/// Fetches the forecast for `date` from `<endpoint_base>/<region_id>.json`.
pub fn fetch_daily_forecast(region_id: i64, endpoint_base: &str, date: NaiveDate) -> Result<ForecastDay> {
    HttpForecastClient::new(endpoint_base, region_id).forecast(date)
}
