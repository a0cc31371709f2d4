//! Energy management strategies and the deterministic tick loop.
//!
//! Each tick applies, in priority order, night charging (forecast strategy
//! only), ramp-rate control (both ramp strategies) and self-consumption
//! dispatch. Whatever the battery does not absorb or supply is exchanged with
//! the grid, so every [`DispatchRecord`] satisfies
//! `p_pv + p_grid = p_load + p_batt_actual + standby`.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, NaiveTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::battery::{self, available_charge_power, available_discharge_power, BatteryParams, BatteryState};
use crate::error::{Error, Result};
use crate::forecast::{should_night_charge, ChargeDecisionPolicy, ForecastProvider};
use crate::ramp::{residual_rate, violates, RampConfig, RampDetector, RampObservation};
use crate::timeseries::PowerSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Self-consumption maximisation.
    Scm,
    /// Self-consumption plus ramp-rate control.
    ScmRr,
    /// Ramp-rate control plus forecast-driven night charging.
    ScmRrWf,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Scm, StrategyKind::ScmRr, StrategyKind::ScmRrWf];

    pub fn controls_ramps(self) -> bool {
        !matches!(self, StrategyKind::Scm)
    }

    pub fn uses_forecast(self) -> bool {
        matches!(self, StrategyKind::ScmRrWf)
    }

    pub fn slug(self) -> &'static str {
        match self {
            StrategyKind::Scm => "scm",
            StrategyKind::ScmRr => "scm_rr",
            StrategyKind::ScmRrWf => "scm_rr_wf",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Scm => "SCM",
            StrategyKind::ScmRr => "SCM+RR",
            StrategyKind::ScmRrWf => "SCM+RR+WF",
        })
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['+', '-'], "_");
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.slug() == norm)
            .ok_or_else(|| Error::InvalidParams(format!("unknown strategy {s:?}")))
    }
}

mod clock {
    use super::*;

    pub fn serialize<S: Serializer>(t: &NaiveTime, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&t.format("%H:%M").to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<NaiveTime, D::Error> {
        let raw = String::deserialize(d)?;
        NaiveTime::parse_from_str(&raw, "%H:%M")
            .or_else(|_| NaiveTime::parse_from_str(&raw, "%H:%M:%S"))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmsConfig {
    pub strategy: StrategyKind,
    pub ramp: RampConfig,
    /// Constant grid-sourced charge power during the night window, W.
    pub night_charge_power_w: f64,
    /// SOC at which night charging stops.
    pub soc_target: f64,
    /// Local clock time at which the forecast is consulted and charging may start.
    #[serde(with = "clock")]
    pub charge_start_time: NaiveTime,
    /// Fixed offset of local time from UTC, hours.
    pub utc_offset_h: i32,
    /// SOC at the first tick.
    pub initial_soc: f64,
    /// Averaged PV above this share of nameplate means the PV day has begun.
    pub daylight_fraction: f64,
}

impl Default for EmsConfig {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::ScmRrWf,
            ramp: RampConfig::default(),
            night_charge_power_w: 2_700.0,
            soc_target: 0.50,
            charge_start_time: NaiveTime::from_hms_opt(1, 30, 0).unwrap(),
            utc_offset_h: 0,
            initial_soc: 0.35,
            daylight_fraction: 0.01,
        }
    }
}

impl EmsConfig {
    pub fn validate(&self, battery: &BatteryParams) -> Result<()> {
        self.ramp.validate()?;
        battery.validate()?;
        let bad = |m: String| Err(Error::InvalidParams(format!("ems: {m}")));
        if !(battery.soc_min < self.soc_target && self.soc_target < battery.soc_max) {
            return bad(format!(
                "soc_target {} must lie strictly inside ({}, {})",
                self.soc_target, battery.soc_min, battery.soc_max
            ));
        }
        if !(self.night_charge_power_w >= 0.0 && self.night_charge_power_w <= battery.power_nominal) {
            return bad("night_charge_power_w must be within [0, power_nominal]".into());
        }
        if !(battery.soc_min..=battery.soc_max).contains(&self.initial_soc) {
            return bad(format!("initial_soc {} outside the battery window", self.initial_soc));
        }
        if !(-14..=14).contains(&self.utc_offset_h) {
            return bad("utc_offset_h out of range".into());
        }
        if self.daylight_fraction.is_nan() || self.daylight_fraction < 0.0 {
            return bad("daylight_fraction must be non-negative".into());
        }
        Ok(())
    }

    pub fn local_time(&self, ts: DateTime<Utc>) -> NaiveDateTime {
        ts.naive_utc() + Duration::hours(self.utc_offset_h as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchMode {
    Scm,
    RampControl,
    NightCharge,
    Idle,
}

impl DispatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DispatchMode::Scm => "scm",
            DispatchMode::RampControl => "ramp_control",
            DispatchMode::NightCharge => "night_charge",
            DispatchMode::Idle => "idle",
        }
    }
}

impl std::str::FromStr for DispatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            DispatchMode::Scm,
            DispatchMode::RampControl,
            DispatchMode::NightCharge,
            DispatchMode::Idle,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::InvalidParams(format!("unknown dispatch mode {s:?}")))
    }
}

/// Result of one control tick. Battery powers are charge-positive, grid
/// power is import-positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchRecord {
    pub timestamp: DateTime<Utc>,
    pub p_pv: f64,
    pub p_load: f64,
    pub p_batt_cmd: f64,
    pub p_batt_actual: f64,
    pub p_grid: f64,
    /// SOC at the end of the tick.
    pub soc: f64,
    pub mode: DispatchMode,
    pub rr_pct_per_min: f64,
    pub rr_violated: bool,
    /// Violating tick on which the battery held the output on its moving average.
    pub rr_controlled: bool,
}

impl DispatchRecord {
    /// `p_pv + p_grid - (p_load + p_batt_actual + standby)`; zero up to rounding.
    pub fn balance_error(&self, standby_w: f64) -> f64 {
        self.p_pv + self.p_grid - (self.p_load + self.p_batt_actual + standby_w)
    }
}

fn grid_residual(p_pv: f64, p_load: f64, battery_w: f64, params: &BatteryParams) -> f64 {
    p_load + battery_w + params.standby_power - p_pv
}

/// Self-consumption dispatch: store PV surplus, cover deficits from storage.
///
/// Returns `(battery command, grid power)`.
pub fn scm_dispatch(p_pv: f64, p_load: f64, state: &BatteryState, params: &BatteryParams) -> (f64, f64) {
    let surplus = p_pv - p_load;
    let command = if surplus > 0.0 {
        surplus.min(available_charge_power(params, state))
    } else if surplus < 0.0 {
        -(-surplus).min(available_discharge_power(params, state))
    } else {
        0.0
    };
    (command, grid_residual(p_pv, p_load, command, params))
}

/// Ramp-rate dispatch for one tick.
///
/// On a violating tick the battery is asked for the moving-average command;
/// SOC gating happens through the available power. Otherwise it falls back to
/// [`scm_dispatch`]. The grid figure uses the power-limited command.
pub fn rr_dispatch(
    obs: &RampObservation,
    p_pv: f64,
    p_load: f64,
    state: &BatteryState,
    params: &BatteryParams,
) -> (f64, f64, DispatchMode) {
    if obs.violated && !obs.command.is_warming_up() {
        let command = obs.command.power();
        let limited = command.clamp(
            -available_discharge_power(params, state),
            available_charge_power(params, state),
        );
        (
            command,
            grid_residual(p_pv, p_load, limited, params),
            DispatchMode::RampControl,
        )
    } else {
        let (command, grid) = scm_dispatch(p_pv, p_load, state, params);
        (command, grid, DispatchMode::Scm)
    }
}

/// Night-charge command, if one is due.
///
/// Charging runs when the forecast asked for it, the local clock has passed
/// the start time, SOC is still below target and PV has not come up yet.
pub fn night_charge_tick(
    local: NaiveTime,
    soc: f64,
    decision: bool,
    pv_day_started: bool,
    cfg: &EmsConfig,
) -> Option<f64> {
    (decision && local >= cfg.charge_start_time && soc < cfg.soc_target && !pv_day_started)
        .then_some(cfg.night_charge_power_w)
}

/// Night-charge verdicts per local date, resolved before the loop runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecisionSchedule(BTreeMap<NaiveDate, bool>);

impl DecisionSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, date: NaiveDate, charge: bool) {
        self.0.insert(date, charge);
    }

    /// Missing dates mean no charge.
    pub fn get(&self, date: NaiveDate) -> bool {
        self.0.get(&date).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, bool)> + '_ {
        self.0.iter().map(|(d, c)| (*d, *c))
    }

    /// Queries `provider` for every date; failures fall back to no charge.
    pub fn resolve(
        provider: &dyn ForecastProvider,
        policy: &ChargeDecisionPolicy,
        dates: impl IntoIterator<Item = NaiveDate>,
    ) -> Self {
        let mut out = Self::new();
        for date in dates {
            let charge = match provider.forecast(date) {
                Ok(day) => should_night_charge(&day, policy),
                Err(e) => {
                    log::warn!("no forecast for {date} ({e}); night charge disabled");
                    false
                }
            };
            out.set(date, charge);
        }
        out
    }
}

/// Stateful controller; [`simulate`] drives it over whole series, a real-time
/// runner can call [`Ems::tick`] from a timer.
#[derive(Debug, Clone)]
pub struct Ems {
    cfg: EmsConfig,
    params: BatteryParams,
    state: BatteryState,
    detector: RampDetector,
    day: Option<NaiveDate>,
    /// Averaged PV crossed the daylight threshold, or a ramp was seen, today.
    pv_day_started: bool,
    /// Tonight's charge window has closed; no restart before local midnight.
    night_done: bool,
}

impl Ems {
    pub fn new(cfg: EmsConfig, params: BatteryParams) -> Result<Self> {
        cfg.validate(&params)?;
        Ok(Self {
            state: BatteryState::new(&params, cfg.initial_soc)?,
            detector: RampDetector::new(cfg.ramp),
            cfg,
            params,
            day: None,
            pv_day_started: false,
            night_done: false,
        })
    }

    pub fn state(&self) -> &BatteryState {
        &self.state
    }

    pub fn config(&self) -> &EmsConfig {
        &self.cfg
    }

    pub fn tick(&mut self, timestamp: DateTime<Utc>, p_pv: f64, p_load: f64, night_decision: bool) -> DispatchRecord {
        let local = self.cfg.local_time(timestamp);
        if self.day != Some(local.date()) {
            self.day = Some(local.date());
            self.pv_day_started = false;
            self.night_done = false;
        }

        let obs = self.detector.observe(p_pv);
        let pv_level = obs.average.unwrap_or(p_pv);
        if pv_level > self.cfg.daylight_fraction * self.cfg.ramp.nameplate_w || obs.violated {
            self.pv_day_started = true;
        }

        let night = if self.cfg.strategy.uses_forecast() && !self.night_done {
            let cmd = night_charge_tick(
                local.time(),
                self.state.soc,
                night_decision,
                self.pv_day_started,
                &self.cfg,
            );
            if cmd.is_none() && night_decision && local.time() >= self.cfg.charge_start_time {
                self.night_done = true;
            }
            cmd
        } else {
            None
        };

        let (command, mode) = match night {
            Some(p) => (p, DispatchMode::NightCharge),
            None if self.cfg.strategy.controls_ramps() => {
                let (cmd, _, mode) = rr_dispatch(&obs, p_pv, p_load, &self.state, &self.params);
                (cmd, mode)
            }
            None => (
                scm_dispatch(p_pv, p_load, &self.state, &self.params).0,
                DispatchMode::Scm,
            ),
        };

        let (state, actual) = battery::step(&self.params, &self.state, command, self.cfg.ramp.tick_s as f64);
        self.state = state;

        let mode = match mode {
            DispatchMode::Scm if actual == 0.0 => DispatchMode::Idle,
            m => m,
        };
        let rr_controlled = obs.violated
            && mode == DispatchMode::RampControl
            && !violates(residual_rate(command, actual, &self.cfg.ramp), &self.cfg.ramp);

        DispatchRecord {
            timestamp,
            p_pv,
            p_load,
            p_batt_cmd: command,
            p_batt_actual: actual,
            p_grid: grid_residual(p_pv, p_load, actual, &self.params),
            soc: state.soc,
            mode,
            rr_pct_per_min: obs.rr,
            rr_violated: obs.violated,
            rr_controlled,
        }
    }
}

/// Local calendar dates touched by a series.
pub fn local_dates(series: &PowerSeries, cfg: &EmsConfig) -> Vec<NaiveDate> {
    let first = cfg.local_time(series.start()).date();
    let last = cfg.local_time(series.end()).date();
    first.iter_days().take_while(|d| *d <= last).collect()
}

/// Runs the strategy over aligned PV and load series.
pub fn simulate(
    pv: &PowerSeries,
    load: &PowerSeries,
    cfg: &EmsConfig,
    params: &BatteryParams,
    decisions: &DecisionSchedule,
) -> Result<Vec<DispatchRecord>> {
    if pv.start() != load.start() || pv.len() != load.len() {
        return Err(Error::Misaligned("pv and load must share start and length".into()));
    }
    if pv.step_s() != cfg.ramp.tick_s || load.step_s() != cfg.ramp.tick_s {
        return Err(Error::Misaligned(format!(
            "series steps ({} s, {} s) differ from the {} s tick",
            pv.step_s(),
            load.step_s(),
            cfg.ramp.tick_s
        )));
    }
    let mut ems = Ems::new(cfg.clone(), *params)?;
    Ok(pv
        .values()
        .iter()
        .zip(load.values())
        .enumerate()
        .map(|(i, (&p_pv, &p_load))| {
            let ts = pv.timestamp(i);
            let decision = cfg.strategy.uses_forecast() && decisions.get(cfg.local_time(ts).date());
            ems.tick(ts, p_pv, p_load, decision)
        })
        .collect())
}

/// [`simulate`] with forecasts pulled from `provider` for every simulated date.
pub fn simulate_with_forecast(
    pv: &PowerSeries,
    load: &PowerSeries,
    cfg: &EmsConfig,
    params: &BatteryParams,
    provider: &dyn ForecastProvider,
    policy: &ChargeDecisionPolicy,
) -> Result<Vec<DispatchRecord>> {
    let decisions = if cfg.strategy.uses_forecast() {
        DecisionSchedule::resolve(provider, policy, local_dates(pv, cfg))
    } else {
        DecisionSchedule::new()
    };
    simulate(pv, load, cfg, params, &decisions)
}
