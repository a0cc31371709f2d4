//! Energy-and-efficiency model of the vanadium redox flow battery.
//!
//! SOC is tracked by coulomb counting on the DC side. Every AC command passes
//! through the converter once, so a full charge/discharge round trip returns
//! `eta_acdc²` of the AC energy. Available power tapers linearly to zero over a
//! band of SOC next to each window limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryParams {
    /// Nameplate energy, Wh.
    pub energy_capacity: f64,
    /// Inverter/stack power limit, W. May be `inf` for idealised runs.
    pub power_nominal: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    /// One-way AC/DC conversion efficiency.
    pub eta_acdc: f64,
    /// Constant auxiliary draw while energised, W.
    pub standby_power: f64,
    /// Width in SOC units of the linear power taper at each window limit.
    pub derate_band: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            energy_capacity: 60_000.0,
            power_nominal: 5_000.0,
            soc_min: 0.20,
            soc_max: 0.70,
            eta_acdc: 0.88,
            standby_power: 30.0,
            derate_band: 0.05,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("battery: {m}")));
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return bad("need 0 <= soc_min < soc_max <= 1");
        }
        if !(self.eta_acdc > 0.0 && self.eta_acdc <= 1.0) {
            return bad("need 0 < eta_acdc <= 1");
        }
        if !(self.energy_capacity > 0.0 && self.energy_capacity.is_finite()) {
            return bad("energy_capacity must be positive and finite");
        }
        if self.power_nominal.is_nan() || self.power_nominal <= 0.0 {
            return bad("power_nominal must be positive");
        }
        if !(self.standby_power >= 0.0 && self.standby_power.is_finite()) {
            return bad("standby_power must be non-negative");
        }
        if !(self.derate_band >= 0.0 && self.derate_band < (self.soc_max - self.soc_min) / 2.0) {
            return bad("need 0 <= derate_band < (soc_max - soc_min) / 2");
        }
        Ok(())
    }

    fn taper(&self, distance_to_limit: f64) -> f64 {
        let factor = if self.derate_band > 0.0 {
            (distance_to_limit / self.derate_band).clamp(0.0, 1.0)
        } else if distance_to_limit > 0.0 {
            1.0
        } else {
            0.0
        };
        // keeps an infinite nameplate from turning 0 * inf into NaN
        if factor <= 0.0 {
            0.0
        } else {
            self.power_nominal * factor
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BatteryMode {
    #[default]
    Idle,
    Charging,
    Discharging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    pub soc: f64,
    pub mode: BatteryMode,
}

impl BatteryState {
    pub fn new(params: &BatteryParams, soc: f64) -> Result<Self> {
        if !(params.soc_min..=params.soc_max).contains(&soc) {
            return Err(Error::InvalidParams(format!(
                "initial soc {soc} outside [{}, {}]",
                params.soc_min, params.soc_max
            )));
        }
        Ok(Self {
            soc,
            mode: BatteryMode::Idle,
        })
    }
}

/// Largest AC charge power the battery accepts at its current SOC.
pub fn available_charge_power(params: &BatteryParams, state: &BatteryState) -> f64 {
    params.taper(params.soc_max - state.soc)
}

/// Largest AC discharge power the battery delivers at its current SOC.
pub fn available_discharge_power(params: &BatteryParams, state: &BatteryState) -> f64 {
    params.taper(state.soc - params.soc_min)
}

/// Advances the battery by `dt_s` seconds under a signed AC command
/// (positive charges).
///
/// Returns the new state and the AC power actually exchanged. The command is
/// clamped to the available power, then trimmed again if the step would carry
/// SOC past a window limit. The standby draw is not part of the returned power;
/// callers book `params.standby_power` separately.
pub fn step(params: &BatteryParams, state: &BatteryState, ac_command: f64, dt_s: f64) -> (BatteryState, f64) {
    debug_assert!(dt_s > 0.0);
    let upper = available_charge_power(params, state);
    let lower = available_discharge_power(params, state);
    let mut ac = ac_command.clamp(-lower, upper);
    let dt_h = dt_s / 3600.0;
    let cap = params.energy_capacity;

    let soc = if ac > 0.0 {
        let stored = ac * params.eta_acdc * dt_h;
        let headroom = (params.soc_max - state.soc) * cap;
        if stored >= headroom {
            ac = headroom / (params.eta_acdc * dt_h);
            params.soc_max
        } else {
            state.soc + stored / cap
        }
    } else if ac < 0.0 {
        let drawn = -ac / params.eta_acdc * dt_h;
        let reserve = (state.soc - params.soc_min) * cap;
        if drawn >= reserve {
            ac = -reserve * params.eta_acdc / dt_h;
            params.soc_min
        } else {
            state.soc - drawn / cap
        }
    } else {
        state.soc
    };

    let mode = if ac > 0.0 {
        BatteryMode::Charging
    } else if ac < 0.0 {
        BatteryMode::Discharging
    } else {
        BatteryMode::Idle
    };
    (BatteryState { soc, mode }, ac)
}
