//! Energy totals and the ten key-performance indicators.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::ems::DispatchRecord;
use crate::error::{Error, Result};
use crate::ramp::RampEventCounter;

/// Energy bookkeeping of a dispatch trace, Wh.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergyTotals {
    pub e_pv_generated: f64,
    /// PV used on site, directly or through the battery.
    pub e_pv_consumed: f64,
    pub e_load: f64,
    pub e_from_grid: f64,
    pub e_to_grid: f64,
    pub e_grid_total: f64,
    pub e_to_battery: f64,
    pub e_from_battery: f64,
    pub e_battery_total: f64,
    /// Auxiliary battery draw; the only AC-side loss term.
    pub e_standby: f64,
    pub n_ramps_original: u64,
    pub n_ramps_controlled: u64,
}

impl EnergyTotals {
    /// `sources - sinks - losses`; zero up to rounding for any trace.
    pub fn closure_error(&self) -> f64 {
        (self.e_pv_generated + self.e_from_grid + self.e_from_battery)
            - (self.e_load + self.e_to_grid + self.e_to_battery + self.e_standby)
    }
}

/// Integrates a trace with the rectangle rule.
pub fn accumulate(trace: &[DispatchRecord], tick_s: u32, standby_w: f64) -> Result<EnergyTotals> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dt_h = tick_s as f64 / 3600.0;
    let mut t = EnergyTotals::default();
    let mut events = RampEventCounter::default();
    for r in trace {
        let import = r.p_grid.max(0.0);
        let export = (-r.p_grid).max(0.0);
        t.e_pv_generated += r.p_pv * dt_h;
        t.e_pv_consumed += (r.p_pv - r.p_pv.min(export)) * dt_h;
        t.e_load += r.p_load * dt_h;
        t.e_from_grid += import * dt_h;
        t.e_to_grid += export * dt_h;
        t.e_to_battery += r.p_batt_actual.max(0.0) * dt_h;
        t.e_from_battery += (-r.p_batt_actual).max(0.0) * dt_h;
        t.e_standby += standby_w * dt_h;
        events.observe(r.rr_violated, r.rr_pct_per_min, r.rr_controlled);
    }
    t.e_grid_total = t.e_from_grid + t.e_to_grid;
    t.e_battery_total = t.e_to_battery + t.e_from_battery;
    (t.n_ramps_original, t.n_ramps_controlled) = events.finish();
    Ok(t)
}

/// A ratio that is either a fraction or undefined for a stated reason.
#[derive(Debug, Clone, PartialEq)]
pub enum Kpi {
    Value(f64),
    Undefined(&'static str),
}

impl Kpi {
    fn ratio(num: f64, den: f64, reason: &'static str) -> Self {
        if den > 0.0 {
            Kpi::Value(num / den)
        } else {
            Kpi::Undefined(reason)
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Kpi::Value(v) => Some(*v),
            Kpi::Undefined(_) => None,
        }
    }

    pub fn percent(&self) -> Option<f64> {
        self.value().map(|v| v * 100.0)
    }
}

pub const KPI_NAMES: [&str; 10] = ["SCR", "SSR", "GRF", "BCR", "EG", "FGU", "TGU", "FBU", "TBU", "CRR"];

#[derive(Debug, Clone, PartialEq)]
pub struct KpiReport {
    pub scr: Kpi,
    pub ssr: Kpi,
    pub grf: Kpi,
    pub bcr: Kpi,
    pub eg: Kpi,
    pub fgu: Kpi,
    pub tgu: Kpi,
    pub fbu: Kpi,
    pub tbu: Kpi,
    pub crr: Kpi,
    /// Set when the trace had no ramp violations, so CRR is vacuously 1.
    pub no_violations: bool,
    pub totals: EnergyTotals,
    pub notes: Vec<String>,
}

const BCR_NOTE: &str = "BCR is charge energy over total battery throughput; \
                        the discharge share is 1 - BCR";

pub fn compute_kpis(totals: &EnergyTotals) -> KpiReport {
    let t = totals;
    const NO_PV: &str = "no PV energy generated";
    const NO_LOAD: &str = "no load energy";
    const NO_GRID: &str = "no energy exchanged with the grid";
    const NO_BATT: &str = "no energy exchanged with the battery";
    let no_violations = t.n_ramps_original == 0;
    KpiReport {
        scr: Kpi::ratio(t.e_pv_consumed, t.e_pv_generated, NO_PV),
        ssr: Kpi::ratio(t.e_pv_consumed, t.e_load, NO_LOAD),
        grf: Kpi::ratio(t.e_grid_total, t.e_load, NO_LOAD),
        bcr: Kpi::ratio(t.e_to_battery, t.e_battery_total, NO_BATT),
        eg: Kpi::ratio(t.e_from_grid, t.e_grid_total, NO_GRID),
        fgu: Kpi::ratio(t.e_from_grid, t.e_load, NO_LOAD),
        tgu: Kpi::ratio(t.e_to_grid, t.e_load, NO_LOAD),
        fbu: Kpi::ratio(t.e_from_battery, t.e_load, NO_LOAD),
        tbu: Kpi::ratio(t.e_to_battery, t.e_load, NO_LOAD),
        crr: if no_violations {
            Kpi::Value(1.0)
        } else {
            Kpi::Value(t.n_ramps_controlled as f64 / t.n_ramps_original as f64)
        },
        no_violations,
        totals: *t,
        notes: vec![BCR_NOTE.to_string()],
    }
}

impl KpiReport {
    pub fn entries(&self) -> [(&'static str, &Kpi); 10] {
        [
            ("SCR", &self.scr),
            ("SSR", &self.ssr),
            ("GRF", &self.grf),
            ("BCR", &self.bcr),
            ("EG", &self.eg),
            ("FGU", &self.fgu),
            ("TGU", &self.tgu),
            ("FBU", &self.fbu),
            ("TBU", &self.tbu),
            ("CRR", &self.crr),
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct PercentMap<'a>(&'a KpiReport);

impl Serialize for PercentMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(10))?;
        for (k, v) in self.0.entries() {
            m.serialize_entry(k, &v.percent())?;
        }
        m.end()
    }
}

struct ReasonMap<'a>(&'a KpiReport);

impl Serialize for ReasonMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        for (k, v) in self.0.entries() {
            if let Kpi::Undefined(reason) = v {
                m.serialize_entry(k, reason)?;
            }
        }
        m.end()
    }
}

/// Percent values keyed by abbreviation; undefined entries are `null` with a
/// reason under `undefined`.
impl Serialize for KpiReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("kpis_percent", &PercentMap(self))?;
        m.serialize_entry("undefined", &ReasonMap(self))?;
        m.serialize_entry("no_violations", &self.no_violations)?;
        m.serialize_entry("totals", &self.totals)?;
        m.serialize_entry("notes", &self.notes)?;
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ems::DispatchMode;
    use chrono::{DateTime, Utc};

    fn rec(p_pv: f64, p_load: f64, p_batt: f64, standby: f64) -> DispatchRecord {
        DispatchRecord {
            timestamp: DateTime::<Utc>::UNIX_EPOCH,
            p_pv,
            p_load,
            p_batt_cmd: p_batt,
            p_batt_actual: p_batt,
            p_grid: p_load + p_batt + standby - p_pv,
            soc: 0.5,
            mode: DispatchMode::Scm,
            rr_pct_per_min: 0.0,
            rr_violated: false,
            rr_controlled: false,
        }
    }

    #[test]
    fn single_tick_unit_conversion() {
        let t = accumulate(&[rec(1_000.0, 1_000.0, 0.0, 0.0)], 2, 0.0).unwrap();
        assert_eq!(t.e_pv_generated, 1_000.0 * 2.0 / 3_600.0);
    }

    #[test]
    fn empty_trace_errors() {
        assert!(matches!(accumulate(&[], 2, 30.0), Err(Error::EmptyTrace)));
    }

    #[test]
    fn all_zero_trace_is_undefined_everywhere_but_crr() {
        let t = accumulate(&[rec(0.0, 0.0, 0.0, 0.0); 5], 2, 0.0).unwrap();
        let r = compute_kpis(&t);
        for (name, k) in r.entries() {
            if name == "CRR" {
                assert_eq!(k, &Kpi::Value(1.0));
            } else {
                assert!(matches!(k, Kpi::Undefined(_)), "{name}");
            }
        }
        assert!(r.no_violations);
    }

    #[test]
    fn table_row_identities() {
        let t = EnergyTotals {
            e_load: 100.0,
            e_from_grid: 57.2,
            e_to_grid: 0.71,
            e_grid_total: 57.91,
            ..Default::default()
        };
        let r = compute_kpis(&t);
        assert!((r.grf.percent().unwrap() - 57.91).abs() < 1e-9);
        assert!((r.eg.percent().unwrap() - 98.8).abs() < 0.1);
    }

    #[test]
    fn no_grid_exchange() {
        let t = EnergyTotals {
            e_load: 10.0,
            ..Default::default()
        };
        let r = compute_kpis(&t);
        assert_eq!(r.grf, Kpi::Value(0.0));
        assert!(matches!(r.eg, Kpi::Undefined(_)));
    }

    #[test]
    fn export_of_battery_energy_is_not_counted_as_pv() {
        // battery discharges 2 kW into a 500 W load with 1 kW of PV
        let r = rec(1_000.0, 500.0, -2_000.0, 0.0);
        let t = accumulate(&[r], 3_600, 0.0).unwrap();
        assert_eq!(t.e_to_grid, 2_500.0);
        assert_eq!(t.e_pv_consumed, 0.0);
        assert!(t.closure_error().abs() < 1e-9);
    }

    #[test]
    fn json_shape() {
        let t = EnergyTotals {
            e_load: 10.0,
            ..Default::default()
        };
        let v: serde_json::Value = serde_json::from_str(&compute_kpis(&t).to_json().unwrap()).unwrap();
        assert_eq!(v["kpis_percent"]["GRF"], 0.0);
        assert!(v["kpis_percent"]["EG"].is_null());
        assert!(v["undefined"]["EG"].is_string());
        assert_eq!(v["kpis_percent"].as_object().unwrap().len(), 10);
    }
}
