//! Simulates the forecast-driven strategy over the bundled week and prints a
//! daily SOC and dispatch summary plus the KPIs.
//!
//! cargo run --release --example simulate_week

use std::collections::BTreeMap;

use vrfb_ems::battery::BatteryParams;
use vrfb_ems::ems::{simulate_with_forecast, DispatchMode, EmsConfig, StrategyKind};
use vrfb_ems::fixtures;
use vrfb_ems::forecast::{ChargeDecisionPolicy, FixtureForecast};
use vrfb_ems::kpi::{accumulate, compute_kpis};
use vrfb_ems::output::kpi_summary;
use vrfb_ems::timeseries::{align, resample, ResamplePolicy};

fn main() -> vrfb_ems::Result<()> {
    let (pv, load) = fixtures::fluctuating_week();
    let load = resample(&load, pv.step_s(), ResamplePolicy::hold(load.step_s()))?;
    let (pv, load) = align(&pv, &load)?;

    let cfg = EmsConfig {
        strategy: StrategyKind::ScmRrWf,
        ..Default::default()
    };
    let params = BatteryParams::default();
    let forecast = FixtureForecast::from_days(fixtures::week_forecast());
    let trace = simulate_with_forecast(&pv, &load, &cfg, &params, &forecast, &ChargeDecisionPolicy::default())?;

    // per day: (soc at 07:00, min soc, max soc, night-charge ticks, ramp-control ticks)
    let mut days: BTreeMap<_, (f64, f64, f64, u32, u32)> = BTreeMap::new();
    for r in &trace {
        let d = days.entry(r.timestamp.date_naive()).or_insert((0.0, 1.0, 0.0, 0, 0));
        if r.timestamp.time() == chrono::NaiveTime::from_hms_opt(7, 0, 0).unwrap() {
            d.0 = r.soc;
        }
        d.1 = d.1.min(r.soc);
        d.2 = d.2.max(r.soc);
        d.3 += (r.mode == DispatchMode::NightCharge) as u32;
        d.4 += (r.mode == DispatchMode::RampControl) as u32;
    }
    println!("date        soc@07  min    max    night min  rr ticks");
    for (date, (morning, lo, hi, night, rr)) in days {
        println!(
            "{date}  {morning:.3}   {lo:.3}  {hi:.3}  {:>9.1}  {rr:>8}",
            night as f64 * 2.0 / 60.0
        );
    }

    let report = compute_kpis(&accumulate(&trace, cfg.ramp.tick_s, params.standby_power)?);
    println!("\n{}", kpi_summary(cfg.strategy, &report));
    Ok(())
}
