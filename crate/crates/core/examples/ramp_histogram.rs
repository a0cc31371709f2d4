//! One-minute ramp-rate distribution of the bundled fluctuating week.
//!
//! cargo run --example ramp_histogram

use vrfb_ems::fixtures;
use vrfb_ems::ramp::{ramp_histogram, RampConfig};

fn main() -> vrfb_ems::Result<()> {
    let (pv, _) = fixtures::fluctuating_week();
    let cfg = RampConfig::default();
    let h = ramp_histogram(&pv, &cfg)?;
    println!(
        "{} one-minute intervals, nameplate {} W",
        h.total_minutes, cfg.nameplate_w
    );
    for (label, n) in h.buckets() {
        println!("{label:>6} %/min  {n:>6}  {:>7.3} %", h.percent(n));
    }
    let smooth = ramp_histogram(&fixtures::smooth_day(fixtures::week_start()), &cfg)?;
    println!(
        "clear-sky day: {} of {} minutes at or above 5 %/min",
        smooth.at_least_5, smooth.total_minutes
    );
    Ok(())
}
