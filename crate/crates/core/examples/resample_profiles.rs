//! Loads a 2 s PV profile and a quarter-hour load profile, then aligns them on
//! the 2 s control tick with both resampling methods.
//!
//! cargo run --example resample_profiles

use vrfb_ems::timeseries::{align_with, load_power_csv, PowerUnit, ResampleMethod};

fn main() -> vrfb_ems::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    vrfb_ems::run::seed_fixtures(dir.path())?;

    let pv = load_power_csv(dir.path().join("pv.csv"), PowerUnit::Watt)?;
    let load = load_power_csv(dir.path().join("load.csv"), PowerUnit::Watt)?;
    println!("pv:   {} samples every {} s from {}", pv.len(), pv.step_s(), pv.start());
    println!("load: {} samples every {} s", load.len(), load.step_s());

    for method in [ResampleMethod::Hold, ResampleMethod::Linear] {
        let (_, load2) = align_with(&pv, &load, method)?;
        // 07:07:30 sits halfway between two quarter-hour readings
        let i = (7 * 3600 + 450) / 2;
        println!(
            "{method:?}: {} ticks, load energy {:.1} kWh, load at {} = {:.1} W",
            load2.len(),
            load2.trapezoid_wh() / 1e3,
            load2.timestamp(i).time(),
            load2.values()[i]
        );
    }
    println!("quarter-hour energy {:.1} kWh", load.trapezoid_wh() / 1e3);
    Ok(())
}
