//! How the moving-average window length changes the number of ramps the
//! controller detects and smooths.
//!
//! Averaging a full-nameplate step over W seconds spreads it into a ramp of
//! 6000/W %/min. At 600 s that lands exactly on the 10 %/min limit, so the
//! fixture's on/off burst flickers across the threshold and splits into many
//! short events; the count is not monotone in W near that point.
//!
//! cargo run --example window_sweep

use vrfb_ems::fixtures;
use vrfb_ems::ramp::{window_sweep, RampConfig};

fn main() -> vrfb_ems::Result<()> {
    let (pv, _) = fixtures::fluctuating_week();
    let rows = window_sweep(&pv, &RampConfig::default(), &[2, 10, 20, 60, 120, 300, 600, 900])?;
    println!("window s  detected  controlled");
    for r in rows {
        println!("{:>8}  {:>8}  {:>10}", r.window_s, r.detected_ramps, r.controlled_ramps);
    }
    Ok(())
}
