//! Charges the flow battery across its SOC window and discharges it back,
//! showing the power taper near the limits and the round-trip efficiency.
//!
//! Inside the taper band the accepted power shrinks with the distance to the
//! limit, so SOC closes in on it geometrically; the loops stop once the
//! battery takes less than 1 W.
//!
//! cargo run --example battery_round_trip

use vrfb_ems::battery::{self, available_charge_power, BatteryParams, BatteryState};

fn main() -> vrfb_ems::Result<()> {
    let params = BatteryParams::default();
    let mut state = BatteryState::new(&params, params.soc_min)?;
    let dt_s = 60.0;
    let (mut e_in, mut e_out) = (0.0, 0.0);
    let mut minute = 0;

    println!("minute   soc     accepted W");
    loop {
        let (next, ac) = battery::step(&params, &state, params.power_nominal, dt_s);
        if ac < 1.0 {
            break;
        }
        if minute % 60 == 0 {
            println!("{minute:>6}  {:.4}  {:>9.1}", state.soc, ac);
        }
        e_in += ac * dt_s / 3600.0;
        state = next;
        minute += 1;
    }
    println!(
        "soc {:.5} after {minute} min; charge power left {:.2} W",
        state.soc,
        available_charge_power(&params, &state)
    );

    loop {
        let (next, ac) = battery::step(&params, &state, -params.power_nominal, dt_s);
        if -ac < 1.0 {
            break;
        }
        e_out -= ac * dt_s / 3600.0;
        state = next;
    }
    println!(
        "AC in {:.2} kWh, AC out {:.2} kWh, round trip {:.4} (eta^2 = {:.4}, soc back to {:.5})",
        e_in / 1e3,
        e_out / 1e3,
        e_out / e_in,
        params.eta_acdc.powi(2),
        state.soc
    );
    Ok(())
}
