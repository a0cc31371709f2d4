//! The indicators computed from hand-made energy totals, showing the grid
//! identities and how an undefined ratio is reported.
//!
//! cargo run --example kpi_identities

use vrfb_ems::kpi::{compute_kpis, EnergyTotals};

fn main() -> vrfb_ems::Result<()> {
    let totals = EnergyTotals {
        e_pv_generated: 40.0,
        e_pv_consumed: 23.4,
        e_load: 100.0,
        e_from_grid: 57.2,
        e_to_grid: 0.71,
        e_grid_total: 57.91,
        e_to_battery: 8.0,
        e_from_battery: 6.2,
        e_battery_total: 14.2,
        ..Default::default()
    };
    let r = compute_kpis(&totals);
    for (name, k) in r.entries() {
        match k.percent() {
            Some(v) => println!("{name:<4} {v:>7.2} %"),
            None => println!("{name:<4}     n/a"),
        }
    }
    let (grf, fgu, tgu) = (r.grf.value().unwrap(), r.fgu.value().unwrap(), r.tgu.value().unwrap());
    println!("GRF - FGU - TGU = {:e}", grf - fgu - tgu);
    println!("EG - FGU/GRF    = {:e}", r.eg.value().unwrap() - fgu / grf);

    let idle = compute_kpis(&EnergyTotals {
        e_load: 10.0,
        e_from_grid: 10.0,
        e_grid_total: 10.0,
        ..Default::default()
    });
    println!("\n{}", idle.to_json()?);
    Ok(())
}
