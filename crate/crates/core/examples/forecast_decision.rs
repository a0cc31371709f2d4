//! Night-charge verdicts for every weather-type code, then a week of
//! decisions read from a recorded payload.
//!
//! cargo run --example forecast_decision
//!
//! With `VRFB_EMS_FORECAST_ENDPOINT` set (for example to
//! `https://api.ipma.pt/open-data/forecast/meteorology/cities/daily`) the
//! first date is also fetched live.

use vrfb_ems::config::ENDPOINT_ENV;
use vrfb_ems::fixtures;
use vrfb_ems::forecast::{
    fetch_daily_forecast, should_night_charge, synthesize_payload, ChargeDecisionPolicy, FixtureForecast, ForecastDay,
    WEATHER_TYPES,
};

fn main() -> vrfb_ems::Result<()> {
    let policy = ChargeDecisionPolicy::default();
    let date = fixtures::week_start().date_naive();
    for (id, name) in WEATHER_TYPES {
        let day = ForecastDay {
            date,
            weather_type_id: id,
            region_id: fixtures::REGION_ID,
        };
        let verdict = if should_night_charge(&day, &policy) {
            "charge"
        } else {
            "-"
        };
        println!("{id:>4}  {name:<28} {verdict}");
    }

    let payload = synthesize_payload(&fixtures::week_forecast())?;
    let fixture = FixtureForecast::from_bytes(payload.as_bytes(), fixtures::REGION_ID)?;
    println!();
    for day in fixture.days() {
        println!(
            "{}  type {:>2}  night charge: {}",
            day.date,
            day.weather_type_id,
            should_night_charge(day, &policy)
        );
    }

    if let Ok(base) = std::env::var(ENDPOINT_ENV) {
        let today = chrono::Utc::now().date_naive();
        match fetch_daily_forecast(fixtures::REGION_ID, &base, today) {
            Ok(day) => println!("live {}: type {}", day.date, day.weather_type_id),
            Err(e) => println!("live fetch failed: {e}"),
        }
    }
    Ok(())
}
