//! Bundled synthetic input corpus.
//!
//! Everything here is generated from fixed seeds so tests, examples and the
//! `--seed-fixtures` flag all see the same bytes.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forecast::ForecastDay;
use crate::timeseries::PowerSeries;

pub const NAMEPLATE_W: f64 = 6_740.0;
pub const REGION_ID: i64 = 1_070_500;
pub const PV_STEP_S: u32 = 2;
pub const LOAD_STEP_S: u32 = 900;

const SUNRISE_S: f64 = 7.0 * 3600.0 + 50.0 * 60.0;
const SUNSET_S: f64 = 17.0 * 3600.0 + 20.0 * 60.0;
const BURST_START_S: u32 = 12 * 3600;
const BURST_DWELL_S: u32 = 360;
const BURST_TOGGLES: u32 = 10;

pub fn week_start() -> DateTime<Utc> {
    "2018-01-01T00:00:00Z".parse().unwrap()
}

/// Clear-sky PV shape peaking at nameplate around 12:35.
pub fn clear_sky(second_of_day: f64) -> f64 {
    if !(SUNRISE_S..=SUNSET_S).contains(&second_of_day) {
        return 0.0;
    }
    NAMEPLATE_W * (std::f64::consts::PI * (second_of_day - SUNRISE_S) / (SUNSET_S - SUNRISE_S)).sin()
}

/// Smooth clear-sky day at 2 s; its steepest averaged ramp is far below 10 %/min.
pub fn smooth_day(start: DateTime<Utc>) -> PowerSeries {
    let values = (0..43_200).map(|i| clear_sky((i * 2) as f64)).collect();
    PowerSeries::new(start, PV_STEP_S, values).expect("finite values")
}

/// Cloud-modulated PV for `days` days at 2 s.
///
/// Daylight hours alternate between sunny and shaded levels with dwell times
/// of two to ten minutes. Every day from 12:00 a burst of ten full-nameplate
/// on/off toggles, six minutes apart, injects +-100 %/min ramps.
pub fn fluctuating_pv(start: DateTime<Utc>, days: u32, seed: u64) -> PowerSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_day = 86_400 / PV_STEP_S;
    let mut values = Vec::with_capacity((per_day * days) as usize);
    for day in 0..days {
        // mild days have shallower shade
        let shade_floor = if matches!(day, 0 | 5 | 6) { 0.6 } else { 0.15 };
        let mut factor = 1.0;
        let mut sunny = true;
        let mut next_switch = 0u32;
        for k in 0..per_day {
            let sec = k * PV_STEP_S;
            if sec >= next_switch {
                sunny = !sunny;
                factor = if sunny {
                    rng.random_range(0.85..1.0)
                } else {
                    rng.random_range(shade_floor..0.6_f64.max(shade_floor + 0.1))
                };
                next_switch = sec + rng.random_range(60..=300) * 2;
            }
            let burst_end = BURST_START_S + BURST_DWELL_S * BURST_TOGGLES;
            let p = if (BURST_START_S..burst_end).contains(&sec) {
                if ((sec - BURST_START_S) / BURST_DWELL_S).is_multiple_of(2) {
                    0.0
                } else {
                    NAMEPLATE_W
                }
            } else {
                clear_sky(sec as f64) * factor
            };
            values.push(p);
        }
    }
    PowerSeries::new(start, PV_STEP_S, values).expect("finite values")
}

/// Quarter-hour load of a small multi-dwelling building covering `days` days plus the closing
/// midnight sample, so it spans the whole PV series.
pub fn quarter_hour_load(start: DateTime<Utc>, days: u32, seed: u64) -> PowerSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = days * 96 + 1;
    let values = (0..n)
        .map(|i| {
            let hour = (i % 96) as f64 / 4.0;
            let base = match hour {
                h if h < 6.5 => 1_125.0,
                h if h < 9.0 => 3_250.0,
                h if h < 17.5 => 2_125.0,
                h if h < 22.5 => 4_750.0,
                _ => 1_750.0,
            };
            (base * rng.random_range(0.9..1.1_f64)).round()
        })
        .collect();
    PowerSeries::new(start, LOAD_STEP_S, values).expect("finite values")
}

pub fn fluctuating_week() -> (PowerSeries, PowerSeries) {
    (
        fluctuating_pv(week_start(), 7, 2018),
        quarter_hour_load(week_start(), 7, 34),
    )
}

fn week_dates() -> impl Iterator<Item = NaiveDate> {
    week_start().date_naive().iter_days().take(7)
}

/// Cloudy verdicts on days 2 to 5, clear or partly cloudy otherwise.
pub fn week_forecast() -> Vec<ForecastDay> {
    const IDS: [i32; 7] = [1, 4, 5, 14, 4, 2, 3];
    week_dates()
        .zip(IDS)
        .map(|(date, weather_type_id)| ForecastDay {
            date,
            weather_type_id,
            region_id: REGION_ID,
        })
        .collect()
}

pub fn cloudy_forecast() -> Vec<ForecastDay> {
    uniform_forecast(4)
}

pub fn clear_forecast() -> Vec<ForecastDay> {
    uniform_forecast(1)
}

fn uniform_forecast(weather_type_id: i32) -> Vec<ForecastDay> {
    week_dates()
        .map(|date| ForecastDay {
            date,
            weather_type_id,
            region_id: REGION_ID,
        })
        .collect()
}

/// Shifts a series in time; used to build fixtures for later dates.
pub fn shifted(series: &PowerSeries, by: Duration) -> Result<PowerSeries> {
    PowerSeries::new(series.start() + by, series.step_s(), series.values().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramp::{ramp_histogram, RampConfig};

    #[test]
    fn deterministic() {
        assert_eq!(fluctuating_pv(week_start(), 1, 5), fluctuating_pv(week_start(), 1, 5));
        assert_ne!(fluctuating_pv(week_start(), 1, 5), fluctuating_pv(week_start(), 1, 6));
    }

    #[test]
    fn week_has_at_least_fifty_full_nameplate_ramps() {
        let (pv, load) = fluctuating_week();
        assert_eq!(pv.len(), 7 * 43_200);
        assert_eq!(load.end(), pv.end() + Duration::seconds(2));
        let h = ramp_histogram(&pv, &RampConfig::default()).unwrap();
        let full: usize = pv
            .values()
            .windows(31)
            .step_by(30)
            .filter(|w| (w[30] - w[0]).abs() >= NAMEPLATE_W)
            .count();
        assert!(full >= 50, "{full}");
        assert!(h.at_least_50 >= 50);
    }
}
