//! Acceptance suite, run without the libtest harness so its report is always
//! shown. Each criterion prints one PASS/FAIL line; the process fails if any
//! of them does.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use chrono::{NaiveTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vrfb_ems::battery::{self, BatteryParams, BatteryState};
use vrfb_ems::ems::{DecisionSchedule, DispatchMode, EmsConfig, StrategyKind};
use vrfb_ems::fixtures;
use vrfb_ems::forecast::{
    parse_payload, should_night_charge, synthesize_payload, ChargeDecisionPolicy, FixtureForecast, ForecastDay,
    ForecastProvider, HttpForecastClient, WEATHER_TYPES,
};
use vrfb_ems::kpi::{compute_kpis, EnergyTotals, Kpi};
use vrfb_ems::ramp::{ma_command, ramp_rate, window_sweep, MaCommand, RampConfig};
use vrfb_ems::timeseries::PowerSeries;

use common::{ems, ideal_battery, on_tick, run, schedule, week};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:?}, limit {limit:?}"))
    }
}

fn value(k: &Kpi) -> f64 {
    k.value().expect("defined KPI")
}

fn c1_kpi_identities() -> Outcome {
    let start = Instant::now();
    let (pv, load) = week();
    let params = BatteryParams::default();
    let mut checked = 0;
    for strategy in StrategyKind::ALL {
        let (_, r) = run(
            &pv,
            &load,
            &ems(strategy),
            &params,
            &schedule(&fixtures::week_forecast()),
        );
        let grf = value(&r.grf);
        ensure!(
            (grf - value(&r.fgu) - value(&r.tgu)).abs() <= 1e-9,
            "{strategy}: GRF != FGU + TGU"
        );
        ensure!(
            (value(&r.eg) - value(&r.fgu) / grf).abs() <= 1e-9,
            "{strategy}: EG != FGU / GRF"
        );
        checked += 1;
    }

    // grid import and export as shares of load, with the expected rounded sums
    let rows = [
        (57.2, 0.71, 57.9, 98.8),
        (60.2, 3.06, 63.3, 95.2),
        (57.7, 3.09, 60.8, 94.9),
    ];
    for (from, to, grf_pct, eg_pct) in rows {
        let totals = EnergyTotals {
            e_load: 100.0,
            e_from_grid: from,
            e_to_grid: to,
            e_grid_total: from + to,
            ..Default::default()
        };
        let r = compute_kpis(&totals);
        let grf = r.grf.percent().unwrap();
        ensure!(
            ((grf * 10.0).round() / 10.0 - grf_pct).abs() < 1e-9,
            "GRF {grf} does not round to {grf_pct}"
        );
        let eg = r.eg.percent().unwrap();
        ensure!((eg - eg_pct).abs() <= 0.1, "EG {eg} vs {eg_pct}");
        checked += 1;
    }
    Ok(format!("{checked} identity checks in {:?}", start.elapsed()))
}

fn c2_ramp_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = RampConfig::default();
    let close = |got: f64, want: f64| (got - want).abs() <= 1e-12 * want.abs().max(1.0);
    for i in 0..10_000 {
        let n = cfg.window_len();
        let window: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..cfg.nameplate_w)).collect();
        let p_now = window[n - 1];
        let mut sum = 0.0;
        for w in &window {
            sum += *w;
        }
        let want = p_now - sum / n as f64;
        let MaCommand::Ready(got) = ma_command(&window, p_now, &cfg) else {
            return Err(format!("window {i}: unexpected warm-up"));
        };
        ensure!(close(got, want), "window {i}: ma_command {got} vs {want}");

        let p_prev = window[n - 2];
        let dt_min = rng.random_range(0.01..5.0);
        let want = 100.0 * (p_now - p_prev) / (cfg.nameplate_w * dt_min);
        let got = ramp_rate(p_now, p_prev, &cfg, dt_min);
        ensure!(close(got, want), "window {i}: ramp_rate {got} vs {want}");
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1), "oracle")?;
    Ok(format!("10000 windows in {elapsed:?}"))
}

fn c3_strategy_collapse() -> Outcome {
    let pv = fixtures::smooth_day(fixtures::week_start());
    let (pv, load) = on_tick(&pv, &fixtures::quarter_hour_load(fixtures::week_start(), 1, 7));
    let params = BatteryParams::default();
    let none = DecisionSchedule::new();
    let start = Instant::now();
    let (scm, _) = run(&pv, &load, &ems(StrategyKind::Scm), &params, &none);
    let elapsed = start.elapsed();
    let (rr, report) = run(&pv, &load, &ems(StrategyKind::ScmRr), &params, &none);
    ensure!(scm.len() == 43_200, "expected 43200 ticks, got {}", scm.len());
    ensure!(scm == rr, "SCM and SCM+RR traces differ");
    ensure!(report.no_violations, "smooth day reported violations");
    ensure!(report.crr == Kpi::Value(1.0), "CRR {:?}", report.crr);
    within(elapsed, Duration::from_secs(1), "one-day simulation")?;
    Ok(format!("{} identical ticks, one day in {elapsed:?}", scm.len()))
}

fn c4_saturation() -> Outcome {
    let start = Instant::now();
    let (pv, load) = week();
    let cloudy = schedule(&fixtures::cloudy_forecast());
    let ideal = ideal_battery();

    let (_, wf) = run(&pv, &load, &ems(StrategyKind::ScmRrWf), &ideal, &cloudy);
    let (_, scm) = run(&pv, &load, &ems(StrategyKind::Scm), &ideal, &cloudy);
    ensure!(
        wf.totals.n_ramps_original >= 50,
        "only {} ramp events",
        wf.totals.n_ramps_original
    );
    ensure!(wf.crr == Kpi::Value(1.0), "ideal SCM+RR+WF CRR {:?}", wf.crr);
    ensure!(scm.crr == Kpi::Value(0.0), "SCM CRR {:?}", scm.crr);

    let depleted = |strategy| EmsConfig {
        strategy,
        initial_soc: 0.20,
        ..Default::default()
    };
    let params = BatteryParams::default();
    let (_, rr) = run(&pv, &load, &depleted(StrategyKind::ScmRr), &params, &cloudy);
    let (_, wf_real) = run(&pv, &load, &depleted(StrategyKind::ScmRrWf), &params, &cloudy);
    let (a, b) = (value(&rr.crr), value(&wf_real.crr));
    ensure!(a < b, "CRR SCM+RR {a} not below SCM+RR+WF {b}");
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10), "four week runs")?;
    Ok(format!(
        "ideal {} events all controlled; depleted CRR {:.2} % < {:.2} %; {elapsed:?}",
        wf.totals.n_ramps_original,
        a * 100.0,
        b * 100.0
    ))
}

fn c5_round_trip() -> Outcome {
    // no taper, so the battery runs the whole window at constant power
    let params = BatteryParams {
        derate_band: 0.0,
        ..Default::default()
    };
    let mut state = BatteryState::new(&params, params.soc_min).unwrap();
    let (mut e_in, mut e_out) = (0.0, 0.0);
    while state.soc < params.soc_max {
        let (s, ac) = battery::step(&params, &state, 2_700.0, 60.0);
        e_in += ac * 60.0 / 3600.0;
        state = s;
    }
    while state.soc > params.soc_min {
        let (s, ac) = battery::step(&params, &state, -2_700.0, 60.0);
        e_out -= ac * 60.0 / 3600.0;
        state = s;
    }
    let ratio = e_out / e_in;
    let want = 0.88 * 0.88;
    ensure!(((ratio - want) / want).abs() <= 1e-6, "round trip {ratio} vs {want}");
    // measured battery efficiency 77.1 +- 3.36 %
    ensure!((ratio - 0.771).abs() <= 0.0336, "outside the measured band");
    Ok(format!("{e_in:.1} Wh in, {e_out:.1} Wh out, ratio {ratio:.8}"))
}

fn c6_power_balance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = fixtures::week_start();
    let mut ticks = 0usize;
    for case in 0..1_000 {
        let n = rng.random_range(20..400);
        let pv: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    rng.random_range(0.0..8_000.0)
                }
            })
            .collect();
        let load: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5_000.0)).collect();
        let soc_min = rng.random_range(0.0..0.4);
        let soc_max = rng.random_range(soc_min + 0.2..1.0);
        let params = BatteryParams {
            energy_capacity: rng.random_range(100.0..100_000.0),
            power_nominal: if rng.random_bool(0.2) {
                f64::INFINITY
            } else {
                rng.random_range(100.0..10_000.0)
            },
            soc_min,
            soc_max,
            eta_acdc: rng.random_range(0.5..1.0),
            standby_power: rng.random_range(0.0..100.0),
            derate_band: rng.random_range(0.0..(soc_max - soc_min) / 2.0),
        };
        let cfg = EmsConfig {
            strategy: StrategyKind::ALL[rng.random_range(0..3)],
            initial_soc: rng.random_range(soc_min..=soc_max),
            soc_target: rng.random_range(soc_min + 0.01..soc_max - 0.01),
            night_charge_power_w: rng.random_range(0.0..6_000.0_f64).min(params.power_nominal),
            charge_start_time: NaiveTime::from_hms_opt(0, rng.random_range(0..10), 0).unwrap(),
            ..Default::default()
        };
        let mut decisions = DecisionSchedule::new();
        decisions.set(start.date_naive(), rng.random_bool(0.5));
        let pv = PowerSeries::new(start, 2, pv).unwrap();
        let load = PowerSeries::new(start, 2, load).unwrap();
        let (trace, _) = run(&pv, &load, &cfg, &params, &decisions);
        for (i, r) in trace.iter().enumerate() {
            let err = (r.p_pv + r.p_grid) - (r.p_load + r.p_batt_actual + params.standby_power);
            ensure!(err.abs() <= 1e-6, "case {case} tick {i}: imbalance {err} W");
            ensure!(
                (params.soc_min..=params.soc_max).contains(&r.soc),
                "case {case} tick {i}: soc {} left the window",
                r.soc
            );
        }
        ticks += trace.len();
    }
    Ok(format!("1000 configurations, {ticks} ticks balanced"))
}

fn c7_window_sweep() -> Outcome {
    let start = Instant::now();
    let (pv, _) = fixtures::fluctuating_week();
    let rows = window_sweep(&pv, &RampConfig::default(), &[20, 60, 300, 900]).map_err(|e| e.to_string())?;
    let counts: Vec<u64> = rows.iter().map(|r| r.controlled_ramps).collect();
    ensure!(counts.windows(2).all(|w| w[0] >= w[1]), "counts increase: {counts:?}");
    ensure!(counts[0] > counts[3], "sweep is flat: {counts:?}");
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30), "sweep")?;
    Ok(format!(
        "controlled ramps {counts:?} for 20/60/300/900 s in {elapsed:?}"
    ))
}

fn c8_forecast_table() -> Outcome {
    // weather-type codes typed out independently of the library table
    let expected: [(i32, &str, bool); 29] = [
        (-99, "---", false),
        (0, "No information", false),
        (1, "Clear sky", false),
        (2, "Partly cloudy", false),
        (3, "Sunny intervals", false),
        (4, "Cloudy", true),
        (5, "Cloudy (High cloud)", true),
        (6, "Showers", false),
        (7, "Light showers", false),
        (8, "Heavy showers", false),
        (9, "Rain", false),
        (10, "Light rain", false),
        (11, "Heavy rain", false),
        (12, "Intermittent rain", false),
        (13, "Intermittent light rain", false),
        (14, "Intermittent heavy rain", true),
        (15, "Drizzle", false),
        (16, "Mist", true),
        (17, "Fog", true),
        (18, "Snow", true),
        (19, "Thunderstorms", false),
        (20, "Showers and thunderstorms", false),
        (21, "Hail", false),
        (22, "Frost", false),
        (23, "Rain and thunderstorms", false),
        (24, "Convective clouds", false),
        (25, "Partly cloudy", false),
        (26, "Fog", false),
        (27, "Cloudy", false),
    ];
    ensure!(
        WEATHER_TYPES.len() == expected.len(),
        "table has {} codes",
        WEATHER_TYPES.len()
    );
    let policy = ChargeDecisionPolicy::default();
    let date = fixtures::week_start().date_naive();
    for ((id, name, charge), (lib_id, lib_name)) in expected.iter().zip(WEATHER_TYPES) {
        ensure!(*id == lib_id && *name == lib_name, "code {id}: {lib_id} {lib_name}");
        let day = ForecastDay {
            date,
            weather_type_id: *id,
            region_id: fixtures::REGION_ID,
        };
        ensure!(should_night_charge(&day, &policy) == *charge, "code {id} decision");
    }

    let payload = synthesize_payload(&fixtures::week_forecast()).map_err(|e| e.to_string())?;
    let bytes = payload.into_bytes();
    let (base, server) = common::serve(bytes.clone(), 1);
    let client = HttpForecastClient::new(base, fixtures::REGION_ID);
    let live_bytes = client.fetch_payload().map_err(|e| e.to_string())?;
    let requests = server.join().unwrap();
    ensure!(live_bytes == bytes, "served bytes altered in transit");
    let live = parse_payload(&live_bytes, fixtures::REGION_ID).map_err(|e| e.to_string())?;
    let fixture = FixtureForecast::from_bytes(&bytes, fixtures::REGION_ID).map_err(|e| e.to_string())?;
    ensure!(live.len() == 7, "parsed {} days", live.len());
    for day in &live {
        ensure!(
            fixture.forecast(day.date).ok().as_ref() == Some(day),
            "{} differs",
            day.date
        );
    }
    Ok(format!(
        "29 codes mapped; live and fixture agree on 7 days via {}",
        requests[0]
    ))
}

fn c9_night_charge() -> Outcome {
    let start = fixtures::week_start();
    let (pv, load) = on_tick(
        &fixtures::fluctuating_pv(start, 1, 9),
        &fixtures::quarter_hour_load(start, 1, 9),
    );
    let cfg = ems(StrategyKind::ScmRrWf);
    let params = BatteryParams::default();

    let (trace, _) = run(&pv, &load, &cfg, &params, &schedule(&fixtures::cloudy_forecast()));
    let charging: Vec<usize> = (0..trace.len())
        .filter(|&i| trace[i].mode == DispatchMode::NightCharge)
        .collect();
    let (&first, &last) = (charging.first().ok_or("no night charge")?, charging.last().unwrap());
    ensure!(
        charging.len() == last - first + 1,
        "charging is not one contiguous block"
    );
    let t = trace[first].timestamp.time();
    ensure!(
        (t.hour(), t.minute(), t.second()) == (1, 30, 0),
        "charging starts at {t}"
    );
    for &i in &charging[..charging.len() - 1] {
        ensure!(
            trace[i].p_batt_actual == 2_700.0,
            "tick {i}: {} W",
            trace[i].p_batt_actual
        );
    }
    let reached = trace
        .iter()
        .position(|r| r.soc >= cfg.soc_target)
        .ok_or("soc never reached target")?;
    ensure!(last <= reached + 1, "charging continues past the target tick");
    ensure!(
        trace[last + 1].mode != DispatchMode::NightCharge,
        "charging did not stop"
    );

    let (clear, _) = run(&pv, &load, &cfg, &params, &schedule(&fixtures::clear_forecast()));
    let n = clear.iter().filter(|r| r.mode == DispatchMode::NightCharge).count();
    ensure!(n == 0, "{n} night-charge ticks on a clear night");
    Ok(format!(
        "charged {}..{} at 2700 W, soc {:.4} at stop; clear night idle",
        trace[first].timestamp.time(),
        trace[last].timestamp.time(),
        trace[last].soc
    ))
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_vrfb-ems");
    let seed = Command::new(bin)
        .arg("--seed-fixtures")
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        seed.status.success(),
        "seeding failed: {}",
        String::from_utf8_lossy(&seed.stderr)
    );
    let compare = |out: &Path| -> Result<(Vec<u8>, Vec<u8>), String> {
        let o = Command::new(bin)
            .arg("--config")
            .arg(dir.path().join("config.toml"))
            .arg("--out-dir")
            .arg(dir.path())
            .arg("compare")
            .env_remove(vrfb_ems::config::ENDPOINT_ENV)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(
            o.status.success(),
            "compare failed: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        Ok((o.stdout, std::fs::read(out).map_err(|e| e.to_string())?))
    };
    let csv = dir.path().join("comparison.csv");
    let (out_a, csv_a) = compare(&csv)?;
    let (out_b, csv_b) = compare(&csv)?;
    ensure!(out_a == out_b, "console output differs between runs");
    ensure!(csv_a == csv_b, "comparison.csv differs between runs");
    Ok(format!(
        "comparison.csv ({} bytes) and console output identical",
        csv_a.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 KPI identities", c1_kpi_identities),
        ("2 ramp-rate oracle", c2_ramp_oracle),
        ("3 strategy collapse", c3_strategy_collapse),
        ("4 saturation", c4_saturation),
        ("5 battery round trip", c5_round_trip),
        ("6 power balance", c6_power_balance),
        ("7 window sweep", c7_window_sweep),
        ("8 forecast table", c8_forecast_table),
        ("9 night charge", c9_night_charge),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: 10/10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
