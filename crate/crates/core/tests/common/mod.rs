#![allow(dead_code)]

use vrfb_ems::battery::BatteryParams;
use vrfb_ems::ems::{simulate, DecisionSchedule, DispatchRecord, EmsConfig, StrategyKind};
use vrfb_ems::fixtures;
use vrfb_ems::forecast::{should_night_charge, ChargeDecisionPolicy, ForecastDay};
use vrfb_ems::kpi::{accumulate, compute_kpis, KpiReport};
use vrfb_ems::timeseries::{align_with, resample, PowerSeries, ResampleMethod, ResamplePolicy};

/// Brings the quarter-hour load onto the PV tick and trims both to the overlap.
pub fn on_tick(pv: &PowerSeries, load: &PowerSeries) -> (PowerSeries, PowerSeries) {
    let load = resample(load, pv.step_s(), ResamplePolicy::hold(load.step_s())).unwrap();
    align_with(pv, &load, ResampleMethod::Hold).unwrap()
}

pub fn week() -> (PowerSeries, PowerSeries) {
    let (pv, load) = fixtures::fluctuating_week();
    on_tick(&pv, &load)
}

pub fn schedule(days: &[ForecastDay]) -> DecisionSchedule {
    let policy = ChargeDecisionPolicy::default();
    let mut s = DecisionSchedule::new();
    for d in days {
        s.set(d.date, should_night_charge(d, &policy));
    }
    s
}

pub fn ems(strategy: StrategyKind) -> EmsConfig {
    EmsConfig {
        strategy,
        ..Default::default()
    }
}

pub fn run(
    pv: &PowerSeries,
    load: &PowerSeries,
    cfg: &EmsConfig,
    params: &BatteryParams,
    decisions: &DecisionSchedule,
) -> (Vec<DispatchRecord>, KpiReport) {
    let trace = simulate(pv, load, cfg, params, decisions).unwrap();
    let totals = accumulate(&trace, cfg.ramp.tick_s, params.standby_power).unwrap();
    (trace, compute_kpis(&totals))
}

pub fn ideal_battery() -> BatteryParams {
    BatteryParams {
        soc_min: 0.0,
        soc_max: 1.0,
        power_nominal: f64::INFINITY,
        ..Default::default()
    }
}

/// Minimal HTTP/1.1 server answering every request with `body`.
/// Returns the base URL and a handle yielding the request lines it saw.
pub fn serve(body: Vec<u8>, requests: usize) -> (String, std::thread::JoinHandle<Vec<String>>) {
    use std::io::{BufRead, BufReader, Write};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut seen = Vec::new();
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            seen.push(line.trim_end().to_string());
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap() == 0 || h == "\r\n" {
                    break;
                }
            }
            let head = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                body.len()
            );
            stream.write_all(head.as_bytes()).unwrap();
            stream.write_all(&body).unwrap();
        }
        seen
    });
    (base, handle)
}
