//! End-to-end runs driven by a [`RunConfig`]: what the command-line tool
//! calls, usable directly from library code too.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::config::{ForecastConfig, ForecastMode, RunConfig};
use crate::ems::{local_dates, simulate, DecisionSchedule, DispatchRecord, EmsConfig, StrategyKind};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::forecast::{should_night_charge, synthesize_payload, ForecastDay};
use crate::kpi::{accumulate, compute_kpis, KpiReport};
use crate::output;
use crate::ramp::{ramp_histogram, window_sweep, RampConfig, RampHistogram, SweepRow};
use crate::timeseries::{align_with, load_power_csv, resample, PowerSeries, PowerUnit, ResampleMethod, ResamplePolicy};

/// Outcome of a run: files written, non-fatal warnings and the results.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub console: String,
}

impl RunSummary {
    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn to_tick(series: PowerSeries, tick_s: u32, method: ResampleMethod) -> Result<PowerSeries> {
    if series.step_s() == tick_s {
        return Ok(series);
    }
    let policy = ResamplePolicy {
        method,
        gap_limit_s: series.step_s().max(tick_s),
    };
    resample(&series, tick_s, policy)
}

/// Loads PV and load, scales the load, and puts both on the control tick.
pub fn load_inputs(cfg: &RunConfig) -> Result<(PowerSeries, PowerSeries)> {
    let tick = cfg.ems.ramp.tick_s;
    let pv = load_power_csv(&cfg.pv_path, cfg.pv_unit)?;
    let mut load = load_power_csv(&cfg.load_path, cfg.load_unit)?;
    if cfg.load_scale_w != 1.0 {
        load = load.scaled(cfg.load_scale_w)?;
    }
    let pv = to_tick(pv, tick, ResampleMethod::Linear)?;
    let load = to_tick(load, tick, cfg.load_resample)?;
    align_with(&pv, &load, cfg.load_resample)
}

fn decisions_for(
    cfg: &RunConfig,
    ems: &EmsConfig,
    pv: &PowerSeries,
    summary: &mut RunSummary,
) -> Result<DecisionSchedule> {
    if !ems.strategy.uses_forecast() {
        return Ok(DecisionSchedule::new());
    }
    if cfg.forecast.mode == ForecastMode::None {
        summary.warn(format!(
            "strategy {} has no forecast source; night charging disabled",
            ems.strategy
        ));
    }
    let provider = cfg.forecast.provider()?;
    Ok(DecisionSchedule::resolve(
        provider.as_ref(),
        &cfg.forecast.policy(),
        local_dates(pv, ems),
    ))
}

/// Runs one strategy on already loaded inputs.
pub fn run_strategy(
    cfg: &RunConfig,
    strategy: StrategyKind,
    pv: &PowerSeries,
    load: &PowerSeries,
    summary: &mut RunSummary,
) -> Result<(Vec<DispatchRecord>, KpiReport)> {
    let ems = EmsConfig {
        strategy,
        ..cfg.effective_ems()
    };
    let decisions = decisions_for(cfg, &ems, pv, summary)?;
    let trace = simulate(pv, load, &ems, &cfg.battery, &decisions)?;
    let totals = accumulate(&trace, ems.ramp.tick_s, cfg.battery.standby_power)?;
    Ok((trace, compute_kpis(&totals)))
}

/// Simulates the configured strategy and writes the trace CSV, the KPI JSON
/// and the PV ramp histogram.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let mut summary = RunSummary::default();
    let (pv, load) = load_inputs(cfg)?;
    let strategy = cfg.effective_ems().strategy;
    if !strategy.uses_forecast() && cfg.forecast.mode != ForecastMode::None {
        summary.warn(format!("strategy {strategy} ignores the [forecast] section"));
    }
    let (trace, report) = run_strategy(cfg, strategy, &pv, &load, &mut summary)?;
    let hist = ramp_histogram(&pv, &cfg.ems.ramp)?;

    let trace_path = cfg.output_path(&cfg.outputs.trace_csv);
    output::write_trace_csv(&trace_path, &trace)?;
    let kpi_path = cfg.output_path(&cfg.outputs.kpi_json);
    output::write_string(&kpi_path, &(report.to_json()? + "\n"))?;
    let hist_path = cfg.output_path(&cfg.outputs.histogram_csv);
    output::write_histogram_csv(&hist_path, &hist)?;

    summary.written = vec![trace_path, kpi_path, hist_path];
    summary.console = output::kpi_summary(strategy, &report);
    Ok(summary)
}

/// Ramp statistics of a PV file alone: one-minute ramp histogram plus window sweep.
pub fn ramp_analysis(pv: &PowerSeries, ramp: &RampConfig, windows: &[u32]) -> Result<(RampHistogram, Vec<SweepRow>)> {
    Ok((ramp_histogram(pv, ramp)?, window_sweep(pv, ramp, windows)?))
}

pub fn run_ramp_analysis(
    pv_path: &Path,
    unit: PowerUnit,
    ramp: &RampConfig,
    windows: &[u32],
    histogram_csv: &Path,
    sweep_csv: &Path,
) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let windows = if windows.is_empty() {
        summary.warn("no sweep windows given; using 20 s".into());
        vec![20]
    } else {
        windows.to_vec()
    };
    let pv = load_power_csv(pv_path, unit)?;
    let (hist, rows) = ramp_analysis(&pv, ramp, &windows)?;
    output::write_histogram_csv(histogram_csv, &hist)?;
    output::write_sweep_csv(sweep_csv, &rows)?;
    summary.written = vec![histogram_csv.to_path_buf(), sweep_csv.to_path_buf()];
    let mut console = String::new();
    for (label, n) in hist.buckets() {
        console += &format!("{label:>6} %/min: {:>7.3} %\n", hist.percent(n));
    }
    for r in &rows {
        console += &format!("window {:>5} s: {} controlled ramps\n", r.window_s, r.controlled_ramps);
    }
    summary.console = console;
    Ok(summary)
}

/// Runs several strategies on identical inputs and writes a side-by-side KPI table.
pub fn compare_strategies(
    cfg: &RunConfig,
    strategies: &[StrategyKind],
) -> Result<(RunSummary, Vec<(StrategyKind, KpiReport)>)> {
    cfg.validate()?;
    if strategies.is_empty() {
        return Err(Error::InvalidParams("no strategies to compare".into()));
    }
    let (pv, load) = load_inputs(cfg)?;
    let results: Vec<Result<(RunSummary, KpiReport)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&k| {
                let (pv, load) = (&pv, &load);
                scope.spawn(move || {
                    let mut s = RunSummary::default();
                    run_strategy(cfg, k, pv, load, &mut s).map(|(_, r)| (s, r))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("strategy worker panicked"))
            .collect()
    });

    let mut summary = RunSummary::default();
    let mut rows = Vec::with_capacity(strategies.len());
    for (&k, res) in strategies.iter().zip(results) {
        let (s, report) = res?;
        summary.warnings.extend(s.warnings);
        rows.push((k, report));
    }
    let path = cfg.output_path(&cfg.outputs.comparison_csv);
    output::write_comparison_csv(&path, &rows)?;
    summary.written.push(path);
    summary.console = output::comparison_table(&rows);
    Ok((summary, rows))
}

/// Night-charge verdict for `date` under the configured forecast source.
pub fn forecast_check(forecast: &ForecastConfig, date: NaiveDate) -> Result<(ForecastDay, bool)> {
    let provider = forecast.provider()?;
    let day = provider.forecast(date)?;
    Ok((day, should_night_charge(&day, &forecast.policy())))
}

/// Writes the synthetic corpus: a fluctuating week of PV and load, two
/// forecast payloads and a ready-to-run config.
pub fn seed_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    let (pv, load) = fixtures::fluctuating_week();
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        output::write_string(&path, &body)?;
        written.push(path);
        Ok(())
    };
    put("pv.csv", series_csv(&pv))?;
    put("load.csv", series_csv(&load))?;
    put(
        "forecast_week.json",
        synthesize_payload(&fixtures::week_forecast())? + "\n",
    )?;
    put(
        "forecast_cloudy.json",
        synthesize_payload(&fixtures::cloudy_forecast())? + "\n",
    )?;
    let mut cfg = RunConfig::default();
    cfg.forecast.mode = ForecastMode::Fixture;
    cfg.forecast.fixture_path = Some("forecast_week.json".into());
    cfg.forecast.region_id = Some(fixtures::REGION_ID);
    cfg.sweep_windows_s = vec![2, 20, 60, 300, 900];
    put("config.toml", cfg.to_toml()?)?;
    Ok(written)
}

fn series_csv(s: &PowerSeries) -> String {
    let mut out = String::from("timestamp,power\n");
    for sample in s.samples() {
        out += &format!(
            "{},{}\n",
            sample.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            sample.power
        );
    }
    out
}
