use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use vrfb_ems::config::{ForecastMode, RunConfig, ENDPOINT_ENV};
use vrfb_ems::ems::StrategyKind;
use vrfb_ems::forecast::weather_description;
use vrfb_ems::run::{self, RunSummary};
use vrfb_ems::Result;

#[derive(Parser)]
#[command(name = "vrfb-ems", version, about = "PV + flow battery microgrid simulator")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the strategy in the config (scm, scm_rr, scm_rr_wf).
    #[arg(long, global = true)]
    strategy: Option<StrategyKind>,
    /// Directory for outputs; defaults to the config file's directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Writes the synthetic fixture corpus into DIR before anything else.
    #[arg(long, value_name = "DIR")]
    seed_fixtures: Option<PathBuf>,
    /// Base URL of the forecast service; switches the forecast to live mode.
    #[arg(long, global = true, env = ENDPOINT_ENV)]
    forecast_endpoint: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one strategy; writes the trace, KPI JSON and ramp histogram.
    Simulate,
    /// Ramp histogram and moving-average window sweep of the PV input.
    RampAnalyze {
        /// Sweep window lengths in seconds; the config's list when omitted.
        #[arg(long, value_delimiter = ',')]
        windows: Vec<u32>,
    },
    /// Run several strategies on the same inputs and tabulate the KPIs.
    Compare {
        #[arg(long, value_delimiter = ',', default_values_t = StrategyKind::ALL)]
        strategies: Vec<StrategyKind>,
    },
    /// Show the night-charge verdict for one date (tomorrow by default).
    ForecastCheck {
        #[arg(long)]
        date: Option<NaiveDate>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.strategy {
        cfg.strategy = Some(s);
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(url) = &cli.forecast_endpoint {
        cfg.forecast.mode = ForecastMode::Live;
        cfg.forecast.endpoint_base = Some(url.clone());
    }
    Ok(cfg)
}

fn report(summary: &RunSummary) {
    print!("{}", summary.console);
    for p in &summary.written {
        println!("wrote {}", p.display());
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(dir) = &cli.seed_fixtures {
        for p in run::seed_fixtures(dir)? {
            println!("wrote {}", p.display());
        }
    }
    let Some(command) = &cli.command else {
        return Ok(());
    };
    let cfg = load_config(cli)?;
    match command {
        Command::Simulate => report(&run::run_simulation(&cfg)?),
        Command::RampAnalyze { windows } => {
            let windows = if windows.is_empty() {
                &cfg.sweep_windows_s
            } else {
                windows
            };
            report(&run::run_ramp_analysis(
                &cfg.pv_path,
                cfg.pv_unit,
                &cfg.ems.ramp,
                windows,
                &cfg.output_path(&cfg.outputs.histogram_csv),
                &cfg.output_path(&cfg.outputs.sweep_csv),
            )?)
        }
        Command::Compare { strategies } => report(&run::compare_strategies(&cfg, strategies)?.0),
        Command::ForecastCheck { date } => {
            let date = date.unwrap_or_else(|| cfg.ems.local_time(chrono::Utc::now()).date() + chrono::Days::new(1));
            let (day, charge) = run::forecast_check(&cfg.forecast, date)?;
            println!(
                "{} region {}: weather type {} ({}) -> {}",
                day.date,
                day.region_id,
                day.weather_type_id,
                weather_description(day.weather_type_id).unwrap_or("unknown"),
                if charge { "night charge" } else { "no night charge" }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
