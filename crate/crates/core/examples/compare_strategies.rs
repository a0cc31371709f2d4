//! Runs all three strategies on the seeded corpus through the same entry
//! point the command-line tool uses, and prints the KPI table.
//!
//! cargo run --release --example compare_strategies

use vrfb_ems::config::RunConfig;
use vrfb_ems::ems::StrategyKind;
use vrfb_ems::run;

fn main() -> vrfb_ems::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    run::seed_fixtures(dir.path())?;
    let cfg = RunConfig::load(dir.path().join("config.toml"))?;

    let (summary, rows) = run::compare_strategies(&cfg, &StrategyKind::ALL)?;
    print!("{}", summary.console);
    for (k, r) in &rows {
        println!(
            "{k:<10} ramps {:>4}, controlled {:>4}",
            r.totals.n_ramps_original, r.totals.n_ramps_controlled
        );
    }
    println!(
        "\n{}",
        std::fs::read_to_string(&summary.written[0]).expect("comparison.csv")
    );
    Ok(())
}
