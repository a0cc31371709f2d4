//! CSV and console emitters for traces, ramp analyses and KPI tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! column reloads bit-for-bit.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::ems::{DispatchRecord, StrategyKind};
use crate::error::{Error, Result};
use crate::kpi::{KpiReport, KPI_NAMES};
use crate::ramp::{RampHistogram, SweepRow};

pub const TRACE_HEADER: [&str; 11] = [
    "timestamp",
    "p_pv",
    "p_load",
    "p_batt_cmd",
    "p_batt_actual",
    "p_grid",
    "soc",
    "mode",
    "rr",
    "rr_violated",
    "rr_controlled",
];

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn ts(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn write_trace_csv(path: &Path, trace: &[DispatchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record([
            ts(r.timestamp),
            r.p_pv.to_string(),
            r.p_load.to_string(),
            r.p_batt_cmd.to_string(),
            r.p_batt_actual.to_string(),
            r.p_grid.to_string(),
            r.soc.to_string(),
            r.mode.as_str().to_string(),
            r.rr_pct_per_min.to_string(),
            r.rr_violated.to_string(),
            r.rr_controlled.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<DispatchRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let f = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad(format!("column {}", TRACE_HEADER[i])))
        };
        let b = |i: usize| -> Result<bool> {
            rec.get(i)
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad(format!("column {}", TRACE_HEADER[i])))
        };
        out.push(DispatchRecord {
            timestamp: rec
                .get(0)
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad("timestamp".into()))?,
            p_pv: f(1)?,
            p_load: f(2)?,
            p_batt_cmd: f(3)?,
            p_batt_actual: f(4)?,
            p_grid: f(5)?,
            soc: f(6)?,
            mode: rec.get(7).unwrap_or_default().parse()?,
            rr_pct_per_min: f(8)?,
            rr_violated: b(9)?,
            rr_controlled: b(10)?,
        });
    }
    Ok(out)
}

pub fn write_histogram_csv(path: &Path, h: &RampHistogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["bucket_pct_per_min", "minutes", "percent"])?;
    for (label, n) in h.buckets() {
        w.write_record([label.to_string(), n.to_string(), h.percent(n).to_string()])?;
    }
    w.write_record(["total".to_string(), h.total_minutes.to_string(), "100".to_string()])?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["window_s", "controlled_ramps"])?;
    for r in rows {
        w.write_record([r.window_s.to_string(), r.controlled_ramps.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "n/a".into())
}

/// One row per indicator, one column per strategy, values in percent.
pub fn write_comparison_csv(path: &Path, rows: &[(StrategyKind, KpiReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["kpi".to_string()];
    header.extend(rows.iter().map(|(k, _)| k.to_string()));
    w.write_record(&header)?;
    for (i, name) in KPI_NAMES.iter().enumerate() {
        let mut rec = vec![name.to_string()];
        rec.extend(rows.iter().map(|(_, r)| cell(r.entries()[i].1.percent())));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn comparison_table(rows: &[(StrategyKind, KpiReport)]) -> String {
    let mut s = format!("{:<5}", "KPI");
    for (k, _) in rows {
        let _ = write!(s, "{:>12}", k.to_string());
    }
    s.push('\n');
    for (i, name) in KPI_NAMES.iter().enumerate() {
        let _ = write!(s, "{name:<5}");
        for (_, r) in rows {
            let _ = write!(s, "{:>12}", cell(r.entries()[i].1.percent()));
        }
        s.push('\n');
    }
    s
}

pub fn kpi_summary(strategy: StrategyKind, report: &KpiReport) -> String {
    comparison_table(&[(strategy, report.clone())])
        + &format!(
            "ramps: {} detected, {} controlled{}\n",
            report.totals.n_ramps_original,
            report.totals.n_ramps_controlled,
            if report.no_violations { " (no violations)" } else { "" }
        )
}
