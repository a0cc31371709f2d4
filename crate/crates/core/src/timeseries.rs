//! Uniformly sampled power profiles: CSV ingestion, resampling and alignment.
//!
//! Every trace in the simulator (PV, load, battery, grid) is a [`PowerSeries`]:
//! a start instant, a fixed step in whole seconds and a vector of finite watt
//! values. Timestamps are always UTC.

use std::fs::File;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single logged power reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub timestamp: DateTime<Utc>,
    pub power: f64,
}

/// Uniformly sampled power signal in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    start: DateTime<Utc>,
    step_s: u32,
    values: Vec<f64>,
}

impl PowerSeries {
    pub fn new(start: DateTime<Utc>, step_s: u32, values: Vec<f64>) -> Result<Self> {
        if step_s == 0 {
            return Err(Error::InvalidSeries("step must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidSeries("series must hold at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("value {i} is not finite")));
        }
        Ok(Self { start, step_s, values })
    }

    pub fn constant(start: DateTime<Utc>, step_s: u32, len: usize, value: f64) -> Result<Self> {
        Self::new(start, step_s, vec![value; len])
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn step_s(&self) -> u32 {
        self.step_s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a series holds at least one value.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(i as i64 * self.step_s as i64)
    }

    /// Timestamp of the last value.
    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp(self.values.len() - 1)
    }

    pub fn span_s(&self) -> i64 {
        (self.values.len() as i64 - 1) * self.step_s as i64
    }

    pub fn samples(&self) -> impl Iterator<Item = PowerSample> + '_ {
        self.values.iter().enumerate().map(|(i, &power)| PowerSample {
            timestamp: self.timestamp(i),
            power,
        })
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.start,
            self.step_s,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Trapezoidal integral in watt-hours.
    pub fn trapezoid_wh(&self) -> f64 {
        let dt_h = self.step_s as f64 / 3600.0;
        self.values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt_h).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PowerUnit {
    #[default]
    #[serde(rename = "W")]
    Watt,
    #[serde(rename = "kW")]
    Kilowatt,
}

impl PowerUnit {
    fn to_watts(self, v: f64) -> f64 {
        match self {
            PowerUnit::Watt => v,
            PowerUnit::Kilowatt => v * 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMethod {
    /// Zero-order hold: each output takes the most recent input value.
    #[default]
    Hold,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResamplePolicy {
    pub method: ResampleMethod,
    /// Largest spacing between consecutive input samples that may be bridged.
    pub gap_limit_s: u32,
}

impl ResamplePolicy {
    pub fn hold(gap_limit_s: u32) -> Self {
        Self {
            method: ResampleMethod::Hold,
            gap_limit_s,
        }
    }

    pub fn linear(gap_limit_s: u32) -> Self {
        Self {
            method: ResampleMethod::Linear,
            gap_limit_s,
        }
    }
}

fn parse_timestamp(field: &str) -> std::result::Result<DateTime<Utc>, String> {
    let field = field.trim();
    if let Ok(secs) = field.parse::<i64>() {
        return DateTime::from_timestamp(secs, 0).ok_or_else(|| format!("epoch {secs} out of range"));
    }
    let ts = match DateTime::parse_from_rfc3339(field) {
        Ok(ts) => ts.with_timezone(&Utc),
        // Offset-less ISO-8601 is read as UTC.
        Err(_) => NaiveDateTime::parse_from_str(field, "%Y-%m-%dT%H:%M:%S")
            .map_err(|e| format!("bad timestamp {field:?}: {e}"))?
            .and_utc(),
    };
    if ts.timestamp_subsec_nanos() != 0 {
        return Err(format!("sub-second timestamp {field:?}"));
    }
    Ok(ts)
}

/// Reads `(line, sample)` pairs from a CSV file.
///
/// With `column == None` the file has two columns, `timestamp,power`, and an
/// optional header. With `Some(name)` a header row is required and the power
/// is read from the named column.
pub fn load_power_samples(path: &Path, column: Option<&str>, unit: PowerUnit) -> Result<Vec<(u64, PowerSample)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let malformed = |line: u64, reason: String| Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason,
    };

    let mut power_col = 1usize;
    let mut out: Vec<(u64, PowerSample)> = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if first {
            first = false;
            let ts_field = record.get(0).unwrap_or_default();
            if let Some(name) = column {
                power_col = record
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| malformed(line, format!("header has no column {name:?}")))?;
                if record.get(0) != Some("timestamp") {
                    return Err(malformed(line, "first header column must be `timestamp`".into()));
                }
                continue;
            }
            if parse_timestamp(ts_field).is_err() {
                // header row
                continue;
            }
        }
        let ts_field = record
            .get(0)
            .ok_or_else(|| malformed(line, "missing timestamp".into()))?;
        let p_field = record
            .get(power_col)
            .ok_or_else(|| malformed(line, "missing power column".into()))?;
        let timestamp = parse_timestamp(ts_field).map_err(|e| malformed(line, e))?;
        let raw: f64 = p_field
            .parse()
            .map_err(|_| malformed(line, format!("bad power value {p_field:?}")))?;
        if !raw.is_finite() {
            return Err(malformed(line, format!("non-finite power value {p_field:?}")));
        }
        if let Some((_, prev)) = out.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::NonMonotonic {
                    path: path.to_path_buf(),
                    line,
                });
            }
        }
        out.push((
            line,
            PowerSample {
                timestamp,
                power: unit.to_watts(raw),
            },
        ));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    Ok(out)
}

fn samples_to_series(path: &Path, rows: Vec<(u64, PowerSample)>) -> Result<PowerSeries> {
    if rows.len() < 2 {
        return Err(Error::TooShort(format!(
            "{}: at least two rows are needed to infer the sampling step",
            path.display()
        )));
    }
    let step = (rows[1].1.timestamp - rows[0].1.timestamp).num_seconds();
    let step_s = u32::try_from(step)
        .map_err(|_| Error::InvalidSeries(format!("{}: step {step} s out of range", path.display())))?;
    for w in rows.windows(2) {
        if (w[1].1.timestamp - w[0].1.timestamp).num_seconds() != step {
            return Err(Error::IrregularStep {
                path: path.to_path_buf(),
                line: w[1].0,
                step_s,
            });
        }
    }
    let start = rows[0].1.timestamp;
    PowerSeries::new(start, step_s, rows.into_iter().map(|(_, s)| s.power).collect())
}

/// Loads a two-column `timestamp,power` CSV into a uniform series.
///
/// The step is inferred from the first two rows; every later row must keep
/// that spacing. Timestamps are ISO-8601 UTC or integer epoch seconds.
pub fn load_power_csv(path: impl AsRef<Path>, unit: PowerUnit) -> Result<PowerSeries> {
    let path = path.as_ref();
    samples_to_series(path, load_power_samples(path, None, unit)?)
}

/// Loads one named column of a headed CSV whose first column is `timestamp`.
pub fn load_power_csv_column(path: impl AsRef<Path>, column: &str, unit: PowerUnit) -> Result<PowerSeries> {
    let path = path.as_ref();
    samples_to_series(path, load_power_samples(path, Some(column), unit)?)
}

/// Puts irregular samples on a uniform grid starting at the first sample.
pub fn regularize(samples: &[PowerSample], step_s: u32, policy: ResamplePolicy) -> Result<PowerSeries> {
    check_policy(step_s, policy)?;
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidSeries("no samples".into()))?;
    for w in samples.windows(2) {
        let gap = (w[1].timestamp - w[0].timestamp).num_seconds();
        if gap <= 0 {
            return Err(Error::InvalidSeries("timestamps must strictly increase".into()));
        }
        if gap > policy.gap_limit_s as i64 {
            return Err(Error::Gap {
                at: w[0].timestamp,
                gap_s: gap,
                limit_s: policy.gap_limit_s,
            });
        }
    }
    let last = samples[samples.len() - 1].timestamp;
    let n = ((last - first.timestamp).num_seconds() / step_s as i64) as usize + 1;

    let mut values = Vec::with_capacity(n);
    let mut j = 0usize;
    for i in 0..n {
        let t = first.timestamp + Duration::seconds(i as i64 * step_s as i64);
        while j + 1 < samples.len() && samples[j + 1].timestamp <= t {
            j += 1;
        }
        let a = samples[j];
        let v = match (policy.method, samples.get(j + 1)) {
            (ResampleMethod::Linear, Some(b)) if a.timestamp != t => {
                let span = (b.timestamp - a.timestamp).num_seconds() as f64;
                let off = (t - a.timestamp).num_seconds() as f64;
                a.power + (b.power - a.power) * off / span
            }
            _ => a.power,
        };
        values.push(v);
    }
    PowerSeries::new(first.timestamp, step_s, values)
}

fn check_policy(target_step_s: u32, policy: ResamplePolicy) -> Result<()> {
    if target_step_s == 0 {
        return Err(Error::InvalidParams("target step must be positive".into()));
    }
    if policy.gap_limit_s < target_step_s {
        return Err(Error::InvalidParams(format!(
            "gap limit {} s is shorter than the target step {target_step_s} s",
            policy.gap_limit_s
        )));
    }
    Ok(())
}

/// Resamples onto an arbitrary uniform grid of `len` points starting at `start`.
///
/// Every grid point must fall inside the input's time span.
pub fn resample_onto(
    series: &PowerSeries,
    start: DateTime<Utc>,
    step_s: u32,
    len: usize,
    policy: ResamplePolicy,
) -> Result<PowerSeries> {
    check_policy(step_s, policy)?;
    if series.len() > 1 && series.step_s > policy.gap_limit_s {
        return Err(Error::Gap {
            at: series.start,
            gap_s: series.step_s as i64,
            limit_s: policy.gap_limit_s,
        });
    }
    let src_step = series.step_s as i64;
    let span = series.span_s();
    let mut values = Vec::with_capacity(len);
    for i in 0..len {
        let t = start + Duration::seconds(i as i64 * step_s as i64);
        let off = (t - series.start).num_seconds();
        if off < 0 || off > span {
            return Err(Error::InvalidParams(format!(
                "grid point {t} lies outside the series span"
            )));
        }
        let idx = (off / src_step) as usize;
        let rem = off % src_step;
        let v = if rem == 0 {
            series.values[idx]
        } else {
            match policy.method {
                ResampleMethod::Hold => series.values[idx],
                ResampleMethod::Linear => {
                    let (a, b) = (series.values[idx], series.values[idx + 1]);
                    a + (b - a) * rem as f64 / src_step as f64
                }
            }
        };
        values.push(v);
    }
    PowerSeries::new(start, step_s, values)
}

/// Resamples a series to `target_step_s`, covering the same span.
pub fn resample(series: &PowerSeries, target_step_s: u32, policy: ResamplePolicy) -> Result<PowerSeries> {
    check_policy(target_step_s, policy)?;
    let len = (series.span_s() / target_step_s as i64) as usize + 1;
    resample_onto(series, series.start, target_step_s, len, policy)
}

/// Brings two series onto one grid: the overlap of their spans at the finer step.
pub fn align(a: &PowerSeries, b: &PowerSeries) -> Result<(PowerSeries, PowerSeries)> {
    align_with(a, b, ResampleMethod::Hold)
}

pub fn align_with(a: &PowerSeries, b: &PowerSeries, method: ResampleMethod) -> Result<(PowerSeries, PowerSeries)> {
    let start = a.start.max(b.start);
    let end = a.end().min(b.end());
    if start > end {
        return Err(Error::NoOverlap);
    }
    let step_s = a.step_s.min(b.step_s);
    let len = ((end - start).num_seconds() / step_s as i64) as usize + 1;
    let policy = ResamplePolicy {
        method,
        gap_limit_s: a.step_s.max(b.step_s),
    };
    Ok((
        resample_onto(a, start, step_s, len, policy)?,
        resample_onto(b, start, step_s, len, policy)?,
    ))
}
