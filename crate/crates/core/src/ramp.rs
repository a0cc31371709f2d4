//! Ramp-rate arithmetic and the moving-average battery command.
//!
//! Two ramp measurements live here and they are deliberately distinct:
//!
//! * [`ramp_histogram`] looks at raw PV with one-minute differences, an
//!   offline statistic over whole datasets.
//! * [`RampDetector`] is what the EMS runs every tick. It averages PV over the
//!   moving-average window and takes the tick-to-tick slope of that average,
//!   expressed in %/min of nameplate.
//!
//! A ramp *event* is a maximal run of consecutive violating ticks that share a
//! sign. Counting events rather than ticks keeps a single cloud edge from
//! weighing more just because a longer window stretches it over more ticks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::PowerSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampConfig {
    /// PV nameplate capacity, W.
    pub nameplate_w: f64,
    /// Ramp limit in percent of nameplate per minute.
    pub limit_pct_per_min: f64,
    /// Moving-average window, s.
    pub window_s: u32,
    /// Control cycle, s.
    pub tick_s: u32,
}

impl Default for RampConfig {
    fn default() -> Self {
        Self {
            nameplate_w: 6_740.0,
            limit_pct_per_min: 10.0,
            window_s: 20,
            tick_s: 2,
        }
    }
}

impl RampConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(format!("ramp: {m}")));
        if !(self.nameplate_w > 0.0 && self.nameplate_w.is_finite()) {
            return bad("nameplate_w must be positive".into());
        }
        if self.limit_pct_per_min.is_nan() || self.limit_pct_per_min <= 0.0 {
            return bad("limit_pct_per_min must be positive".into());
        }
        if self.tick_s == 0 || self.window_s == 0 || !self.window_s.is_multiple_of(self.tick_s) {
            return bad(format!(
                "window_s ({}) must be a positive multiple of tick_s ({})",
                self.window_s, self.tick_s
            ));
        }
        Ok(())
    }

    /// Number of samples in the moving-average window.
    pub fn window_len(&self) -> usize {
        (self.window_s / self.tick_s) as usize
    }

    pub fn tick_min(&self) -> f64 {
        self.tick_s as f64 / 60.0
    }
}

/// Ramp rate in % of nameplate per minute between two readings `dt_min` apart.
pub fn ramp_rate(p_now: f64, p_prev: f64, cfg: &RampConfig, dt_min: f64) -> f64 {
    (p_now - p_prev) / cfg.nameplate_w / dt_min * 100.0
}

/// True when `|rr|` reaches the configured limit.
pub fn violates(rr: f64, cfg: &RampConfig) -> bool {
    rr.abs() >= cfg.limit_pct_per_min
}

/// Outcome of the moving-average command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaCommand {
    /// Fewer samples than the window needs; no command is issued.
    WarmingUp,
    /// Charge-positive battery power, W.
    Ready(f64),
}

impl MaCommand {
    pub fn power(self) -> f64 {
        match self {
            MaCommand::WarmingUp => 0.0,
            MaCommand::Ready(p) => p,
        }
    }

    pub fn is_warming_up(self) -> bool {
        matches!(self, MaCommand::WarmingUp)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Battery command that pulls the PV output onto its moving average.
///
/// `window` holds the most recent samples, current one last. Only the last
/// `cfg.window_len()` samples are used. The result is `p_now - mean`, so the
/// battery charges when PV sits above its average and discharges below it.
pub fn ma_command(window: &[f64], p_now: f64, cfg: &RampConfig) -> MaCommand {
    let n = cfg.window_len();
    if window.len() < n {
        return MaCommand::WarmingUp;
    }
    MaCommand::Ready(p_now - mean(&window[window.len() - n..]))
}

/// Residual ramp left on the grid-side PV output when the battery delivers
/// `actual` instead of the moving-average command `command`, measured against
/// the average over one tick.
pub fn residual_rate(command: f64, actual: f64, cfg: &RampConfig) -> f64 {
    ramp_rate(command, actual, cfg, cfg.tick_min())
}

/// Rolling PV window owned by the control loop.
#[derive(Debug, Clone)]
pub struct PvWindow {
    buf: VecDeque<f64>,
    len: usize,
}

impl PvWindow {
    pub fn new(len: usize) -> Self {
        Self {
            buf: VecDeque::with_capacity(len + 1),
            len,
        }
    }

    pub fn push(&mut self, p: f64) {
        if self.buf.len() == self.len {
            self.buf.pop_front();
        }
        self.buf.push_back(p);
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.len
    }

    pub fn as_slice(&mut self) -> &[f64] {
        self.buf.make_contiguous()
    }

    pub fn mean(&mut self) -> Option<f64> {
        self.is_full().then(|| mean(self.buf.make_contiguous()))
    }
}

/// One tick of ramp monitoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampObservation {
    /// Moving average including the current sample, once the window is full.
    pub average: Option<f64>,
    /// Slope of the averaged PV, %/min. Zero while warming up.
    pub rr: f64,
    pub violated: bool,
    pub command: MaCommand,
}

/// Streams PV samples through the moving-average window and flags ramps.
#[derive(Debug, Clone)]
pub struct RampDetector {
    cfg: RampConfig,
    window: PvWindow,
    prev_average: Option<f64>,
}

impl RampDetector {
    pub fn new(cfg: RampConfig) -> Self {
        Self {
            cfg,
            window: PvWindow::new(cfg.window_len()),
            prev_average: None,
        }
    }

    pub fn config(&self) -> &RampConfig {
        &self.cfg
    }

    pub fn observe(&mut self, p_pv: f64) -> RampObservation {
        self.window.push(p_pv);
        let command = ma_command(self.window.as_slice(), p_pv, &self.cfg);
        let average = self.window.mean();
        let rr = match (average, self.prev_average) {
            (Some(now), Some(prev)) => ramp_rate(now, prev, &self.cfg, self.cfg.tick_min()),
            _ => 0.0,
        };
        if average.is_some() {
            self.prev_average = average;
        }
        let violated = self.prev_average.is_some() && average.is_some() && violates(rr, &self.cfg);
        RampObservation {
            average,
            rr,
            violated,
            command,
        }
    }
}

/// Groups violating ticks into ramp events and tallies how many were controlled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RampEventCounter {
    current: Option<(bool, bool)>, // (rising, every tick controlled so far)
    original: u64,
    controlled: u64,
}

impl RampEventCounter {
    pub fn observe(&mut self, violated: bool, rr: f64, controlled: bool) {
        if !violated {
            self.close();
            return;
        }
        let rising = rr > 0.0;
        match self.current {
            Some((dir, ok)) if dir == rising => self.current = Some((dir, ok && controlled)),
            _ => {
                self.close();
                self.current = Some((rising, controlled));
            }
        }
    }

    fn close(&mut self) {
        if let Some((_, ok)) = self.current.take() {
            self.original += 1;
            if ok {
                self.controlled += 1;
            }
        }
    }

    /// Returns `(events, controlled events)`.
    pub fn finish(mut self) -> (u64, u64) {
        self.close();
        (self.original, self.controlled)
    }
}

/// Distribution of one-minute ramps over a PV series.
///
/// The buckets are cumulative, not a partition: `>= 5` includes everything in
/// `>= 10`, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RampHistogram {
    pub below_5: u64,
    pub at_least_5: u64,
    pub at_least_10: u64,
    pub above_10: u64,
    pub at_least_50: u64,
    pub total_minutes: u64,
}

impl RampHistogram {
    pub fn buckets(&self) -> [(&'static str, u64); 5] {
        [
            ("<5", self.below_5),
            (">=5", self.at_least_5),
            (">=10", self.at_least_10),
            (">10", self.above_10),
            (">=50", self.at_least_50),
        ]
    }

    pub fn percent(&self, count: u64) -> f64 {
        if self.total_minutes == 0 {
            0.0
        } else {
            count as f64 / self.total_minutes as f64 * 100.0
        }
    }
}

/// Classifies every one-minute difference of `series` by absolute ramp rate.
pub fn ramp_histogram(series: &PowerSeries, cfg: &RampConfig) -> Result<RampHistogram> {
    let step = series.step_s();
    if step > 60 || 60 % step != 0 {
        return Err(Error::InvalidParams(format!(
            "series step {step} s does not divide one minute"
        )));
    }
    let per_min = (60 / step) as usize;
    let values = series.values();
    let minutes = (values.len() - 1) / per_min;
    if minutes == 0 {
        return Err(Error::TooShort("ramp histogram needs at least one minute".into()));
    }
    let mut h = RampHistogram {
        total_minutes: minutes as u64,
        ..Default::default()
    };
    for k in 1..=minutes {
        let rr = ramp_rate(values[k * per_min], values[(k - 1) * per_min], cfg, 1.0).abs();
        if rr < 5.0 {
            h.below_5 += 1;
        }
        if rr >= 5.0 {
            h.at_least_5 += 1;
        }
        if rr >= 10.0 {
            h.at_least_10 += 1;
        }
        if rr > 10.0 {
            h.above_10 += 1;
        }
        if rr >= 50.0 {
            h.at_least_50 += 1;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub window_s: u32,
    pub detected_ramps: u64,
    pub controlled_ramps: u64,
}

/// Replays the moving-average control with an unconstrained battery for each
/// window and counts the ramp events it detects and neutralises.
pub fn window_sweep(series: &PowerSeries, cfg: &RampConfig, windows: &[u32]) -> Result<Vec<SweepRow>> {
    windows
        .iter()
        .map(|&window_s| {
            let cfg = RampConfig {
                window_s,
                tick_s: series.step_s(),
                ..*cfg
            };
            cfg.validate()?;
            let mut detector = RampDetector::new(cfg);
            let mut counter = RampEventCounter::default();
            for &p in series.values() {
                let obs = detector.observe(p);
                let command = obs.command.power();
                // ideal battery: delivers exactly what it is asked
                let actual = command;
                let controlled = !violates(residual_rate(command, actual, &cfg), &cfg);
                counter.observe(obs.violated, obs.rr, controlled);
            }
            let (detected_ramps, controlled_ramps) = counter.finish();
            Ok(SweepRow {
                window_s,
                detected_ramps,
                controlled_ramps,
            })
        })
        .collect()
}
