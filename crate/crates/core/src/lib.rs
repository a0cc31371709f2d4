//! Deterministic simulation of a PV + vanadium redox flow battery microgrid.
//!
//! Three energy management strategies are available through
//! [`ems::StrategyKind`]:
//!
//! * self-consumption maximisation,
//! * the same plus moving-average ramp-rate control,
//! * ramp-rate control plus night charging when tomorrow's weather-type
//!   forecast is cloudy.
//!
//! Traces are evaluated with the indicators in [`kpi`]. The `examples/`
//! directory has one runnable program per capability; `vrfb-ems` is the
//! command-line front end over [`run`].

pub mod battery;
pub mod config;
pub mod ems;
pub mod error;
pub mod fixtures;
pub mod forecast;
pub mod kpi;
pub mod output;
pub mod ramp;
pub mod run;
pub mod timeseries;

pub use error::{Error, Result};
