//! FMCW radar simulation and estimation.
//!
//! - [`config`]: radar parameters and derived resolutions and limits
//! - [`scene`]: beat-signal synthesis for targets, track clutter and noise
//! - [`dsp`]: range-doppler processing chain
//! - [`detect`]: max-energy tracking with exclusion zones and range gating
//! - [`eval`]: truth alignment and RMSE statistics
//! - [`io`], [`cli`]: frame logs, CSV/PGM/JSON exports and the `fmcw` binary

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod detect;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod io;
pub mod scene;

pub use config::{AdcMode, Axes, RadarConfig, SPEED_OF_LIGHT};
pub use detect::{DetectorOptions, TrackPoint};
pub use dsp::{process_frame, RangeDopplerMap, RangeDopplerProcessor};
pub use error::{Error, Result};
pub use eval::{AlignedPair, RmseReport, RunRmse};
pub use scene::{GroundTruthPoint, RawFrame, Samples, Scatterer, Scenario, Scene};
