//! Photon-echo protocols in an inhomogeneously broadened three-level Λ
//! ensemble.
//!
//! The crate simulates two-pulse, stimulated (three-pulse), optically locked
//! and phase-locked echoes, and provides the analysis used to read results
//! off the simulated signals: echo detection, decay fitting, spectral
//! gratings and Bloch-vector trajectories.
//!
//! ```no_run
//! use photon_echo::{engine, presets};
//!
//! let config = presets::load("fig2_locked").unwrap();
//! let run = engine::run(&config.run).unwrap();
//! let echo = engine::measure_echo(&config.run.sequence, &run.signal).unwrap();
//! println!("echo at {:.3} us, |P| = {:.4}", echo.t_peak * 1e6, echo.amplitude);
//! ```

// negated comparisons below are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bloch;
pub mod config;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod presets;
pub mod protocol;

pub use error::{Error, Result};
