//! Reading results off simulated signals: echo peaks, decay fits, spectral
//! gratings and Bloch vectors.

mod bloch;
mod echo;
mod fit;
mod grating;

pub use bloch::{bloch_point, bloch_trajectory, BlochPoint, Subspace, LOW_POPULATION};
pub use echo::{detect_echo, EchoMeasurement};
pub use fit::{fit_decay, DecayFit, DecayModel, TAU_RANGE, TAU_STARTS};
pub use grating::{grating_period, snapshot_grating, GratingMeasurement, FLAT_THRESHOLD};
