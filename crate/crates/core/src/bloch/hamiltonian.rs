use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optical drive applied to one atom. Rabi frequencies are cyclic (Hz); a
/// channel that is off carries a zero Rabi frequency.
///
/// Channel A couples |1⟩↔|3⟩, channel B couples |2⟩↔|3⟩.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub omega_a: f64,
    pub omega_b: f64,
    pub phase_a: f64,
    pub phase_b: f64,
}

impl Drive {
    pub const OFF: Drive = Drive {
        omega_a: 0.0,
        omega_b: 0.0,
        phase_a: 0.0,
        phase_b: 0.0,
    };

    pub fn channel_a(omega: f64, phase: f64) -> Self {
        Drive {
            omega_a: omega,
            phase_a: phase,
            ..Drive::OFF
        }
    }

    pub fn channel_b(omega: f64, phase: f64) -> Self {
        Drive {
            omega_b: omega,
            phase_b: phase,
            ..Drive::OFF
        }
    }

    pub fn is_off(&self) -> bool {
        self.omega_a == 0.0 && self.omega_b == 0.0
    }

    pub(crate) fn check(&self) -> Result<()> {
        let finite = [self.omega_a, self.omega_b, self.phase_a, self.phase_b]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid(format!("non-finite drive {self:?}")));
        }
        if self.omega_a < 0.0 || self.omega_b < 0.0 {
            return Err(Error::invalid(format!(
                "Rabi frequencies must be non-negative, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Static detunings of one ensemble member (cyclic, Hz).
///
/// `delta_opt` shifts |3⟩ relative to both ground states; `delta_spin`
/// shifts |2⟩ relative to |1⟩.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Detunings {
    pub delta_opt: f64,
    pub delta_spin: f64,
}

impl Detunings {
    pub fn optical(delta_opt: f64) -> Self {
        Detunings {
            delta_opt,
            delta_spin: 0.0,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !(self.delta_opt.is_finite() && self.delta_spin.is_finite()) {
            return Err(Error::invalid(format!("non-finite detunings {self:?}")));
        }
        Ok(())
    }
}

/// RWA Hamiltonian H/ħ in rad/s.
///
/// `H₁₃ = π·Ω_A·e^{iφ_A}`, `H₂₃ = π·Ω_B·e^{iφ_B}`, `H₂₂ = 2π·δ_spin`,
/// `H₃₃ = 2π·δ_opt`, with Hermitian lower triangle.
pub fn build_hamiltonian(drive: &Drive, det: &Detunings) -> Result<Matrix3<Complex64>> {
    drive.check()?;
    det.check()?;
    Ok(hamiltonian(drive, det))
}

pub(crate) fn hamiltonian(drive: &Drive, det: &Detunings) -> Matrix3<Complex64> {
    let h13 = Complex64::from_polar(PI * drive.omega_a, drive.phase_a);
    let h23 = Complex64::from_polar(PI * drive.omega_b, drive.phase_b);
    let zero = Complex64::new(0.0, 0.0);
    Matrix3::new(
        zero,
        zero,
        h13,
        zero,
        Complex64::new(2.0 * PI * det.delta_spin, 0.0),
        h23,
        h13.conj(),
        h23.conj(),
        Complex64::new(2.0 * PI * det.delta_opt, 0.0),
    )
}
