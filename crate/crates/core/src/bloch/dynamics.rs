use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

use super::hamiltonian::{hamiltonian, Detunings, Drive};
use super::relaxation::{DecayConstants, RelaxationMode, RelaxationRates};
use super::state::{symmetrized, DensityMatrix};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Reference steps per fastest oscillation used by [`step_rk4`]'s guard.
pub const GUARD_STEPS_PER_CYCLE: f64 = 50.0;

/// Highest frequency (Hz) the RK4 guard considers for a drive/detuning pair.
pub fn guard_frequency(drive: &Drive, det: &Detunings) -> f64 {
    [
        drive.omega_a,
        drive.omega_b,
        det.delta_opt.abs(),
        det.delta_spin.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// `dρ/dt = −i[H/ħ, ρ]` plus relaxation.
pub fn master_rhs(
    rho: &DensityMatrix,
    drive: &Drive,
    det: &Detunings,
    rates: &RelaxationRates,
    mode: RelaxationMode,
) -> Result<DensityMatrix> {
    drive.check()?;
    det.check()?;
    rates.validate()?;
    let h = hamiltonian(drive, det);
    Ok(DensityMatrix(rhs(&rho.0, &h, &rates.constants(), mode)))
}

pub(crate) fn rhs(
    rho: &Matrix3<Complex64>,
    h: &Matrix3<Complex64>,
    k: &DecayConstants,
    mode: RelaxationMode,
) -> Matrix3<Complex64> {
    let mut d = (h * rho - rho * h) * (-I);
    match mode {
        RelaxationMode::TracePreserving => {
            let p1 = rho[(0, 0)];
            let p2 = rho[(1, 1)];
            let p3 = rho[(2, 2)];
            d[(0, 0)] += p3 * k.pop_31 + (p2 - p1) * k.pop_12;
            d[(1, 1)] += p3 * k.pop_32 + (p1 - p2) * k.pop_12;
            d[(2, 2)] -= p3 * k.excited();
            let decay = [(0, 1, k.spin_total()), (0, 2, k.coh_13), (1, 2, k.coh_23)];
            for (i, j, r) in decay {
                d[(i, j)] -= rho[(i, j)] * r;
                d[(j, i)] -= rho[(j, i)] * r;
            }
        }
        RelaxationMode::Literal => {
            let g = k.literal_diagonal();
            for i in 0..3 {
                for j in 0..3 {
                    d[(i, j)] -= rho[(i, j)] * (0.5 * (g[i] + g[j]));
                }
            }
            // effective spin dephasing is not part of Γ; applied on top
            d[(0, 1)] -= rho[(0, 1)] * k.spin_eff;
            d[(1, 0)] -= rho[(1, 0)] * k.spin_eff;
        }
    }
    d
}

/// One classical fourth-order Runge–Kutta step of [`master_rhs`].
///
/// Rejects `dt` above `1/(50·f)` where `f` is the largest Rabi frequency or
/// detuning magnitude.
pub fn step_rk4(
    rho: &DensityMatrix,
    drive: &Drive,
    det: &Detunings,
    rates: &RelaxationRates,
    mode: RelaxationMode,
    dt: f64,
) -> Result<DensityMatrix> {
    drive.check()?;
    det.check()?;
    rates.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let f = guard_frequency(drive, det);
    if f > 0.0 {
        let limit = 1.0 / (GUARD_STEPS_PER_CYCLE * f);
        if dt > limit {
            return Err(Error::StepSize { dt, limit });
        }
    }
    let h = hamiltonian(drive, det);
    Ok(DensityMatrix(rk4(&rho.0, &h, &rates.constants(), mode, dt)))
}

pub(crate) fn rk4(
    rho: &Matrix3<Complex64>,
    h: &Matrix3<Complex64>,
    k: &DecayConstants,
    mode: RelaxationMode,
    dt: f64,
) -> Matrix3<Complex64> {
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let k1 = rhs(rho, h, k, mode);
    let k2 = rhs(&(rho + k1 * half), h, k, mode);
    let k3 = rhs(&(rho + k2 * half), h, k, mode);
    let k4 = rhs(&(rho + k3 * full), h, k, mode);
    let two = Complex64::new(2.0, 0.0);
    let next = rho + (k1 + k2 * two + k3 * two + k4) * Complex64::new(dt / 6.0, 0.0);
    symmetrized(&next)
}

/// Exact evolution over `dt` with no drive.
pub fn propagate_free(
    rho: &DensityMatrix,
    drive: &Drive,
    det: &Detunings,
    rates: &RelaxationRates,
    mode: RelaxationMode,
    dt: f64,
) -> Result<DensityMatrix> {
    if !drive.is_off() {
        return Err(Error::invalid(
            "free propagation requested while a pulse is active",
        ));
    }
    det.check()?;
    rates.validate()?;
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be non-negative, got {dt}")));
    }
    Ok(DensityMatrix(free(&rho.0, det, &rates.constants(), mode, dt)))
}

/// `(1 − e^{−x})/x`, continuous through `x = 0`.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

pub(crate) fn free(
    rho: &Matrix3<Complex64>,
    det: &Detunings,
    k: &DecayConstants,
    mode: RelaxationMode,
    dt: f64,
) -> Matrix3<Complex64> {
    let w13 = 2.0 * PI * det.delta_opt;
    let w23 = 2.0 * PI * (det.delta_opt - det.delta_spin);
    let w12 = 2.0 * PI * det.delta_spin;

    let (pops, c12, c13, c23) = match mode {
        RelaxationMode::TracePreserving => {
            let p1 = rho[(0, 0)].re;
            let p2 = rho[(1, 1)].re;
            let p3 = rho[(2, 2)].re;
            let g3 = k.excited();
            let kx = 2.0 * k.pop_12;
            let left = (-g3 * dt).exp();
            let sum = p1 + p2 + p3 * (1.0 - left);
            // ∫₀ᵗ e^{−2Γ₁₂(t−s)} e^{−Γ₃s} ds
            let mixed = (-kx * dt).exp() * dt * phi1((g3 - kx) * dt);
            let diff = (p1 - p2) * (-kx * dt).exp() + (k.pop_31 - k.pop_32) * p3 * mixed;
            (
                [0.5 * (sum + diff), 0.5 * (sum - diff), p3 * left],
                k.spin_total(),
                k.coh_13,
                k.coh_23,
            )
        }
        RelaxationMode::Literal => {
            let g = k.literal_diagonal();
            let pops = [0, 1, 2].map(|i| rho[(i, i)].re * (-g[i] * dt).exp());
            (
                pops,
                0.5 * (g[0] + g[1]) + k.spin_eff,
                0.5 * (g[0] + g[2]),
                0.5 * (g[1] + g[2]),
            )
        }
    };

    let rot = |w: f64, r: f64| (Complex64::new(-r, w) * dt).exp();
    let z13 = rho[(0, 2)] * rot(w13, c13);
    let z23 = rho[(1, 2)] * rot(w23, c23);
    let z12 = rho[(0, 1)] * rot(w12, c12);
    let re = |x: f64| Complex64::new(x, 0.0);
    Matrix3::new(
        re(pops[0]),
        z12,
        z13,
        z12.conj(),
        re(pops[1]),
        z23,
        z13.conj(),
        z23.conj(),
        re(pops[2]),
    )
}
