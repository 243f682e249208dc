use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ensemble::SpectralSnapshot;
use crate::error::{Error, Result};

/// Profiles whose largest deviation from their mean is below this are flat.
pub const FLAT_THRESHOLD: f64 = 1e-12;

/// Dominant modulation of a population profile over the detuning axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GratingMeasurement {
    /// Modulation period in Hz; `None` for a flat profile.
    pub period: Option<f64>,
    /// DFT bin of the spectral peak (0 when flat).
    pub peak_bin: usize,
    pub samples: usize,
    /// Detuning step of the profile (Hz).
    pub spacing: f64,
}

impl GratingMeasurement {
    pub fn no_grating(&self) -> bool {
        self.period.is_none()
    }

    /// Bin at which a grating written by pulses `separation` seconds apart
    /// appears: `separation·N·Δδ`.
    pub fn expected_bin(&self, separation: f64) -> f64 {
        separation * self.samples as f64 * self.spacing
    }
}

/// DFT peak of `profile` sampled on the uniform axis `delta`, mean removed.
pub fn grating_period(delta: &[f64], profile: &[f64]) -> Result<GratingMeasurement> {
    let n = delta.len();
    if n < 4 || profile.len() != n {
        return Err(Error::invalid(format!(
            "grating needs matching axes of at least 4 samples, got {} and {}",
            n,
            profile.len()
        )));
    }
    let spacing = (delta[n - 1] - delta[0]) / (n - 1) as f64;
    let uniform = spacing > 0.0
        && delta
            .windows(2)
            .all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing);
    if !uniform {
        return Err(Error::invalid("detuning axis must be uniform and increasing"));
    }
    let mean = profile.iter().sum::<f64>() / n as f64;
    let spread = profile
        .iter()
        .map(|p| (p - mean).abs())
        .fold(0.0, f64::max);
    if !(spread > FLAT_THRESHOLD) {
        return Ok(GratingMeasurement {
            period: None,
            peak_bin: 0,
            samples: n,
            spacing,
        });
    }
    let mut buf: Vec<Complex<f64>> = profile.iter().map(|&p| Complex::new(p - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak_bin = (1..=n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .expect("n ≥ 4");
    Ok(GratingMeasurement {
        period: Some(n as f64 * spacing / peak_bin as f64),
        peak_bin,
        samples: n,
        spacing,
    })
}

/// Grating of ρ₃₃(δ), falling back to ρ₁₁(δ) when the excited state is flat.
pub fn snapshot_grating(snap: &SpectralSnapshot) -> Result<GratingMeasurement> {
    let g = grating_period(&snap.delta, &snap.rho33)?;
    if g.no_grating() {
        return grating_period(&snap.delta, &snap.rho11);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn axis() -> Vec<f64> {
        (0..161).map(|k| -800e3 + 10e3 * k as f64).collect()
    }

    #[test]
    fn cosine_profile() {
        let d = axis();
        for sep in [2e-6, 5e-6, 10e-6] {
            let p: Vec<f64> = d.iter().map(|x| 0.5 + 0.5 * (2.0 * PI * x * sep).cos()).collect();
            let g = grating_period(&d, &p).unwrap();
            assert!((g.peak_bin as f64 - g.expected_bin(sep)).abs() <= 1.0, "{sep}");
        }
    }

    #[test]
    fn five_microsecond_period() {
        let d = axis();
        let p: Vec<f64> = d.iter().map(|x| (2.0 * PI * x * 5e-6).cos()).collect();
        let g = grating_period(&d, &p).unwrap();
        let period = g.period.unwrap();
        let bin = g.samples as f64 * g.spacing;
        // period within one bin of 200 kHz
        let k = bin / 200e3;
        assert!(period <= bin / (k - 1.0) && period >= bin / (k + 1.0));
    }

    #[test]
    fn flat_profile_flagged() {
        let d = axis();
        let g = grating_period(&d, &vec![0.25; d.len()]).unwrap();
        assert!(g.no_grating());
    }

    #[test]
    fn non_uniform_axis_rejected() {
        let mut d = axis();
        d[3] += 1.0;
        assert!(grating_period(&d, &vec![0.0; d.len()]).is_err());
    }
}
