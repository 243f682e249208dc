use serde::{Deserialize, Serialize};

use crate::ensemble::Signal;
use crate::error::{Error, Result};

/// Peak of `|P(t)|` inside a detection window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoMeasurement {
    pub t_peak: f64,
    pub amplitude: f64,
    pub fwhm: f64,
    pub window: (f64, f64),
    /// The window is identically zero.
    pub no_echo: bool,
    /// A half-height crossing was not found inside the window.
    pub fwhm_truncated: bool,
}

/// Vertex of the parabola through three points with distinct abscissae.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (d1, d2) = (x[0] - x[1], x[2] - x[1]);
    let (e1, e2) = (y[0] - y[1], y[2] - y[1]);
    // y − y1 = a·s² + b·s with s = x − x1
    let det = d1 * d2 * (d1 - d2);
    if det == 0.0 {
        return None;
    }
    let a = (e1 * d2 - e2 * d1) / det;
    let b = (e2 * d1 * d1 - e1 * d2 * d2) / det;
    if !(a < 0.0) {
        return None;
    }
    let s = -b / (2.0 * a);
    if s < d1 || s > d2 {
        return None;
    }
    Some((x[1] + s, y[1] - b * b / (4.0 * a)))
}

pub fn detect_echo(signal: &Signal, window: (f64, f64)) -> Result<EchoMeasurement> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("bad echo window ({lo:e}, {hi:e})")));
    }
    let (Some(&first), Some(&last)) = (signal.times.first(), signal.times.last()) else {
        return Err(Error::invalid("empty signal"));
    };
    if lo < first || hi > last {
        return Err(Error::invalid(format!(
            "echo window ({lo:e}, {hi:e}) outside the signal ({first:e}, {last:e})"
        )));
    }
    let idx: Vec<usize> = (0..signal.len())
        .filter(|&i| signal.times[i] >= lo && signal.times[i] <= hi)
        .collect();
    if idx.is_empty() {
        return Err(Error::invalid("no samples inside the echo window"));
    }
    let mag = |i: usize| signal.polarization[i].norm();
    let peak = idx
        .iter()
        .copied()
        .max_by(|&a, &b| mag(a).total_cmp(&mag(b)))
        .expect("non-empty");
    let peak_mag = mag(peak);
    if peak_mag == 0.0 {
        return Ok(EchoMeasurement {
            t_peak: 0.5 * (lo + hi),
            amplitude: 0.0,
            fwhm: 0.0,
            window,
            no_echo: true,
            fwhm_truncated: false,
        });
    }

    let (i0, i1) = (idx[0], idx[idx.len() - 1]);
    let (mut t_peak, mut amplitude) = (signal.times[peak], peak_mag);
    if peak > i0 && peak < i1 {
        let x = [peak - 1, peak, peak + 1].map(|i| signal.times[i]);
        let y = [peak - 1, peak, peak + 1].map(mag);
        if let Some((t, a)) = parabola_vertex(x, y) {
            t_peak = t;
            amplitude = a.max(peak_mag);
        }
    }

    let half = 0.5 * peak_mag;
    let cross = |a: usize, b: usize| {
        let (ta, tb, ya, yb) = (signal.times[a], signal.times[b], mag(a), mag(b));
        ta + (half - ya) * (tb - ta) / (yb - ya)
    };
    let mut truncated = false;
    let mut left = signal.times[i0];
    match (i0..peak).rev().find(|&i| mag(i) < half) {
        Some(i) => left = cross(i, i + 1),
        None => truncated = true,
    }
    let mut right = signal.times[i1];
    match (peak + 1..=i1).find(|&i| mag(i) < half) {
        Some(i) => right = cross(i - 1, i),
        None => truncated = true,
    }

    Ok(EchoMeasurement {
        t_peak: t_peak.clamp(lo, hi),
        amplitude,
        fwhm: right - left,
        window,
        no_echo: false,
        fwhm_truncated: truncated,
    })
}
