//! Discretized inhomogeneous broadening and aggregation of per-atom traces
//! into macroscopic signals.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::DensityMatrix;
use crate::error::{Error, Result};

/// `FWHM = 2·√(2 ln 2)·σ`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Half-width of the explicit spin grid in units of σ.
pub const SPIN_GRID_HALF_WIDTH_SIGMA: f64 = 2.5;

/// Treatment of the spin (|1⟩–|2⟩) inhomogeneous broadening Δ₁₂.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpinBroadening {
    #[default]
    Off,
    /// Δ₁₂ folded into an additional ρ₁₂ decay constant γ₁₂^eff (kHz).
    Effective {
        gamma_12_eff: f64,
        /// Apply γ₁₂^eff only between the start of B1 and the end of B2.
        gated: bool,
    },
    /// Δ₁₂ resolved on its own Gaussian grid (tensor product with the
    /// optical grid).
    Explicit { spin_fwhm: f64, spin_segments: usize },
}

impl SpinBroadening {
    /// Effective treatment with γ₁₂^eff equal to Δ₁₂ (`spin_fwhm` in Hz)
    /// quoted in kHz.
    pub fn effective_from_width(spin_fwhm: f64) -> Self {
        SpinBroadening::Effective {
            gamma_12_eff: spin_fwhm * 1e-3,
            gated: false,
        }
    }

    pub fn gamma_12_eff(&self) -> f64 {
        match self {
            SpinBroadening::Effective { gamma_12_eff, .. } => *gamma_12_eff,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Optical Gaussian FWHM (Hz).
    pub optical_fwhm: f64,
    /// Total width of the discretized optical region (Hz).
    pub optical_span: f64,
    pub optical_segments: usize,
    pub spin: SpinBroadening,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            optical_fwhm: 680e3,
            optical_span: 1.6e6,
            optical_segments: 161,
            spin: SpinBroadening::Off,
        }
    }
}

impl EnsembleSpec {
    /// A single homogeneous atom at zero detuning.
    pub fn single_atom() -> Self {
        EnsembleSpec {
            optical_segments: 1,
            ..EnsembleSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.optical_fwhm > 0.0 && self.optical_fwhm.is_finite()) {
            return Err(Error::invalid("optical fwhm must be positive"));
        }
        if !(self.optical_span > 0.0 && self.optical_span.is_finite()) {
            return Err(Error::invalid("optical span must be positive"));
        }
        check_odd("optical_segments", self.optical_segments)?;
        match self.spin {
            SpinBroadening::Off => {}
            SpinBroadening::Effective { gamma_12_eff, .. } => {
                if !(gamma_12_eff >= 0.0 && gamma_12_eff.is_finite()) {
                    return Err(Error::invalid("gamma_12_eff must be non-negative"));
                }
            }
            SpinBroadening::Explicit {
                spin_fwhm,
                spin_segments,
            } => {
                if !(spin_fwhm > 0.0 && spin_fwhm.is_finite()) {
                    return Err(Error::invalid("spin fwhm must be positive"));
                }
                check_odd("spin_segments", spin_segments)?;
            }
        }
        Ok(())
    }
}

fn check_odd(name: &str, n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "{name} must be odd so that zero detuning is on the grid, got {n}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub delta_opt: f64,
    pub delta_spin: f64,
    pub weight: f64,
}

/// Weighted detuning samples ordered by ascending optical detuning, then
/// ascending spin detuning.
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningGrid {
    pub points: Vec<GridPoint>,
    /// Number of spin sub-points per optical detuning (1 unless explicit).
    pub spin_segments: usize,
}

impl DetuningGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn optical_len(&self) -> usize {
        self.points.len() / self.spin_segments
    }

    /// Index of the grid point closest to the requested detunings.
    pub fn nearest(&self, delta_opt: f64, delta_spin: f64) -> usize {
        self.points
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a.delta_opt - delta_opt).hypot(a.delta_spin - delta_spin);
                let db = (b.delta_opt - delta_opt).hypot(b.delta_spin - delta_spin);
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Uniform grid over `[−span/2, span/2]` with Gaussian weights (unnormalized).
fn gaussian_axis(fwhm: f64, span: f64, segments: usize) -> Vec<(f64, f64)> {
    if segments == 1 {
        return vec![(0.0, 1.0)];
    }
    let sigma = fwhm / FWHM_PER_SIGMA;
    let half = (segments / 2) as i64;
    let step = span / (segments - 1) as f64;
    (-half..=half)
        .map(|k| {
            let delta = k as f64 * step;
            (delta, (-0.5 * (delta / sigma).powi(2)).exp())
        })
        .collect()
}

pub fn build_grid(spec: &EnsembleSpec) -> Result<DetuningGrid> {
    spec.validate()?;
    let optical = gaussian_axis(spec.optical_fwhm, spec.optical_span, spec.optical_segments);
    let spin = match spec.spin {
        SpinBroadening::Explicit {
            spin_fwhm,
            spin_segments,
        } => {
            let sigma = spin_fwhm / FWHM_PER_SIGMA;
            gaussian_axis(
                spin_fwhm,
                2.0 * SPIN_GRID_HALF_WIDTH_SIGMA * sigma,
                spin_segments,
            )
        }
        _ => vec![(0.0, 1.0)],
    };
    let mut points = Vec::with_capacity(optical.len() * spin.len());
    for &(delta_opt, w_opt) in &optical {
        for &(delta_spin, w_spin) in &spin {
            points.push(GridPoint {
                delta_opt,
                delta_spin,
                weight: w_opt * w_spin,
            });
        }
    }
    let total: f64 = points.iter().map(|p| p.weight).sum();
    for p in &mut points {
        p.weight /= total;
    }
    Ok(DetuningGrid {
        points,
        spin_segments: spin.len(),
    })
}

/// Recorded observables of one atom on a shared sample grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomTrace {
    pub times: Arc<[f64]>,
    pub rho13: Vec<Complex64>,
    pub populations: Vec<[f64; 3]>,
}

impl AtomTrace {
    pub fn with_capacity(times: Arc<[f64]>) -> Self {
        let n = times.len();
        AtomTrace {
            times,
            rho13: Vec::with_capacity(n),
            populations: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, rho: &DensityMatrix) {
        self.rho13.push(rho.rho13());
        self.populations.push(rho.populations());
    }
}

/// Ensemble-aggregated observables.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub times: Vec<f64>,
    /// `P(t) = Σ w·ρ₁₃`.
    pub polarization: Vec<Complex64>,
    /// `Σ w·Im ρ₁₃`.
    pub absorption: Vec<f64>,
    pub populations: Vec<[f64; 3]>,
}

impl Signal {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn magnitude(&self) -> impl Iterator<Item = f64> + '_ {
        self.polarization.iter().map(|p| p.norm())
    }
}

/// Sequential weighted sum of atom traces in the order they are added.
#[derive(Clone, Debug)]
pub struct SignalAccumulator {
    times: Arc<[f64]>,
    polarization: Vec<Complex64>,
    populations: Vec<[f64; 3]>,
}

impl SignalAccumulator {
    pub fn new(times: Arc<[f64]>) -> Self {
        let n = times.len();
        SignalAccumulator {
            times,
            polarization: vec![Complex64::new(0.0, 0.0); n],
            populations: vec![[0.0; 3]; n],
        }
    }

    pub fn add(&mut self, trace: &AtomTrace, weight: f64) -> Result<()> {
        let same_grid = Arc::ptr_eq(&trace.times, &self.times) || trace.times == self.times;
        if !same_grid
            || trace.rho13.len() != self.times.len()
            || trace.populations.len() != self.times.len()
        {
            return Err(Error::invalid("atom trace does not share the sample grid"));
        }
        for (acc, z) in self.polarization.iter_mut().zip(&trace.rho13) {
            *acc += z * weight;
        }
        for (acc, p) in self.populations.iter_mut().zip(&trace.populations) {
            for l in 0..3 {
                acc[l] += weight * p[l];
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Signal {
        let absorption = self.polarization.iter().map(|p| p.im).collect();
        Signal {
            times: self.times.to_vec(),
            polarization: self.polarization,
            absorption,
            populations: self.populations,
        }
    }
}

/// Weighted sum over `traces`, which must follow the grid order.
pub fn aggregate(traces: &[AtomTrace], grid: &DetuningGrid) -> Result<Signal> {
    if traces.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} traces for a grid of {} points",
            traces.len(),
            grid.len()
        )));
    }
    let times = traces
        .first()
        .map(|t| t.times.clone())
        .ok_or_else(|| Error::invalid("no traces to aggregate"))?;
    let mut acc = SignalAccumulator::new(times);
    for (trace, point) in traces.iter().zip(&grid.points) {
        acc.add(trace, point.weight)?;
    }
    Ok(acc.finish())
}

/// Per-optical-detuning slices of the ensemble state at one instant. With an
/// explicit spin grid each row is the weighted mean over the spin sub-grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSnapshot {
    pub t: f64,
    pub delta: Vec<f64>,
    pub im_rho13: Vec<f64>,
    pub rho33: Vec<f64>,
    pub rho11: Vec<f64>,
    pub rho22: Vec<f64>,
}

pub fn spectral_snapshot(
    t: f64,
    states: &[DensityMatrix],
    grid: &DetuningGrid,
) -> Result<SpectralSnapshot> {
    if states.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} states for a grid of {} points",
            states.len(),
            grid.len()
        )));
    }
    let rows = grid.optical_len();
    let mut snap = SpectralSnapshot {
        t,
        delta: Vec::with_capacity(rows),
        im_rho13: Vec::with_capacity(rows),
        rho33: Vec::with_capacity(rows),
        rho11: Vec::with_capacity(rows),
        rho22: Vec::with_capacity(rows),
    };
    let m = grid.spin_segments;
    for (points, block) in grid.points.chunks(m).zip(states.chunks(m)) {
        let w: f64 = points.iter().map(|p| p.weight).sum();
        let mean = |f: &dyn Fn(&DensityMatrix) -> f64| -> f64 {
            points
                .iter()
                .zip(block)
                .map(|(p, s)| p.weight * f(s))
                .sum::<f64>()
                / w
        };
        snap.delta.push(points[0].delta_opt);
        snap.im_rho13.push(mean(&|s| s.rho13().im));
        snap.rho33.push(mean(&|s| s.rho33()));
        snap.rho11.push(mean(&|s| s.rho11()));
        snap.rho22.push(mean(&|s| s.rho22()));
    }
    Ok(snap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_quoted_discretization() {
        let grid = build_grid(&EnsembleSpec::default()).unwrap();
        assert_eq!(grid.len(), 161);
        let first = grid.points.first().unwrap().delta_opt;
        let last = grid.points.last().unwrap().delta_opt;
        assert!((first + 800e3).abs() < 1e-6);
        assert!((last - 800e3).abs() < 1e-6);
        let step = grid.points[1].delta_opt - grid.points[0].delta_opt;
        assert!((step - 10e3).abs() < 1e-6);
        let total: f64 = grid.points.iter().map(|p| p.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_maximum_at_half_fwhm() {
        let grid = build_grid(&EnsembleSpec::default()).unwrap();
        let w0 = grid.points[80].weight;
        // 340 kHz is 34 steps from the centre
        assert!((grid.points[80 + 34].weight / w0 - 0.5).abs() < 1e-9);
        assert!((grid.points[80 - 34].weight / w0 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn grid_is_symmetric() {
        let grid = build_grid(&EnsembleSpec::default()).unwrap();
        let n = grid.len();
        for i in 0..n {
            let a = grid.points[i];
            let b = grid.points[n - 1 - i];
            assert!((a.delta_opt + b.delta_opt).abs() < 1e-6);
            assert!((a.weight - b.weight).abs() < 1e-15);
        }
    }

    #[test]
    fn explicit_spin_grid_is_a_tensor_product() {
        let spec = EnsembleSpec {
            spin: SpinBroadening::Explicit {
                spin_fwhm: 10e3,
                spin_segments: 21,
            },
            ..EnsembleSpec::default()
        };
        let grid = build_grid(&spec).unwrap();
        assert_eq!(grid.len(), 3381);
        assert_eq!(grid.optical_len(), 161);
        let total: f64 = grid.points.iter().map(|p| p.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let sigma = 10e3 / FWHM_PER_SIGMA;
        assert!((grid.points[20].delta_spin - 2.5 * sigma).abs() < 1e-6);
        assert!((grid.points[0].delta_spin + 2.5 * sigma).abs() < 1e-6);
        // ascending optical then spin
        assert!(grid.points[0].delta_opt < grid.points[21].delta_opt);
        assert!(grid.points[0].delta_spin < grid.points[1].delta_spin);
    }

    #[test]
    fn even_segments_rejected() {
        let spec = EnsembleSpec {
            optical_segments: 160,
            ..EnsembleSpec::default()
        };
        assert!(build_grid(&spec).is_err());
        let spec = EnsembleSpec {
            spin: SpinBroadening::Explicit {
                spin_fwhm: 10e3,
                spin_segments: 20,
            },
            ..EnsembleSpec::default()
        };
        assert!(build_grid(&spec).is_err());
    }

    #[test]
    fn mismatched_sample_grids_rejected() {
        let spec = EnsembleSpec {
            optical_segments: 3,
            ..EnsembleSpec::default()
        };
        let grid = build_grid(&spec).unwrap();
        let mut a = AtomTrace::with_capacity(vec![0.0, 1.0].into());
        a.push(&DensityMatrix::ground());
        a.push(&DensityMatrix::ground());
        let mut b = AtomTrace::with_capacity(vec![0.0, 2.0].into());
        b.push(&DensityMatrix::ground());
        b.push(&DensityMatrix::ground());
        assert!(aggregate(&[a.clone(), b, a], &grid).is_err());
    }

    #[test]
    fn identical_atoms_aggregate_to_the_single_trace() {
        let grid = build_grid(&EnsembleSpec::default()).unwrap();
        let rho = DensityMatrix::pure([
            Complex64::new(0.8, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -0.6),
        ])
        .unwrap();
        let mut trace = AtomTrace::with_capacity(vec![0.0].into());
        trace.push(&rho);
        let traces = vec![trace; grid.len()];
        let sig = aggregate(&traces, &grid).unwrap();
        assert!((sig.polarization[0] - rho.rho13()).norm() < 1e-14);
        assert!((sig.populations[0][2] - rho.rho33()).abs() < 1e-14);
    }

    #[test]
    fn snapshot_before_any_pulse_is_flat() {
        let grid = build_grid(&EnsembleSpec::default()).unwrap();
        let states = vec![DensityMatrix::ground(); grid.len()];
        let snap = spectral_snapshot(0.0, &states, &grid).unwrap();
        assert_eq!(snap.delta.len(), 161);
        assert!(snap.im_rho13.iter().all(|x| *x == 0.0));
        assert!(snap.rho33.iter().all(|x| *x == 0.0));
        assert!(snap.rho11.iter().all(|x| *x == 1.0));
    }
}
