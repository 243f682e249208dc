//! Full protocol runs over the detuning grid and parameter scans.
//!
//! Every atom is propagated over the same breakpoint timeline: pulse edges,
//! sample times and snapshot instants. Drive-free intervals use the closed
//! form propagator; driven intervals use sub-stepped RK4. Atoms run on a
//! bounded rayon pool and are folded into the [`Signal`] strictly in grid
//! order, so the result does not depend on the worker count.

use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{detect_echo, EchoMeasurement};
use crate::bloch::{
    free, hamiltonian, rk4_segment, segment_frequency, DecayConstants, DensityMatrix, Detunings,
    Drive, RelaxationMode, RelaxationRates, PULSE_STEPS_PER_CYCLE,
};
use crate::ensemble::{
    build_grid, spectral_snapshot, AtomTrace, DetuningGrid, EnsembleSpec, GridPoint, Signal,
    SignalAccumulator, SpectralSnapshot, SpinBroadening,
};
use crate::error::{Error, Result};
use crate::protocol::{expected_echo_time, Protocol, PulseLabel, Sequence, SequenceWarning};

/// RK4 sub-steps per cycle on drive-free intervals in [`Integrator::PureRk4`].
pub const GAP_STEPS_PER_CYCLE: f64 = 200.0;

/// Half-width of the echo detection window before clipping at pulses.
pub const ECHO_HALF_WINDOW: f64 = 2e-6;

/// Atoms handed to the pool per batch; bounds the memory held in traces.
const BATCH: usize = 256;

// Breakpoints closer than this are merged.
const MERGE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Closed form between pulses, RK4 through pulses.
    #[default]
    Hybrid,
    /// RK4 everywhere; a consistency reference for the hybrid scheme.
    PureRk4,
}

/// Two-resolution recording grid, all in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Spacing near pulses and echo windows.
    pub fine: f64,
    /// Spacing elsewhere.
    pub coarse: f64,
    /// Extent of the fine region on each side of a pulse or predicted echo.
    pub margin: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            fine: 10e-9,
            coarse: 1e-6,
            margin: 2e-6,
        }
    }
}

impl Sampling {
    fn validate(&self) -> Result<()> {
        let ok = self.fine >= 1e-9
            && self.fine.is_finite()
            && self.coarse >= self.fine
            && self.coarse.is_finite()
            && self.margin >= 0.0
            && self.margin.is_finite();
        if !ok {
            return Err(Error::invalid(format!(
                "sampling needs 1 ns <= fine <= coarse and a non-negative margin, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sequence: Sequence,
    pub ensemble: EnsembleSpec,
    pub rates: RelaxationRates,
    pub initial_populations: [f64; 3],
    pub relaxation_mode: RelaxationMode,
    pub sampling: Sampling,
    pub worker_count: usize,
    pub integrator: Integrator,
    /// Instants (s) at which per-detuning snapshots are taken.
    pub snapshot_times: Vec<f64>,
    /// Optical detunings (Hz) whose full state history is kept.
    pub retain_atoms: Vec<f64>,
    /// Hold the optical detuning at zero from the end of WRITE to the start
    /// of READ, so that no phase accrues during storage. Locked sequences
    /// only.
    pub freeze_storage_phase: bool,
}

impl RunConfig {
    pub fn new(sequence: Sequence, ensemble: EnsembleSpec, rates: RelaxationRates) -> Self {
        RunConfig {
            sequence,
            ensemble,
            rates,
            initial_populations: [1.0, 0.0, 0.0],
            relaxation_mode: RelaxationMode::TracePreserving,
            sampling: Sampling::default(),
            worker_count: 1,
            integrator: Integrator::Hybrid,
            snapshot_times: Vec::new(),
            retain_atoms: Vec::new(),
            freeze_storage_phase: false,
        }
    }

    pub fn validate(&self) -> Result<Vec<SequenceWarning>> {
        let warnings = self.sequence.validate()?;
        self.ensemble.validate()?;
        self.rates.validate()?;
        self.sampling.validate()?;
        DensityMatrix::from_populations(self.initial_populations)?;
        if self.worker_count == 0 {
            return Err(Error::invalid("worker_count must be at least 1"));
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.sequence.record_until) {
                return Err(Error::invalid(format!(
                    "snapshot time {t:e} s outside the recorded interval"
                )));
            }
        }
        if self.retain_atoms.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("retained atom detunings must be finite"));
        }
        if self.freeze_storage_phase && self.sequence.protocol != Some(Protocol::Locked) {
            return Err(Error::invalid(
                "freeze_storage_phase applies to locked sequences only",
            ));
        }
        if let SpinBroadening::Effective { gated: true, .. } = self.ensemble.spin {
            if self.sequence.pulse(PulseLabel::B1).is_none()
                || self.sequence.pulse(PulseLabel::B2).is_none()
            {
                return Err(Error::invalid("gated spin dephasing needs B1 and B2 pulses"));
            }
        }
        Ok(warnings)
    }
}

/// Full state history of one grid atom.
#[derive(Clone, Debug, PartialEq)]
pub struct RetainedAtom {
    pub delta_opt: f64,
    pub delta_spin: f64,
    pub times: Arc<[f64]>,
    pub states: Vec<DensityMatrix>,
}

impl RetainedAtom {
    /// State at the recorded sample nearest to `t`.
    pub fn state_at(&self, t: f64) -> &DensityMatrix {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        &self.states[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub signal: Signal,
    pub snapshots: Vec<SpectralSnapshot>,
    pub retained: Vec<RetainedAtom>,
    pub warnings: Vec<SequenceWarning>,
}

/// One constant interval of the shared timeline.
#[derive(Clone, Copy, Debug)]
struct Segment {
    dt: f64,
    drive: Drive,
    freeze: bool,
    spin_dephasing: bool,
    snapshot: Option<usize>,
}

struct Timeline {
    times: Arc<[f64]>,
    segments: Vec<Segment>,
    /// Snapshot index recorded at t = 0, if requested.
    initial_snapshot: Option<usize>,
}

fn within(t: f64, (lo, hi): (f64, f64)) -> bool {
    t >= lo && t <= hi
}

fn build_timeline(cfg: &RunConfig) -> Result<Timeline> {
    let seq = &cfg.sequence;
    let s = &cfg.sampling;
    let end = seq.record_until;
    let ns = |t: f64| (t * 1e9).round() as i64;
    let fine = ns(s.fine).max(1);
    let coarse = ns(s.coarse).max(fine);

    // (time, exact) pairs; exact times win when merging
    let mut points: Vec<(f64, bool)> = vec![(0.0, true), (end, true)];
    let end_ns = ns(end);
    points.extend((0..=end_ns / coarse).map(|k| ((k * coarse) as f64 * 1e-9, false)));

    let mut fine_regions: Vec<(f64, f64)> = seq
        .pulses
        .iter()
        .map(|p| (p.t_start - s.margin, p.end() + s.margin))
        .collect();
    if let Ok(echo) = expected_echo_time(seq) {
        fine_regions.push((echo - s.margin, echo + s.margin));
    }
    for &(lo, hi) in &fine_regions {
        let (lo, hi) = (ns(lo.max(0.0)), ns(hi.min(end)));
        let first = (lo + fine - 1).div_euclid(fine);
        let mut k = first;
        while k * fine <= hi {
            points.push(((k * fine) as f64 * 1e-9, false));
            k += 1;
        }
    }
    for p in &seq.pulses {
        points.push((p.t_start, true));
        points.push((p.end(), true));
    }
    for &t in &cfg.snapshot_times {
        points.push((t, true));
    }
    points.retain(|&(t, _)| t >= 0.0 && t <= end);
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut times: Vec<f64> = Vec::with_capacity(points.len());
    let mut exact: Vec<bool> = Vec::with_capacity(points.len());
    for (t, is_exact) in points {
        match times.last() {
            Some(&last) if t - last < MERGE_EPS => {
                if is_exact && !*exact.last().unwrap() {
                    *times.last_mut().unwrap() = t;
                    *exact.last_mut().unwrap() = true;
                }
            }
            _ => {
                times.push(t);
                exact.push(is_exact);
            }
        }
    }

    let snapshot_index = |t: f64| {
        cfg.snapshot_times
            .iter()
            .position(|&s| (s - t).abs() < MERGE_EPS)
    };
    let freeze_window = match (seq.pulse(PulseLabel::Write), seq.pulse(PulseLabel::Read)) {
        (Some(w), Some(r)) if cfg.freeze_storage_phase => Some((w.end(), r.t_start)),
        _ => None,
    };
    let gate = match cfg.ensemble.spin {
        SpinBroadening::Effective { gated: true, .. } => {
            let b1 = seq.pulse(PulseLabel::B1).expect("validated");
            let b2 = seq.pulse(PulseLabel::B2).expect("validated");
            Some((b1.t_start, b2.end()))
        }
        _ => None,
    };
    let segments = times
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Segment {
                dt: w[1] - w[0],
                drive: seq.drive_at(mid),
                freeze: freeze_window.is_some_and(|fw| within(mid, fw)),
                spin_dephasing: gate.is_none_or(|g| within(mid, g)),
                snapshot: snapshot_index(w[1]),
            }
        })
        .collect();
    Ok(Timeline {
        initial_snapshot: snapshot_index(times[0]),
        times: times.into(),
        segments,
    })
}

struct AtomResult {
    trace: AtomTrace,
    snapshots: Vec<DensityMatrix>,
    states: Option<Vec<DensityMatrix>>,
}

struct Model {
    mode: RelaxationMode,
    integrator: Integrator,
    /// Decay constants with and without the effective spin dephasing.
    with_spin: DecayConstants,
    without_spin: DecayConstants,
    initial: Matrix3<Complex64>,
    snapshots: usize,
}

fn run_atom(tl: &Timeline, model: &Model, point: &GridPoint, keep: bool) -> Result<AtomResult> {
    let mut rho = model.initial;
    let mut trace = AtomTrace::with_capacity(tl.times.clone());
    let mut snaps = vec![DensityMatrix::ground(); model.snapshots];
    let mut states = keep.then(|| Vec::with_capacity(tl.times.len()));
    let mut record = |rho: &Matrix3<Complex64>, snap: Option<usize>, trace: &mut AtomTrace| {
        let d = DensityMatrix::from_matrix(*rho);
        trace.push(&d);
        if let Some(i) = snap {
            snaps[i] = d;
        }
        if let Some(states) = states.as_mut() {
            states.push(d);
        }
    };
    record(&rho, tl.initial_snapshot, &mut trace);
    for seg in &tl.segments {
        let det = Detunings {
            delta_opt: if seg.freeze { 0.0 } else { point.delta_opt },
            delta_spin: point.delta_spin,
        };
        let k = if seg.spin_dephasing {
            &model.with_spin
        } else {
            &model.without_spin
        };
        let driven = !seg.drive.is_off();
        rho = if !driven && model.integrator == Integrator::Hybrid {
            free(&rho, &det, k, model.mode, seg.dt)
        } else {
            let spc = if driven {
                PULSE_STEPS_PER_CYCLE
            } else {
                GAP_STEPS_PER_CYCLE
            };
            let f = segment_frequency(&seg.drive, &det, k);
            rk4_segment(&rho, &hamiltonian(&seg.drive, &det), k, model.mode, seg.dt, f, spc)
        };
        record(&rho, seg.snapshot, &mut trace);
    }
    let last = DensityMatrix::from_matrix(rho);
    let pops = last.populations();
    if !last.is_finite() || pops.iter().any(|&p| p < -1e-6) {
        return Err(Error::Numeric {
            delta_opt: point.delta_opt,
            delta_spin: point.delta_spin,
            reason: format!("non-physical final state, populations {pops:?}"),
        });
    }
    Ok(AtomResult {
        trace,
        snapshots: snaps,
        states,
    })
}

/// Runs the sequence over every atom of the ensemble grid.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let warnings = cfg.validate()?;
    let grid = build_grid(&cfg.ensemble)?;
    let tl = build_timeline(cfg)?;
    let base = cfg.rates.constants();
    let with_spin = RelaxationRates {
        gamma_12_eff: cfg.rates.gamma_12_eff + cfg.ensemble.spin.gamma_12_eff(),
        ..cfg.rates
    }
    .constants();
    let model = Model {
        mode: cfg.relaxation_mode,
        integrator: cfg.integrator,
        with_spin,
        without_spin: base,
        initial: *DensityMatrix::from_populations(cfg.initial_populations)?.matrix(),
        snapshots: cfg.snapshot_times.len(),
    };
    let retained_idx: Vec<usize> = cfg
        .retain_atoms
        .iter()
        .map(|&d| grid.nearest(d, 0.0))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let mut acc = SignalAccumulator::new(tl.times.clone());
    let mut snapshot_states: Vec<Vec<DensityMatrix>> =
        vec![Vec::with_capacity(grid.len()); cfg.snapshot_times.len()];
    let mut retained: Vec<Option<RetainedAtom>> = vec![None; retained_idx.len()];
    for (batch_no, batch) in grid.points.chunks(BATCH).enumerate() {
        let offset = batch_no * BATCH;
        let results: Vec<Result<AtomResult>> = pool.install(|| {
            batch
                .par_iter()
                .enumerate()
                .map(|(i, p)| run_atom(&tl, &model, p, retained_idx.contains(&(offset + i))))
                .collect()
        });
        for (i, (res, point)) in results.into_iter().zip(batch).enumerate() {
            let atom = res?;
            acc.add(&atom.trace, point.weight)?;
            for (dst, s) in snapshot_states.iter_mut().zip(atom.snapshots) {
                dst.push(s);
            }
            if let Some(states) = atom.states {
                for (slot, _) in retained_idx
                    .iter()
                    .enumerate()
                    .filter(|(_, &g)| g == offset + i)
                {
                    retained[slot] = Some(RetainedAtom {
                        delta_opt: point.delta_opt,
                        delta_spin: point.delta_spin,
                        times: tl.times.clone(),
                        states: states.clone(),
                    });
                }
            }
        }
    }
    let snapshots = cfg
        .snapshot_times
        .iter()
        .zip(&snapshot_states)
        .map(|(&t, states)| spectral_snapshot(t, states, &grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        signal: acc.finish(),
        snapshots,
        retained: retained.into_iter().map(|r| r.expect("every retained atom visited")).collect(),
        warnings,
    })
}

/// Detuning grid the run would use.
pub fn grid_for(cfg: &RunConfig) -> Result<DetuningGrid> {
    build_grid(&cfg.ensemble)
}

/// Window of half-width [`ECHO_HALF_WINDOW`] around the predicted echo,
/// shrunk so that it excludes every pulse and stays inside `[0, t_end]`.
pub fn echo_window(seq: &Sequence, t_end: f64) -> Result<(f64, f64)> {
    let echo = expected_echo_time(seq)?;
    let (mut lo, mut hi) = (echo - ECHO_HALF_WINDOW, echo + ECHO_HALF_WINDOW);
    for (s, e) in seq.pulse_intervals() {
        if s <= echo && echo <= e {
            return Err(Error::Sequence(format!(
                "predicted echo at {:.3} us falls inside a pulse",
                echo * 1e6
            )));
        }
        if e <= echo {
            lo = lo.max(e);
        } else {
            hi = hi.min(s);
        }
    }
    Ok((lo.max(0.0), hi.min(t_end)))
}

/// Echo of `signal` inside the window predicted for `seq`.
pub fn measure_echo(seq: &Sequence, signal: &Signal) -> Result<EchoMeasurement> {
    let t_end = signal
        .times
        .last()
        .copied()
        .ok_or_else(|| Error::invalid("empty signal"))?;
    detect_echo(signal, echo_window(seq, t_end)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    /// Axis is the B2 center time (s).
    Storage,
    /// Axis is the B2 area (rad).
    B2Area,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub axis: f64,
    pub expected_echo: Option<f64>,
    pub echo: Option<EchoMeasurement>,
    /// Why this point was skipped.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub kind: ScanKind,
    pub axis: Vec<f64>,
    pub points: Vec<ScanPoint>,
    pub signals: Vec<Option<Signal>>,
    /// Center of B1 in the base sequence; storage time is `axis − origin`.
    pub storage_origin: Option<f64>,
}

impl ScanResult {
    pub fn amplitudes(&self) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.echo.map(|e| e.amplitude))
            .collect()
    }

    /// `(T, amplitude)` with `T = t_B2 − t_B1` for every successful point of
    /// a storage scan.
    pub fn storage_points(&self) -> Vec<(f64, f64)> {
        let origin = self.storage_origin.unwrap_or(0.0);
        self.points
            .iter()
            .filter_map(|p| p.echo.map(|e| (p.axis - origin, e.amplitude)))
            .collect()
    }

    pub fn warnings(&self) -> Vec<String> {
        self.points
            .iter()
            .filter_map(|p| {
                p.failure
                    .as_ref()
                    .map(|f| format!("axis value {:e}: {f}", p.axis))
            })
            .collect()
    }
}

fn check_axis(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("scan list is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("scan values must be finite"));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("scan values must be in increasing order"));
    }
    Ok(())
}

fn scan(
    base: &RunConfig,
    values: &[f64],
    kind: ScanKind,
    edit: impl Fn(&Sequence, f64) -> Result<Sequence>,
) -> Result<ScanResult> {
    check_axis(values)?;
    base.validate()?;
    let storage_origin = match kind {
        ScanKind::Storage => base.sequence.pulse(PulseLabel::B1).map(|p| p.center()),
        ScanKind::B2Area => None,
    };
    let mut points = Vec::with_capacity(values.len());
    let mut signals = Vec::with_capacity(values.len());
    for &v in values {
        let seq = match edit(&base.sequence, v) {
            Ok(seq) => seq,
            Err(e) => {
                points.push(ScanPoint {
                    axis: v,
                    expected_echo: None,
                    echo: None,
                    failure: Some(e.to_string()),
                });
                signals.push(None);
                continue;
            }
        };
        let cfg = RunConfig {
            sequence: seq,
            snapshot_times: Vec::new(),
            retain_atoms: Vec::new(),
            ..base.clone()
        };
        let out = run(&cfg)?;
        let echo = measure_echo(&cfg.sequence, &out.signal)?;
        points.push(ScanPoint {
            axis: v,
            expected_echo: Some(expected_echo_time(&cfg.sequence)?),
            echo: Some(echo),
            failure: None,
        });
        signals.push(Some(out.signal));
    }
    Ok(ScanResult {
        kind,
        axis: values.to_vec(),
        points,
        signals,
        storage_origin,
    })
}

/// One run per B2 center time; READ keeps its delay after B2.
pub fn scan_storage(base: &RunConfig, t_b2: &[f64]) -> Result<ScanResult> {
    scan(base, t_b2, ScanKind::Storage, |seq, t| seq.with_storage_time(t))
}

/// One run per B2 area (rad) with B1 unchanged.
pub fn scan_b2_area(base: &RunConfig, areas: &[f64]) -> Result<ScanResult> {
    if areas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::invalid("B2 areas must be positive"));
    }
    scan(base, areas, ScanKind::B2Area, |seq, a| seq.with_b2_area(a))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::protocol::{build_locked, build_two_pulse};

    const US: f64 = 1e-6;

    fn small_ensemble() -> EnsembleSpec {
        EnsembleSpec {
            optical_segments: 41,
            ..EnsembleSpec::default()
        }
    }

    fn two_pulse_config() -> RunConfig {
        let seq = build_two_pulse(5.0 * US, 10.0 * US, 2.5e6).unwrap();
        RunConfig::new(seq, small_ensemble(), RelaxationRates::NONE)
    }

    #[test]
    fn empty_sequence_keeps_the_ground_state() {
        let cfg = RunConfig::new(Sequence::empty(20.0 * US), small_ensemble(), RelaxationRates::NONE);
        let out = run(&cfg).unwrap();
        assert!(out.signal.polarization.iter().all(|p| p.norm() == 0.0));
        assert!(out
            .signal
            .populations
            .iter()
            .all(|p| (p[0] - 1.0).abs() < 1e-14 && p[1] == 0.0 && p[2] == 0.0));
        assert_eq!(out.signal.times.len(), 21);
    }

    #[test]
    fn timeline_contains_pulse_edges_and_fine_samples() {
        let cfg = two_pulse_config();
        let tl = build_timeline(&cfg).unwrap();
        for p in &cfg.sequence.pulses {
            assert!(tl.times.contains(&p.t_start));
            assert!(tl.times.iter().any(|&t| t == p.end()));
        }
        assert!(tl.times.windows(2).all(|w| w[1] > w[0]));
        // near the echo at 15 us the spacing is 10 ns
        let near: Vec<f64> = tl
            .times
            .iter()
            .copied()
            .filter(|t| (t - 15.0 * US).abs() < 0.5 * US)
            .collect();
        assert!(near.windows(2).all(|w| w[1] - w[0] <= 10.0e-9 + 1e-15));
        assert_eq!(tl.segments.len(), tl.times.len() - 1);
    }

    #[test]
    fn two_pulse_echo_is_found_at_the_predicted_time() {
        let cfg = two_pulse_config();
        let out = run(&cfg).unwrap();
        let echo = measure_echo(&cfg.sequence, &out.signal).unwrap();
        assert!(!echo.no_echo);
        assert!((echo.t_peak - 15.0 * US).abs() < 0.1 * US);
        assert!(echo.amplitude > 0.1);
    }

    #[test]
    fn worker_count_does_not_change_the_result() {
        let mut cfg = two_pulse_config();
        let a = run(&cfg).unwrap();
        cfg.worker_count = 3;
        let b = run(&cfg).unwrap();
        assert_eq!(a.signal, b.signal);
    }

    #[test]
    fn retained_atom_and_snapshot() {
        let mut cfg = two_pulse_config();
        cfg.retain_atoms = vec![30e3, 0.0];
        cfg.snapshot_times = vec![0.0, 12.0 * US];
        let out = run(&cfg).unwrap();
        assert_eq!(out.retained.len(), 2);
        assert_eq!(out.retained[0].delta_opt, 40e3, "nearest grid point");
        assert_eq!(out.retained[0].states.len(), out.signal.len());
        assert_eq!(out.snapshots.len(), 2);
        assert!(out.snapshots[0].rho33.iter().all(|&p| p == 0.0));
        assert!(out.snapshots[1].rho33.iter().any(|&p| p > 0.1));
    }

    #[test]
    fn window_excludes_pulses() {
        let seq = build_locked(5.0 * US, 10.0 * US, 10.1 * US, 25.0 * US, 0.0, 2.5e6, 5e6).unwrap();
        let echo = expected_echo_time(&seq).unwrap();
        let (lo, hi) = echo_window(&seq, seq.record_until).unwrap();
        assert!(lo < echo && echo < hi);
        for (s, e) in seq.pulse_intervals() {
            assert!(e <= lo || s >= hi);
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = two_pulse_config();
        cfg.worker_count = 0;
        assert!(run(&cfg).is_err());
        let mut cfg = two_pulse_config();
        cfg.initial_populations = [0.5, 0.2, 0.2];
        assert!(run(&cfg).is_err());
        let mut cfg = two_pulse_config();
        cfg.freeze_storage_phase = true;
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn scan_flags_invalid_points_and_continues() {
        let seq = build_locked(5.0 * US, 10.0 * US, 10.1 * US, 25.0 * US, 0.0, 2.5e6, 5e6).unwrap();
        let cfg = RunConfig::new(
            seq,
            EnsembleSpec {
                optical_segments: 11,
                ..EnsembleSpec::default()
            },
            RelaxationRates::NONE,
        );
        let res = scan_storage(&cfg, &[10.2 * US, 20.0 * US]).unwrap();
        assert!(res.points[0].failure.is_some());
        assert!(res.points[1].echo.is_some());
        assert_eq!(res.warnings().len(), 1);
        assert_eq!(res.storage_points().len(), 1);
        assert!((res.storage_points()[0].0 - 9.9 * US).abs() < 1e-12);
        assert!(scan_storage(&cfg, &[]).is_err());
        assert!(scan_storage(&cfg, &[30.0 * US, 20.0 * US]).is_err());
        assert!(scan_b2_area(&cfg, &[-PI]).is_err());
    }
}
