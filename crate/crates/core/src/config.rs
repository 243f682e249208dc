//! TOML run and scan configuration.
//!
//! Times are in μs, Rabi frequencies in MHz, rates, detunings and widths in
//! kHz, pulse areas in units of π. Everything is converted to SI once, here.
//!
//! ```toml
//! [protocol]
//! type = "locked"          # two_pulse | three_pulse | locked | phase_locked
//! t_data = 5.0
//! t_write = 10.0
//! t_b1 = 10.1
//! t_b2 = 50.0
//! read_delay = 0.0
//! rabi_a = 2.5
//! rabi_b = 5.0
//!
//! [rates]
//! gamma_pop_31 = 10.0
//! gamma_pop_32 = 10.0
//! gamma_coh_13 = 10.0
//! gamma_coh_23 = 10.0
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::analysis::Subspace;
use crate::bloch::{RateConvention, RelaxationMode, RelaxationRates};
use crate::engine::{Integrator, RunConfig, Sampling, ScanKind};
use crate::ensemble::{EnsembleSpec, SpinBroadening};
use crate::error::{Error, Result};
use crate::presets;
use crate::protocol::{expected_echo_time, Locked, PhaseLocked, Protocol, Sequence, ThreePulse, TwoPulse};

const US: f64 = 1e-6;
const MHZ: f64 = 1e6;
const KHZ: f64 = 1e3;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub run: RunSection,
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(rename = "type")]
    pub kind: Protocol,
    pub t_data: f64,
    pub t_write: Option<f64>,
    pub t_read: Option<f64>,
    pub t_pi: Option<f64>,
    pub t_b1: Option<f64>,
    pub t_b2: Option<f64>,
    /// Gap between the end of B2 and the next optical pulse.
    pub read_delay: Option<f64>,
    pub rabi_a: f64,
    pub rabi_b: Option<f64>,
    pub b1_area: Option<f64>,
    pub b2_area: Option<f64>,
    pub record_after_echo: Option<f64>,
    #[serde(default)]
    pub freeze_storage_phase: bool,
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SpinMode {
    #[default]
    Off,
    Effective,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub optical_fwhm: f64,
    pub optical_span: f64,
    pub optical_segments: usize,
    pub spin: SpinMode,
    pub spin_fwhm: Option<f64>,
    pub spin_segments: Option<usize>,
    /// Defaults to `spin_fwhm`.
    pub gamma_12_eff: Option<f64>,
    pub gated: Option<bool>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            optical_fwhm: 680.0,
            optical_span: 1600.0,
            optical_segments: 161,
            spin: SpinMode::Off,
            spin_fwhm: None,
            spin_segments: None,
            gamma_12_eff: None,
            gated: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesSection {
    pub gamma_pop_31: f64,
    pub gamma_pop_32: f64,
    pub gamma_pop_12: f64,
    pub gamma_coh_13: f64,
    pub gamma_coh_23: f64,
    pub gamma_coh_12: f64,
    pub convention: RateConvention,
    pub mode: RelaxationMode,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub populations: [f64; 3],
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            populations: [1.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSection {
    pub fine_ns: f64,
    pub coarse_us: f64,
    pub margin_us: f64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        let s = Sampling::default();
        SamplingSection {
            fine_ns: s.fine * 1e9,
            coarse_us: s.coarse / US,
            margin_us: s.margin / US,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub workers: usize,
    pub integrator: Integrator,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            workers: 1,
            integrator: Integrator::Hybrid,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub kind: ScanKind,
    /// B2 centers (μs) for storage scans, B2 areas (π) for area scans.
    pub values: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Snapshot instants (μs).
    pub snapshots: Vec<f64>,
    /// Optical detunings (kHz) of atoms whose Bloch trajectories are written.
    pub bloch_atoms: Vec<f64>,
    pub bloch_subspace: Option<Subspace>,
}

/// Scan request in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub run: RunConfig,
    pub scan: Option<ScanSpec>,
    pub bloch_subspace: Subspace,
}

fn required(v: Option<f64>, name: &str, protocol: Protocol) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("{protocol:?} protocol needs `{name}`")))
}

fn forbid(present: &[(bool, &str)], protocol: Protocol) -> Result<()> {
    for (p, name) in present {
        if *p {
            return Err(Error::Config(format!(
                "`{name}` does not apply to the {protocol:?} protocol"
            )));
        }
    }
    Ok(())
}

impl ProtocolSection {
    fn sequence(&self) -> Result<Sequence> {
        let k = self.kind;
        let us = |v: Option<f64>, name: &str| required(v, name, k).map(|x| x * US);
        let t_data = self.t_data * US;
        let rabi_a = self.rabi_a * MHZ;
        let mut seq = match k {
            Protocol::TwoPulse => {
                forbid(
                    &[
                        (self.t_write.is_some(), "t_write"),
                        (self.t_read.is_some(), "t_read"),
                        (self.t_b1.is_some(), "t_b1"),
                        (self.t_b2.is_some(), "t_b2"),
                        (self.read_delay.is_some(), "read_delay"),
                        (self.rabi_b.is_some(), "rabi_b"),
                        (self.b1_area.is_some(), "b1_area"),
                        (self.b2_area.is_some(), "b2_area"),
                    ],
                    k,
                )?;
                TwoPulse {
                    t_data,
                    t_pi: us(self.t_pi, "t_pi")?,
                    rabi: rabi_a,
                }
                .build()?
            }
            Protocol::ThreePulse => {
                forbid(
                    &[
                        (self.t_pi.is_some(), "t_pi"),
                        (self.t_b1.is_some(), "t_b1"),
                        (self.t_b2.is_some(), "t_b2"),
                        (self.read_delay.is_some(), "read_delay"),
                        (self.rabi_b.is_some(), "rabi_b"),
                        (self.b1_area.is_some(), "b1_area"),
                        (self.b2_area.is_some(), "b2_area"),
                    ],
                    k,
                )?;
                ThreePulse {
                    t_data,
                    t_write: us(self.t_write, "t_write")?,
                    t_read: us(self.t_read, "t_read")?,
                    rabi: rabi_a,
                }
                .build()?
            }
            Protocol::Locked => {
                forbid(
                    &[(self.t_pi.is_some(), "t_pi"), (self.t_read.is_some(), "t_read")],
                    k,
                )?;
                Locked {
                    t_data,
                    t_write: us(self.t_write, "t_write")?,
                    t_b1: us(self.t_b1, "t_b1")?,
                    t_b2: us(self.t_b2, "t_b2")?,
                    read_delay: self.read_delay.unwrap_or(0.0) * US,
                    rabi_a,
                    rabi_b: required(self.rabi_b, "rabi_b", k)? * MHZ,
                    b1_area: self.b1_area.unwrap_or(1.0) * PI,
                    b2_area: self.b2_area.unwrap_or(3.0) * PI,
                }
                .build()?
            }
            Protocol::PhaseLocked => {
                forbid(
                    &[
                        (self.t_write.is_some(), "t_write"),
                        (self.t_read.is_some(), "t_read"),
                        (self.b1_area.is_some(), "b1_area"),
                        (self.b2_area.is_some(), "b2_area"),
                        (self.t_pi.is_some() && self.read_delay.is_some(), "read_delay with t_pi"),
                    ],
                    k,
                )?;
                let rabi_b = required(self.rabi_b, "rabi_b", k)? * MHZ;
                let t_b2 = us(self.t_b2, "t_b2")?;
                let t_pi = match self.t_pi {
                    Some(t) => t * US,
                    // π pulse starts read_delay after B2 ends
                    None => {
                        let b2_half = 0.5 / (2.0 * rabi_b);
                        let pi_half = 0.5 / (2.0 * rabi_a);
                        t_b2 + b2_half + self.read_delay.unwrap_or(0.0) * US + pi_half
                    }
                };
                PhaseLocked {
                    t_data,
                    t_b1: us(self.t_b1, "t_b1")?,
                    t_b2,
                    t_pi,
                    rabi_a,
                    rabi_b,
                }
                .build()?
            }
        };
        if let Some(extra) = self.record_after_echo {
            if !(extra > 0.0 && extra.is_finite()) {
                return Err(Error::Config("record_after_echo must be positive".into()));
            }
            seq.record_until = expected_echo_time(&seq)? + extra * US;
            seq.validate()?;
        }
        Ok(seq)
    }
}

impl EnsembleSection {
    fn spec(&self) -> Result<EnsembleSpec> {
        let spin = match self.spin {
            SpinMode::Off => {
                if self.spin_fwhm.is_some()
                    || self.spin_segments.is_some()
                    || self.gamma_12_eff.is_some()
                    || self.gated.is_some()
                {
                    return Err(Error::Config("spin broadening keys need spin = effective or explicit".into()));
                }
                SpinBroadening::Off
            }
            SpinMode::Effective => {
                if self.spin_segments.is_some() {
                    return Err(Error::Config("spin_segments applies to spin = explicit".into()));
                }
                let g = self
                    .gamma_12_eff
                    .or(self.spin_fwhm)
                    .ok_or_else(|| Error::Config("effective spin mode needs spin_fwhm or gamma_12_eff".into()))?;
                SpinBroadening::Effective {
                    gamma_12_eff: g,
                    gated: self.gated.unwrap_or(false),
                }
            }
            SpinMode::Explicit => {
                if self.gamma_12_eff.is_some() || self.gated.is_some() {
                    return Err(Error::Config("gamma_12_eff and gated apply to spin = effective".into()));
                }
                SpinBroadening::Explicit {
                    spin_fwhm: self
                        .spin_fwhm
                        .ok_or_else(|| Error::Config("explicit spin mode needs spin_fwhm".into()))?
                        * KHZ,
                    spin_segments: self.spin_segments.unwrap_or(21),
                }
            }
        };
        let spec = EnsembleSpec {
            optical_fwhm: self.optical_fwhm * KHZ,
            optical_span: self.optical_span * KHZ,
            optical_segments: self.optical_segments,
            spin,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ConfigFile {
    pub fn into_config(self) -> Result<Config> {
        let sequence = self.protocol.sequence()?;
        let r = &self.rates;
        let rates = RelaxationRates {
            gamma_pop_31: r.gamma_pop_31,
            gamma_pop_32: r.gamma_pop_32,
            gamma_pop_12: r.gamma_pop_12,
            gamma_coh_13: r.gamma_coh_13,
            gamma_coh_23: r.gamma_coh_23,
            gamma_coh_12: r.gamma_coh_12,
            gamma_12_eff: 0.0,
            convention: r.convention,
        };
        let mut run = RunConfig::new(sequence, self.ensemble.spec()?, rates);
        run.relaxation_mode = r.mode;
        run.initial_populations = self.initial.populations;
        run.sampling = Sampling {
            fine: self.sampling.fine_ns * 1e-9,
            coarse: self.sampling.coarse_us * US,
            margin: self.sampling.margin_us * US,
        };
        run.worker_count = self.run.workers;
        run.integrator = self.run.integrator;
        run.freeze_storage_phase = self.protocol.freeze_storage_phase;
        run.snapshot_times = self.output.snapshots.iter().map(|t| t * US).collect();
        run.retain_atoms = self.output.bloch_atoms.iter().map(|d| d * KHZ).collect();
        run.validate()?;

        let scan = match self.scan {
            None => None,
            Some(s) => {
                if s.values.is_empty() {
                    return Err(Error::Config("scan.values is empty".into()));
                }
                let unit = match s.kind {
                    ScanKind::Storage => US,
                    ScanKind::B2Area => PI,
                };
                if !matches!(run.sequence.protocol, Some(Protocol::Locked | Protocol::PhaseLocked)) {
                    return Err(Error::Config("scans need a locked or phase_locked protocol".into()));
                }
                Some(ScanSpec {
                    kind: s.kind,
                    values: s.values.iter().map(|v| v * unit).collect(),
                })
            }
        };
        Ok(Config {
            run,
            scan,
            bloch_subspace: self.output.bloch_subspace.unwrap_or(Subspace::S13),
        })
    }
}

/// Parses and validates a configuration document.
pub fn parse_str(text: &str) -> Result<Config> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.into_config()
}

/// Loads a config from a file path, or from a bundled preset when no such
/// file exists and the argument names one.
pub fn load(path_or_preset: &str) -> Result<Config> {
    let path = Path::new(path_or_preset);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        return parse_str(&text);
    }
    match presets::source(path_or_preset) {
        Some(text) => parse_str(text),
        None => Err(Error::Config(format!(
            "{path_or_preset} is neither a readable file nor a preset ({})",
            presets::NAMES.join(", ")
        ))),
    }
}
