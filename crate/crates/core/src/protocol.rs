//! Pulse sequences for the four echo protocols.
//!
//! Builder timings are pulse *centers* in seconds; each pulse's duration
//! follows from its area and Rabi frequency, `τ = Φ/(2π·f)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bloch::Drive;
use crate::error::{Error, Result};

/// Default recording time past the predicted echo.
pub const RECORD_AFTER_ECHO: f64 = 5e-6;

/// Secondary echoes closer than this to the primary echo trigger a warning.
pub const ECHO_COLLISION_WINDOW: f64 = 1e-6;

// Timing comparisons tolerate float noise from center/duration arithmetic.
const TIME_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// |1⟩ ↔ |3⟩
    A,
    /// |2⟩ ↔ |3⟩
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PulseLabel {
    Data,
    Write,
    Read,
    B1,
    B2,
    Pi,
}

impl fmt::Display for PulseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PulseLabel::Data => "DATA",
            PulseLabel::Write => "WRITE",
            PulseLabel::Read => "READ",
            PulseLabel::B1 => "B1",
            PulseLabel::B2 => "B2",
            PulseLabel::Pi => "PI",
        };
        f.write_str(s)
    }
}

/// Rectangular pulse of constant Rabi frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub channel: Channel,
    pub label: PulseLabel,
    pub t_start: f64,
    pub duration: f64,
    /// Rabi frequency (Hz).
    pub rabi: f64,
    pub phase: f64,
}

impl Pulse {
    /// Pulse of the given area centred on `t_center`.
    pub fn centered(
        channel: Channel,
        label: PulseLabel,
        t_center: f64,
        rabi: f64,
        area: f64,
    ) -> Result<Pulse> {
        let duration = area_to_duration(rabi, area)?;
        Ok(Pulse {
            channel,
            label,
            t_start: t_center - 0.5 * duration,
            duration,
            rabi,
            phase: 0.0,
        })
    }

    pub fn center(&self) -> f64 {
        self.t_start + 0.5 * self.duration
    }

    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn area(&self) -> f64 {
        2.0 * PI * self.rabi * self.duration
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.end()
    }

    pub fn drive(&self) -> Drive {
        match self.channel {
            Channel::A => Drive::channel_a(self.rabi, self.phase),
            Channel::B => Drive::channel_b(self.rabi, self.phase),
        }
    }
}

/// `τ = Φ/(2π·f)`.
pub fn area_to_duration(rabi: f64, area: f64) -> Result<f64> {
    if !(rabi > 0.0 && rabi.is_finite()) {
        return Err(Error::invalid(format!("Rabi frequency must be positive, got {rabi}")));
    }
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::invalid(format!("pulse area must be positive, got {area}")));
    }
    Ok(area / (2.0 * PI * rabi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    TwoPulse,
    ThreePulse,
    Locked,
    PhaseLocked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    /// `None` for a bare (possibly empty) pulse list with no echo semantics.
    pub protocol: Option<Protocol>,
    pub pulses: Vec<Pulse>,
    pub record_until: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceWarning {
    /// A secondary echo falls close to the primary echo.
    EchoCollision { primary: f64, secondary: f64 },
}

impl fmt::Display for SequenceWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceWarning::EchoCollision { primary, secondary } => write!(
                f,
                "secondary echo at {:.3} us collides with the primary echo at {:.3} us",
                secondary * 1e6,
                primary * 1e6
            ),
        }
    }
}

impl Sequence {
    /// No pulses; free evolution until `record_until`.
    pub fn empty(record_until: f64) -> Self {
        Sequence {
            protocol: None,
            pulses: Vec::new(),
            record_until,
        }
    }

    pub fn pulse(&self, label: PulseLabel) -> Option<&Pulse> {
        self.pulses.iter().find(|p| p.label == label)
    }

    fn require(&self, label: PulseLabel) -> Result<&Pulse> {
        self.pulse(label)
            .ok_or_else(|| Error::Sequence(format!("missing {label} pulse")))
    }

    fn channel_labels(&self, channel: Channel) -> Vec<PulseLabel> {
        self.pulses
            .iter()
            .filter(|p| p.channel == channel)
            .map(|p| p.label)
            .collect()
    }

    pub fn b_pulse_area_total(&self) -> f64 {
        self.pulses
            .iter()
            .filter(|p| p.channel == Channel::B)
            .map(|p| p.area())
            .sum()
    }

    pub fn longest_pulse(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).fold(0.0, f64::max)
    }

    /// `(start, end)` of every pulse in sequence order.
    pub fn pulse_intervals(&self) -> Vec<(f64, f64)> {
        self.pulses.iter().map(|p| (p.t_start, p.end())).collect()
    }

    /// Sum of the drives of all pulses active at `t`.
    pub fn drive_at(&self, t: f64) -> Drive {
        let mut drive = Drive::OFF;
        for p in self.pulses.iter().filter(|p| p.is_active(t)) {
            match p.channel {
                Channel::A => {
                    drive.omega_a = p.rabi;
                    drive.phase_a = p.phase;
                }
                Channel::B => {
                    drive.omega_b = p.rabi;
                    drive.phase_b = p.phase;
                }
            }
        }
        drive
    }

    /// Checks ordering, overlaps and protocol structure. Returns non-fatal
    /// warnings on success.
    pub fn validate(&self) -> Result<Vec<SequenceWarning>> {
        if !(self.record_until > 0.0 && self.record_until.is_finite()) {
            return Err(Error::Sequence("record_until must be positive".into()));
        }
        for p in &self.pulses {
            let ok = p.t_start.is_finite()
                && p.t_start >= -TIME_EPS
                && p.duration > 0.0
                && p.duration.is_finite()
                && p.rabi > 0.0
                && p.area().is_finite()
                && p.phase.is_finite();
            if !ok {
                return Err(Error::Sequence(format!("malformed {} pulse {p:?}", p.label)));
            }
            if p.end() > self.record_until + TIME_EPS {
                return Err(Error::Sequence(format!(
                    "{} pulse ends after record_until",
                    p.label
                )));
            }
        }
        for w in self.pulses.windows(2) {
            if w[1].t_start < w[0].t_start {
                return Err(Error::Sequence("pulses are not time ordered".into()));
            }
        }
        for channel in [Channel::A, Channel::B] {
            let on: Vec<&Pulse> = self.pulses.iter().filter(|p| p.channel == channel).collect();
            for w in on.windows(2) {
                if w[1].t_start < w[0].end() - TIME_EPS {
                    return Err(Error::Sequence(format!(
                        "{} and {} overlap on channel {channel:?}",
                        w[0].label, w[1].label
                    )));
                }
            }
        }
        let Some(protocol) = self.protocol else {
            return Ok(Vec::new());
        };
        use PulseLabel::*;
        let (a, b): (&[PulseLabel], &[PulseLabel]) = match protocol {
            Protocol::TwoPulse => (&[Data, Pi], &[]),
            Protocol::ThreePulse => (&[Data, Write, Read], &[]),
            Protocol::Locked => (&[Data, Write, Read], &[B1, B2]),
            Protocol::PhaseLocked => (&[Data, Pi], &[B1, B2]),
        };
        if self.channel_labels(Channel::A) != a || self.channel_labels(Channel::B) != b {
            return Err(Error::Sequence(format!(
                "{protocol:?} sequence needs A = {a:?}, B = {b:?}"
            )));
        }
        match protocol {
            Protocol::Locked => {
                let w = self.require(Write)?;
                let r = self.require(Read)?;
                let b1 = self.require(B1)?;
                let b2 = self.require(B2)?;
                if b1.t_start < w.end() - TIME_EPS || b2.end() > r.t_start + TIME_EPS {
                    return Err(Error::Sequence(
                        "B1 and B2 must lie between the end of WRITE and the start of READ".into(),
                    ));
                }
            }
            Protocol::PhaseLocked => {
                let d = self.require(Data)?;
                let pi = self.require(Pi)?;
                let b1 = self.require(B1)?;
                let b2 = self.require(B2)?;
                if b1.t_start < d.end() - TIME_EPS || b2.end() > pi.t_start + TIME_EPS {
                    return Err(Error::Sequence(
                        "B1 and B2 must lie between DATA and the rephasing pulse".into(),
                    ));
                }
            }
            _ => {}
        }
        let echo = self.echo_time_unchecked(protocol)?;
        if self.record_until <= echo {
            return Err(Error::Sequence(format!(
                "record_until {:.3} us does not reach the echo at {:.3} us",
                self.record_until * 1e6,
                echo * 1e6
            )));
        }
        let mut warnings = Vec::new();
        for secondary in self.secondary_echo_times() {
            if (secondary - echo).abs() < ECHO_COLLISION_WINDOW {
                warnings.push(SequenceWarning::EchoCollision {
                    primary: echo,
                    secondary,
                });
            }
        }
        Ok(warnings)
    }

    fn echo_time_unchecked(&self, protocol: Protocol) -> Result<f64> {
        use PulseLabel::*;
        let c = |l| self.require(l).map(|p| p.center());
        Ok(match protocol {
            Protocol::TwoPulse => 2.0 * c(Pi)? - c(Data)?,
            Protocol::ThreePulse | Protocol::Locked => c(Read)? + (c(Write)? - c(Data)?),
            Protocol::PhaseLocked => 2.0 * c(Pi)? - c(Data)? - (c(B2)? - c(B1)?),
        })
    }

    /// Two-pulse echoes formed by pairs of A-channel pulses of stimulated
    /// sequences: (DATA, WRITE), (WRITE, READ) and (DATA, READ).
    pub fn secondary_echo_times(&self) -> Vec<f64> {
        if !matches!(
            self.protocol,
            Some(Protocol::ThreePulse) | Some(Protocol::Locked)
        ) {
            return Vec::new();
        }
        let c = |l| self.pulse(l).map(|p| p.center());
        match (c(PulseLabel::Data), c(PulseLabel::Write), c(PulseLabel::Read)) {
            (Some(d), Some(w), Some(r)) => vec![2.0 * w - d, 2.0 * r - w, 2.0 * r - d],
            _ => Vec::new(),
        }
    }

    /// Moves B2 so that its center is `t_b2`; READ (or the rephasing π pulse)
    /// keeps its delay after the end of B2.
    pub fn with_storage_time(&self, t_b2: f64) -> Result<Sequence> {
        let b2 = *self.require(PulseLabel::B2)?;
        self.rearrange_b2(|p| Pulse {
            t_start: t_b2 - 0.5 * b2.duration,
            ..*p
        })
    }

    /// Replaces the B2 area, keeping its center; the following optical pulse
    /// is re-anchored to the new B2 end.
    pub fn with_b2_area(&self, area: f64) -> Result<Sequence> {
        let b2 = *self.require(PulseLabel::B2)?;
        let duration = area_to_duration(b2.rabi, area)?;
        self.rearrange_b2(|p| Pulse {
            t_start: b2.center() - 0.5 * duration,
            duration,
            ..*p
        })
    }

    fn rearrange_b2(&self, f: impl Fn(&Pulse) -> Pulse) -> Result<Sequence> {
        let protocol = self
            .protocol
            .filter(|p| matches!(p, Protocol::Locked | Protocol::PhaseLocked))
            .ok_or_else(|| Error::Sequence("storage edits need a LOCKED or PHASE_LOCKED sequence".into()))?;
        let follower = match protocol {
            Protocol::Locked => PulseLabel::Read,
            _ => PulseLabel::Pi,
        };
        let old_b2 = *self.require(PulseLabel::B2)?;
        let old_follow = *self.require(follower)?;
        let delay = old_follow.t_start - old_b2.end();
        let old_echo = self.echo_time_unchecked(protocol)?;
        let new_b2 = f(&old_b2);
        let mut out = self.clone();
        for p in &mut out.pulses {
            if p.label == PulseLabel::B2 {
                *p = new_b2;
            } else if p.label == follower {
                p.t_start = new_b2.end() + delay;
            }
        }
        out.pulses.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        let new_echo = out.echo_time_unchecked(protocol)?;
        out.record_until = self.record_until + (new_echo - old_echo);
        out.validate()?;
        Ok(out)
    }
}

/// Predicted echo center for a protocol sequence.
pub fn expected_echo_time(seq: &Sequence) -> Result<f64> {
    let protocol = seq
        .protocol
        .ok_or_else(|| Error::Sequence("sequence has no echo protocol".into()))?;
    seq.echo_time_unchecked(protocol)
}

fn finish(protocol: Protocol, mut pulses: Vec<Pulse>) -> Result<Sequence> {
    pulses.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
    let mut seq = Sequence {
        protocol: Some(protocol),
        pulses,
        record_until: f64::INFINITY,
    };
    let echo = seq.echo_time_unchecked(protocol)?;
    seq.record_until = echo + RECORD_AFTER_ECHO;
    check_order_and_validate(seq)
}

fn check_order_and_validate(seq: Sequence) -> Result<Sequence> {
    seq.validate()?;
    Ok(seq)
}

fn ordered(times: &[(f64, &str)]) -> Result<()> {
    for w in times.windows(2) {
        if !(w[0].0 < w[1].0) {
            return Err(Error::Sequence(format!(
                "{} ({:e} s) must precede {} ({:e} s)",
                w[0].1, w[0].0, w[1].1, w[1].0
            )));
        }
    }
    Ok(())
}

/// π/2 excitation followed by a π rephasing pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPulse {
    pub t_data: f64,
    pub t_pi: f64,
    pub rabi: f64,
}

impl TwoPulse {
    pub fn build(&self) -> Result<Sequence> {
        ordered(&[(self.t_data, "DATA"), (self.t_pi, "PI")])?;
        let pulses = vec![
            Pulse::centered(Channel::A, PulseLabel::Data, self.t_data, self.rabi, PI / 2.0)?,
            Pulse::centered(Channel::A, PulseLabel::Pi, self.t_pi, self.rabi, PI)?,
        ];
        finish(Protocol::TwoPulse, pulses)
    }
}

/// Three π/2 pulses: DATA and WRITE burn a spectral grating, READ recalls it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreePulse {
    pub t_data: f64,
    pub t_write: f64,
    pub t_read: f64,
    pub rabi: f64,
}

impl ThreePulse {
    pub fn build(&self) -> Result<Sequence> {
        ordered(&[
            (self.t_data, "DATA"),
            (self.t_write, "WRITE"),
            (self.t_read, "READ"),
        ])?;
        let a = |label, t| Pulse::centered(Channel::A, label, t, self.rabi, PI / 2.0);
        let pulses = vec![
            a(PulseLabel::Data, self.t_data)?,
            a(PulseLabel::Write, self.t_write)?,
            a(PulseLabel::Read, self.t_read)?,
        ];
        finish(Protocol::ThreePulse, pulses)
    }
}

/// Stimulated echo with the control pair B1/B2 on channel B shelving the
/// excited-state grating in |2⟩ during storage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Locked {
    pub t_data: f64,
    pub t_write: f64,
    pub t_b1: f64,
    pub t_b2: f64,
    /// Gap between the end of B2 and the start of READ.
    pub read_delay: f64,
    pub rabi_a: f64,
    pub rabi_b: f64,
    pub b1_area: f64,
    pub b2_area: f64,
}

impl Locked {
    /// B1 = π and B2 = 3π, so the control pair totals 4π.
    pub fn new(
        t_data: f64,
        t_write: f64,
        t_b1: f64,
        t_b2: f64,
        read_delay: f64,
        rabi_a: f64,
        rabi_b: f64,
    ) -> Self {
        Locked {
            t_data,
            t_write,
            t_b1,
            t_b2,
            read_delay,
            rabi_a,
            rabi_b,
            b1_area: PI,
            b2_area: 3.0 * PI,
        }
    }

    pub fn build(&self) -> Result<Sequence> {
        ordered(&[
            (self.t_data, "DATA"),
            (self.t_write, "WRITE"),
            (self.t_b1, "B1"),
            (self.t_b2, "B2"),
        ])?;
        if !(self.read_delay >= 0.0 && self.read_delay.is_finite()) {
            return Err(Error::Sequence("read_delay must be non-negative".into()));
        }
        let a = |label, t| Pulse::centered(Channel::A, label, t, self.rabi_a, PI / 2.0);
        let b1 = Pulse::centered(Channel::B, PulseLabel::B1, self.t_b1, self.rabi_b, self.b1_area)?;
        let b2 = Pulse::centered(Channel::B, PulseLabel::B2, self.t_b2, self.rabi_b, self.b2_area)?;
        let read_duration = area_to_duration(self.rabi_a, PI / 2.0)?;
        let t_read = b2.end() + self.read_delay + 0.5 * read_duration;
        let pulses = vec![
            a(PulseLabel::Data, self.t_data)?,
            a(PulseLabel::Write, self.t_write)?,
            b1,
            b2,
            a(PulseLabel::Read, t_read)?,
        ];
        finish(Protocol::Locked, pulses)
    }
}

/// Excitation stored as spin coherence between B1 and B2 (both π), then
/// rephased by a π pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLocked {
    pub t_data: f64,
    pub t_b1: f64,
    pub t_b2: f64,
    pub t_pi: f64,
    pub rabi_a: f64,
    pub rabi_b: f64,
}

impl PhaseLocked {
    pub fn build(&self) -> Result<Sequence> {
        ordered(&[
            (self.t_data, "DATA"),
            (self.t_b1, "B1"),
            (self.t_b2, "B2"),
            (self.t_pi, "PI"),
        ])?;
        let pulses = vec![
            Pulse::centered(Channel::A, PulseLabel::Data, self.t_data, self.rabi_a, PI / 2.0)?,
            Pulse::centered(Channel::B, PulseLabel::B1, self.t_b1, self.rabi_b, PI)?,
            Pulse::centered(Channel::B, PulseLabel::B2, self.t_b2, self.rabi_b, PI)?,
            Pulse::centered(Channel::A, PulseLabel::Pi, self.t_pi, self.rabi_a, PI)?,
        ];
        finish(Protocol::PhaseLocked, pulses)
    }
}

pub fn build_two_pulse(t_data: f64, t_pi: f64, rabi: f64) -> Result<Sequence> {
    TwoPulse { t_data, t_pi, rabi }.build()
}

pub fn build_three_pulse(t_data: f64, t_write: f64, t_read: f64, rabi: f64) -> Result<Sequence> {
    ThreePulse {
        t_data,
        t_write,
        t_read,
        rabi,
    }
    .build()
}

pub fn build_locked(
    t_data: f64,
    t_write: f64,
    t_b1: f64,
    t_b2: f64,
    read_delay: f64,
    rabi_a: f64,
    rabi_b: f64,
) -> Result<Sequence> {
    Locked::new(t_data, t_write, t_b1, t_b2, read_delay, rabi_a, rabi_b).build()
}

pub fn build_phase_locked(
    t_data: f64,
    t_b1: f64,
    t_b2: f64,
    t_pi: f64,
    rabi_a: f64,
    rabi_b: f64,
) -> Result<Sequence> {
    PhaseLocked {
        t_data,
        t_b1,
        t_b2,
        t_pi,
        rabi_a,
        rabi_b,
    }
    .build()
}
