use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a quoted rate of X kHz maps onto a decay constant in s⁻¹.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// `r = π·X·10³`, so that a 20 kHz population rate gives T₁ = 1/(π·20 kHz).
    #[default]
    Pi,
    /// `r = 2π·X·10³`.
    Angular,
    /// `r = X·10³`.
    Cyclic,
}

impl RateConvention {
    pub fn factor(self) -> f64 {
        match self {
            RateConvention::Pi => PI,
            RateConvention::Angular => 2.0 * PI,
            RateConvention::Cyclic => 1.0,
        }
    }

    /// Decay constant (s⁻¹) for a rate quoted in kHz.
    pub fn per_second(self, khz: f64) -> f64 {
        self.factor() * khz * 1e3
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationMode {
    /// Excited-state decay feeds the ground states; trace is conserved.
    #[default]
    TracePreserving,
    /// Only the anticommutator `−½{Γ, ρ}` with diagonal Γ; trace leaks.
    Literal,
}

/// Relaxation constants as quoted, in kHz.
///
/// `gamma_pop_*` are population decay constants (|3⟩→|1⟩, |3⟩→|2⟩, and the
/// symmetric |1⟩↔|2⟩ exchange); `gamma_coh_*` are total coherence decay
/// constants applied directly to each off-diagonal element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelaxationRates {
    pub gamma_pop_31: f64,
    pub gamma_pop_32: f64,
    pub gamma_pop_12: f64,
    pub gamma_coh_13: f64,
    pub gamma_coh_23: f64,
    pub gamma_coh_12: f64,
    /// Extra spin dephasing added to ρ₁₂.
    pub gamma_12_eff: f64,
    pub convention: RateConvention,
}

impl RelaxationRates {
    pub const NONE: RelaxationRates = RelaxationRates {
        gamma_pop_31: 0.0,
        gamma_pop_32: 0.0,
        gamma_pop_12: 0.0,
        gamma_coh_13: 0.0,
        gamma_coh_23: 0.0,
        gamma_coh_12: 0.0,
        gamma_12_eff: 0.0,
        convention: RateConvention::Pi,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gamma_pop_31,
            self.gamma_pop_32,
            self.gamma_pop_12,
            self.gamma_coh_13,
            self.gamma_coh_23,
            self.gamma_coh_12,
            self.gamma_12_eff,
        ];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid(format!(
                "relaxation rates must be finite and non-negative, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn constants(&self) -> DecayConstants {
        let r = |khz: f64| self.convention.per_second(khz);
        DecayConstants {
            pop_31: r(self.gamma_pop_31),
            pop_32: r(self.gamma_pop_32),
            pop_12: r(self.gamma_pop_12),
            coh_13: r(self.gamma_coh_13),
            coh_23: r(self.gamma_coh_23),
            coh_12: r(self.gamma_coh_12),
            spin_eff: r(self.gamma_12_eff),
        }
    }
}

/// Relaxation constants converted to s⁻¹.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecayConstants {
    pub pop_31: f64,
    pub pop_32: f64,
    pub pop_12: f64,
    pub coh_13: f64,
    pub coh_23: f64,
    pub coh_12: f64,
    /// Effective spin dephasing on ρ₁₂, applied in both relaxation modes.
    pub spin_eff: f64,
}

impl DecayConstants {
    /// Total decay constant of ρ₃₃.
    pub fn excited(&self) -> f64 {
        self.pop_31 + self.pop_32
    }

    /// Total trace-preserving decay constant of ρ₁₂.
    pub fn spin_total(&self) -> f64 {
        self.coh_12 + self.spin_eff
    }

    /// Diagonal of Γ in literal mode: (Γ₁, Γ₂, Γ₃).
    pub fn literal_diagonal(&self) -> [f64; 3] {
        [self.pop_12, self.pop_12, self.excited()]
    }

    pub fn max_rate(&self) -> f64 {
        [
            self.excited(),
            2.0 * self.pop_12,
            self.coh_13,
            self.coh_23,
            self.spin_total(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
