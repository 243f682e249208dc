use serde::{Deserialize, Serialize};

use crate::bloch::DensityMatrix;
use crate::error::{Error, Result};

/// Subspace population below which a Bloch point is flagged.
pub const LOW_POPULATION: f64 = 1e-6;

/// Two-level subspace `(i, j)` with `i` the lower level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subspace {
    #[serde(rename = "13")]
    S13,
    #[serde(rename = "23")]
    S23,
    #[serde(rename = "12")]
    S12,
}

impl Subspace {
    pub fn levels(self) -> (usize, usize) {
        match self {
            Subspace::S13 => (0, 2),
            Subspace::S23 => (1, 2),
            Subspace::S12 => (0, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subspace::S13 => "13",
            Subspace::S23 => "23",
            Subspace::S12 => "12",
        }
    }
}

impl std::str::FromStr for Subspace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "13" => Ok(Subspace::S13),
            "23" => Ok(Subspace::S23),
            "12" => Ok(Subspace::S12),
            other => Err(Error::invalid(format!("unknown subspace {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub low_confidence: bool,
}

impl BlochPoint {
    pub fn transverse(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }
}

/// `u = 2 Re ρᵢⱼ`, `v = 2 Im ρᵢⱼ`, `w = ρⱼⱼ − ρᵢᵢ`.
pub fn bloch_point(t: f64, rho: &DensityMatrix, subspace: Subspace) -> BlochPoint {
    let (i, j) = subspace.levels();
    let m = rho.matrix();
    let z = m[(i, j)];
    let (pi, pj) = (m[(i, i)].re, m[(j, j)].re);
    BlochPoint {
        t,
        u: 2.0 * z.re,
        v: 2.0 * z.im,
        w: pj - pi,
        low_confidence: pi + pj < LOW_POPULATION,
    }
}

pub fn bloch_trajectory(
    times: &[f64],
    states: &[DensityMatrix],
    subspace: Subspace,
) -> Result<Vec<BlochPoint>> {
    if times.len() != states.len() {
        return Err(Error::invalid(format!(
            "{} times for {} states",
            times.len(),
            states.len()
        )));
    }
    Ok(times
        .iter()
        .zip(states)
        .map(|(&t, rho)| bloch_point(t, rho, subspace))
        .collect())
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn ground_state_points_down() {
        let p = bloch_point(0.0, &DensityMatrix::ground(), Subspace::S13);
        assert_eq!((p.u, p.v, p.w), (0.0, 0.0, -1.0));
        assert!(!p.low_confidence);
    }

    #[test]
    fn empty_subspace_is_low_confidence() {
        let p = bloch_point(0.0, &DensityMatrix::ground(), Subspace::S23);
        assert!(p.low_confidence);
    }

    #[test]
    fn equal_superposition_lies_on_the_equator() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::pure([
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -s),
        ])
        .unwrap();
        let p = bloch_point(0.0, &rho, Subspace::S13);
        assert!(p.w.abs() < 1e-15);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!((p.v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(bloch_trajectory(&[0.0, 1.0], &[DensityMatrix::ground()], Subspace::S13).is_err());
    }
}
