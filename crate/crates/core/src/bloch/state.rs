use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// One of the three atomic levels. `One` and `Two` are the ground (spin)
/// states, `Three` is the optically excited state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    One,
    Two,
    Three,
}

impl Level {
    pub const fn index(self) -> usize {
        match self {
            Level::One => 0,
            Level::Two => 1,
            Level::Three => 2,
        }
    }
}

/// Single-atom density matrix of the Λ system.
///
/// Matrix indices `0, 1, 2` correspond to levels |1⟩, |2⟩, |3⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(pub(crate) Matrix3<Complex64>);

impl DensityMatrix {
    /// All population in |1⟩.
    pub fn ground() -> Self {
        Self::from_populations_unchecked([1.0, 0.0, 0.0])
    }

    /// Diagonal (incoherent) state with the given level populations.
    pub fn from_populations(populations: [f64; 3]) -> Result<Self> {
        if populations.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(format!(
                "populations must be finite and non-negative, got {populations:?}"
            )));
        }
        let sum: f64 = populations.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "populations must sum to 1, got {sum}"
            )));
        }
        Ok(Self::from_populations_unchecked(populations))
    }

    fn from_populations_unchecked(p: [f64; 3]) -> Self {
        let mut m = Matrix3::zeros();
        for (i, pi) in p.iter().enumerate() {
            m[(i, i)] = Complex64::new(*pi, 0.0);
        }
        DensityMatrix(m)
    }

    /// Pure state `|ψ⟩⟨ψ|`; the amplitudes are normalized first.
    pub fn pure(amplitudes: [Complex64; 3]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid("state vector must be finite and non-zero"));
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        let m = Matrix3::from_fn(|i, j| psi[i] * psi[j].conj());
        Ok(DensityMatrix(m))
    }

    /// Wraps a raw matrix without checking any invariant.
    pub fn from_matrix(m: Matrix3<Complex64>) -> Self {
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn element(&self, row: Level, col: Level) -> Complex64 {
        self.0[(row.index(), col.index())]
    }

    pub fn rho11(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn rho22(&self) -> f64 {
        self.0[(1, 1)].re
    }

    pub fn rho33(&self) -> f64 {
        self.0[(2, 2)].re
    }

    pub fn rho12(&self) -> Complex64 {
        self.0[(0, 1)]
    }

    pub fn rho13(&self) -> Complex64 {
        self.0[(0, 2)]
    }

    pub fn rho23(&self) -> Complex64 {
        self.0[(1, 2)]
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.rho11(), self.rho22(), self.rho33()]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `trace(ρ²)`, equal to 1 for pure states.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Largest deviation `|ρ_ij − conj(ρ_ji)|` over all element pairs.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i..3 {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let herm = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigenvalues();
        let mut ev = [eig[0], eig[1], eig[2]];
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Replaces ρ with (ρ + ρ†)/2.
    pub fn symmetrize(&mut self) {
        self.0 = symmetrized(&self.0);
    }

    /// Largest absolute element difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn symmetrized(m: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let mut out = *m;
    for i in 0..3 {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..3 {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}
