//! Independent reference propagator: the master equation written out as a
//! 9×9 Liouvillian acting on row-major vec(ρ), exponentiated by a scaled
//! Taylor series. Shares nothing with the crate's integrators.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;

pub type Liouvillian = SMatrix<Complex64, 9, 9>;

pub const US: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct Physics {
    pub omega_a: f64,
    pub omega_b: f64,
    pub phase_a: f64,
    pub phase_b: f64,
    pub delta_opt: f64,
    pub delta_spin: f64,
    /// Decay constants in s⁻¹.
    pub pop_31: f64,
    pub pop_32: f64,
    pub pop_12: f64,
    pub coh_13: f64,
    pub coh_23: f64,
    pub coh_12: f64,
    pub literal: bool,
}

impl Physics {
    pub fn lossless(omega_a: f64, omega_b: f64, delta_opt: f64, delta_spin: f64) -> Self {
        Physics {
            omega_a,
            omega_b,
            phase_a: 0.0,
            phase_b: 0.0,
            delta_opt,
            delta_spin,
            pop_31: 0.0,
            pop_32: 0.0,
            pop_12: 0.0,
            coh_13: 0.0,
            coh_23: 0.0,
            coh_12: 0.0,
            literal: false,
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn idx(i: usize, j: usize) -> usize {
    3 * i + j
}

/// L such that d vec(ρ)/dt = L vec(ρ).
pub fn liouvillian(p: &Physics) -> Liouvillian {
    let mut h = [[c(0.0, 0.0); 3]; 3];
    h[0][2] = Complex64::from_polar(PI * p.omega_a, p.phase_a);
    h[2][0] = h[0][2].conj();
    h[1][2] = Complex64::from_polar(PI * p.omega_b, p.phase_b);
    h[2][1] = h[1][2].conj();
    h[1][1] = c(2.0 * PI * p.delta_spin, 0.0);
    h[2][2] = c(2.0 * PI * p.delta_opt, 0.0);

    let mut l = Liouvillian::zeros();
    let minus_i = c(0.0, -1.0);
    // −i(Hρ − ρH): (Hρ)_ij = Σ_k H_ik ρ_kj, (ρH)_ij = Σ_k ρ_ik H_kj
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                l[(idx(i, j), idx(k, j))] += minus_i * h[i][k];
                l[(idx(i, j), idx(i, k))] -= minus_i * h[k][j];
            }
        }
    }
    let r = |x: f64| c(x, 0.0);
    if p.literal {
        let g = [p.pop_12, p.pop_12, p.pop_31 + p.pop_32];
        for i in 0..3 {
            for j in 0..3 {
                l[(idx(i, j), idx(i, j))] -= r(0.5 * (g[i] + g[j]));
            }
        }
    } else {
        let g3 = p.pop_31 + p.pop_32;
        l[(idx(2, 2), idx(2, 2))] -= r(g3);
        l[(idx(0, 0), idx(2, 2))] += r(p.pop_31);
        l[(idx(1, 1), idx(2, 2))] += r(p.pop_32);
        l[(idx(0, 0), idx(0, 0))] -= r(p.pop_12);
        l[(idx(0, 0), idx(1, 1))] += r(p.pop_12);
        l[(idx(1, 1), idx(1, 1))] -= r(p.pop_12);
        l[(idx(1, 1), idx(0, 0))] += r(p.pop_12);
        for (i, j, g) in [(0, 2, p.coh_13), (1, 2, p.coh_23), (0, 1, p.coh_12)] {
            l[(idx(i, j), idx(i, j))] -= r(g);
            l[(idx(j, i), idx(j, i))] -= r(g);
        }
    }
    if p.literal {
        l[(idx(0, 1), idx(0, 1))] -= r(p.coh_12);
        l[(idx(1, 0), idx(1, 0))] -= r(p.coh_12);
    }
    l
}

/// `e^{L t}` by scaling and squaring with a 30-term Taylor series.
pub fn expm(l: &Liouvillian, t: f64) -> Liouvillian {
    let a = l * c(t, 0.0);
    let norm: f64 = (0..9)
        .map(|i| (0..9).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = a * c(0.5f64.powi(s), 0.0);
    let mut term = Liouvillian::identity();
    let mut sum = Liouvillian::identity();
    for k in 1..=30 {
        term = term * a * c(1.0 / k as f64, 0.0);
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

pub fn vec_of(m: &Matrix3<Complex64>) -> SVector<Complex64, 9> {
    SVector::from_fn(|k, _| m[(k / 3, k % 3)])
}

pub fn mat_of(v: &SVector<Complex64, 9>) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| v[idx(i, j)])
}

/// Reference evolution of `rho` over `t` under constant physics.
pub fn evolve(p: &Physics, rho: &Matrix3<Complex64>, t: f64) -> Matrix3<Complex64> {
    mat_of(&(expm(&liouvillian(p), t) * vec_of(rho)))
}

pub fn max_diff(a: &Matrix3<Complex64>, b: &Matrix3<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
