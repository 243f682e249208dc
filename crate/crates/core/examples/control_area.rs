//! Locked-echo amplitude versus B2 area with B1 fixed at π and no relaxation.
//!
//! The echo is strongest when B1 + B2 is a multiple of 4π.

use std::f64::consts::PI;

use photon_echo::bloch::RelaxationRates;
use photon_echo::{engine, presets};

fn main() -> photon_echo::Result<()> {
    let mut cfg = presets::load("fig2_locked")?.run;
    cfg.rates = RelaxationRates::NONE;
    cfg.snapshot_times.clear();
    cfg.retain_atoms.clear();
    let areas: Vec<f64> = (1..=4).map(|n| n as f64 * PI).collect();
    let scan = engine::scan_b2_area(&cfg, &areas)?;
    for (area, amp) in areas.iter().zip(scan.amplitudes()) {
        println!("B2 = {:.0} pi   |P| = {:.5}", area / PI, amp.unwrap_or(f64::NAN));
    }
    Ok(())
}
