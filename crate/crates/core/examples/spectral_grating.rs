//! Population grating burned by DATA and WRITE, measured by a DFT over the
//! detuning axis.

use photon_echo::analysis::snapshot_grating;
use photon_echo::protocol::PulseLabel;
use photon_echo::{engine, presets};

fn main() -> photon_echo::Result<()> {
    let mut cfg = presets::load("fig2_locked")?.run;
    let seq = &cfg.sequence;
    let d = seq.pulse(PulseLabel::Data).expect("DATA").center();
    let w = seq.pulse(PulseLabel::Write).expect("WRITE");
    cfg.snapshot_times = vec![0.0, w.end()];
    let separation = w.center() - d;
    let out = engine::run(&cfg)?;
    for snap in &out.snapshots {
        let g = snapshot_grating(snap)?;
        match g.period {
            None => println!("t = {:7.3} us: flat, no grating", snap.t * 1e6),
            Some(p) => println!(
                "t = {:7.3} us: peak bin {} (expected {:.2}), period {:.1} kHz (1/separation = {:.1} kHz)",
                snap.t * 1e6,
                g.peak_bin,
                g.expected_bin(separation),
                p * 1e-3,
                1e-3 / separation
            ),
        }
    }
    let snap = &out.snapshots[1];
    println!("\n  delta (kHz)   rho33");
    for i in (60..=100).step_by(4) {
        println!("  {:10.1}   {:.4}", snap.delta[i] * 1e-3, snap.rho33[i]);
    }
    Ok(())
}
