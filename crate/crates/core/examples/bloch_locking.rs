//! Bloch-vector picture of optical locking for one detuned atom, no decay.
//!
//! B1 empties the 1–3 coherence into the spin coherence; B2 (3π) restores it.
//! With the optical phase held during storage the restoration is exact.

use photon_echo::analysis::{bloch_point, Subspace};
use photon_echo::bloch::RelaxationRates;
use photon_echo::protocol::PulseLabel;
use photon_echo::{engine, presets};

fn main() -> photon_echo::Result<()> {
    let mut cfg = presets::load("fig2_locked")?.run;
    cfg.rates = RelaxationRates::NONE;
    cfg.retain_atoms = vec![20e3];
    cfg.snapshot_times.clear();
    let seq = cfg.sequence.clone();
    let edge = |l: PulseLabel| seq.pulse(l).expect("locked sequence");
    let marks = [
        ("D", edge(PulseLabel::Data).end()),
        ("W (1)", edge(PulseLabel::Write).end()),
        ("B1 (2)", edge(PulseLabel::B1).end()),
        ("B2 start", edge(PulseLabel::B2).t_start),
        ("B2 end (3)", edge(PulseLabel::B2).end()),
    ];
    for freeze in [false, true] {
        cfg.freeze_storage_phase = freeze;
        let out = engine::run(&cfg)?;
        let atom = &out.retained[0];
        println!("delta = {:.0} kHz, phase held during storage: {freeze}", atom.delta_opt * 1e-3);
        for (label, t) in marks {
            let p = bloch_point(t, atom.state_at(t), Subspace::S13);
            let s = bloch_point(t, atom.state_at(t), Subspace::S12);
            println!(
                "  {label:11} t = {:8.3} us  13: u = {:+.6} v = {:+.6} w = {:+.6} |uv| = {:.3e}   12: |uv| = {:.6}",
                t * 1e6,
                p.u,
                p.v,
                p.w,
                p.transverse(),
                s.transverse()
            );
        }
    }
    Ok(())
}
