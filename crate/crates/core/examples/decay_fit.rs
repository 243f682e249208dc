//! Millisecond storage with crystal-like lifetimes, fitted with both decay
//! models. The offset term is the part of the echo carried by the shelved
//! population grating, which does not decay with the spin coherence.

use photon_echo::analysis::{fit_decay, DecayModel};
use photon_echo::{engine, presets};

fn main() -> photon_echo::Result<()> {
    let cfg = presets::load("fig4_like")?;
    let scan = cfg.scan.as_ref().expect("scan block");
    let result = engine::scan_storage(&cfg.run, &scan.values)?;
    let points = result.storage_points();
    println!("  T (us)      |P|");
    for (t, a) in &points {
        println!("  {:8.1}   {:.5}", t * 1e6, a);
    }
    let k = cfg.run.rates.constants();
    println!("spin coherence lifetime 1/r12 = {:.1} us", 1e6 / k.spin_total());
    for model in [DecayModel::Exp, DecayModel::ExpOffset] {
        let fit = fit_decay(&points, model)?;
        println!(
            "{model:10}  A = {:.5}  tau = {:.2} us  C = {:.5}  rms = {:.2e}  converged = {}",
            fit.a,
            fit.tau * 1e6,
            fit.c.unwrap_or(0.0),
            fit.rms_residual,
            fit.converged
        );
    }
    Ok(())
}
