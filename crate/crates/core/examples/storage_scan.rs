//! Echo amplitude versus storage delay for a scan preset.
//!
//! ```text
//! cargo run --release --example storage_scan -- fig3a
//! cargo run --release --example storage_scan -- fig3b
//! ```

use photon_echo::analysis::{fit_decay, DecayModel};
use photon_echo::{engine, presets};

fn main() -> photon_echo::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig3a".into());
    let cfg = presets::load(&name)?;
    let scan = cfg.scan.as_ref().expect("preset has a scan block");
    let result = engine::scan_storage(&cfg.run, &scan.values)?;
    let max = result
        .amplitudes()
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    println!("{name}: B2 center (us)  echo (us)  |P|  rel");
    for p in &result.points {
        match (&p.echo, &p.failure) {
            (Some(e), _) => println!(
                "  {:10.3}  {:10.3}  {:.5}  {:.3}",
                p.axis * 1e6,
                e.t_peak * 1e6,
                e.amplitude,
                e.amplitude / max
            ),
            (None, Some(f)) => println!("  {:10.3}  skipped: {f}", p.axis * 1e6),
            _ => unreachable!(),
        }
    }
    let points = result.storage_points();
    for model in [DecayModel::Exp, DecayModel::ExpOffset] {
        match fit_decay(&points, model) {
            Ok(fit) => println!(
                "  {model:10} A = {:.4}  tau = {:.1} us  C = {:.4}  rms = {:.2e}  converged = {}",
                fit.a,
                fit.tau * 1e6,
                fit.c.unwrap_or(0.0),
                fit.rms_residual,
                fit.converged
            ),
            Err(e) => println!("  {model:10} {e}"),
        }
    }
    Ok(())
}
