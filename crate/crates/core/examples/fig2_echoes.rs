//! Two-pulse, stimulated and optically locked echoes with the same relaxation.
//!
//! The locked echo should match the two-pulse reference while the stimulated
//! echo loses most of its amplitude to excited-state decay during storage.

use std::time::Instant;

use photon_echo::{engine, presets, protocol};

fn main() -> photon_echo::Result<()> {
    let mut reference = None;
    for name in ["fig2_twopulse", "fig2_threepulse", "fig2_locked"] {
        let cfg = presets::load(name)?;
        let start = Instant::now();
        let out = engine::run(&cfg.run)?;
        let echo = engine::measure_echo(&cfg.run.sequence, &out.signal)?;
        let expected = protocol::expected_echo_time(&cfg.run.sequence)?;
        let reference = *reference.get_or_insert(echo.amplitude);
        println!(
            "{name:16} echo {:8.3} us (expected {:8.3})  |P| = {:.5}  ratio {:.3}  fwhm {:.3} us  [{:.1} s]",
            echo.t_peak * 1e6,
            expected * 1e6,
            echo.amplitude,
            echo.amplitude / reference,
            echo.fwhm * 1e6,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
