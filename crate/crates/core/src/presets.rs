//! Bundled configurations, addressable by name.

use crate::config::{parse_str, Config};
use crate::error::{Error, Result};

pub const NAMES: &[&str] = &[
    "fig2_twopulse",
    "fig2_threepulse",
    "fig2_locked",
    "fig3a",
    "fig3b",
    "fig4_like",
];

/// TOML text of a preset.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2_twopulse" => include_str!("../presets/fig2_twopulse.toml"),
        "fig2_threepulse" => include_str!("../presets/fig2_threepulse.toml"),
        "fig2_locked" => include_str!("../presets/fig2_locked.toml"),
        "fig3a" => include_str!("../presets/fig3a.toml"),
        "fig3b" => include_str!("../presets/fig3b.toml"),
        "fig4_like" => include_str!("../presets/fig4_like.toml"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<Config> {
    let text = source(name).ok_or_else(|| {
        Error::Config(format!("unknown preset {name:?}, expected one of {}", NAMES.join(", ")))
    })?;
    parse_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for name in NAMES {
            load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(load("fig5").is_err());
    }
}
