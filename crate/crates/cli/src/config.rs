//! The config document: one TOML file with a section per subsystem. Every
//! field has a compiled-in default, so an empty file is the default setup.

use seaowc_core::performance::ScenarioConfig;
use seaowc_core::tracking::TrackingConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub analysis: ScenarioConfig,
    pub monte_carlo: MonteCarlo,
    pub tracking: TrackingConfig,
    pub track: TrackRun,
    pub frame: Frame,
}

/// Sampling settings. The worker count is a command-line matter: it cannot
/// change results, so it stays out of the recorded config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarlo {
    pub samples: u64,
    pub seed: u64,
    pub batch_size: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        let d = seaowc_core::montecarlo::McSettings::default();
        MonteCarlo {
            samples: d.samples,
            seed: d.seed,
            batch_size: d.batch_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackRun {
    pub trials: usize,
    pub seed: u64,
}

impl Default for TrackRun {
    fn default() -> Self {
        TrackRun { trials: 500, seed: 1 }
    }
}

/// Framing of the data streams. Recorded with each run; no computation
/// reads it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Frame {
    pub bandwidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub streams: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uplink_subslot_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub header_slot_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trailer_slot_s: Option<f64>,
}

impl Default for Frame {
    fn default() -> Self {
        Frame {
            bandwidth_hz: 20e6,
            streams: None,
            slot_s: None,
            uplink_subslot_s: None,
            header_slot_s: None,
            trailer_slot_s: None,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Config::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |e: seaowc_core::Error| ConfigError(e.to_string());
        self.analysis.validate().map_err(wrap)?;
        // link parameters are checked when the chain is built
        seaowc_core::performance::Chain::new(&self.analysis).map_err(wrap)?;
        self.tracking.validate().map_err(wrap)?;
        if self.monte_carlo.samples == 0 || self.monte_carlo.batch_size == 0 {
            return Err(ConfigError("monte_carlo.samples and batch_size must be positive".into()));
        }
        if self.track.trials == 0 {
            return Err(ConfigError("track.trials must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(Config::parse("", "x").unwrap(), Config::default());
    }

    #[test]
    fn dump_round_trips() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.to_toml(), "dump").unwrap(), c);
    }

    #[test]
    fn unknown_field_names_the_line() {
        let e = Config::parse("[analysis]\nscenario = \"SUR\"\nsnr_gird = 3\n", "cfg.toml").unwrap_err();
        assert!(e.0.contains("snr_gird") && e.0.contains("line 3"), "{}", e.0);
    }
}
