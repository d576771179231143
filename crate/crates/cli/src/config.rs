//! Run configuration: a single TOML file whose fields individual flags can
//! override. The effective configuration is written into every output
//! directory (`run-config.toml`) so artifacts are self-describing.

use std::path::{Path, PathBuf};

use lshape_channel::io::{read_toml, write_toml};
use lshape_channel::Band;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Sweep band; selects the sounder frequency plan and noise floor.
    pub band: Band,
    /// Master seed for every randomized stage.
    pub seed: u64,
    /// Analysis window below the strongest sample, dB.
    pub dynamic_range_db: f64,
    /// Override of the band's noise floor, dBm (e.g. for the quieter
    /// shadowed corridor); `None` keeps the band default.
    pub noise_floor_dbm: Option<f64>,
    /// Output directory; every command writes only below it.
    pub out: PathBuf,
    /// Cascaded tx+rx antenna gain removed during calibration, dB.
    pub antenna_gain_db: f64,
    /// Attenuator gain restored during calibration, dB.
    pub attenuator_gain_db: f64,
    /// Minimum prominence for a detected beam, dB.
    pub beam_min_prominence_db: f64,
    /// Power assigned to empty profile bins, dBm.
    pub profile_floor_dbm: f64,
    /// Delay gate for greedy clustering, ns.
    pub cluster_delay_gate_ns: f64,
    /// Angle gate for greedy clustering, degrees.
    pub cluster_angle_gate_deg: f64,
    /// Reflection order for deterministic tracing.
    pub max_bounces: usize,
    /// Traced paths within this window of the strongest become cluster
    /// centers at unshadowed positions, dB.
    pub rt_window_db: f64,
    /// Close-in reference distance for path-loss fitting, m.
    pub d0_m: f64,
    /// Beamwidth used when expanding a realization into per-steering
    /// impulse responses, degrees.
    pub capture_hpbw_deg: f64,
    /// Fraction of an rx slide the wall interaction follows, in [0, 1].
    pub evolve_k: f64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            band: Band::G306_321,
            seed: 1,
            dynamic_range_db: 30.0,
            noise_floor_dbm: None,
            out: PathBuf::from("out"),
            antenna_gain_db: 32.0,
            attenuator_gain_db: 60.0,
            beam_min_prominence_db: 15.0,
            profile_floor_dbm: -190.0,
            cluster_delay_gate_ns: 15.0,
            cluster_angle_gate_deg: 15.0,
            max_bounces: 4,
            rt_window_db: 30.0,
            d0_m: 1.0,
            capture_hpbw_deg: 10.0,
            evolve_k: 0.75,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        Ok(read_toml(path)?)
    }

    /// Write the effective configuration next to the artifacts. The output
    /// directory itself is recorded as `"."` so the file does not depend on
    /// where the tree was materialized.
    pub fn write_provenance(&self, out_dir: &Path) -> anyhow::Result<()> {
        let mut snapshot = self.clone();
        snapshot.out = PathBuf::from(".");
        write_toml(&out_dir.join("run-config.toml"), &snapshot)?;
        Ok(())
    }

    /// Comment lines embedded in CSV artifacts.
    pub fn provenance_comments(&self) -> Vec<String> {
        vec![
            format!("band = {}", self.band),
            format!("seed = {}", self.seed),
            format!("dynamic_range_db = {}", self.dynamic_range_db),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::tempdir;

    #[test]
    fn partial_config_files_fill_in_defaults() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "band = \"356-371\"\nseed = 9\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.band, Band::G356_371);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.dynamic_range_db, RunConfig::default().dynamic_range_db);
    }

    #[test]
    fn provenance_is_location_independent() {
        let dir = tempdir().unwrap();
        let cfg = RunConfig {
            out: dir.path().join("somewhere/deep"),
            ..RunConfig::default()
        };
        cfg.write_provenance(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("run-config.toml")).unwrap();
        assert!(text.contains("out = \".\""), "{text}");
        let back = RunConfig::load(&dir.path().join("run-config.toml")).unwrap();
        assert_eq!(back.band, cfg.band);
    }
}
