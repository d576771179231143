//! Plot-ready structured reports emitted as TOML.

use lshape_channel::evolve::EvolvedDominant;
use lshape_channel::pathloss::{AbFit, CiFit, MabFit, PlKind};
use serde::{Deserialize, Serialize};

/// Delay/angle dispersion summary of one MPC list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadsReport {
    pub rx_id: String,
    pub band: String,
    pub n_mpcs: usize,
    pub n_clusters: usize,
    pub delay_spread_ns: f64,
    pub azimuth_spread_deg: f64,
    pub elevation_spread_deg: f64,
}

/// One fitted path-loss model plus the sample set it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlfitReport {
    pub kind: PlKind,
    /// Samples the fit actually used.
    pub n_samples: usize,
    /// Samples dropped because they sit at or before the corner (only the
    /// corner-referenced model excludes anything).
    #[serde(default)]
    pub n_excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<CiFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ab: Option<AbFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mab: Option<MabFit>,
}

/// Dominant-path forecast along a corridor slide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub anchor_rx_id: String,
    pub band: String,
    pub k: f64,
    pub anchor_bent_m: f64,
    pub rows: Vec<EvolveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveRow {
    pub delta_d_m: f64,
    pub toa_ns: f64,
    pub power_db: f64,
    pub aoa_outer_deg: f64,
    pub aoa_inner_deg: f64,
}

impl EvolveRow {
    pub fn from_dominant(ev: &EvolvedDominant) -> EvolveRow {
        EvolveRow {
            delta_d_m: ev.delta_d_m,
            toa_ns: ev.toa_ns,
            power_db: ev.power_db,
            aoa_outer_deg: ev.aoa_outer_deg,
            aoa_inner_deg: ev.aoa_inner_deg,
        }
    }
}
