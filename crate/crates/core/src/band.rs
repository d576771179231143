//! Sweep band configuration and the mechanical rotation grid of the sounder.
//!
//! The sounder measures one frequency sweep per rx rotation step. A
//! [`BandConfig`] pins the sweep layout (start/stop/points) together with the
//! antenna and noise parameters that the extraction threshold needs; a
//! [`ScanGrid`] lists the azimuth/elevation steps of the rotator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT_M_PER_S;

/// Noise floor used for receivers in the line-of-sight corridor, dBm.
pub const NOISE_FLOOR_LOS_CORRIDOR_DBM: f64 = -165.0;
/// Noise floor used for receivers in the shadowed (wide) corridor, dBm.
pub const NOISE_FLOOR_NLOS_CORRIDOR_DBM: f64 = -180.0;

/// The two measured sweep bands, 15 GHz wide each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    /// 306–321 GHz.
    #[serde(rename = "306-321")]
    G306_321,
    /// 356–371 GHz.
    #[serde(rename = "356-371")]
    G356_371,
}

impl Band {
    /// Sweep configuration for this band with the default sounder parameters.
    pub fn config(self) -> BandConfig {
        match self {
            Band::G306_321 => BandConfig::new(306e9, 321e9, 6001),
            Band::G356_371 => BandConfig::new(356e9, 371e9, 6001),
        }
    }

    /// Short human-readable label, e.g. `"306-321"`.
    pub fn label(self) -> &'static str {
        match self {
            Band::G306_321 => "306-321",
            Band::G356_371 => "356-371",
        }
    }

    pub fn all() -> [Band; 2] {
        [Band::G306_321, Band::G356_371]
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Band> {
        match s {
            "306-321" => Ok(Band::G306_321),
            "356-371" => Ok(Band::G356_371),
            other => Err(Error::InvalidParameter {
                what: format!("unknown band {other:?} (expected 306-321 or 356-371)"),
            }),
        }
    }
}

/// Frequency sweep layout plus the sounder parameters tied to it.
///
/// Antenna gains, beamwidths and the noise floor default to the corridor
/// sounder values; override fields directly (or use
/// [`BandConfig::with_noise_floor_dbm`]) for other deployments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    /// First sweep tone, Hz.
    pub f_start_hz: f64,
    /// Last sweep tone, Hz.
    pub f_stop_hz: f64,
    /// Number of sweep tones (inclusive of both ends).
    pub n_points: usize,
    /// Tx horn gain, dBi.
    pub tx_gain_dbi: f64,
    /// Rx horn gain, dBi.
    pub rx_gain_dbi: f64,
    /// Tx half-power beamwidth, degrees.
    pub tx_hpbw_deg: f64,
    /// Rx half-power beamwidth, degrees.
    pub rx_hpbw_deg: f64,
    /// Noise floor at the rx, dBm. Corridor-dependent; see
    /// [`NOISE_FLOOR_LOS_CORRIDOR_DBM`] / [`NOISE_FLOOR_NLOS_CORRIDOR_DBM`].
    pub noise_floor_dbm: f64,
    /// Dynamic range of the sounder hardware, dB.
    pub system_dynamic_range_db: f64,
    /// Dynamic range kept for analysis below the strongest sample, dB.
    pub analysis_dynamic_range_db: f64,
    /// Normalized transmit power, dBm. With the default 0 dBm a received
    /// power in dB is the negative of the path loss.
    pub tx_power_dbm: f64,
}

impl BandConfig {
    /// Sweep layout with the default sounder parameters (7/25 dBi horns,
    /// 60°/8° beamwidths, −165 dBm noise floor, 65 dB system and 30 dB
    /// analysis dynamic range, 0 dBm normalized transmit power).
    pub fn new(f_start_hz: f64, f_stop_hz: f64, n_points: usize) -> BandConfig {
        BandConfig {
            f_start_hz,
            f_stop_hz,
            n_points,
            tx_gain_dbi: 7.0,
            rx_gain_dbi: 25.0,
            tx_hpbw_deg: 60.0,
            rx_hpbw_deg: 8.0,
            noise_floor_dbm: NOISE_FLOOR_LOS_CORRIDOR_DBM,
            system_dynamic_range_db: 65.0,
            analysis_dynamic_range_db: 30.0,
            tx_power_dbm: 0.0,
        }
    }

    pub fn with_noise_floor_dbm(mut self, noise_floor_dbm: f64) -> BandConfig {
        self.noise_floor_dbm = noise_floor_dbm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_start_hz.is_finite() && self.f_stop_hz.is_finite()) {
            return Err(Error::InvalidParameter {
                what: "band edges must be finite".into(),
            });
        }
        if self.f_start_hz <= 0.0 || self.f_stop_hz <= self.f_start_hz {
            return Err(Error::InvalidParameter {
                what: format!(
                    "band edges must satisfy 0 < f_start < f_stop, got {} .. {}",
                    self.f_start_hz, self.f_stop_hz
                ),
            });
        }
        if self.n_points < 2 {
            return Err(Error::InvalidParameter {
                what: format!("need at least 2 sweep points, got {}", self.n_points),
            });
        }
        Ok(())
    }

    /// Swept bandwidth `f_stop - f_start`, Hz.
    pub fn span_hz(&self) -> f64 {
        self.f_stop_hz - self.f_start_hz
    }

    /// Tone spacing, Hz (span over `n_points - 1` intervals).
    pub fn freq_step_hz(&self) -> f64 {
        self.span_hz() / (self.n_points as f64 - 1.0)
    }

    /// Center frequency, Hz.
    pub fn center_hz(&self) -> f64 {
        0.5 * (self.f_start_hz + self.f_stop_hz)
    }

    /// Frequency of sweep tone `k`, Hz.
    pub fn freq_at_hz(&self, k: usize) -> f64 {
        self.f_start_hz + k as f64 * self.freq_step_hz()
    }

    /// Nominal delay resolution `1 / span`, seconds.
    pub fn time_resolution_s(&self) -> f64 {
        1.0 / self.span_hz()
    }

    /// Unambiguous excess-delay span `1 / freq_step`, seconds.
    pub fn max_excess_delay_s(&self) -> f64 {
        1.0 / self.freq_step_hz()
    }

    /// Longest unambiguous path, meters.
    pub fn max_path_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_PER_S * self.max_excess_delay_s()
    }

    /// Width of one impulse-response delay bin, seconds.
    ///
    /// This is the exact DFT bin `1 / (n_points · freq_step)`; it differs from
    /// [`BandConfig::time_resolution_s`] (`1 / span`) by one part in
    /// `n_points`.
    pub fn cir_bin_s(&self) -> f64 {
        1.0 / (self.n_points as f64 * self.freq_step_hz())
    }
}

/// One pointing direction of the rx rotator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub az_deg: f64,
    pub el_deg: f64,
}

impl Direction {
    pub fn new(az_deg: f64, el_deg: f64) -> Direction {
        Direction { az_deg, el_deg }
    }
}

/// Azimuth × elevation steps scanned by the rx rotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    /// Azimuth steps, degrees in [0°, 360°), strictly increasing.
    pub azimuths_deg: Vec<f64>,
    /// Elevation steps, degrees in [−90°, 90°], strictly increasing.
    pub elevations_deg: Vec<f64>,
}

impl ScanGrid {
    /// The default rotation grid: azimuth 0°..350° in 10° steps, elevation
    /// −20°..20° in 10° steps.
    pub fn default_rx() -> ScanGrid {
        ScanGrid {
            azimuths_deg: (0..36).map(|i| 10.0 * i as f64).collect(),
            elevations_deg: (-2..=2).map(|i| 10.0 * i as f64).collect(),
        }
    }

    /// Same azimuth circle but only the horizontal elevation cut.
    pub fn azimuth_circle() -> ScanGrid {
        ScanGrid {
            azimuths_deg: (0..36).map(|i| 10.0 * i as f64).collect(),
            elevations_deg: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.azimuths_deg.is_empty() {
            return Err(Error::EmptyInput {
                what: "scan grid azimuths",
            });
        }
        if self.elevations_deg.is_empty() {
            return Err(Error::EmptyInput {
                what: "scan grid elevations",
            });
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.azimuths_deg)
            || self.azimuths_deg.iter().any(|a| !(0.0..360.0).contains(a))
        {
            return Err(Error::InvalidParameter {
                what: "scan azimuths must be strictly increasing in [0, 360)".into(),
            });
        }
        if !increasing(&self.elevations_deg)
            || self
                .elevations_deg
                .iter()
                .any(|e| !(-90.0..=90.0).contains(e))
        {
            return Err(Error::InvalidParameter {
                what: "scan elevations must be strictly increasing in [-90, 90]".into(),
            });
        }
        Ok(())
    }

    /// All directions in row-major (elevation outer, azimuth inner) order.
    pub fn directions(&self) -> Vec<Direction> {
        let mut out = Vec::with_capacity(self.azimuths_deg.len() * self.elevations_deg.len());
        for &el in &self.elevations_deg {
            for &az in &self.azimuths_deg {
                out.push(Direction::new(az, el));
            }
        }
        out
    }
}
