//! Multipath components and clusters of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, wrap_az_deg};

/// One resolved multipath component.
///
/// Power is in dB relative to the normalized 0 dBm transmit power, so
/// `power_db == -path_loss_db`. One MPC is reported per (direction, delay
/// bin) sample; no super-resolution is attempted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mpc {
    /// Time of arrival, nanoseconds.
    pub toa_ns: f64,
    /// Arrival azimuth, degrees in [0°, 360°).
    pub aoa_az_deg: f64,
    /// Arrival elevation, degrees in [−90°, 90°].
    pub aoa_el_deg: f64,
    /// Received power, dB (0 dBm transmit convention).
    pub power_db: f64,
}

impl Mpc {
    /// Build an MPC, wrapping the azimuth into [0°, 360°) and validating the
    /// remaining fields.
    pub fn new(toa_ns: f64, aoa_az_deg: f64, aoa_el_deg: f64, power_db: f64) -> Result<Mpc> {
        let mpc = Mpc {
            toa_ns,
            aoa_az_deg: wrap_az_deg(aoa_az_deg),
            aoa_el_deg,
            power_db,
        };
        mpc.validate()?;
        Ok(mpc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.toa_ns.is_finite() && self.toa_ns >= 0.0) {
            return Err(Error::InvalidParameter {
                what: format!("MPC toa must be finite and >= 0 ns, got {}", self.toa_ns),
            });
        }
        if !(0.0..360.0).contains(&self.aoa_az_deg) {
            return Err(Error::InvalidParameter {
                what: format!("MPC azimuth must be in [0, 360), got {}", self.aoa_az_deg),
            });
        }
        if !(-90.0..=90.0).contains(&self.aoa_el_deg) {
            return Err(Error::InvalidParameter {
                what: format!("MPC elevation must be in [-90, 90], got {}", self.aoa_el_deg),
            });
        }
        if !self.power_db.is_finite() {
            return Err(Error::InvalidParameter {
                what: format!("MPC power must be finite dB, got {}", self.power_db),
            });
        }
        Ok(())
    }

    /// Power as a linear factor.
    pub fn linear_power(&self) -> f64 {
        db_to_linear(self.power_db)
    }
}

/// Keep only MPCs within `range_db` of the strongest one.
///
/// An empty input stays empty. `range_db` must be ≥ 0.
pub fn filter_dynamic_range(mpcs: &[Mpc], range_db: f64) -> Vec<Mpc> {
    assert!(
        range_db.is_finite() && range_db >= 0.0,
        "dynamic range must be finite and >= 0 dB"
    );
    let Some(max_db) = mpcs
        .iter()
        .map(|m| m.power_db)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))))
    else {
        return Vec::new();
    };
    mpcs.iter()
        .filter(|m| m.power_db >= max_db - range_db)
        .cloned()
        .collect()
}

/// Origin of a cluster in a hybrid realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterKind {
    /// Centered on a deterministic (traced or evolved) dominant path.
    Rt,
    /// Fully statistical cluster.
    NonRt,
}

impl std::fmt::Display for ClusterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClusterKind::Rt => "rt",
            ClusterKind::NonRt => "non-rt",
        })
    }
}

/// A cluster: one center MPC plus its subpaths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub kind: ClusterKind,
    pub center: Mpc,
    pub subpaths: Vec<Mpc>,
}

impl Cluster {
    /// Center followed by subpaths.
    pub fn mpcs(&self) -> impl Iterator<Item = &Mpc> {
        std::iter::once(&self.center).chain(self.subpaths.iter())
    }

    /// Sum of linear powers over center and subpaths.
    pub fn total_linear_power(&self) -> f64 {
        self.mpcs().map(Mpc::linear_power).sum()
    }
}
