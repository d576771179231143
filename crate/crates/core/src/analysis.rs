//! Directional analysis of extracted MPC lists: cyclic beam finding on
//! azimuth power profiles, delay/angular spreads, arrival-time densities,
//! and greedy clustering.

use crate::error::{Error, Result};
use crate::mpc::{Cluster, ClusterKind, Mpc};
use crate::units::{cyclic_distance_deg, linear_to_db, wrap_az_deg};

/// Received power folded onto the azimuth circle (summed over delay and
/// elevation per azimuth step).
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthPowerProfile {
    /// Azimuth steps, degrees, strictly increasing in [0°, 360°).
    pub az_deg: Vec<f64>,
    /// Summed power per step, dBm.
    pub power_dbm: Vec<f64>,
}

impl AzimuthPowerProfile {
    /// Fold an MPC list onto the given azimuth steps.
    ///
    /// Each MPC adds its linear power to the cyclically nearest step; steps
    /// that receive nothing are floored at `floor_dbm` (typically the noise
    /// floor) so the profile stays finite.
    pub fn from_mpcs(mpcs: &[Mpc], azimuths_deg: &[f64], floor_dbm: f64) -> Result<AzimuthPowerProfile> {
        if azimuths_deg.is_empty() {
            return Err(Error::EmptyInput {
                what: "profile azimuth steps",
            });
        }
        if !floor_dbm.is_finite() {
            return Err(Error::InvalidParameter {
                what: "profile floor must be finite dBm".into(),
            });
        }
        let mut linear = vec![0.0f64; azimuths_deg.len()];
        for m in mpcs {
            let nearest = azimuths_deg
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    cyclic_distance_deg(m.aoa_az_deg, *a.1)
                        .total_cmp(&cyclic_distance_deg(m.aoa_az_deg, *b.1))
                })
                .map(|(i, _)| i)
                .expect("nonempty steps");
            linear[nearest] += m.linear_power();
        }
        let floor_lin = crate::units::db_to_linear(floor_dbm);
        let power_dbm = linear
            .iter()
            .map(|&p| linear_to_db(p.max(floor_lin)))
            .collect();
        let profile = AzimuthPowerProfile {
            az_deg: azimuths_deg.to_vec(),
            power_dbm,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.az_deg.len() != self.power_dbm.len() {
            return Err(Error::LengthMismatch {
                what: "profile azimuths vs powers",
                expected: self.az_deg.len(),
                got: self.power_dbm.len(),
            });
        }
        if self.az_deg.len() < 4 {
            return Err(Error::InsufficientData {
                what: "profile azimuth steps",
                needed: 4,
                got: self.az_deg.len(),
            });
        }
        let increasing = self.az_deg.windows(2).all(|w| w[0] < w[1]);
        if !increasing || self.az_deg.iter().any(|a| !(0.0..360.0).contains(a)) {
            return Err(Error::InvalidParameter {
                what: "profile azimuths must be strictly increasing in [0, 360)".into(),
            });
        }
        if self.power_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter {
                what: "profile powers must be finite dBm (floor empty bins)".into(),
            });
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.az_deg.len()
    }

    /// Cyclic arc walked when moving `steps` bins right (+) or left (−) of
    /// bin `i`, degrees in [0°, 360°).
    fn arc_deg(&self, i: usize, steps: isize) -> f64 {
        let n = self.len() as isize;
        let j = (i as isize + steps).rem_euclid(n) as usize;
        let raw = if steps >= 0 {
            self.az_deg[j] - self.az_deg[i]
        } else {
            self.az_deg[i] - self.az_deg[j]
        };
        raw.rem_euclid(360.0)
    }
}

/// A detected directional beam.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    /// Midpoint of the two half-prominence crossings, degrees in [0°, 360°).
    pub center_deg: f64,
    /// Cyclic distance between the half-prominence crossings, degrees.
    pub width_deg: f64,
    /// Azimuth of the profile sample the beam peaks at.
    pub peak_az_deg: f64,
    /// Peak power, dBm.
    pub peak_dbm: f64,
    /// Peak power over the two-sided same-level reference, dB.
    pub prominence_db: f64,
}

/// Detect beams on a cyclic azimuth profile.
///
/// A candidate is a strict local maximum. From each candidate the profile is
/// searched left and right for the nearest sample back at (or above) the
/// peak level, stopping once the search has passed 180° of arc instead of at
/// the profile ends. The prominence is the peak minus the higher of the two
/// interval minima; candidates with prominence ≥ `min_prominence_db` become
/// beams. The width spans the two samples where the profile first descends
/// half the prominence below the peak, with linear interpolation between
/// grid samples, and the center is the midpoint of those crossings.
pub fn detect_beams(profile: &AzimuthPowerProfile, min_prominence_db: f64) -> Result<Vec<Beam>> {
    profile.validate()?;
    if !(min_prominence_db.is_finite() && min_prominence_db > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("prominence threshold must be > 0 dB, got {min_prominence_db}"),
        });
    }
    let n = profile.len();
    let p = &profile.power_dbm;
    let mut beams = Vec::new();

    for i in 0..n {
        let left = (i + n - 1) % n;
        let right = (i + 1) % n;
        if !(p[i] > p[left] && p[i] > p[right]) {
            continue;
        }

        // Interval minimum on one side, searching up to 180° of arc for a
        // sample back at the peak level.
        let side_min = |dir: isize| -> f64 {
            let mut min_val = f64::INFINITY;
            for k in 1..n as isize {
                if profile.arc_deg(i, dir * k) > 180.0 {
                    break;
                }
                let j = (i as isize + dir * k).rem_euclid(n as isize) as usize;
                if p[j] >= p[i] {
                    break;
                }
                min_val = min_val.min(p[j]);
            }
            min_val
        };
        let reference = side_min(1).max(side_min(-1));
        debug_assert!(reference.is_finite(), "strict local max has a lower neighbor");
        let prominence = p[i] - reference;
        if prominence < min_prominence_db {
            continue;
        }

        // Half-prominence crossing on one side, linearly interpolated
        // between the straddling samples. The interval minimum sits at
        // least `prominence` below the peak, so a crossing always exists
        // within the searched arc.
        let half_level = p[i] - prominence / 2.0;
        let crossing = |dir: isize| -> f64 {
            for k in 1..n as isize {
                let j = (i as isize + dir * k).rem_euclid(n as isize) as usize;
                if p[j] < half_level {
                    let jp = (i as isize + dir * (k - 1)).rem_euclid(n as isize) as usize;
                    let frac = (p[jp] - half_level) / (p[jp] - p[j]);
                    let gap = profile.arc_deg(i, dir * k) - profile.arc_deg(i, dir * (k - 1));
                    let gap = gap.rem_euclid(360.0);
                    return wrap_az_deg(profile.az_deg[jp] + dir as f64 * frac * gap);
                }
            }
            unreachable!("interval minimum lies below the half-prominence level")
        };
        let left_cross = crossing(-1);
        let right_cross = crossing(1);
        let width = (right_cross - left_cross).rem_euclid(360.0);
        let center = wrap_az_deg(left_cross + width / 2.0);

        beams.push(Beam {
            center_deg: center,
            width_deg: width,
            peak_az_deg: profile.az_deg[i],
            peak_dbm: p[i],
            prominence_db: prominence,
        });
    }
    Ok(beams)
}

/// Normalized arrival-time histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct ToaDensity {
    /// Bin centers, nanoseconds.
    pub bin_centers_ns: Vec<f64>,
    /// Probability density per nanosecond; integrates to 1.
    pub density_per_ns: Vec<f64>,
}

/// Histogram the MPC arrival times into `bin_ns`-wide bins starting at 0,
/// normalized so the densities integrate to one.
pub fn toa_density(mpcs: &[Mpc], bin_ns: f64) -> Result<ToaDensity> {
    if mpcs.is_empty() {
        return Err(Error::EmptyInput { what: "MPC list" });
    }
    if !(bin_ns.is_finite() && bin_ns > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("histogram bin must be > 0 ns, got {bin_ns}"),
        });
    }
    let max_toa = mpcs.iter().map(|m| m.toa_ns).fold(0.0f64, f64::max);
    let n_bins = (max_toa / bin_ns).floor() as usize + 1;
    let mut counts = vec![0usize; n_bins];
    for m in mpcs {
        let mut b = (m.toa_ns / bin_ns).floor() as usize;
        if b >= n_bins {
            b = n_bins - 1; // max element exactly on the upper edge
        }
        counts[b] += 1;
    }
    let norm = 1.0 / (mpcs.len() as f64 * bin_ns);
    Ok(ToaDensity {
        bin_centers_ns: (0..n_bins).map(|b| (b as f64 + 0.5) * bin_ns).collect(),
        density_per_ns: counts.iter().map(|&c| c as f64 * norm).collect(),
    })
}

/// Power-weighted RMS spread of the arrival times, nanoseconds.
pub fn rms_delay_spread_ns(mpcs: &[Mpc]) -> Result<f64> {
    if mpcs.is_empty() {
        return Err(Error::EmptyInput { what: "MPC list" });
    }
    let total: f64 = mpcs.iter().map(Mpc::linear_power).sum();
    let mean = mpcs.iter().map(|m| m.linear_power() * m.toa_ns).sum::<f64>() / total;
    let var = mpcs
        .iter()
        .map(|m| m.linear_power() * (m.toa_ns - mean).powi(2))
        .sum::<f64>()
        / total;
    Ok(var.sqrt())
}

/// Which arrival angle [`angular_spread_deg`] works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleAxis {
    Azimuth,
    Elevation,
}

/// Power-weighted circular angular spread, degrees.
///
/// Uses the circular estimator `sqrt(-2 ln |Σ p·e^{jφ} / Σ p|)`, which is
/// insensitive to the 0°/360° wrap.
pub fn angular_spread_deg(mpcs: &[Mpc], axis: AngleAxis) -> Result<f64> {
    if mpcs.is_empty() {
        return Err(Error::EmptyInput { what: "MPC list" });
    }
    let total: f64 = mpcs.iter().map(Mpc::linear_power).sum();
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for m in mpcs {
        let ang = match axis {
            AngleAxis::Azimuth => m.aoa_az_deg,
            AngleAxis::Elevation => m.aoa_el_deg,
        }
        .to_radians();
        let w = m.linear_power();
        re += w * ang.cos();
        im += w * ang.sin();
    }
    let r = (re.hypot(im) / total).min(1.0);
    Ok((-2.0 * r.ln()).sqrt().to_degrees())
}

/// Greedy power-ordered clustering with delay and azimuth gates.
///
/// The strongest unassigned MPC seeds a cluster (ties broken by smaller
/// arrival time, then smaller azimuth) and absorbs every unassigned MPC
/// within both `delay_gate_ns` and the cyclic `angle_gate_deg` of it.
/// Every MPC lands in exactly one cluster; clusters come out labeled
/// [`ClusterKind::NonRt`] (relabel with [`label_clusters_by_reference`] when
/// deterministic reference paths are known).
pub fn cluster_mpcs(mpcs: &[Mpc], delay_gate_ns: f64, angle_gate_deg: f64) -> Result<Vec<Cluster>> {
    if !(delay_gate_ns.is_finite() && delay_gate_ns > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("delay gate must be > 0 ns, got {delay_gate_ns}"),
        });
    }
    if !(angle_gate_deg.is_finite() && angle_gate_deg > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("angle gate must be > 0 deg, got {angle_gate_deg}"),
        });
    }
    let mut order: Vec<usize> = (0..mpcs.len()).collect();
    order.sort_by(|&a, &b| {
        mpcs[b]
            .power_db
            .total_cmp(&mpcs[a].power_db)
            .then(mpcs[a].toa_ns.total_cmp(&mpcs[b].toa_ns))
            .then(mpcs[a].aoa_az_deg.total_cmp(&mpcs[b].aoa_az_deg))
    });

    let mut assigned = vec![false; mpcs.len()];
    let mut clusters = Vec::new();
    for &seed in &order {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let center = mpcs[seed].clone();
        let mut subpaths = Vec::new();
        for (j, m) in mpcs.iter().enumerate() {
            if assigned[j] {
                continue;
            }
            if (m.toa_ns - center.toa_ns).abs() <= delay_gate_ns
                && cyclic_distance_deg(m.aoa_az_deg, center.aoa_az_deg) <= angle_gate_deg
            {
                assigned[j] = true;
                subpaths.push(m.clone());
            }
        }
        clusters.push(Cluster {
            kind: ClusterKind::NonRt,
            center,
            subpaths,
        });
    }
    Ok(clusters)
}

/// Relabel clusters whose center lies within the gates of any reference MPC
/// as [`ClusterKind::Rt`].
pub fn label_clusters_by_reference(
    clusters: &mut [Cluster],
    references: &[Mpc],
    delay_gate_ns: f64,
    angle_gate_deg: f64,
) {
    for cluster in clusters.iter_mut() {
        let is_rt = references.iter().any(|r| {
            (r.toa_ns - cluster.center.toa_ns).abs() <= delay_gate_ns
                && cyclic_distance_deg(r.aoa_az_deg, cluster.center.aoa_az_deg) <= angle_gate_deg
        });
        cluster.kind = if is_rt { ClusterKind::Rt } else { ClusterKind::NonRt };
    }
}
