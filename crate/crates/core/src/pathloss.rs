//! Direction-resolved path loss at a position and the three large-scale
//! fits used for corridor links: close-in free-space reference, two-parameter
//! floating-intercept, and a corner-referenced variant for shadowed
//! positions whose distance coordinate is the bent-axis distance past the
//! corner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::Mpc;
use crate::units::SPEED_OF_LIGHT_M_PER_S;

/// Free-space path loss `20 log10(4π d f / c)`, dB.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_m * freq_hz / SPEED_OF_LIGHT_M_PER_S).log10()
}

/// Best-direction and synthesized-omnidirectional path loss, dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlPair {
    pub best_db: f64,
    pub omni_db: f64,
}

/// Which of the two measures a fit runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlKind {
    Best,
    Omni,
}

impl std::fmt::Display for PlKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlKind::Best => "best",
            PlKind::Omni => "omni",
        })
    }
}

/// Path loss at one position from its per-direction MPC lists, under the
/// 0 dBm transmit convention (MPC power in dBm ≡ −path gain in dB).
///
/// The best-direction loss takes the single steering with the largest summed
/// linear power; the omnidirectional loss sums power over all steerings.
pub fn position_path_loss(per_direction: &[Vec<Mpc>]) -> Result<PlPair> {
    if per_direction.is_empty() {
        return Err(Error::EmptyInput {
            what: "per-direction MPC lists",
        });
    }
    let mut best_linear = 0.0f64;
    let mut total_linear = 0.0f64;
    for mpcs in per_direction {
        let p: f64 = mpcs.iter().map(Mpc::linear_power).sum();
        best_linear = best_linear.max(p);
        total_linear += p;
    }
    if total_linear <= 0.0 {
        return Err(Error::InsufficientData {
            what: "directions with detected MPCs",
            needed: 1,
            got: 0,
        });
    }
    Ok(PlPair {
        best_db: -10.0 * best_linear.log10(),
        omni_db: -10.0 * total_linear.log10(),
    })
}

/// One position's contribution to a large-scale fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossSample {
    pub rx_id: String,
    /// Propagation distance, m: straight tx–rx for unshadowed positions,
    /// bent-axis distance for shadowed ones.
    pub distance_m: f64,
    pub pl: PlPair,
}

impl PathLossSample {
    pub fn pl_db(&self, kind: PlKind) -> f64 {
        match kind {
            PlKind::Best => self.pl.best_db,
            PlKind::Omni => self.pl.omni_db,
        }
    }
}

fn check_samples(samples: &[PathLossSample]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            what: "path-loss samples",
            needed: 2,
            got: samples.len(),
        });
    }
    for s in samples {
        if !(s.distance_m.is_finite() && s.distance_m > 0.0) {
            return Err(Error::InvalidParameter {
                what: format!("sample {} has non-positive distance {}", s.rx_id, s.distance_m),
            });
        }
    }
    Ok(())
}

fn rms(residuals: impl Iterator<Item = f64>, n: usize) -> f64 {
    (residuals.map(|r| r * r).sum::<f64>() / n as f64).sqrt()
}

/// Close-in free-space-reference fit: `PL(d) = FSPL(d0) + 10 n log10(d/d0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiFit {
    pub freq_hz: f64,
    pub d0_m: f64,
    /// Path-loss exponent.
    pub ple: f64,
    /// RMS shadow-fading residual, dB.
    pub sigma_db: f64,
    pub n_samples: usize,
}

impl CiFit {
    pub fn predict_db(&self, distance_m: f64) -> f64 {
        fspl_db(self.d0_m, self.freq_hz) + 10.0 * self.ple * (distance_m / self.d0_m).log10()
    }
}

/// Least-squares path-loss exponent with the intercept pinned to free space
/// at `d0_m` (single-parameter regression through the anchored origin).
pub fn fit_ci(samples: &[PathLossSample], kind: PlKind, freq_hz: f64, d0_m: f64) -> Result<CiFit> {
    check_samples(samples)?;
    if !(d0_m.is_finite() && d0_m > 0.0) || !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("reference distance {d0_m} m and frequency {freq_hz} Hz must be > 0"),
        });
    }
    let anchor = fspl_db(d0_m, freq_hz);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for s in samples {
        let x = 10.0 * (s.distance_m / d0_m).log10();
        let y = s.pl_db(kind) - anchor;
        sxx += x * x;
        sxy += x * y;
    }
    if sxx <= 0.0 {
        return Err(Error::SingularFit {
            what: "all samples at the reference distance",
        });
    }
    let ple = sxy / sxx;
    let fit = CiFit {
        freq_hz,
        d0_m,
        ple,
        sigma_db: 0.0,
        n_samples: samples.len(),
    };
    let sigma_db = rms(
        samples.iter().map(|s| s.pl_db(kind) - fit.predict_db(s.distance_m)),
        samples.len(),
    );
    Ok(CiFit { sigma_db, ..fit })
}

/// Floating-intercept fit: `PL(d) = β + 10 α log10(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbFit {
    /// Distance-dependence coefficient (slope per decade / 10).
    pub alpha: f64,
    /// Intercept, dB.
    pub beta_db: f64,
    pub sigma_db: f64,
    pub n_samples: usize,
}

impl AbFit {
    pub fn predict_db(&self, distance_m: f64) -> f64 {
        self.beta_db + 10.0 * self.alpha * distance_m.log10()
    }
}

pub(crate) fn ols(points: impl Iterator<Item = (f64, f64)> + Clone, n: usize) -> Result<(f64, f64)> {
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points.clone() {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    let det = nf * sxx - sx * sx;
    if det.abs() < 1e-9 * nf * sxx.max(1.0) {
        return Err(Error::SingularFit {
            what: "all samples at one distance",
        });
    }
    let slope = (nf * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / nf;
    Ok((slope, intercept))
}

/// Ordinary least squares over `10 log10(d)`.
pub fn fit_ab(samples: &[PathLossSample], kind: PlKind) -> Result<AbFit> {
    check_samples(samples)?;
    let pts = samples
        .iter()
        .map(move |s| (10.0 * s.distance_m.log10(), s.pl_db(kind)));
    let (alpha, beta_db) = ols(pts, samples.len())?;
    let fit = AbFit {
        alpha,
        beta_db,
        sigma_db: 0.0,
        n_samples: samples.len(),
    };
    let sigma_db = rms(
        samples.iter().map(|s| s.pl_db(kind) - fit.predict_db(s.distance_m)),
        samples.len(),
    );
    Ok(AbFit { sigma_db, ..fit })
}

/// Corner-referenced floating-intercept fit for shadowed positions:
/// `PL(d) = β + 10 α log10(d − corner)` with `d` the bent-axis distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MabFit {
    pub alpha: f64,
    pub beta_db: f64,
    /// Bent-axis distance of the corner, m.
    pub corner_m: f64,
    pub sigma_db: f64,
    pub n_samples: usize,
}

impl MabFit {
    /// Predicted loss at bent-axis distance `distance_m` (must exceed the
    /// corner distance).
    pub fn predict_db(&self, distance_m: f64) -> f64 {
        debug_assert!(distance_m > self.corner_m);
        self.beta_db + 10.0 * self.alpha * (distance_m - self.corner_m).log10()
    }
}

/// Ordinary least squares over `10 log10(d − corner)`; every sample must lie
/// strictly past the corner.
pub fn fit_mab(samples: &[PathLossSample], kind: PlKind, corner_m: f64) -> Result<MabFit> {
    check_samples(samples)?;
    if !(corner_m.is_finite() && corner_m > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("corner distance must be > 0 m, got {corner_m}"),
        });
    }
    for s in samples {
        if s.distance_m <= corner_m {
            return Err(Error::SampleNotBeyondCorner {
                rx_id: s.rx_id.clone(),
                d_m: s.distance_m,
                d1_m: corner_m,
            });
        }
    }
    let pts = samples
        .iter()
        .map(move |s| (10.0 * (s.distance_m - corner_m).log10(), s.pl_db(kind)));
    let (alpha, beta_db) = ols(pts, samples.len())?;
    let fit = MabFit {
        alpha,
        beta_db,
        corner_m,
        sigma_db: 0.0,
        n_samples: samples.len(),
    };
    let sigma_db = rms(
        samples.iter().map(|s| s.pl_db(kind) - fit.predict_db(s.distance_m)),
        samples.len(),
    );
    Ok(MabFit { sigma_db, ..fit })
}
