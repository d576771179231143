//! Sweep calibration, frequency-to-delay conversion, and noise-gated
//! extraction of multipath components.
//!
//! A raw direction sweep measures `S_measure = H_system · H_channel · G_ant`
//! through the full rf chain; a back-to-back reference sweep taken through a
//! known attenuator measures `S_calib = H_system · G_att`. [`calibrate`]
//! removes the system response per tone:
//!
//! ```text
//! H_channel[k] = S_measure[k] / S_calib[k] · g_att / g_ant
//! ```
//!
//! with both gains applied as linear amplitude factors. [`ctf_to_cir`] turns
//! the calibrated transfer function into a delay-domain impulse response
//! (inverse DFT, `1/N` on the inverse so a forward transform recovers the
//! input), and [`extract_mpcs`] keeps every (direction, delay-bin) sample
//! that clears the noise-referred power threshold
//! `max(peak − dynamic_range, noise_floor + 10 dB)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::band::{BandConfig, Direction};
use crate::error::{Error, Result};
use crate::mpc::Mpc;
use crate::units::db_to_amplitude;

/// One raw frequency sweep at a fixed rx rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub direction: Direction,
    /// Complex S21 per sweep tone, in sweep order.
    pub s21: Vec<Complex64>,
}

/// Back-to-back reference sweep taken through a known attenuator.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    /// Complex S21 per sweep tone of the reference connection.
    pub s21: Vec<Complex64>,
    /// Gain of the reference attenuator, dB (negative for loss).
    pub attenuator_gain_db: f64,
}

/// Calibrated channel transfer function at one rx rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Ctf {
    pub direction: Direction,
    pub h: Vec<Complex64>,
}

/// Channel impulse response at one rx rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub direction: Direction,
    /// Complex tap per delay bin.
    pub taps: Vec<Complex64>,
    /// Delay-bin width, seconds.
    pub bin_s: f64,
}

impl Cir {
    /// Delay of bin `n`, nanoseconds.
    pub fn toa_ns(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_s * 1e9
    }

    /// Sum of |tap|² over all bins.
    pub fn total_energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// Remove the system response from a raw sweep.
///
/// `antenna_gain_db` is the cascaded antenna gain of the measurement link
/// (sum of tx and rx antenna gains, dB). Errors if the sweeps have different
/// lengths, are empty, or the reference has an exactly-zero tone.
pub fn calibrate(
    sweep: &SweepRecord,
    calib: &CalibrationRecord,
    antenna_gain_db: f64,
) -> Result<Ctf> {
    if sweep.s21.is_empty() {
        return Err(Error::EmptyInput {
            what: "measurement sweep",
        });
    }
    if sweep.s21.len() != calib.s21.len() {
        return Err(Error::LengthMismatch {
            what: "calibration sweep",
            expected: sweep.s21.len(),
            got: calib.s21.len(),
        });
    }
    if !antenna_gain_db.is_finite() || !calib.attenuator_gain_db.is_finite() {
        return Err(Error::InvalidParameter {
            what: "calibration gains must be finite dB".into(),
        });
    }
    let factor = db_to_amplitude(calib.attenuator_gain_db) / db_to_amplitude(antenna_gain_db);
    let mut h = Vec::with_capacity(sweep.s21.len());
    for (bin, (m, c)) in sweep.s21.iter().zip(&calib.s21).enumerate() {
        if c.norm_sqr() == 0.0 {
            return Err(Error::ZeroCalibrationSample { bin });
        }
        h.push(m / c * factor);
    }
    Ok(Ctf {
        direction: sweep.direction,
        h,
    })
}

/// Inverse-transform a calibrated transfer function into an impulse
/// response.
///
/// Uses the unitary-consistent convention with `1/N` on the inverse, so
/// [`cir_to_ctf`] recovers the input exactly (up to float noise). The CTF
/// length must match `band.n_points`.
pub fn ctf_to_cir(ctf: &Ctf, band: &BandConfig) -> Result<Cir> {
    band.validate()?;
    if ctf.h.len() != band.n_points {
        return Err(Error::LengthMismatch {
            what: "ctf vs band points",
            expected: band.n_points,
            got: ctf.h.len(),
        });
    }
    let n = ctf.h.len();
    let mut buf = ctf.h.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for t in &mut buf {
        *t *= scale;
    }
    Ok(Cir {
        direction: ctf.direction,
        taps: buf,
        bin_s: band.cir_bin_s(),
    })
}

/// Forward-transform an impulse response back to a transfer function
/// (exact inverse of [`ctf_to_cir`]).
pub fn cir_to_ctf(cir: &Cir, band: &BandConfig) -> Result<Ctf> {
    band.validate()?;
    if cir.taps.len() != band.n_points {
        return Err(Error::LengthMismatch {
            what: "cir vs band points",
            expected: band.n_points,
            got: cir.taps.len(),
        });
    }
    let mut buf = cir.taps.clone();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(Ctf {
        direction: cir.direction,
        h: buf,
    })
}

/// Output of [`extract_mpcs`].
#[derive(Debug, Clone, PartialEq)]
pub struct MpcExtraction {
    /// Retained components, in (input direction, ascending delay) order.
    pub mpcs: Vec<Mpc>,
    /// Threshold actually applied, dBm.
    pub threshold_dbm: f64,
    /// Strongest sample seen, dBm (−∞ for all-zero input).
    pub peak_dbm: f64,
    /// True when every sample sat below the noise floor; `mpcs` is then
    /// empty.
    pub no_signal: bool,
}

/// Threshold the per-direction impulse responses into an MPC list.
///
/// A sample at delay bin `t` of direction `(az, el)` with power
/// `p = tx_power + 10·log10(|h|²)` dBm is retained iff
/// `p ≥ max(peak − dynamic_range_db, noise_floor + 10)`. One MPC is emitted
/// per retained sample.
pub fn extract_mpcs(
    cirs: &[Cir],
    band: &BandConfig,
    dynamic_range_db: f64,
) -> Result<MpcExtraction> {
    if cirs.is_empty() {
        return Err(Error::EmptyInput {
            what: "impulse responses",
        });
    }
    if !(dynamic_range_db.is_finite() && dynamic_range_db > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("dynamic range must be > 0 dB, got {dynamic_range_db}"),
        });
    }
    let mut peak_dbm = f64::NEG_INFINITY;
    for cir in cirs {
        for tap in &cir.taps {
            let p = band.tx_power_dbm + 10.0 * tap.norm_sqr().log10();
            if p > peak_dbm {
                peak_dbm = p;
            }
        }
    }

    let threshold_dbm = (peak_dbm - dynamic_range_db).max(band.noise_floor_dbm + 10.0);
    if peak_dbm < band.noise_floor_dbm {
        return Ok(MpcExtraction {
            mpcs: Vec::new(),
            threshold_dbm,
            peak_dbm,
            no_signal: true,
        });
    }

    let mut mpcs = Vec::new();
    for cir in cirs {
        for (bin, tap) in cir.taps.iter().enumerate() {
            let p = band.tx_power_dbm + 10.0 * tap.norm_sqr().log10();
            if p >= threshold_dbm {
                mpcs.push(Mpc::new(
                    cir.toa_ns(bin),
                    cir.direction.az_deg,
                    cir.direction.el_deg,
                    p,
                )?);
            }
        }
    }
    Ok(MpcExtraction {
        mpcs,
        threshold_dbm,
        peak_dbm,
        no_signal: false,
    })
}
