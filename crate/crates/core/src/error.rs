//! Crate-wide error type.
//!
//! One enum keeps error plumbing flat across modules; variants carry enough
//! context (bin indices, sample ids, file positions) that a CLI can print an
//! actionable one-line diagnostic.

use thiserror::Error;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation received an empty slice where at least one element is
    /// required.
    #[error("empty input: {what}")]
    EmptyInput { what: &'static str },

    /// Two sequences that must be index-aligned have different lengths.
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A reference sweep sample is exactly zero, so the per-bin division in
    /// the calibration would blow up.
    #[error("calibration sweep sample at bin {bin} is zero; cannot divide")]
    ZeroCalibrationSample { bin: usize },

    /// A scalar argument is outside its documented domain.
    #[error("invalid parameter: {what}")]
    InvalidParameter { what: String },

    /// Scene geometry cannot support the requested operation.
    #[error("degenerate scene: {reason}")]
    DegenerateScene { reason: String },

    /// A receiver id is not present in the scene.
    #[error("unknown rx id {id:?}")]
    UnknownRx { id: String },

    /// A bent-axis fit sample does not lie beyond the corner distance d1.
    #[error("sample {rx_id:?} has bent-axis distance {d_m} m, not beyond d1 = {d1_m} m")]
    SampleNotBeyondCorner { rx_id: String, d_m: f64, d1_m: f64 },

    /// Too few data points for the requested estimate.
    #[error("insufficient data for {what}: need {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// A regression design has no spread in the regressor.
    #[error("singular fit for {what}: regressor has zero variance")]
    SingularFit { what: &'static str },

    /// No power/delay evolution law is configured for the requested band.
    #[error("no evolution law configured for band {band}")]
    MissingBandLaw { band: String },

    /// The evolved interaction point would sit at or behind the receiver.
    #[error(
        "evolved interaction point is not ahead of the rx \
         (axial offset {axial_m} m for phi_ref {phi_ref_deg} deg, delta_d {delta_d_m} m)"
    )]
    InteractionBehindRx {
        axial_m: f64,
        phi_ref_deg: f64,
        delta_d_m: f64,
    },

    /// A far receiver has no closer reference position to evolve from.
    #[error("rx {rx_id:?} has no near reference position in its row to evolve from")]
    MissingReference { rx_id: String },

    /// No valid reflected path exists on a side where one is required.
    #[error("no valid reflected path arriving via {side} for rx {rx_id:?}")]
    NoDominantPath { side: &'static str, rx_id: String },

    /// MPC delays fall outside the impulse response span of the band.
    #[error(
        "{count} MPC delay(s) exceed the {max_ns} ns span (first offender: \
         {first_toa_ns} ns at index {first_index})"
    )]
    DelayOutOfRange {
        count: usize,
        max_ns: f64,
        first_toa_ns: f64,
        first_index: usize,
    },

    /// Statistical laws required by the synthesizer are not configured.
    #[error("statistical laws for {kind} clusters are not configured")]
    LawsUnset { kind: &'static str },

    /// A text artifact failed to parse; `line` is 1-based where known.
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
