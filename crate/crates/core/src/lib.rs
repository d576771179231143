//! Measurement-to-model toolkit for dual-band sub-terahertz corridor channels.
//!
//! The crate covers the pipeline that turns vector-network-analyzer direction
//! sweeps of an L-shaped corridor into calibrated channel models:
//!
//! - [`sounding`]: sweep calibration, frequency-to-delay conversion, and
//!   noise-gated multipath component (MPC) extraction,
//! - [`analysis`]: beam finding on cyclic azimuth power profiles, delay and
//!   angular spreads, and greedy MPC clustering,
//! - [`pathloss`]: close-in and alpha-beta distance fits plus a bent-axis
//!   variant for receivers past the corridor corner,
//! - [`raytrace`]: 2-D image-method tracing over axis-aligned wall segments,
//! - [`evolve`]: a geometric model for how the dominant wall reflections
//!   drift as the receiver moves deeper into the shadowed corridor,
//! - [`synth`]: hybrid ray-traced + statistical channel realizations and
//!   their conversion back to impulse responses,
//! - [`io`]: CSV / TOML readers and writers for every artifact in the chain,
//! - [`fixtures`]: bundled synthetic indoor/outdoor scenes so everything is
//!   testable without measurement data.
//!
//! Conventions used throughout:
//!
//! - powers travel in linear watts inside hot loops and in dB(m) at API
//!   boundaries; transmit power is normalized to 0 dBm, so a received power
//!   in dB is the negative of the path loss;
//! - geometry is 2-D plan view (antenna heights are metadata only) with x
//!   pointing east and y pointing north;
//! - azimuths are compass-style degrees in [0°, 360°): 0° = +y, 90° = +x.

pub mod analysis;
pub mod band;
pub mod error;
pub mod evolve;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod mpc;
pub mod pathloss;
pub mod raytrace;
pub mod sounding;
pub mod synth;
pub mod units;

pub use band::{Band, BandConfig, Direction, ScanGrid};
pub use error::{Error, Result};
pub use geometry::{LShapeScene, Point, Region, RxPosition, Wall};
pub use mpc::{Cluster, ClusterKind, Mpc};
