//! Joint active/passive beamforming for IRS-assisted mmWave downlinks.
//!
//! The base station applies zero-forcing precoding and the reflecting
//! surface picks one of `2^Q` uniformly quantized phases per element. The
//! phase vector is searched with the cross-entropy method; exhaustive
//! search, successive refinement and random sampling serve as references.
//!
//! Module map:
//!
//! - [`channel`]: geometric UPA channel draws and distance path loss.
//! - [`beamforming`]: effective channel, ZF precoder, power, SINR audit.
//! - [`ce`]: the cross-entropy optimizer over discrete reflection vectors.
//! - [`baselines`]: exhaustive, successive refinement, random phases.
//! - [`experiments`]: configuration, scenario runners, CSV/JSON output.

pub mod baselines;
pub mod beamforming;
pub mod ce;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod units;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
