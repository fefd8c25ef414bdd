//! Model, simulator and analysis toolkit for a two-halo matter-wave
//! Rarity-Tapster interferometer built from colliding condensates.
//!
//! The crate is organised bottom-up:
//!
//! * [`units`] and [`config`]: constants, conversions and the experiment parameter set.
//! * [`squeezed`] and [`transfer`]: the discrete four-mode model and ideal Bragg optics.
//! * [`continuous`]: closed-form integrated correlations, the correlator E and CHSH S.
//! * [`bragg`]: finite-duration Bragg pulses from the Raman-Nath equations.
//! * [`simulate`] and [`events`]: Monte Carlo detection events and their on-disk format.
//! * [`analysis`]: coincidence estimators, bootstrap errors and fits.

// validation compares with `!(x > 0.0)` on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

pub mod analysis;
pub mod bragg;
pub mod config;
pub mod continuous;
pub mod error;
pub mod events;
pub mod optimize;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod squeezed;
pub mod transfer;
pub mod units;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use units::PhysicalConstants;
