//! Multi-plane diffraction simulation with linear canonical transforms.
//!
//! A photon leaves a source, crosses a sequence of planes carrying Gaussian
//! slits, and is detected at a sensor. Each slit sequence is a path, and every
//! path wave function has a closed Gaussian (or Hermite-Gaussian) form that is
//! updated plane by plane.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod benchmark;
pub mod checks;
pub mod cli;
pub mod engine;
pub mod error;
pub mod field;
pub mod form;
pub mod mixture;
pub mod numeric;
pub mod optics;
pub mod oracle;
pub mod scaling;
pub mod setup;
pub mod theta;

pub use error::{Error, Result};
pub use optics::LctMatrix;
pub use setup::{DiffractionPlane, Setup, SetupConfig, Slit, Source};
