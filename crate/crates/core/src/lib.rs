//! Wavenumber-domain holographic MIMO channels under non-isotropic angle
//! distributions, and their ergodic capacity.

pub mod angular;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod export;
pub mod geometry;
pub mod quadrature;
pub mod scenario;
pub mod util;

pub use error::{Error, Result};
