//! Pseudo-spectral simulator and Green-function toolkit for the 3D
//! incompressible active nematic system (corotational Q-tensor coupled to
//! Navier–Stokes).

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod expcli;
pub mod grid;
pub mod kernels;
pub mod qtensor;

pub use error::{Error, Result};
