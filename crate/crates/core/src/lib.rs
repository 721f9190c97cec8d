pub mod calibrations;
pub mod cli;
pub mod cones;
pub mod currents;
pub mod duality;
pub mod error;
pub mod exterior;
pub mod grassmann;
pub mod hessian;
pub mod linalg;
pub mod lp;
pub mod polynomial;
pub mod verify;

pub use calibrations::Calibration;
pub use error::{Error, Result};
pub use exterior::{ExteriorElement, SimplePlane};
