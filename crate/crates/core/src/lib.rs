//! Locality-constrained H2 output-feedback synthesis for an infinite chain of
//! coupled second-order subsystems.
//!
//! The crate builds the system-level and input-output affine parameterizations
//! of the finite-extent controllers, solves the resulting model-matching
//! problems by FIR least squares, and computes the unconstrained optimum on a
//! spatial-frequency grid for comparison.

pub mod affine;
pub mod error;
pub mod fir_lstsq;
pub mod io_maps;
pub mod model_match;
pub mod oracle;
pub mod plant;
pub mod series;
pub mod sl_maps;
pub mod spatial;
pub mod verify;

pub use error::SynthError;
pub use plant::PlantParams;
pub use series::{CausalSeries, LaurentSeries, Series};
pub use spatial::{ExtentVector, H2Value, LaurentVector, SpatialVector};
