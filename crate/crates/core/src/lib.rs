//! Number detection and support recovery of closely spaced point sources
//! from noisy band-limited Fourier measurements in one to three dimensions.
//!
//! The pipeline: sample the data along lines through the origin, form Hankel
//! matrices, count sources by singular-value thresholding (sweeping over the
//! Hankel order and over projection directions), locate them per line with
//! the matrix pencil method, and assemble multi-dimensional positions by
//! intersecting back-projected lines or planes. A Monte-Carlo harness maps
//! the success/failure phase transition in the (SRF, SNR) plane and builds
//! explicit worst-case instances below the resolution limit.

pub mod detection;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod pencil;
pub mod recovery;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{DirectionFamily, Line, RealVec, UnitVector};
pub use model::{BoundReport, DiscreteMeasure, Measurement, MeasurementOracle, C64};
pub use spectral::{HankelMatrix, LineSamples};
