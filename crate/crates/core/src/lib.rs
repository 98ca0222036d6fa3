//! Stokes data of exponential type as finite matrix data.

pub mod birkhoff;
pub mod cech;
pub mod error;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod order;
pub mod pairing;
pub mod scalar;
pub mod stokes;

pub use error::{Result, StokesError};
pub use matrix::Matrix;
pub use scalar::{Complex64, GaussianRational, Rational, Scalar, ScalarMode, Tolerance};
