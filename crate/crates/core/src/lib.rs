pub mod conventional;
pub mod dipole;
pub mod error;
pub mod geometry;
pub mod impedance;
pub mod linalg;
pub mod load;
pub mod optimizer;
pub mod pattern;
pub mod pipeline;
pub mod quadrature;
pub mod scenario;

pub use num_complex::Complex64;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wave impedance (ohms).
pub const ETA0: f64 = 376.730_313_412;
