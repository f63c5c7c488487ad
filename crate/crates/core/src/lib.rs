//! Weighted higher-order mean curvature functionals of star-shaped
//! hypersurfaces in hyperbolic space.

pub mod ambient;
pub mod error;
pub mod functionals;
pub mod rigidity;
pub mod scenario;
pub mod surface;
pub mod symm;

pub use error::{Error, Result};
