pub mod certify;
pub mod curvature;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod loopspace;
pub mod quadrature;
pub mod real;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};
