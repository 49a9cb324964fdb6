//! Built-in case studies.

pub mod cases;
pub mod sphere;
pub mod torus;
