//! Executable calculus of `E^1(M)`-Dirac structures on coordinate charts.

pub mod calculus;
pub mod error;
pub mod families;
pub mod foliation;
pub mod linalg;
pub mod poissonization;
pub mod sampling;
pub mod sections;
pub mod symexpr;

pub use error::{Error, Result};
