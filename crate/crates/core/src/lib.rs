pub mod cone;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod hull;
pub mod minimize;
pub mod nelder_mead;
pub mod numeric;
pub mod par;
pub mod phi;
pub mod psi;
pub mod quadrature;
pub mod region;
pub mod sector;
pub mod sphere;
pub mod spiral;
pub mod trace;

pub use error::{Error, Result};
