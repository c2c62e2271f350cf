pub mod cli;
pub mod diff;
pub mod error;
pub mod kernels;
pub mod multipliers;
pub mod quadrature;
pub mod report;
pub mod riesz;
pub mod space;
pub mod sph_transform;
pub mod specfun;

pub use error::{Error, Result};
