pub mod coeffs;
pub mod cli;
pub mod config;
pub mod duhamel;
pub mod error;
pub mod expr;
pub mod kernel;
pub mod modelkernel;
pub mod parallel;
pub mod sde;
pub mod quad;
pub mod special;
pub mod transform;
pub mod wrightfisher;

pub use error::{Error, Result};
