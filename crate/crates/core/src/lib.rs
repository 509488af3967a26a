//! Numerical laboratory for parabolic dynamics of `z^d + c`.

pub mod atlas;
pub mod conjugacy;
pub mod error;
pub mod fatou;
pub mod germ;
pub mod horn;
mod json;
pub mod numerics;
pub mod render;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
