//! Shared numerical kernels: polynomial iteration with derivatives, Newton
//! solvers, truncated power series, discrete Fourier transform and local
//! inversion of holomorphic maps.

mod dft;
mod inverse;
mod jet;
mod map;
mod newton;

pub use dft::{dft, inverse_dft, symmetric_index};
pub use inverse::{local_inverse, newton_scalar};
pub use jet::{iterate_jet, series, Jet};
pub use map::{OrbitDerivatives, SecondOrderOrbit, UnicriticalMap};
pub use newton::{newton_system2, Jacobian2, NewtonOptions, NewtonRoot};

use num_complex::Complex64;

/// `e^{2πi t}`.
pub fn cis_turns(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// `e^{2πi z}` for complex `z`.
pub fn exp_2pi_i(z: Complex64) -> Complex64 {
    (Complex64::new(0.0, std::f64::consts::TAU) * z).exp()
}
