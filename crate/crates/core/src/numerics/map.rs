use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// The unicritical polynomial `f_c(z) = z^d + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicriticalMap {
    d: u32,
    c: Complex64,
}

/// `f^n(z0)` together with its derivatives in `z` and in `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitDerivatives {
    pub z: Complex64,
    pub dz: Complex64,
    pub dc: Complex64,
}

/// First and second order derivatives of `f^n` at a point, as needed by the
/// Newton solve for parabolic cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderOrbit {
    pub z: Complex64,
    /// `∂f^n/∂z`
    pub dz: Complex64,
    /// `∂f^n/∂c`
    pub dc: Complex64,
    /// `∂²f^n/∂z²`
    pub dzz: Complex64,
    /// `∂²f^n/∂z∂c`
    pub dzc: Complex64,
}

impl UnicriticalMap {
    pub fn new(d: u32, c: Complex64) -> Result<Self> {
        if d < 2 {
            return Err(LabError::InvalidInput(format!("degree must be >= 2, got {d}")));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(LabError::InvalidInput("parameter must be finite".into()));
        }
        Ok(Self { d, c })
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// Orbits leaving the disk of this radius escape to infinity.
    pub fn escape_radius(&self) -> f64 {
        (self.c.norm() + 2.0).max(4.0)
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        z.powu(self.d) + self.c
    }

    #[inline]
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        z.powu(self.d - 1) * self.d as f64
    }

    // only intermediate points are checked; the final iterate may lie outside
    fn check(&self, z: Complex64, step: usize, n: usize) -> Result<()> {
        if step == n {
            return Ok(());
        }
        let modulus = z.norm();
        if modulus > self.escape_radius() || !modulus.is_finite() {
            return Err(LabError::DivergedOrbit { step, modulus });
        }
        Ok(())
    }

    /// `f^n(z0)`, failing once the orbit leaves the escape disk.
    pub fn iterate(&self, z0: Complex64, n: usize) -> Result<Complex64> {
        let mut z = z0;
        for step in 0..n {
            z = self.eval(z);
            self.check(z, step + 1, n)?;
        }
        Ok(z)
    }

    /// `f^n(z0)`, `(f^n)'(z0)` and `∂f^n(z0)/∂c`.
    pub fn iterate_with_derivatives(&self, z0: Complex64, n: usize) -> Result<OrbitDerivatives> {
        if n == 0 {
            return Err(LabError::InvalidInput("iteration count must be positive".into()));
        }
        let d = self.d as f64;
        let mut z = z0;
        let mut dz = Complex64::new(1.0, 0.0);
        let mut dc = Complex64::new(0.0, 0.0);
        for step in 0..n {
            let slope = z.powu(self.d - 1) * d;
            dz *= slope;
            dc = slope * dc + 1.0;
            z = z * z.powu(self.d - 1) + self.c;
            self.check(z, step + 1, n)?;
        }
        Ok(OrbitDerivatives { z, dz, dc })
    }

    /// Like [`iterate_with_derivatives`](Self::iterate_with_derivatives) but
    /// also carrying the second derivatives `∂²/∂z²` and `∂²/∂z∂c`.
    pub fn iterate_second_order(&self, z0: Complex64, n: usize) -> Result<SecondOrderOrbit> {
        if n == 0 {
            return Err(LabError::InvalidInput("iteration count must be positive".into()));
        }
        let d = self.d as f64;
        let mut z = z0;
        let mut dz = Complex64::new(1.0, 0.0);
        let mut dc = Complex64::new(0.0, 0.0);
        let mut dzz = Complex64::new(0.0, 0.0);
        let mut dzc = Complex64::new(0.0, 0.0);
        for step in 0..n {
            let slope = z.powu(self.d - 1) * d;
            let curvature = if self.d >= 2 {
                z.powu(self.d - 2) * (d * (d - 1.0))
            } else {
                Complex64::new(0.0, 0.0)
            };
            // order matters: every update reads the previous step's values
            let new_dzz = curvature * dz * dz + slope * dzz;
            let new_dzc = curvature * dc * dz + slope * dzc;
            let new_dz = slope * dz;
            let new_dc = slope * dc + 1.0;
            dzz = new_dzz;
            dzc = new_dzc;
            dz = new_dz;
            dc = new_dc;
            z = z * z.powu(self.d - 1) + self.c;
            self.check(z, step + 1, n)?;
        }
        Ok(SecondOrderOrbit { z, dz, dc, dzz, dzc })
    }
}
