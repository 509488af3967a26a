use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Damped scalar Newton iteration for `g(z) = target`, where `g` returns
/// its value and derivative. Converges when `|g(z) - target| <= tol`.
pub fn newton_scalar<G>(mut g: G, target: Complex64, seed: Complex64, tol: f64, max_iter: usize) -> Result<Complex64>
where
    G: FnMut(Complex64) -> Result<(Complex64, Complex64)>,
{
    let mut z = seed;
    let (mut value, mut slope) = g(z)?;
    let mut residual = (value - target).norm();
    for iteration in 0..max_iter {
        if residual <= tol {
            return Ok(z);
        }
        if slope.norm() < 1e-300 || !slope.norm().is_finite() {
            return Err(LabError::VanishingDerivative { at: z });
        }
        let step = (value - target) / slope;
        let mut factor = 1.0;
        let mut accepted = None;
        for _ in 0..=8 {
            let candidate = z - step * factor;
            if let Ok((v, s)) = g(candidate) {
                let r = (v - target).norm();
                if r.is_finite() {
                    accepted = Some((candidate, v, s, r));
                    if r < residual {
                        break;
                    }
                }
            }
            factor *= 0.5;
        }
        let Some((candidate, v, s, r)) = accepted else {
            return Err(LabError::NoConvergence {
                iterations: iteration,
                residual,
                last: [z, Complex64::new(0.0, 0.0)],
            });
        };
        z = candidate;
        value = v;
        slope = s;
        residual = r;
    }
    if residual <= tol {
        return Ok(z);
    }
    Err(LabError::NoConvergence {
        iterations: max_iter,
        residual,
        last: [z, Complex64::new(0.0, 0.0)],
    })
}

/// Branch of `g^{-1}` at `target` continuous from `seed`.
///
/// `g` returns value and derivative. The seed must sit in the region where
/// `g` is injective; Newton started there stays on that branch.
pub fn local_inverse<G>(g: G, target: Complex64, seed: Complex64, tol: f64) -> Result<Complex64>
where
    G: FnMut(Complex64) -> Result<(Complex64, Complex64)>,
{
    if !(tol > 0.0) {
        return Err(LabError::InvalidInput("tolerance must be positive".into()));
    }
    newton_scalar(g, target, seed, tol, 60)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::UnicriticalMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_inverse() {
        let w = c(0.3, -0.7);
        let z = local_inverse(|z| Ok((z, c(1.0, 0.0))), w, c(0.0, 0.0), 1e-14).unwrap();
        assert!((z - w).norm() < 1e-14);
    }

    #[test]
    fn quadratic_round_trip() {
        let g = |z: Complex64| Ok((z + z * z, 1.0 + z * 2.0));
        let target = c(0.1, 0.0) + c(0.1, 0.0) * c(0.1, 0.0);
        let z = local_inverse(g, target, c(0.09, 0.0), 1e-14).unwrap();
        assert!((z - 0.1).norm() < 1e-13);
    }

    #[test]
    fn second_iterate_round_trip() {
        let map = UnicriticalMap::new(2, c(-0.75, 0.0)).unwrap();
        let g = |z: Complex64| {
            let o = map.iterate_with_derivatives(z, 2)?;
            Ok((o.z, o.dz))
        };
        for k in 0..12 {
            let z = c(-0.5, 0.0) + Complex64::from_polar(0.02, k as f64 * 0.5);
            let target = map.iterate(z, 2).unwrap();
            let back = local_inverse(g, target, z + 1e-3, 1e-14).unwrap();
            let forward = map.iterate(back, 2).unwrap();
            assert!((forward - target).norm() < 1e-12);
            assert!((back - z).norm() < 1e-10);
        }
    }

    #[test]
    fn vanishing_derivative() {
        let out = local_inverse(|z| Ok((z * z, z * 2.0)), c(1.0, 0.0), c(0.0, 0.0), 1e-12);
        assert!(matches!(out, Err(LabError::VanishingDerivative { .. })));
    }
}
