use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Row-major 2×2 complex matrix.
pub type Jacobian2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings tried when the residual does not decrease.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            max_halvings: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRoot {
    pub root: [Complex64; 2],
    pub iterations: usize,
    pub residual: f64,
}

fn norm_inf(r: [Complex64; 2]) -> f64 {
    r[0].norm().max(r[1].norm())
}

fn finite(r: [Complex64; 2]) -> bool {
    r.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Damped Newton iteration for a system of two complex equations.
///
/// Converges when every residual component is at most `tol`. Residual or
/// Jacobian evaluations that fail are treated as a rejected step.
pub fn newton_system2<R, J>(
    mut residual: R,
    mut jacobian: J,
    start: [Complex64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonRoot>
where
    R: FnMut([Complex64; 2]) -> Result<[Complex64; 2]>,
    J: FnMut([Complex64; 2]) -> Result<Jacobian2>,
{
    let options = NewtonOptions {
        tol,
        max_iter,
        ..NewtonOptions::default()
    };
    newton_system2_with(&mut residual, &mut jacobian, start, options)
}

pub(crate) fn newton_system2_with<R, J>(
    residual: &mut R,
    jacobian: &mut J,
    start: [Complex64; 2],
    options: NewtonOptions,
) -> Result<NewtonRoot>
where
    R: FnMut([Complex64; 2]) -> Result<[Complex64; 2]>,
    J: FnMut([Complex64; 2]) -> Result<Jacobian2>,
{
    if !(options.tol > 0.0) {
        return Err(LabError::InvalidInput("newton tolerance must be positive".into()));
    }
    let mut x = start;
    let mut r = residual(x)?;
    let mut norm = norm_inf(r);
    for iteration in 0..=options.max_iter {
        if norm <= options.tol {
            return Ok(NewtonRoot {
                root: x,
                iterations: iteration,
                residual: norm,
            });
        }
        if iteration == options.max_iter {
            break;
        }
        let m = jacobian(x)?;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let scale = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        if det.norm() <= f64::EPSILON * scale * scale || !det.norm().is_finite() {
            return Err(LabError::SingularJacobian { iteration });
        }
        let step = [
            (m[1][1] * r[0] - m[0][1] * r[1]) / det,
            (m[0][0] * r[1] - m[1][0] * r[0]) / det,
        ];
        let mut factor = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let candidate = [x[0] - step[0] * factor, x[1] - step[1] * factor];
            if let Ok(rc) = residual(candidate) {
                if finite(rc) {
                    let nc = norm_inf(rc);
                    accepted = Some((candidate, rc, nc));
                    if nc < norm {
                        break;
                    }
                }
            }
            factor *= 0.5;
        }
        match accepted {
            Some((candidate, rc, nc)) => {
                x = candidate;
                r = rc;
                norm = nc;
            }
            None => {
                return Err(LabError::NoConvergence {
                    iterations: iteration,
                    residual: norm,
                    last: x,
                })
            }
        }
    }
    Err(LabError::NoConvergence {
        iterations: options.max_iter,
        residual: norm,
        last: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_root_with_linked_unknown() {
        let root = newton_system2(
            |x| Ok([x[0] * x[0] - 1.0, x[1] - x[0]]),
            |x| Ok([[x[0] * 2.0, c(0.0, 0.0)], [c(-1.0, 0.0), c(1.0, 0.0)]]),
            [c(2.0, 0.0), c(0.0, 0.0)],
            1e-13,
            50,
        )
        .unwrap();
        assert!((root.root[0] - 1.0).norm() < 1e-12);
        assert!((root.root[1] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn period_doubling_parameter() {
        // unknowns (c, z): f_c(z) - z = 0 and f_c'(z) + 1 = 0 for d = 2
        let root = newton_system2(
            |x| Ok([x[1] * x[1] + x[0] - x[1], x[1] * 2.0 + 1.0]),
            |x| Ok([[c(1.0, 0.0), x[1] * 2.0 - 1.0], [c(0.0, 0.0), c(2.0, 0.0)]]),
            [c(-0.7, 0.1), c(-0.4, 0.0)],
            1e-13,
            50,
        )
        .unwrap();
        assert!((root.root[0] - c(-0.75, 0.0)).norm() < 1e-12);
        assert!((root.root[1] - c(-0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_residual_returns_start() {
        let start = [c(0.3, 0.2), c(-1.0, 4.0)];
        let root = newton_system2(
            |_| Ok([c(0.0, 0.0); 2]),
            |_| panic!("jacobian must not be evaluated"),
            start,
            1e-12,
            10,
        )
        .unwrap();
        assert_eq!(root.iterations, 0);
        assert_eq!(root.root, start);
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let out = newton_system2(
            |x| Ok([x[0] + x[1] - 1.0, x[0] + x[1] - 2.0]),
            |_| Ok([[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]]),
            [c(0.0, 0.0), c(0.0, 0.0)],
            1e-12,
            10,
        );
        assert!(matches!(out, Err(LabError::SingularJacobian { .. })));
    }

    #[test]
    fn iteration_cap_carries_last_iterate() {
        // z^2 + 1 = 0 from a real start never leaves the real axis
        let out = newton_system2(
            |x| Ok([x[0] * x[0] + 1.0, x[1]]),
            |x| Ok([[x[0] * 2.0, c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]),
            [c(0.5, 0.0), c(0.0, 0.0)],
            1e-12,
            5,
        );
        match out {
            Err(LabError::NoConvergence { last, .. }) => assert_eq!(last[0].im, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
