use num_complex::Complex64;

use super::locate::{solve_cycle, CycleSolution, LocateOptions};
use crate::error::{LabError, Result};
use crate::numerics::{cis_turns, newton_system2};

/// `f_c^k(0)` and its `c`-derivative, without escape checks.
fn critical_orbit(d: u32, c: Complex64, k: usize) -> (Complex64, Complex64) {
    let mut z = Complex64::new(0.0, 0.0);
    let mut dz = Complex64::new(0.0, 0.0);
    for _ in 0..k {
        dz = z.powu(d - 1) * dz * d as f64 + 1.0;
        z = z.powu(d) + c;
    }
    (z, dz)
}

/// Centers of the hyperbolic components of period exactly `k`: roots of
/// `f_c^k(0)` (degree `d^(k-1)` in `c`) found by Aberth iteration, minus the
/// roots of lower period.
pub fn component_centers(d: u32, k: usize) -> Result<Vec<Complex64>> {
    if d < 2 || k == 0 {
        return Err(LabError::InvalidInput("need d >= 2 and k >= 1".into()));
    }
    let degree = (d as usize).pow(k as u32 - 1);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|j| Complex64::from_polar(2.0, std::f64::consts::TAU * (j as f64 + 0.3) / degree as f64))
        .collect();
    let mut converged = degree == 1;
    if degree == 1 {
        roots[0] = Complex64::new(0.0, 0.0);
    }
    for _ in 0..2000 {
        if converged {
            break;
        }
        let mut largest = 0.0f64;
        for i in 0..degree {
            let (g, dg) = critical_orbit(d, roots[i], k);
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = g / dg;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (roots[i] - roots[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                roots[i] -= step;
                largest = largest.max(step.norm() / (1.0 + roots[i].norm()));
            }
        }
        converged = largest < 1e-15;
    }
    if !converged {
        return Err(LabError::NoConvergence {
            iterations: 2000,
            residual: f64::NAN,
            last: [roots[0], roots[0]],
        });
    }
    Ok(roots
        .into_iter()
        .filter(|&c| {
            let mut z = Complex64::new(0.0, 0.0);
            (1..k).all(|m| {
                z = z.powu(d) + c;
                !k.is_multiple_of(m) || z.norm() > 1e-8
            })
        })
        .collect())
}

/// Follow the multiplier `t·e^{2πip/q}`, `t` from near 0 to 1, of the
/// attracting `k`-cycle of the component centered at `center`, along the
/// `branch`-th of the `d - 1` sheets of the multiplier map.
pub(crate) fn continue_from_center(
    d: u32,
    k: usize,
    p: usize,
    q: usize,
    center: Complex64,
    branch: usize,
    options: &LocateOptions,
) -> Result<CycleSolution> {
    let lambda = cis_turns(p as f64 / q as f64);
    let df = d as f64;
    // near the center the multiplier is K (c - center)^(d-1)
    let (_, slope) = critical_orbit(d, center, k);
    let mut product = Complex64::new(df.powi(k as i32), 0.0);
    let mut z = Complex64::new(0.0, 0.0);
    for _ in 1..k {
        z = z.powu(d) + center;
        product *= z.powu(d - 1);
    }
    let big_k = product * slope.powu(d - 1);
    let t0 = 1e-3;
    let root = (lambda * t0 / big_k).powf(1.0 / (d - 1) as f64) * cis_turns(branch as f64 / (d - 1) as f64);
    let mut x = [center + root, slope * root];

    let mut t = t0;
    let mut h = 0.05;
    while t < 1.0 {
        let next = (t + h).min(1.0);
        let target = lambda * next;
        let step = newton_system2(
            |x| {
                let o = crate::numerics::UnicriticalMap::new(d, x[0])?.iterate_second_order(x[1], k)?;
                Ok([o.z - x[1], o.dz - target])
            },
            |x| {
                let o = crate::numerics::UnicriticalMap::new(d, x[0])?.iterate_second_order(x[1], k)?;
                Ok([[o.dc, o.dz - 1.0], [o.dzc, o.dzz]])
            },
            x,
            1e-11,
            20,
        );
        match step {
            // stepping too far jumps sheets; accept only small moves
            Ok(r) if (r.root[0] - x[0]).norm() < 0.1 => {
                x = r.root;
                t = next;
                h = (h * 1.5).min(0.1);
            }
            _ if next == 1.0 && t > 0.9 => break,
            _ => {
                h *= 0.5;
                if h < 1e-4 {
                    return Err(LabError::NoConvergence {
                        iterations: 0,
                        residual: f64::NAN,
                        last: x,
                    });
                }
            }
        }
    }
    solve_cycle(d, k, p, q, (x[0], x[1]), options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_center_counts() {
        // numbers of period-k components of the Mandelbrot set
        for (k, count) in [(1, 1), (2, 1), (3, 3), (4, 6), (5, 15), (6, 27)] {
            assert_eq!(component_centers(2, k).unwrap().len(), count, "period {k}");
        }
    }

    #[test]
    fn known_centers() {
        let centers = component_centers(2, 2).unwrap();
        assert!((centers[0] + 1.0).norm() < 1e-13);
        let airplane = component_centers(2, 3).unwrap();
        assert!(airplane.iter().any(|c| (c.re + 1.754877666246693).abs() < 1e-12 && c.im.abs() < 1e-12));
    }

    #[test]
    fn cubic_period_three() {
        assert_eq!(component_centers(3, 3).unwrap().len(), 8);
    }

    #[test]
    fn continuation_reaches_cauliflower_and_basilica() {
        let options = LocateOptions::default();
        let center = Complex64::new(0.0, 0.0);
        let s = continue_from_center(2, 1, 0, 1, center, 0, &options).unwrap();
        assert!((s.c - 0.25).norm() < 1e-10);
        let s = continue_from_center(2, 1, 1, 2, center, 0, &options).unwrap();
        assert!((s.c + 0.75).norm() < 1e-10);
        let s = continue_from_center(2, 3, 0, 1, Complex64::new(-1.754877666246693, 0.0), 0, &options).unwrap();
        assert!((s.c + 1.75).norm() < 1e-10);
    }
}
