use num_complex::Complex64;

use super::{class_of, gcd, ParabolicKind, ParabolicParameter, NEWTON_TOL, TOL_ATLAS, TRUE_PERIOD_TOL};
use crate::error::{LabError, Result};
use crate::numerics::{cis_turns, iterate_jet, newton_scalar, newton_system2, UnicriticalMap};

#[derive(Debug, Clone, Copy)]
pub struct LocateOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Iterations of `f^n` spent pushing the critical value towards the
    /// characteristic point, per petal.
    pub characteristic_budget: usize,
}

impl Default for LocateOptions {
    fn default() -> Self {
        Self {
            newton_tol: NEWTON_TOL,
            max_iter: 80,
            characteristic_budget: 4000,
        }
    }
}

/// Raw Newton output before classification.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CycleSolution {
    pub c: Complex64,
    pub z: Complex64,
    pub k: usize,
    pub p: usize,
    pub q: usize,
}

/// Endpoint of the critical orbit after `steps` iterations, or its last
/// point inside the escape disk when it escapes earlier.
pub(crate) fn critical_orbit_seed(d: u32, c: Complex64, steps: usize) -> Result<Complex64> {
    let map = UnicriticalMap::new(d, c)?;
    let mut z = Complex64::new(0.0, 0.0);
    for _ in 0..steps {
        let next = map.eval(z);
        if next.norm() > map.escape_radius() {
            break;
        }
        z = next;
    }
    Ok(z)
}

pub(crate) fn solve_cycle(
    d: u32,
    k: usize,
    p: usize,
    q: usize,
    seed: (Complex64, Complex64),
    options: &LocateOptions,
) -> Result<CycleSolution> {
    if k == 0 || q == 0 {
        return Err(LabError::InvalidInput("periods must be positive".into()));
    }
    if gcd(p, q) != 1 || (q > 1 && (p == 0 || p >= q)) || (q == 1 && p != 0) {
        return Err(LabError::InvalidInput(format!("p/q = {p}/{q} is not a reduced rotation number")));
    }
    let lambda = cis_turns(p as f64 / q as f64);
    let orbit = |x: [Complex64; 2]| UnicriticalMap::new(d, x[0])?.iterate_second_order(x[1], k);
    let root = newton_system2(
        |x| {
            let o = orbit(x)?;
            Ok([o.z - x[1], o.dz - lambda])
        },
        |x| {
            let o = orbit(x)?;
            Ok([[o.dc, o.dz - 1.0], [o.dzc, o.dzz]])
        },
        [seed.0, seed.1],
        options.newton_tol,
        options.max_iter,
    );
    let [c, z] = match root {
        Ok(root) => polish(d, k, lambda, root.root),
        // divisor-period solutions are singular for the system, so Newton stalls near them
        Err(LabError::NoConvergence { residual, last, .. }) if residual < TRUE_PERIOD_TOL => {
            // near a singular root the position error is of order sqrt(residual)
            check_true_period(d, k, last, TRUE_PERIOD_TOL.max(10.0 * residual.sqrt()))?;
            return root.map(|_| unreachable!());
        }
        Err(e) => return Err(e),
    };
    check_true_period(d, k, [c, z], TRUE_PERIOD_TOL)?;
    Ok(CycleSolution { c, z, k, p, q })
}

/// Extra Newton steps past the stopping tolerance, kept while the residual
/// keeps shrinking.
fn polish(d: u32, k: usize, lambda: Complex64, mut x: [Complex64; 2]) -> [Complex64; 2] {
    let eval = |x: [Complex64; 2]| -> Option<([Complex64; 2], [[Complex64; 2]; 2])> {
        let o = UnicriticalMap::new(d, x[0]).ok()?.iterate_second_order(x[1], k).ok()?;
        Some(([o.z - x[1], o.dz - lambda], [[o.dc, o.dz - 1.0], [o.dzc, o.dzz]]))
    };
    let size = |r: [Complex64; 2]| r[0].norm().max(r[1].norm());
    for _ in 0..4 {
        let Some((r, m)) = eval(x) else { break };
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.norm() == 0.0 || size(r) == 0.0 {
            break;
        }
        let candidate = [
            x[0] - (m[1][1] * r[0] - m[0][1] * r[1]) / det,
            x[1] - (m[0][0] * r[1] - m[1][0] * r[0]) / det,
        ];
        match eval(candidate) {
            Some((rc, _)) if size(rc) < size(r) => x = candidate,
            _ => break,
        }
    }
    x
}

fn check_true_period(d: u32, k: usize, [c, z]: [Complex64; 2], tol: f64) -> Result<()> {
    let map = UnicriticalMap::new(d, c)?;
    for m in (1..k).filter(|m| k.is_multiple_of(*m)) {
        if (map.iterate(z, m)? - z).norm() < tol {
            return Err(LabError::PeriodDegenerate {
                requested: k,
                true_period: m,
            });
        }
    }
    Ok(())
}

/// Newton solve for a parabolic cycle of period `k` and multiplier
/// `e^{2πi p/q}` starting from `seed = (c, z)`, followed by classification.
pub fn locate_parabolic(
    d: u32,
    k: usize,
    p: usize,
    q: usize,
    seed: (Complex64, Complex64),
    tol: f64,
) -> Result<ParabolicParameter> {
    let options = LocateOptions {
        newton_tol: tol,
        ..LocateOptions::default()
    };
    let solution = solve_cycle(d, k, p, q, seed, &options)?;
    complete(d, &solution, &options)
}

/// The parabolic parameter at `c` itself: some cycle of component period at
/// most `max_period` has a root-of-unity multiplier, and the Newton solve
/// seeded at `c` stays within `tol` of it.
pub fn identify_parabolic(d: u32, c: Complex64, max_period: usize, tol: f64) -> Result<ParabolicParameter> {
    if max_period == 0 {
        return Err(LabError::InvalidInput("max period must be positive".into()));
    }
    let options = LocateOptions::default();
    let mut data = Vec::new();
    for n in 1..=max_period {
        for k in (1..=n).filter(|k| n % k == 0) {
            let q = n / k;
            for p in (0..q.max(1)).filter(|&p| gcd(p, q) == 1 && (q > 1 || p == 0)) {
                data.push((k, p, q));
            }
        }
    }
    let mut nearest = f64::INFINITY;
    for (k, p, q) in data {
        let z_seed = critical_orbit_seed(d, c, 4000 * k * q)?;
        let Ok(solution) = solve_cycle(d, k, p, q, (c, z_seed), &options) else {
            continue;
        };
        let distance = (solution.c - c).norm();
        nearest = nearest.min(distance);
        if distance <= tol {
            return complete(d, &solution, &options);
        }
    }
    Err(LabError::NotParabolic(format!(
        "no parabolic cycle of period <= {max_period} at {c} (nearest solution at distance {nearest:e}, tol {tol:e})"
    )))
}

fn nearest_root_of_unity(value: Complex64, q: usize) -> Complex64 {
    let turns = value.im.atan2(value.re) / std::f64::consts::TAU;
    let p = (turns * q as f64).round();
    cis_turns(p / q as f64)
}

/// The cycle point on the boundary of the Fatou component of the critical
/// value: where the orbit `f^{mn}(c)` accumulates, projected onto the cycle.
pub fn characteristic_point(d: u32, c: Complex64, k: usize, n: usize) -> Result<Complex64> {
    characteristic_point_with_budget(d, c, k, n, LocateOptions::default().characteristic_budget)
}

pub(crate) fn characteristic_point_with_budget(
    d: u32,
    c: Complex64,
    k: usize,
    n: usize,
    budget: usize,
) -> Result<Complex64> {
    if k == 0 || n == 0 || !n.is_multiple_of(k) {
        return Err(LabError::InvalidInput(format!("component period {n} is not a multiple of {k}")));
    }
    let q = n / k;
    let map = UnicriticalMap::new(d, c)?;
    let tail = map
        .iterate(c, n * budget * q)
        .map_err(|e| LabError::NotParabolic(format!("critical orbit does not converge: {e}")))?;
    let lambda = nearest_root_of_unity(map.iterate_with_derivatives(tail, k)?.dz, q);
    let z = newton_scalar(
        |z| {
            let o = map.iterate_second_order(z, k)?;
            Ok((o.dz, o.dzz))
        },
        lambda,
        tail,
        1e-10,
        60,
    )
    .map_err(|e| LabError::NotParabolic(format!("no cycle point near the critical orbit tail: {e}")))?;
    let residual = (map.iterate(z, k)? - z).norm();
    if residual > 1e-8 || (z - tail).norm() > 0.25 {
        return Err(LabError::NotParabolic(format!(
            "critical orbit tail {tail} does not settle on a parabolic cycle (residual {residual:e})"
        )));
    }
    Ok(z)
}

pub(crate) fn complete(d: u32, solution: &CycleSolution, options: &LocateOptions) -> Result<ParabolicParameter> {
    let CycleSolution { c, z, k, p, q } = *solution;
    let map = UnicriticalMap::new(d, c)?;
    let n = k * q;
    let lambda = cis_turns(p as f64 / q as f64);

    let mut cycle = Vec::with_capacity(k);
    let mut point = z;
    for _ in 0..k {
        cycle.push(point);
        point = map.eval(point);
    }

    let projected = characteristic_point_with_budget(d, c, k, n, options.characteristic_budget)?;
    let (start, distance) = cycle
        .iter()
        .enumerate()
        .map(|(i, w)| (i, (w - projected).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("cycle is non-empty");
    if distance > 1e-6 {
        return Err(LabError::NotParabolic(format!(
            "characteristic point {projected} is not on the located cycle"
        )));
    }
    cycle.rotate_left(start);
    let z_char = cycle[0];

    for w in &cycle {
        let o = map.iterate_with_derivatives(*w, k)?;
        if (o.z - w).norm() > TOL_ATLAS || (o.dz - lambda).norm() > TOL_ATLAS {
            return Err(LabError::NotParabolic(format!(
                "cycle point {w} misses the residual bound {TOL_ATLAS:e}"
            )));
        }
    }

    let jet = iterate_jet(&map, z_char, n, 2 * q + 2)?;
    let a = jet.coefficient(q + 1);
    if a.norm() < 1e-10 {
        return Err(LabError::LeadingCoefficientTooSmall { modulus: a.norm() });
    }
    let kind = if q >= 2 {
        ParabolicKind::Satellite
    } else {
        ParabolicKind::MultiplierOne
    };
    Ok(ParabolicParameter {
        d,
        c,
        k,
        p,
        q,
        n,
        cycle,
        z_char,
        a,
        petal_count: q,
        kind,
        class_members: class_of(d, c),
    })
}
