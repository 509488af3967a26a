//! Parabolic parameters of the multibrot set: location by Newton's method,
//! classification, deduplication modulo the rotation symmetry, persistence.

mod centers;
mod io;
mod locate;

pub use centers::component_centers;
pub use io::{load_atlas, save_atlas, ATLAS_FORMAT};
pub use locate::{characteristic_point, identify_parabolic, locate_parabolic, LocateOptions};

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{cis_turns, UnicriticalMap};

/// Newton tolerance used when seeding the atlas.
pub const NEWTON_TOL: f64 = 1e-12;
/// Residual bound every stored parameter satisfies.
pub const TOL_ATLAS: f64 = 1e-10;
/// Distinct from the Newton tolerance: divisor-period cycles solve the same
/// equations exactly, so this only needs to separate cycle points.
pub const TRUE_PERIOD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParabolicKind {
    /// Cycle multiplier exactly one: a root or a co-root.
    MultiplierOne,
    /// Multiplier a primitive q-th root of unity, q >= 2.
    Satellite,
}

impl ParabolicKind {
    pub fn name(self) -> &'static str {
        match self {
            ParabolicKind::MultiplierOne => "multiplier-one",
            ParabolicKind::Satellite => "satellite",
        }
    }
}

/// A parabolic parameter of `M_d` together with its parabolic cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicParameter {
    pub d: u32,
    pub c: Complex64,
    /// Period of the parabolic cycle.
    pub k: usize,
    pub p: usize,
    pub q: usize,
    /// Period of the adjacent hyperbolic component, `k * q`.
    pub n: usize,
    /// Cycle points, starting at the characteristic point.
    pub cycle: Vec<Complex64>,
    pub z_char: Complex64,
    /// Coefficient of `(z - z_char)^(petal_count + 1)` in the jet of `f^n`.
    pub a: Complex64,
    pub petal_count: usize,
    pub kind: ParabolicKind,
    /// The orbit of `c` under the rotations `c ↦ ωc`, `ω^(d-1) = 1`.
    pub class_members: Vec<Complex64>,
}

impl ParabolicParameter {
    pub fn map(&self) -> UnicriticalMap {
        UnicriticalMap::new(self.d, self.c).expect("stored parameters are valid")
    }

    pub fn multiplier(&self) -> Complex64 {
        cis_turns(self.p as f64 / self.q as f64)
    }

    /// The same parabolic data transported by `z ↦ ωz` to the parameter `ωc`.
    pub fn rotated(&self, omega: Complex64) -> ParabolicParameter {
        let mut rotated = self.clone();
        rotated.c = omega * self.c;
        rotated.cycle = self.cycle.iter().map(|z| omega * z).collect();
        rotated.z_char = omega * self.z_char;
        // conjugating by a linear map scales the (q+1)-st coefficient by ω^{-q}
        rotated.a = self.a * omega.powi(-(self.petal_count as i32));
        rotated
    }
}

/// Rotations `ω` with `ω^(d-1) = 1`.
pub fn rotation_group(d: u32) -> Vec<Complex64> {
    (0..d - 1)
        .map(|l| cis_turns(l as f64 / (d - 1) as f64))
        .collect()
}

/// Argument in `[0, 2π)`, with values within `1e-9` of `2π` folded to zero.
fn canonical_argument(z: Complex64) -> f64 {
    let mut arg = z.im.atan2(z.re);
    if arg < 0.0 {
        arg += TAU;
    }
    if TAU - arg < 1e-9 {
        arg = 0.0;
    }
    arg
}

/// Members of the rotation class of `c`, the representative (smallest
/// argument) first.
pub fn class_of(d: u32, c: Complex64) -> Vec<Complex64> {
    let mut members: Vec<Complex64> = rotation_group(d).into_iter().map(|w| w * c).collect();
    members.sort_by(|a, b| canonical_argument(*a).total_cmp(&canonical_argument(*b)));
    members
}

/// An enumerated atlas: one entry per rotation class.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    pub d: u32,
    pub entries: Vec<ParabolicParameter>,
    /// Set when some converged solution could not be completed.
    pub partial: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnumerationReport {
    pub seeds_tried: usize,
    /// Seeds whose critical orbit escaped or whose Newton run failed.
    pub seeds_failed: usize,
    pub period_degenerate: usize,
    /// Distinct solutions that failed completion, with the reason.
    pub incomplete: Vec<(Complex64, String)>,
}

/// Seed the Newton solve on a polar grid of `c` values and collect every
/// parabolic parameter with component period `k * q <= max_component_period`.
pub fn enumerate_atlas(
    d: u32,
    max_component_period: usize,
    grid_density: usize,
    tol: f64,
) -> crate::Result<(Atlas, EnumerationReport)> {
    use crate::LabError;
    if d < 2 {
        return Err(LabError::InvalidInput(format!("degree must be >= 2, got {d}")));
    }
    if max_component_period == 0 || max_component_period > 6 {
        return Err(LabError::InvalidInput(
            "max component period must be in 1..=6".into(),
        ));
    }
    if grid_density == 0 {
        return Err(LabError::InvalidInput("grid density must be positive".into()));
    }
    let tol = tol.max(f64::EPSILON);

    let mut data = Vec::new();
    for k in 1..=max_component_period {
        for q in 1..=max_component_period / k {
            if q == 1 {
                data.push((k, 0, 1));
            } else {
                for p in 1..q {
                    if gcd(p, q) == 1 {
                        data.push((k, p, q));
                    }
                }
            }
        }
    }

    let radii = grid_density;
    let angles = 4 * grid_density;
    let seeds: Vec<Complex64> = (0..radii)
        .flat_map(|i| {
            let r = 2.0 * (i as f64 + 0.5) / radii as f64;
            (0..angles).map(move |j| Complex64::from_polar(r, TAU * j as f64 / angles as f64))
        })
        .collect();

    let jobs: Vec<((usize, usize, usize), Complex64)> = data
        .iter()
        .flat_map(|&datum| seeds.iter().map(move |&s| (datum, s)))
        .collect();

    let options = LocateOptions {
        newton_tol: tol,
        ..LocateOptions::default()
    };
    let mut outcomes: Vec<Result<locate::CycleSolution, LabError>> = jobs
        .par_iter()
        .map(|&((k, p, q), c_seed)| {
            let z_seed = locate::critical_orbit_seed(d, c_seed, k * q * 32)?;
            locate::solve_cycle(d, k, p, q, (c_seed, z_seed), &options)
        })
        .collect();

    // the grid misses small components; multiplier continuation from every
    // component center reaches each boundary point exactly once
    let mut center_jobs = Vec::new();
    for k in 1..=max_component_period {
        let centers = component_centers(d, k)?;
        for &(dk, p, q) in data.iter().filter(|datum| datum.0 == k) {
            for &center in &centers {
                for branch in 0..(d - 1) as usize {
                    center_jobs.push((dk, p, q, center, branch));
                }
            }
        }
    }
    outcomes.par_extend(center_jobs.par_iter().map(|&(k, p, q, center, branch)| {
        centers::continue_from_center(d, k, p, q, center, branch, &options)
    }));

    let mut report = EnumerationReport {
        seeds_tried: jobs.len() + center_jobs.len(),
        ..EnumerationReport::default()
    };
    let merge_radius = (10.0 * tol).max(1e-8);
    let mut distinct: Vec<locate::CycleSolution> = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(solution) => {
                let duplicate = distinct.iter().any(|s| {
                    (s.c - solution.c).norm() <= merge_radius * (1.0 + s.c.norm())
                });
                if !duplicate {
                    distinct.push(solution);
                }
            }
            Err(LabError::PeriodDegenerate { .. }) => {
                report.seeds_failed += 1;
                report.period_degenerate += 1;
            }
            Err(_) => report.seeds_failed += 1,
        }
    }

    let completed: Vec<(Complex64, crate::Result<ParabolicParameter>)> = distinct
        .par_iter()
        .map(|s| (s.c, locate::complete(d, s, &options)))
        .collect();

    let mut entries: Vec<ParabolicParameter> = Vec::new();
    let mut partial = false;
    for (c, result) in completed {
        match result {
            Ok(param) => {
                let same_class = entries.iter().any(|e| {
                    e.class_members
                        .iter()
                        .any(|m| (m - param.c).norm() <= merge_radius * (1.0 + m.norm()))
                });
                if !same_class {
                    entries.push(param);
                }
            }
            Err(err) => {
                partial = true;
                report.incomplete.push((c, err.to_string()));
            }
        }
    }

    // re-anchor each class at its representative
    let mut entries: Vec<ParabolicParameter> = entries
        .into_iter()
        .map(|e| {
            let representative = e.class_members[0];
            let omega = rotation_group(d)
                .into_iter()
                .min_by(|a, b| {
                    (a * e.c - representative)
                        .norm()
                        .total_cmp(&(b * e.c - representative).norm())
                })
                .expect("rotation group is never empty");
            let mut rotated = e.rotated(omega);
            rotated.c = representative;
            rotated
        })
        .collect();
    entries.sort_by(|a, b| {
        (a.n, a.k, a.p)
            .cmp(&(b.n, b.k, b.p))
            .then(a.c.re.total_cmp(&b.c.re))
            .then(a.c.im.total_cmp(&b.c.im))
    });
    Ok((Atlas { d, entries, partial }, report))
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
