//! Explicit conjugacies between parabolic germs built from Fatou
//! coordinates, their extension by lifting, and the rigidity scan over an
//! atlas.

mod scan;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atlas::ParabolicParameter;
use crate::error::{LabError, Result};
use crate::fatou::{entry_petal, inverse_step, FatouChart, ENTRY_RADIUS, ITER_CAP};
use crate::germ::{build_germ, model_germ, ModelTag, ParabolicGerm};

pub use scan::{load_scan, rigidity_scan, save_scan, scan_to_json, PairRecord, RigidityScan, ScanEntry, ScanOptions, SCAN_FORMAT};

/// Default bound on the number of lifting steps.
pub const DEFAULT_DEPTH: usize = 5_000;
/// Bound on `|η(g1(z)) - g2(η(z))|` for conjugacies that exist.
pub const DEFECT_TOL: f64 = 1e-6;

/// `η = ψ₂⁻¹ ∘ ψ₁` on petal `j1` of `g1`, extended to the basin by lifting.
#[derive(Debug, Clone)]
pub struct NumericalConjugacy {
    g1: Arc<ParabolicGerm>,
    g2: Arc<ParabolicGerm>,
    chart1: FatouChart,
    chart2: FatouChart,
    depth: usize,
    anchor: Complex64,
}

/// Attracting chart of `petal`, with constant chosen so that it vanishes at
/// a marked point attracted through that petal, if there is one.
fn marked_chart(germ: &Arc<ParabolicGerm>, petal: usize) -> Result<(FatouChart, bool)> {
    let chart = FatouChart::attracting(germ, petal)?;
    for &x in germ.marked_points() {
        if let Ok((j, _)) = entry_petal(germ, x, ITER_CAP, ENTRY_RADIUS) {
            if j == petal {
                let value = chart.extended_value(x)?;
                return Ok((chart.with_normalization(-value), true));
            }
        }
    }
    Ok((chart, false))
}

/// Conjugacy between petal `j1` of `g1` and petal `j2` of `g2`. Charts are
/// normalized at marked points when both petals attract one.
pub fn petal_conjugacy(g1: &Arc<ParabolicGerm>, g2: &Arc<ParabolicGerm>, j1: usize, j2: usize) -> Result<NumericalConjugacy> {
    if g1.q() != g2.q() {
        return Err(LabError::InvalidInput(format!("petal counts differ: {} vs {}", g1.q(), g2.q())));
    }
    single_petal_conjugacy(g1, g2, j1, j2)
}

/// Petal to petal conjugacy without the petal-count check: a single petal
/// of `g1` may be modelled on one petal of a germ with more.
fn single_petal_conjugacy(
    g1: &Arc<ParabolicGerm>,
    g2: &Arc<ParabolicGerm>,
    j1: usize,
    j2: usize,
) -> Result<NumericalConjugacy> {
    let (mut chart1, marked1) = marked_chart(g1, j1)?;
    let (mut chart2, marked2) = marked_chart(g2, j2)?;
    if !(marked1 && marked2) {
        chart1 = chart1.with_normalization(Complex64::new(0.0, 0.0));
        chart2 = chart2.with_normalization(Complex64::new(0.0, 0.0));
    }
    let anchor = petal_point(g1, j1, ENTRY_RADIUS + 10.0);
    Ok(NumericalConjugacy {
        g1: Arc::clone(g1),
        g2: Arc::clone(g2),
        chart1,
        chart2,
        depth: DEFAULT_DEPTH,
        anchor,
    })
}

/// Point on the axis of attracting petal `j` with `w`-chart value `w`.
pub fn petal_point(germ: &ParabolicGerm, j: usize, w: f64) -> Complex64 {
    let q = germ.q() as f64;
    let radius = (1.0 / (q * germ.a().norm() * w)).powf(1.0 / q);
    germ.z0() + germ.attracting_direction(j) * radius
}

impl NumericalConjugacy {
    pub fn with_depth(mut self, depth: usize) -> NumericalConjugacy {
        self.depth = depth;
        self
    }

    pub fn source(&self) -> &Arc<ParabolicGerm> {
        &self.g1
    }

    pub fn target(&self) -> &Arc<ParabolicGerm> {
        &self.g2
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    pub fn in_domain(&self, z: Complex64) -> bool {
        self.chart1.in_petal(z)
    }

    /// `ψ₂⁻¹(ψ₁(z))` for `z` in the petal.
    pub fn core(&self, z: Complex64) -> Result<Complex64> {
        let w = self.chart1.value(z)?;
        self.chart2.attracting_inverse(w)
    }

    /// `η(z)` at any point of the basin reachable from the anchor by a
    /// straight segment inside the basin.
    pub fn extend(&self, z: Complex64) -> Result<Complex64> {
        self.extend_lifted(z, 0)
    }

    /// [`extend`](Self::extend) with `extra` lifting steps beyond the minimum.
    pub fn extend_lifted(&self, z: Complex64, extra: usize) -> Result<Complex64> {
        if extra == 0 && self.in_domain(z) {
            return self.core(z);
        }
        let entry = |p: Complex64| -> Result<usize> {
            let mut x = p;
            for m in 0..=self.depth {
                if self.chart1.in_petal(x) {
                    return Ok(m);
                }
                x = self.g1.eval(x)?;
                if self.g1.escaped(x) {
                    break;
                }
            }
            Err(LabError::NotInPetal(format!(
                "{p} does not enter petal {} within {} steps",
                self.chart1.index(),
                self.depth
            )))
        };
        let path = |t: f64| self.anchor + (z - self.anchor) * t;
        let mut lift = 0;
        for s in 0..=64 {
            lift = lift.max(entry(path(s as f64 / 64.0))?);
        }
        let mut lift = lift + 2 + extra;
        loop {
            match self.continue_along(z, lift) {
                Err(LabError::NotInPetal(_)) if lift < self.depth => lift = (2 * lift).min(self.depth),
                other => return other,
            }
        }
    }

    /// Continuation of `η` from the anchor to `z` along the segment, through
    /// orbits of length `lift`.
    fn continue_along(&self, z: Complex64, lift: usize) -> Result<Complex64> {
        let path = |t: f64| self.anchor + (z - self.anchor) * t;
        let orbit = |p: Complex64| -> Result<Vec<Complex64>> {
            let mut xs = Vec::with_capacity(lift + 1);
            xs.push(p);
            for _ in 0..lift {
                let next = self.g1.eval(*xs.last().expect("nonempty"))?;
                xs.push(next);
            }
            Ok(xs)
        };

        let start = orbit(self.anchor)?;
        let mut ys = start.iter().map(|&x| self.core(x)).collect::<Result<Vec<_>>>()?;
        let max_step = (0.01 / (z - self.anchor).norm().max(1e-12)).min(1.0);
        let mut h = max_step;
        let mut t = 0.0;
        while t < 1.0 {
            let next = (t + h).min(1.0);
            let xs = orbit(path(next))?;
            if !self.chart1.in_petal(xs[lift]) {
                return Err(LabError::NotInPetal(format!("{} left the petal", xs[lift])));
            }
            match self.advance(&xs, &ys) {
                Ok(advanced) => {
                    ys = advanced;
                    t = next;
                    h = (h * 1.5).min(max_step);
                }
                Err(e) => {
                    h *= 0.5;
                    if h < 1e-7 {
                        return Err(LabError::InverseBranch(format!("continuation towards {z} stalled at t = {t:.6}: {e}")));
                    }
                }
            }
        }
        Ok(ys[0])
    }

    /// Images of the orbit `xs` given the images `ys` of a nearby orbit.
    fn advance(&self, xs: &[Complex64], ys: &[Complex64]) -> Result<Vec<Complex64>> {
        let last = xs.len() - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
        out[last] = self.core(xs[last])?;
        for l in (0..last).rev() {
            let (_, slope) = self.g2.eval_with_derivative(ys[l])?;
            let seed = ys[l] + (out[l + 1] - ys[l + 1]) / slope;
            let (y, _) = inverse_step(&self.g2, out[l + 1], seed)?;
            // the linear prediction must be good to first order
            let moved = (seed - ys[l]).norm();
            if (y - seed).norm() > 0.25 * moved + 1e-12 * (1.0 + y.norm()) {
                return Err(LabError::InverseBranch(format!("prediction off by {:e}", (y - seed).norm())));
            }
            out[l] = y;
        }
        Ok(out)
    }
}

pub fn extend_conjugacy(conj: &NumericalConjugacy, z: Complex64, depth: usize) -> Result<Complex64> {
    conj.clone().with_depth(depth).extend(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub defect: f64,
    pub evaluated: usize,
    /// Samples that could not be evaluated, with the reason.
    pub failures: Vec<(Complex64, String)>,
}

/// `max |η(g1(z)) - g2(η(z))|` over the samples.
pub fn conjugacy_defect(conj: &NumericalConjugacy, samples: &[Complex64]) -> DefectReport {
    use rayon::prelude::*;
    let results: Vec<(Complex64, Result<f64>)> = samples
        .par_iter()
        .map(|&z| {
            let r = (|| {
                let lhs = conj.extend(conj.g1.eval(z)?)?;
                let rhs = conj.g2.eval(conj.extend(z)?)?;
                Ok((lhs - rhs).norm())
            })();
            (z, r)
        })
        .collect();
    let mut report = DefectReport {
        defect: 0.0,
        evaluated: 0,
        failures: Vec::new(),
    };
    for (z, r) in results {
        match r {
            Ok(d) => {
                report.defect = report.defect.max(d);
                report.evaluated += 1;
            }
            Err(e) => report.failures.push((z, e.to_string())),
        }
    }
    report
}

/// Pseudo-random points of the basin of petal `petal` inside `window`
/// (`[x0, y0, x1, y1]`) that the straight segment from `anchor` reaches
/// without leaving the basin, with every point of the segment entering the
/// petal within `depth` steps. The same holds for the segment to the image.
pub fn basin_samples(
    germ: &ParabolicGerm,
    petal: usize,
    anchor: Complex64,
    window: [f64; 4],
    count: usize,
    depth: usize,
    seed: u64,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_basin = |z: Complex64| matches!(entry_petal(germ, z, depth, ENTRY_RADIUS), Ok((j, _)) if j == petal);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count.max(1) {
        tries += 1;
        let z = Complex64::new(rng.random_range(window[0]..window[2]), rng.random_range(window[1]..window[3]));
        let reachable = |p: Complex64| (0..=64).all(|s| in_basin(anchor + (p - anchor) * (s as f64 / 64.0)));
        if reachable(z) && germ.eval(z).is_ok_and(reachable) {
            out.push(z);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeCheck {
    pub report: DefectReport,
    /// `η(c)`, expected `1/3`.
    pub critical_value_image: Complex64,
    /// `η(0)`, expected `0`.
    pub critical_point_image: Complex64,
}

/// Conjugacy from the critical-value Fatou component of a `q = 1`
/// parameter onto the unit disk with dynamics `B(z) = (3z² + 1)/(3 + z²)`.
pub fn blaschke_model_check(param: &ParabolicParameter, samples: usize) -> Result<BlaschkeCheck> {
    if param.petal_count != 1 {
        return Err(LabError::InvalidInput(format!("petal count {} is not 1", param.petal_count)));
    }
    let g1 = Arc::new(build_germ(param, 4)?);
    let g2 = Arc::new(model_germ(ModelTag::Blaschke)?);
    let (j2, _) = entry_petal(&g2, Complex64::new(1.0 / 3.0, 0.0), ITER_CAP, ENTRY_RADIUS)?;
    let conj = single_petal_conjugacy(&g1, &g2, 0, j2)?;
    let critical_value_image = conj.extend(param.c)?;
    let critical_point_image = conj.extend(Complex64::new(0.0, 0.0))?;
    let reach = param.c.norm().max((param.z_char - param.c).norm()) + 1.0;
    let window = [-reach, -reach, reach, reach];
    let points = basin_samples(&g1, 0, conj.anchor(), window, samples, DEFAULT_DEPTH / 2, 0x5eed);
    let report = conjugacy_defect(&conj, &points);
    Ok(BlaschkeCheck {
        report,
        critical_value_image,
        critical_point_image,
    })
}
