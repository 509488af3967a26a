//! Attracting and repelling Fatou coordinates on the petals of a parabolic
//! germ, their extensions by the dynamics, and their inverses.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::germ::ParabolicGerm;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Default entry threshold `Re w > R0` in the `w`-chart.
pub const ENTRY_RADIUS: f64 = 20.0;
/// Default convergence tolerance of the extrapolated limit.
pub const FATOU_TOL: f64 = 1e-10;
/// Default cap on forward iterations used to reach a petal.
pub const ITER_CAP: usize = 100_000;

/// Checkpoints (each doubling `|w|`) tried before giving up.
const MAX_CHECKPOINTS: usize = 12;
/// Accepted ratio of the best successive difference to the tolerance once
/// the extrapolations stop improving.
const PLATEAU_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Attracting,
    Repelling,
}

/// One Fatou coordinate of a germ. Attracting charts satisfy
/// `ψ(g(z)) = ψ(z) + 1`, repelling charts `ψ(g(z)) = ψ(z) - 1`.
#[derive(Debug, Clone)]
pub struct FatouChart {
    germ: Arc<ParabolicGerm>,
    direction: Direction,
    index: usize,
    normalization: Complex64,
    iter_cap: usize,
    tol: f64,
    entry_radius: f64,
}

/// Value together with the number of steps used to enter the petal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedValue {
    pub value: Complex64,
    pub derivative: Complex64,
    pub entry_time: usize,
}

impl FatouChart {
    pub fn new(germ: &Arc<ParabolicGerm>, direction: Direction, index: usize) -> Result<FatouChart> {
        if index >= germ.q() {
            return Err(LabError::InvalidInput(format!(
                "petal index {index} out of range for q = {}",
                germ.q()
            )));
        }
        Ok(FatouChart {
            germ: Arc::clone(germ),
            direction,
            index,
            normalization: ZERO,
            iter_cap: ITER_CAP,
            tol: FATOU_TOL,
            entry_radius: ENTRY_RADIUS,
        })
    }

    pub fn attracting(germ: &Arc<ParabolicGerm>, petal: usize) -> Result<FatouChart> {
        FatouChart::new(germ, Direction::Attracting, petal)
    }

    pub fn repelling(germ: &Arc<ParabolicGerm>, gate: usize) -> Result<FatouChart> {
        FatouChart::new(germ, Direction::Repelling, gate)
    }

    pub fn with_normalization(mut self, normalization: Complex64) -> FatouChart {
        self.normalization = normalization;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> FatouChart {
        self.tol = tol;
        self
    }

    pub fn with_iter_cap(mut self, iter_cap: usize) -> FatouChart {
        self.iter_cap = iter_cap;
        self
    }

    pub fn with_entry_radius(mut self, radius: f64) -> FatouChart {
        self.entry_radius = radius;
        self
    }

    pub fn germ(&self) -> &Arc<ParabolicGerm> {
        &self.germ
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn normalization(&self) -> Complex64 {
        self.normalization
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn entry_radius(&self) -> f64 {
        self.entry_radius
    }

    /// Unit vector along the petal axis.
    pub fn axis(&self) -> Complex64 {
        match self.direction {
            Direction::Attracting => self.germ.attracting_direction(self.index),
            Direction::Repelling => self.germ.gate_direction(self.index),
        }
    }

    fn sign(&self) -> f64 {
        match self.direction {
            Direction::Attracting => 1.0,
            Direction::Repelling => -1.0,
        }
    }

    /// The `w`-chart oriented so that the petal is `Re > R0`, at `z0 + u`.
    fn oriented_w(&self, u: Complex64) -> Complex64 {
        self.germ.w_chart_local(u) * self.sign()
    }

    fn sector_matches(&self, u: Complex64) -> bool {
        match self.direction {
            Direction::Attracting => self.germ.nearest_attracting_local(u) == self.index,
            Direction::Repelling => self.germ.nearest_gate_local(u) == self.index,
        }
    }

    pub fn in_petal(&self, z: Complex64) -> bool {
        self.in_petal_local(z - self.germ.z0())
    }

    fn in_petal_local(&self, u: Complex64) -> bool {
        u.norm() > 0.0 && self.sector_matches(u) && self.oriented_w(u).re > self.entry_radius
    }

    fn formal(&self, u: Complex64) -> (Complex64, Complex64) {
        let (v, d) = self.germ.formal().eval(u, self.axis());
        (v * self.sign(), d * self.sign())
    }

    /// One step of the chart's dynamics in local coordinates, with its
    /// derivative.
    fn step(&self, u: Complex64) -> Result<(Complex64, Complex64)> {
        match self.direction {
            Direction::Attracting => self.germ.step_local(u),
            Direction::Repelling => {
                let seed = u - (self.germ.step_local(u)?.0 - u);
                let (prev, slope) = inverse_step_local(&self.germ, u, seed)?;
                Ok((prev, ONE / slope))
            }
        }
    }

    /// Un-normalized coordinate and derivative at a point of the petal.
    fn raw(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.raw_local(z - self.germ.z0())
    }

    fn raw_local(&self, u: Complex64) -> Result<(Complex64, Complex64)> {
        if !self.in_petal_local(u) {
            return Err(LabError::NotInPetal(format!(
                "{} is outside {:?} petal {} (Re w = {:.3})",
                self.germ.z0() + u,
                self.direction,
                self.index,
                self.oriented_w(u).re
            )));
        }
        let p = (crate::germ::FormalFatou::depth_per_petal() - 1) as i32;
        let mut x = u;
        let mut chain = ONE;
        let mut steps = 0usize;
        let mut checkpoint_w = self.oriented_w(u);
        let (phi, dphi) = self.formal(x);
        let mut estimates = vec![(checkpoint_w, phi, dphi * chain)];
        let mut extrapolated: Option<Complex64> = None;
        // (|ΔR|, R, derivative) at the smallest successive difference so far
        let mut best: Option<(f64, Complex64, Complex64)> = None;
        let mut rising = 0usize;
        while estimates.len() <= MAX_CHECKPOINTS {
            let (next, slope) = self.step(x)?;
            x = next;
            chain *= slope;
            steps += 1;
            if steps > self.iter_cap {
                break;
            }
            let w = self.oriented_w(x);
            if w.norm() < 2.0 * checkpoint_w.norm() {
                continue;
            }
            checkpoint_w = w;
            let (phi, dphi) = self.formal(x);
            estimates.push((w, phi - steps as f64, dphi * chain));
            let (w1, e1, _) = estimates[estimates.len() - 2];
            let (w2, e2, d2) = estimates[estimates.len() - 1];
            let (p1, p2) = (w1.powi(p), w2.powi(p));
            let r = (e2 * p2 - e1 * p1) / (p2 - p1);
            if let Some(prev) = extrapolated {
                let diff = (r - prev).norm();
                if diff <= self.tol {
                    return Ok((r, d2));
                }
                match best {
                    Some((b, _, _)) if diff >= b => rising += 1,
                    _ => {
                        best = Some((diff, r, d2));
                        rising = 0;
                    }
                }
                // Past the optimum, roundoff in the orbit outgrows the
                // truncation error.
                if rising >= 2 {
                    break;
                }
            }
            extrapolated = Some(r);
        }
        if let Some((diff, r, d)) = best {
            if diff <= PLATEAU_FACTOR * self.tol {
                return Ok((r, d));
            }
        }
        let n = estimates.len();
        Err(LabError::ExtrapolationFailed {
            last: extrapolated.unwrap_or(estimates[n - 1].1),
            previous: estimates[n.saturating_sub(2)].1,
        })
    }

    /// Coordinate at a point of the petal.
    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.raw(z)?.0 + self.normalization)
    }

    pub fn value_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (v, d) = self.raw(z)?;
        Ok((v + self.normalization, d))
    }

    /// Attracting coordinate at any point whose orbit enters the petal:
    /// `ψ(g^m(z)) - m` for the first such `m`, plus `extra` further steps.
    pub fn extended(&self, z: Complex64, extra: usize) -> Result<ExtendedValue> {
        if self.direction != Direction::Attracting {
            return Err(LabError::InvalidInput("extension by forward orbits needs an attracting chart".into()));
        }
        let mut x = z;
        let mut chain = ONE;
        let mut m = 0usize;
        while !self.in_petal(x) {
            if m >= self.iter_cap {
                return Err(LabError::NotInPetal(format!(
                    "orbit of {z} does not enter attracting petal {} within {} steps",
                    self.index, self.iter_cap
                )));
            }
            let u = x - self.germ.z0();
            if u.norm() > 0.0 && self.germ.w_chart(x).re > self.entry_radius {
                return Err(LabError::NotInPetal(format!(
                    "orbit of {z} enters attracting petal {} instead of {}",
                    self.germ.nearest_attracting(x),
                    self.index
                )));
            }
            let (next, slope) = self.germ.eval_with_derivative(x)?;
            x = next;
            chain *= slope;
            m += 1;
            if self.germ.escaped(x) {
                return Err(LabError::DivergedOrbit {
                    step: m,
                    modulus: x.norm(),
                });
            }
        }
        let entry_time = m;
        for _ in 0..extra {
            let (next, slope) = self.germ.eval_with_derivative(x)?;
            x = next;
            chain *= slope;
            m += 1;
        }
        let (v, d) = self.value_with_derivative(x)?;
        Ok(ExtendedValue {
            value: v - m as f64,
            derivative: d * chain,
            entry_time,
        })
    }

    /// Extended attracting coordinate.
    pub fn extended_value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.extended(z, 0)?.value)
    }

    /// Solve `ψ(ζ) = target` for `ζ` in the petal. The target must lie well
    /// inside the image half-plane.
    pub fn local_inverse(&self, target: Complex64) -> Result<Complex64> {
        let raw_target = target - self.normalization;
        if raw_target.re < self.entry_radius {
            return Err(LabError::NotInPetal(format!(
                "{target} is outside the image half-plane Re > {}",
                self.entry_radius
            )));
        }
        let germ = &self.germ;
        let q = germ.q() as f64;
        // leading order: oriented w = raw target
        let u_q = -ONE / (germ.a() * q * raw_target * self.sign());
        let axis = self.axis();
        let principal = u_q.powf(1.0 / q);
        let mut u = (0..germ.q())
            .map(|j| principal * Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / q))
            .min_by(|a, b| (a / a.norm() - axis).norm().total_cmp(&(b / b.norm() - axis).norm()))
            .expect("q >= 1");
        for _ in 0..30 {
            let (v, d) = self.formal(u);
            let step = (v - raw_target) / d;
            u -= step;
            if step.norm() <= 1e-16 * u.norm() {
                break;
            }
        }
        for _ in 0..8 {
            let (v, d) = self.raw_local(u)?;
            let r = v - raw_target;
            if r.norm() <= 10.0 * self.tol {
                return Ok(germ.z0() + u);
            }
            u -= r / d;
        }
        let (v, _) = self.raw_local(u)?;
        if (v - raw_target).norm() <= 100.0 * self.tol {
            return Ok(germ.z0() + u);
        }
        Err(LabError::NoConvergence {
            iterations: 8,
            residual: (v - raw_target).norm(),
            last: [germ.z0() + u, ZERO],
        })
    }

    /// Number of steps that moves `target` to `Re ≥ 2 R0` under the chart's
    /// translation.
    pub fn depth_shift(&self, target: Complex64) -> usize {
        let deficit = 2.0 * self.entry_radius - (target - self.normalization).re;
        if deficit <= 0.0 {
            0
        } else {
            deficit.ceil() as usize
        }
    }

    /// Inverse of an attracting chart on its whole image: local inverse at
    /// `target + N` pulled back `N` times along the inverse branch.
    pub fn attracting_inverse(&self, target: Complex64) -> Result<Complex64> {
        if self.direction != Direction::Attracting {
            return Err(LabError::InvalidInput("attracting_inverse needs an attracting chart".into()));
        }
        let n = self.depth_shift(target);
        let mut orbit = vec![self.local_inverse(target + n as f64)?];
        for m in (0..n).rev() {
            let current = *orbit.last().expect("nonempty");
            let shifted = target + m as f64;
            let seed = if (shifted - self.normalization).re >= self.entry_radius {
                self.formal_seed(shifted)
            } else if orbit.len() >= 3 {
                let k = orbit.len();
                orbit[k - 1] * 3.0 - orbit[k - 2] * 3.0 + orbit[k - 3]
            } else {
                current - (self.germ.eval(current)? - current)
            };
            let (prev, _) = inverse_step(&self.germ, current, seed)?;
            orbit.push(prev);
        }
        Ok(*orbit.last().expect("nonempty"))
    }

    fn formal_seed(&self, target: Complex64) -> Complex64 {
        let germ = &self.germ;
        let q = germ.q() as f64;
        let u_q = -ONE / (germ.a() * q * (target - self.normalization) * self.sign());
        let axis = self.axis();
        let principal = u_q.powf(1.0 / q);
        let u = (0..germ.q())
            .map(|j| principal * Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / q))
            .min_by(|a, b| (a / a.norm() - axis).norm().total_cmp(&(b / b.norm() - axis).norm()))
            .expect("q >= 1");
        germ.z0() + u
    }
}

/// Attracting petal entered by the forward orbit of `z` (entry threshold
/// `Re w > entry_radius`) and the number of steps taken.
pub fn entry_petal(germ: &ParabolicGerm, z: Complex64, iter_cap: usize, entry_radius: f64) -> Result<(usize, usize)> {
    let mut x = z;
    for m in 0..=iter_cap {
        if x != germ.z0() && germ.w_chart(x).re > entry_radius {
            return Ok((germ.nearest_attracting(x), m));
        }
        x = germ.eval(x)?;
        if germ.escaped(x) {
            return Err(LabError::DivergedOrbit {
                step: m + 1,
                modulus: x.norm(),
            });
        }
    }
    Err(LabError::NotInPetal(format!("orbit of {z} enters no attracting petal within {iter_cap} steps")))
}

/// One backward step: the solution of `g(ζ) = target` near `seed`, with
/// `g'(ζ)`.
pub(crate) fn inverse_step(germ: &ParabolicGerm, target: Complex64, seed: Complex64) -> Result<(Complex64, Complex64)> {
    let mut z = seed;
    let scale = 1.0 + target.norm();
    let mut last_residual = f64::INFINITY;
    for _ in 0..50 {
        let (v, d) = germ.eval_with_derivative(z)?;
        let r = v - target;
        if d.norm() < 1e-300 {
            return Err(LabError::VanishingDerivative { at: z });
        }
        let step = r / d;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) || r.norm() == 0.0 {
            return Ok((z, d));
        }
        if r.norm() > 1e3 * last_residual.max(1e-300) && last_residual < 1e-6 * scale {
            return Err(LabError::InverseBranch(format!("Newton diverged near {z}")));
        }
        last_residual = r.norm();
        z -= step;
    }
    let (v, d) = germ.eval_with_derivative(z)?;
    if (v - target).norm() <= 1e-11 * scale {
        return Ok((z, d));
    }
    Err(LabError::InverseBranch(format!(
        "no preimage of {target} near {seed} (residual {:e})",
        (v - target).norm()
    )))
}

/// [`inverse_step`] in coordinates centered at the fixed point.
fn inverse_step_local(germ: &ParabolicGerm, target: Complex64, seed: Complex64) -> Result<(Complex64, Complex64)> {
    let mut u = seed;
    let scale = target.norm();
    for _ in 0..50 {
        let (v, d) = germ.step_local(u)?;
        let r = v - target;
        if d.norm() < 1e-300 {
            return Err(LabError::VanishingDerivative { at: germ.z0() + u });
        }
        let step = r / d;
        u -= step;
        if step.norm() <= 4.0 * f64::EPSILON * u.norm() || r.norm() == 0.0 {
            return Ok((u, germ.step_local(u)?.1));
        }
    }
    let (v, d) = germ.step_local(u)?;
    if (v - target).norm() <= 1e-13 * scale {
        return Ok((u, d));
    }
    Err(LabError::InverseBranch(format!(
        "no local preimage of {} (residual {:e})",
        germ.z0() + target,
        (v - target).norm()
    )))
}

/// Smallest lifting depth for `target` accepted by [`repelling_inverse_global`].
pub fn depth_shift(chart: &FatouChart, target: Complex64) -> usize {
    chart.depth_shift(target)
}

/// `j`-th attracting direction of the germ.
pub fn attracting_direction(germ: &ParabolicGerm, j: usize) -> Complex64 {
    germ.attracting_direction(j)
}

pub fn attracting_fatou(chart: &FatouChart, z: Complex64) -> Result<Complex64> {
    if chart.direction() != Direction::Attracting {
        return Err(LabError::InvalidInput("chart is repelling".into()));
    }
    chart.value(z)
}

pub fn repelling_fatou(chart: &FatouChart, z: Complex64) -> Result<Complex64> {
    if chart.direction() != Direction::Repelling {
        return Err(LabError::InvalidInput("chart is attracting".into()));
    }
    chart.value(z)
}

pub fn extended_attracting_value(chart: &FatouChart, z: Complex64) -> Result<Complex64> {
    chart.extended_value(z)
}

/// `Ψ_rep(Z) = g^N(Ψ_loc(Z + N))`, with `Ψ_loc` the local inverse of the
/// repelling chart.
pub fn repelling_inverse_global(chart: &FatouChart, target: Complex64, n: usize) -> Result<Complex64> {
    if chart.direction() != Direction::Repelling {
        return Err(LabError::InvalidInput("chart is attracting".into()));
    }
    let mut z = chart.local_inverse(target + n as f64)?;
    for step in 0..n {
        z = chart.germ().eval(z).map_err(|e| match e {
            LabError::DivergedOrbit { modulus, .. } => LabError::DivergedOrbit { step, modulus },
            other => other,
        })?;
    }
    Ok(z)
}

/// [`repelling_inverse_global`] with the smallest `N` that reaches `Re ≥ 2 R0`.
pub fn repelling_inverse(chart: &FatouChart, target: Complex64) -> Result<Complex64> {
    repelling_inverse_global(chart, target, chart.depth_shift(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::{model_germ, ModelTag};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moebius_attracting_is_minus_one_over_z() {
        let germ = Arc::new(model_germ(ModelTag::Moebius).unwrap());
        let chart = FatouChart::attracting(&germ, 0).unwrap();
        for z in [c(-0.03, 0.0), c(-0.02, 0.01), c(-0.01, -0.005)] {
            let v = chart.value(z).unwrap();
            assert!((v + 1.0 / z).norm() < 1e-9, "{v} vs {}", -1.0 / z);
        }
    }

    #[test]
    fn moebius_repelling_is_one_over_z() {
        let germ = Arc::new(model_germ(ModelTag::Moebius).unwrap());
        let chart = FatouChart::repelling(&germ, 0).unwrap();
        let z = c(0.02, 0.005);
        assert!((chart.value(z).unwrap() - 1.0 / z).norm() < 1e-9);
    }

    #[test]
    fn quad_functional_equation() {
        let germ = Arc::new(model_germ(ModelTag::Quad).unwrap());
        let chart = FatouChart::attracting(&germ, 0).unwrap();
        let z = c(-0.03, 0.01);
        let fz = germ.eval(z).unwrap();
        let r = chart.value(fz).unwrap() - chart.value(z).unwrap() - 1.0;
        assert!(r.norm() < 1e-9);
    }

    #[test]
    fn local_inverse_round_trip() {
        let germ = Arc::new(model_germ(ModelTag::Quad).unwrap());
        for chart in [
            FatouChart::attracting(&germ, 0).unwrap(),
            FatouChart::repelling(&germ, 0).unwrap().with_normalization(c(0.3, -2.0)),
        ] {
            let target = c(45.0, 3.0) + chart.normalization();
            let z = chart.local_inverse(target).unwrap();
            assert!((chart.value(z).unwrap() - target).norm() < 1e-9);
        }
    }

    #[test]
    fn attracting_inverse_outside_petal() {
        let germ = Arc::new(model_germ(ModelTag::Quad).unwrap());
        let chart = FatouChart::attracting(&germ, 0).unwrap();
        let z = c(-0.3, 0.1);
        let v = chart.extended_value(z).unwrap();
        let back = chart.attracting_inverse(v).unwrap();
        assert!((back - z).norm() < 1e-9, "{back} vs {z}");
    }

    #[test]
    fn repelling_global_inverse_moebius() {
        let germ = Arc::new(model_germ(ModelTag::Moebius).unwrap());
        let chart = FatouChart::repelling(&germ, 0).unwrap();
        let target = c(0.3, 2.0);
        let z = repelling_inverse(&chart, target).unwrap();
        assert!((z - 1.0 / target).norm() < 1e-9);
    }
}
