//! Tangent-to-identity parabolic germs, built from located parameters or
//! from closed-form models, with their formal invariant.

mod formal;

pub use formal::FormalFatou;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atlas::ParabolicParameter;
use crate::error::{LabError, Result};
use crate::numerics::{iterate_jet, series, Jet, UnicriticalMap};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Coefficients `2..=q` of the germ must vanish to this tolerance.
pub const TANGENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    /// `z ↦ z / (1 - z)` at 0.
    Moebius,
    /// `z ↦ z + z²` at 0.
    Quad,
    /// `B(z) = (3z² + 1) / (3 + z²)` at 1.
    Blaschke,
}

impl ModelTag {
    pub fn parse(name: &str) -> Option<ModelTag> {
        match name.to_ascii_lowercase().as_str() {
            "moebius" | "mobius" | "möbius" => Some(ModelTag::Moebius),
            "quad" => Some(ModelTag::Quad),
            "blaschke" => Some(ModelTag::Blaschke),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Moebius => "moebius",
            ModelTag::Quad => "quad",
            ModelTag::Blaschke => "blaschke",
        }
    }

    pub fn fixed_point(self) -> Complex64 {
        match self {
            ModelTag::Blaschke => ONE,
            _ => ZERO,
        }
    }

    fn eval(self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match self {
            ModelTag::Moebius => {
                let den = ONE - z;
                if den.norm() < 1e-300 {
                    return Err(LabError::DivergedOrbit { step: 1, modulus: f64::INFINITY });
                }
                Ok((z / den, ONE / (den * den)))
            }
            ModelTag::Quad => Ok((z + z * z, ONE + z * 2.0)),
            ModelTag::Blaschke => {
                let den = z * z + 3.0;
                if den.norm() < 1e-300 {
                    return Err(LabError::DivergedOrbit { step: 1, modulus: f64::INFINITY });
                }
                // B' = 16 z / (3 + z²)²
                Ok(((z * z * 3.0 + 1.0) / den, z * 16.0 / (den * den)))
            }
        }
    }

    /// Taylor coefficients at the fixed point, `len` of them.
    fn series(self, len: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; len];
        match self {
            ModelTag::Moebius => {
                for v in out.iter_mut().skip(1) {
                    *v = ONE;
                }
            }
            ModelTag::Quad => {
                if len > 1 {
                    out[1] = ONE;
                }
                if len > 2 {
                    out[2] = ONE;
                }
            }
            ModelTag::Blaschke => {
                let c = |v: f64| Complex64::new(v, 0.0);
                let num = [c(4.0), c(6.0), c(3.0)];
                let den = [c(4.0), c(2.0), c(1.0)];
                out = series::mul(&num, &series::reciprocal(&den, len), len);
            }
        }
        out
    }
}

/// Where a germ's full-precision evaluation comes from.
#[derive(Debug, Clone)]
pub enum GermSource {
    /// `f_c^n` at the characteristic point; `k` is the cycle period and
    /// `cycle` starts at the characteristic point.
    Polynomial {
        map: UnicriticalMap,
        n: usize,
        k: usize,
        cycle: Vec<Complex64>,
    },
    Model(ModelTag),
    /// The truncated polynomial itself.
    Custom(Jet),
    /// `h ∘ g ∘ h⁻¹` with `h(z) = λ (z - z0(g)) + z0`.
    Conjugated {
        base: Arc<ParabolicGerm>,
        lambda: Complex64,
    },
}

impl GermSource {
    pub fn describe(&self) -> String {
        match self {
            GermSource::Polynomial { map, n, .. } => {
                format!("polynomial d={} c={},{} n={}", map.degree(), map.c().re, map.c().im, n)
            }
            GermSource::Model(tag) => format!("model {}", tag.name()),
            GermSource::Custom(jet) => format!("custom jet of order {}", jet.order()),
            GermSource::Conjugated { base, lambda } => {
                format!("conjugate of [{}] by λ={},{}", base.source.describe(), lambda.re, lambda.im)
            }
        }
    }
}

/// A tangent-to-identity germ `z0 + u ↦ z0 + u + a u^{q+1} + …`.
#[derive(Debug, Clone)]
pub struct ParabolicGerm {
    source: GermSource,
    z0: Complex64,
    q: usize,
    jet: Jet,
    a: Complex64,
    alpha: Complex64,
    formal: FormalFatou,
    /// High-order Taylor coefficients backing the formal coordinate.
    series: Vec<Complex64>,
    /// Critical values of the germ's source, one per petal cycle position
    /// (`f^{kℓ}(c)` for polynomial germs).
    marked_points: Vec<Complex64>,
}

/// Result of the contour computation of `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourReport {
    pub alpha: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl ParabolicGerm {
    fn assemble(
        source: GermSource,
        z0: Complex64,
        q: usize,
        jet_order: usize,
        series: Vec<Complex64>,
        marked_points: Vec<Complex64>,
    ) -> Result<ParabolicGerm> {
        if q == 0 {
            return Err(LabError::InvalidInput("petal count must be positive".into()));
        }
        let deviation = (series.get(1).copied().unwrap_or(ZERO) - ONE).norm();
        if deviation > TANGENCY_TOL {
            return Err(LabError::TangencyViolation { deviation });
        }
        for j in 2..=q {
            let v = series.get(j).copied().unwrap_or(ZERO).norm();
            if v > TANGENCY_TOL {
                return Err(LabError::TangencyViolation { deviation: v });
            }
        }
        let a = series.get(q + 1).copied().unwrap_or(ZERO);
        if a.norm() <= TANGENCY_TOL {
            return Err(LabError::LeadingCoefficientTooSmall { modulus: a.norm() });
        }
        let mut coefficients = series.clone();
        coefficients.resize(jet_order + 1, ZERO);
        coefficients.truncate(jet_order + 1);
        coefficients[0] = z0;
        let jet = Jet::new(z0, coefficients)?;
        let formal = FormalFatou::solve(q, &series);
        let mut germ = ParabolicGerm {
            source,
            z0,
            q,
            jet,
            a,
            alpha: ZERO,
            formal,
            series,
            marked_points,
        };
        germ.alpha = formal_invariant_report(&germ)?.alpha;
        Ok(germ)
    }

    pub fn source(&self) -> &GermSource {
        &self.source
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    /// Number of attracting petals.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn jet(&self) -> &Jet {
        &self.jet
    }

    /// Coefficient of `u^{q+1}`.
    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn formal(&self) -> &FormalFatou {
        &self.formal
    }

    pub fn marked_points(&self) -> &[Complex64] {
        &self.marked_points
    }

    /// The critical value of the source map, when there is one.
    pub fn marked_point(&self) -> Option<Complex64> {
        self.marked_points.first().copied()
    }

    /// `0.05 |a|^{-1/q}`.
    pub fn working_radius(&self) -> f64 {
        0.05 * self.a.norm().powf(-1.0 / self.q as f64)
    }

    pub fn is_polynomial(&self) -> bool {
        match &self.source {
            GermSource::Polynomial { .. } => true,
            GermSource::Conjugated { base, .. } => base.is_polynomial(),
            _ => false,
        }
    }

    /// Full-precision value and derivative.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match &self.source {
            GermSource::Polynomial { map, n, .. } => {
                let o = map.iterate_with_derivatives(z, *n)?;
                Ok((o.z, o.dz))
            }
            GermSource::Model(tag) => tag.eval(z),
            GermSource::Custom(jet) => Ok(jet.eval_with_derivative(z)),
            GermSource::Conjugated { base, lambda } => {
                let inner = base.z0 + (z - self.z0) / lambda;
                let (v, d) = base.eval_with_derivative(inner)?;
                Ok((lambda * (v - base.z0) + self.z0, d))
            }
        }
    }

    /// `g(z0 + u) - z0` and `g'(z0 + u)`, rounded relative to `|u|` rather
    /// than `|z0|`. Polynomial germs are stepped along the cycle in
    /// coordinates centered at its points.
    pub fn step_local(&self, u: Complex64) -> Result<(Complex64, Complex64)> {
        match &self.source {
            GermSource::Polynomial { map, n, cycle, .. } => {
                let d = map.degree();
                let radius = map.escape_radius();
                let mut v = u;
                let mut slope = ONE;
                for step in 0..*n {
                    let base = cycle[step % cycle.len()];
                    let z = base + v;
                    if z.norm() > radius || !(z.re.is_finite() && z.im.is_finite()) {
                        return Err(LabError::DivergedOrbit {
                            step,
                            modulus: z.norm(),
                        });
                    }
                    slope *= z.powu(d - 1) * d as f64;
                    // (base + v)^d - base^d by Horner in v
                    let mut acc = ONE;
                    let mut power = ONE;
                    let mut binom = 1.0;
                    for j in (1..d).rev() {
                        binom = binom * (j + 1) as f64 / (d - j) as f64;
                        power *= base;
                        acc = acc * v + power * binom;
                    }
                    v = acc * v;
                }
                Ok((v, slope))
            }
            GermSource::Model(ModelTag::Blaschke) => {
                // B(1 + u) - 1 = 2u(2 + u) / (4 + 2u + u²)
                let den = u * u + u * 2.0 + 4.0;
                if den.norm() < 1e-300 {
                    return Err(LabError::DivergedOrbit { step: 1, modulus: f64::INFINITY });
                }
                let z = ONE + u;
                let zden = z * z + 3.0;
                Ok((u * (u + 2.0) * 2.0 / den, z * 16.0 / (zden * zden)))
            }
            GermSource::Model(tag) => tag.eval(u),
            GermSource::Custom(jet) => {
                let c = jet.coefficients();
                let mut value = ZERO;
                let mut slope = ZERO;
                for &cj in c.iter().skip(1).rev() {
                    slope = slope * u + value;
                    value = value * u + cj;
                }
                Ok((value * u, value + slope * u))
            }
            GermSource::Conjugated { base, lambda } => {
                let (v, d) = base.step_local(u / lambda)?;
                Ok((lambda * v, d))
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match &self.source {
            GermSource::Polynomial { map, n, .. } => map.iterate(z, *n),
            _ => Ok(self.eval_with_derivative(z)?.0),
        }
    }

    /// Whether `z` is past the point of no return: outside the escape disk
    /// of the source polynomial, or non-finite.
    pub fn escaped(&self, z: Complex64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return true;
        }
        match &self.source {
            GermSource::Polynomial { map, .. } => z.norm() > map.escape_radius(),
            GermSource::Conjugated { base, lambda } => base.escaped(base.z0 + (z - self.z0) / lambda),
            _ => (z - self.z0).norm() > 1e8,
        }
    }

    /// `exp(i (π - Arg a + 2πj) / q)`: `a v^q` is a negative real.
    pub fn attracting_direction(&self, j: usize) -> Complex64 {
        let arg = self.a.im.atan2(self.a.re);
        Complex64::from_polar(1.0, (PI - arg + TAU * j as f64) / self.q as f64)
    }

    /// Direction of gate `i`, counter-clockwise between attracting
    /// directions `i` and `i + 1`.
    pub fn gate_direction(&self, i: usize) -> Complex64 {
        let arg = self.a.im.atan2(self.a.re);
        Complex64::from_polar(1.0, (-arg + TAU * (i + 1) as f64) / self.q as f64)
    }

    /// `w = -1 / (q a u^q)`, `u = z - z0`.
    pub fn w_chart(&self, z: Complex64) -> Complex64 {
        self.w_chart_local(z - self.z0)
    }

    pub fn w_chart_local(&self, u: Complex64) -> Complex64 {
        -ONE / (self.a * self.q as f64 * u.powu(self.q as u32))
    }

    /// Index of the attracting direction closest in angle to `z - z0`.
    pub fn nearest_attracting(&self, z: Complex64) -> usize {
        self.nearest_attracting_local(z - self.z0)
    }

    pub fn nearest_attracting_local(&self, u: Complex64) -> usize {
        nearest(u, (0..self.q).map(|j| self.attracting_direction(j)))
    }

    /// Index of the gate whose direction is closest in angle to `z - z0`.
    pub fn nearest_gate(&self, z: Complex64) -> usize {
        self.nearest_gate_local(z - self.z0)
    }

    pub fn nearest_gate_local(&self, u: Complex64) -> usize {
        nearest(u, (0..self.q).map(|i| self.gate_direction(i)))
    }
}

fn nearest(u: Complex64, directions: impl Iterator<Item = Complex64>) -> usize {
    let unit = u / u.norm();
    directions
        .enumerate()
        .map(|(j, v)| (j, (unit - v).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
        .unwrap_or(0)
}

/// Germ of `f_c^n` at the characteristic point of `param`.
pub fn build_germ(param: &ParabolicParameter, jet_order: usize) -> Result<ParabolicGerm> {
    let q = param.petal_count;
    if jet_order < 2 * q + 2 {
        return Err(LabError::InvalidInput(format!(
            "jet order {jet_order} below 2q+2 = {}",
            2 * q + 2
        )));
    }
    let map = param.map();
    let order = jet_order.max(FormalFatou::required_jet_len(q));
    let series = iterate_jet(&map, param.z_char, param.n, order)?.coefficients().to_vec();
    let marked_points = (0..q)
        .map(|l| map.iterate(param.c, param.k * l))
        .collect::<Result<Vec<_>>>()?;
    let germ = ParabolicGerm::assemble(
        GermSource::Polynomial {
            map,
            n: param.n,
            k: param.k,
            cycle: param.cycle.clone(),
        },
        param.z_char,
        q,
        jet_order,
        series,
        marked_points,
    )?;
    let drift = (germ.eval(germ.z0)? - germ.z0).norm();
    if drift > 1e-12 * (1.0 + germ.z0.norm()) * 10.0 {
        return Err(LabError::NotParabolic(format!("germ moves its base point by {drift:e}")));
    }
    Ok(germ)
}

/// One of the closed-form model germs.
pub fn model_germ(tag: ModelTag) -> Result<ParabolicGerm> {
    let q = match tag {
        ModelTag::Blaschke => 2,
        _ => 1,
    };
    let series = tag.series(FormalFatou::required_jet_len(q).max(2 * q + 3));
    let mut shifted = series.clone();
    shifted[0] = tag.fixed_point();
    let marked = match tag {
        // B'(0) = 0, B(0) = 1/3
        ModelTag::Blaschke => vec![Complex64::new(1.0 / 3.0, 0.0)],
        _ => Vec::new(),
    };
    ParabolicGerm::assemble(GermSource::Model(tag), tag.fixed_point(), q, 2 * q + 2, shifted, marked)
}

/// Germ given by a polynomial jet; `q` is read off the first non-vanishing
/// coefficient beyond the linear one.
pub fn custom_germ(jet: Jet) -> Result<ParabolicGerm> {
    let coefficients = jet.coefficients();
    let q = (2..coefficients.len())
        .find(|&j| coefficients[j].norm() > TANGENCY_TOL)
        .map(|j| j - 1)
        .ok_or(LabError::LeadingCoefficientTooSmall { modulus: 0.0 })?;
    let mut series = coefficients.to_vec();
    series.resize(FormalFatou::required_jet_len(q).max(series.len()), ZERO);
    let z0 = jet.basepoint();
    if (coefficients[0] - z0).norm() > 1e-12 {
        return Err(LabError::NotParabolic("jet does not fix its base point".into()));
    }
    let order = jet.order().max(2 * q + 2);
    ParabolicGerm::assemble(GermSource::Custom(jet), z0, q, order, series, Vec::new())
}

/// `h ∘ g ∘ h⁻¹` for the affine map `h(z) = λ (z - z0(g)) + z0`.
pub fn conjugated_germ(base: &Arc<ParabolicGerm>, lambda: Complex64, z0: Complex64) -> Result<ParabolicGerm> {
    if lambda.norm() == 0.0 || !lambda.norm().is_finite() {
        return Err(LabError::InvalidInput("conjugating factor must be nonzero".into()));
    }
    let series: Vec<Complex64> = base
        .series
        .iter()
        .enumerate()
        .map(|(j, &v)| if j == 0 { z0 } else { v * lambda.powi(1 - j as i32) })
        .collect();
    let marked = base
        .marked_points
        .iter()
        .map(|m| lambda * (m - base.z0) + z0)
        .collect();
    ParabolicGerm::assemble(
        GermSource::Conjugated {
            base: Arc::clone(base),
            lambda,
        },
        z0,
        base.q,
        base.jet.order(),
        series,
        marked,
    )
}

/// Full-precision evaluation of the germ.
pub fn evaluate_germ(germ: &ParabolicGerm, z: Complex64) -> Result<Complex64> {
    germ.eval(z)
}

/// The formal invariant `α` in `G(w) = w + 1 + α/w + o(1/w)`.
pub fn formal_invariant(germ: &ParabolicGerm) -> Result<Complex64> {
    Ok(formal_invariant_report(germ)?.alpha)
}

const CONTOUR_NODES: usize = 512;

/// `α = (Res_{z0} 1/(g(z) - z) + (q+1)/2) / q`, the residue taken by the
/// trapezoid rule on circles enclosing exactly the `q+1` fixed points at `z0`.
/// Two radii must agree.
pub fn formal_invariant_report(germ: &ParabolicGerm) -> Result<ContourReport> {
    let q = germ.q;
    let base = 0.5 * germ.a.norm().powf(-1.0 / q as f64);
    let mut previous: Option<(f64, Complex64)> = None;
    let mut last = ZERO;
    for step in 0..60 {
        let radius = base * 0.8f64.powi(step);
        let Ok((residue, winding)) = contour_residue(germ, radius, CONTOUR_NODES) else {
            previous = None;
            continue;
        };
        if winding != q as i64 + 1 {
            previous = None;
            continue;
        }
        let alpha = (residue + (q as f64 + 1.0) / 2.0) / q as f64;
        if let Some((_, prev)) = previous {
            if (alpha - prev).norm() <= 1e-9 * (1.0 + alpha.norm()) {
                return Ok(ContourReport {
                    alpha: prev,
                    radius: radius / 0.8,
                    nodes: CONTOUR_NODES,
                });
            }
            last = prev;
        }
        previous = Some((radius, alpha));
    }
    Err(LabError::ExtrapolationFailed {
        last: previous.map(|p| p.1).unwrap_or(ZERO),
        previous: last,
    })
}

fn contour_residue(germ: &ParabolicGerm, radius: f64, nodes: usize) -> Result<(Complex64, i64)> {
    let mut sum = ZERO;
    let mut turning = 0.0;
    let mut first = None;
    let mut prev: Option<Complex64> = None;
    for j in 0..nodes {
        let e = Complex64::from_polar(radius, TAU * j as f64 / nodes as f64);
        let z = germ.z0 + e;
        let h = germ.eval(z)? - z;
        if h.norm() == 0.0 {
            return Err(LabError::InvalidInput("fixed point on the contour".into()));
        }
        sum += e / h;
        if let Some(p) = prev {
            turning += (h / p).arg();
        } else {
            first = Some(h);
        }
        prev = Some(h);
    }
    if let (Some(p), Some(f)) = (prev, first) {
        turning += (f / p).arg();
    }
    Ok((sum / nodes as f64, (turning / TAU).round() as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::locate_parabolic;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basilica_germ() {
        let param = locate_parabolic(2, 1, 1, 2, (c(-0.7, 0.1), c(-0.4, 0.0)), 1e-12).unwrap();
        let germ = build_germ(&param, 6).unwrap();
        assert_eq!(germ.q(), 2);
        assert!((germ.z0() + 0.5).norm() < 1e-12);
        assert!((germ.a() + 2.0).norm() < 1e-12);
        let j = germ.jet();
        for (k, v) in [(1, 1.0), (2, 0.0), (3, -2.0), (4, 1.0)] {
            assert!((j.coefficient(k) - v).norm() < 1e-12);
        }
    }

    #[test]
    fn cauliflower_germ() {
        let param = locate_parabolic(2, 1, 0, 1, (c(0.2, 0.05), c(0.4, 0.0)), 1e-12).unwrap();
        let germ = build_germ(&param, 4).unwrap();
        assert_eq!(germ.q(), 1);
        assert!((germ.a() - 1.0).norm() < 1e-12);
        // f(z) = z² + 1/4 at 1/2 + u is 1/2 + u + u², so α = 1 as for z + z²
        assert!((germ.alpha() - 1.0).norm() < 1e-9);
        assert_eq!(germ.marked_point(), Some(param.c));
    }

    #[test]
    fn cubic_germ_leading_coefficient() {
        let param = locate_parabolic(3, 1, 0, 1, (c(0.35, 0.02), c(0.5, 0.0)), 1e-12).unwrap();
        let germ = build_germ(&param, 4).unwrap();
        assert!((germ.a() - 3f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn jet_order_too_low() {
        let param = locate_parabolic(2, 1, 1, 2, (c(-0.7, 0.1), c(-0.4, 0.0)), 1e-12).unwrap();
        assert!(build_germ(&param, 5).is_err());
    }

    #[test]
    fn model_alphas() {
        assert!(model_germ(ModelTag::Moebius).unwrap().alpha().norm() < 1e-12);
        assert!((model_germ(ModelTag::Quad).unwrap().alpha() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn moebius_evaluation() {
        let germ = model_germ(ModelTag::Moebius).unwrap();
        assert_eq!(evaluate_germ(&germ, c(0.5, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(evaluate_germ(&germ, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn blaschke_model_structure() {
        let germ = model_germ(ModelTag::Blaschke).unwrap();
        assert_eq!(germ.q(), 2);
        assert!((germ.a() + 0.25).norm() < 1e-15);
        let (v, d) = germ.eval_with_derivative(c(1.0, 0.0)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        assert_eq!(d, c(1.0, 0.0));
        let h = 1e-6;
        let fd = (germ.eval(c(1.0 + h, 0.0)).unwrap() - germ.eval(c(1.0 - h, 0.0)).unwrap()) / (2.0 * h);
        assert!((fd - 1.0).norm() < 1e-9);
    }

    #[test]
    fn formal_log_coefficient_is_q_alpha() {
        for germ in [model_germ(ModelTag::Quad).unwrap(), model_germ(ModelTag::Blaschke).unwrap()] {
            let beta = germ.formal().log_coefficient();
            assert!((beta - germ.alpha() * germ.q() as f64).norm() < 1e-9);
        }
        let param = locate_parabolic(2, 1, 1, 3, (c(-0.1, 0.6), c(-0.2, 0.4)), 1e-12).unwrap();
        let germ = build_germ(&param, 8).unwrap();
        let beta = germ.formal().log_coefficient();
        assert!((beta - germ.alpha() * 3.0).norm() < 1e-8, "{beta} vs {}", germ.alpha());
    }

    #[test]
    fn directions() {
        let germ = model_germ(ModelTag::Quad).unwrap();
        assert!((germ.attracting_direction(0) + 1.0).norm() < 1e-15);
        let param = locate_parabolic(2, 1, 1, 2, (c(-0.7, 0.1), c(-0.4, 0.0)), 1e-12).unwrap();
        let germ = build_germ(&param, 6).unwrap();
        assert!((germ.attracting_direction(0) - 1.0).norm() < 1e-12);
        assert!((germ.attracting_direction(1) + 1.0).norm() < 1e-12);
        // gates sit between petals, counter-clockwise from petal i
        assert!((germ.gate_direction(0) - c(0.0, 1.0)).norm() < 1e-12);
        assert!((germ.gate_direction(1) - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn conjugation_preserves_q_and_alpha() {
        let base = Arc::new(model_germ(ModelTag::Quad).unwrap());
        let g = conjugated_germ(&base, c(0.3, 1.2), c(2.0, -1.0)).unwrap();
        assert_eq!(g.q(), 1);
        assert!((g.alpha() - 1.0).norm() < 1e-9);
        assert!((g.eval(c(2.0, -1.0)).unwrap() - c(2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn custom_jet_germ() {
        let jet = Jet::new(c(0.0, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 1.0)]).unwrap();
        let germ = custom_germ(jet).unwrap();
        assert_eq!(germ.q(), 2);
        assert!((germ.alpha() - 0.75).norm() < 1e-9);
    }
}
