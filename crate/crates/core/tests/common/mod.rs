#![allow(dead_code)]

use std::sync::Arc;

use parabolic_core::atlas::{identify_parabolic, locate_parabolic, ParabolicParameter};
use parabolic_core::germ::{build_germ, ParabolicGerm};
use parabolic_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sqrt3() -> f64 {
    3f64.sqrt()
}

pub fn quarter() -> ParabolicParameter {
    locate_parabolic(2, 1, 0, 1, (c(0.25, 0.0), c(0.5, 0.0)), 1e-12).unwrap()
}

pub fn basilica_root() -> ParabolicParameter {
    locate_parabolic(2, 1, 1, 2, (c(-0.75, 0.0), c(-0.5, 0.0)), 1e-12).unwrap()
}

pub fn rabbit_root() -> ParabolicParameter {
    locate_parabolic(2, 1, 1, 3, (c(-0.12, 0.65), c(-0.25, 0.43)), 1e-12).unwrap()
}

/// Root of the period-three window on the real axis, `c = -7/4`.
pub fn airplane() -> ParabolicParameter {
    identify_parabolic(2, c(-1.75, 0.0), 3, 1e-9).unwrap()
}

pub fn cubic() -> ParabolicParameter {
    let s = 2.0 * sqrt3() / 9.0;
    locate_parabolic(3, 1, 0, 1, (c(s, 0.0), c(1.0 / sqrt3(), 0.0)), 1e-12).unwrap()
}

pub fn germ(param: &ParabolicParameter) -> Arc<ParabolicGerm> {
    Arc::new(build_germ(param, 2 * param.petal_count + 2).unwrap())
}

/// Point `z0 + u` of attracting petal `j` with `w`-chart value `w`.
pub fn petal_point(germ: &ParabolicGerm, j: usize, w: Complex64) -> Complex64 {
    let q = germ.q();
    let u_q = -Complex64::new(1.0, 0.0) / (germ.a() * q as f64 * w);
    let principal = u_q.powf(1.0 / q as f64);
    let axis = germ.attracting_direction(j);
    let u = (0..q)
        .map(|k| principal * Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / q as f64))
        .min_by(|a, b| (a / a.norm() - axis).norm().total_cmp(&(b / b.norm() - axis).norm()))
        .unwrap();
    germ.z0() + u
}

/// Point of repelling petal (gate) `i` with oriented `w`-chart value `w`.
pub fn gate_point(germ: &ParabolicGerm, i: usize, w: Complex64) -> Complex64 {
    let q = germ.q();
    let u_q = Complex64::new(1.0, 0.0) / (germ.a() * q as f64 * w);
    let principal = u_q.powf(1.0 / q as f64);
    let axis = germ.gate_direction(i);
    let u = (0..q)
        .map(|k| principal * Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / q as f64))
        .min_by(|a, b| (a / a.norm() - axis).norm().total_cmp(&(b / b.norm() - axis).norm()))
        .unwrap();
    germ.z0() + u
}

/// `count` pseudo-random `w` values with `Re w` in `[re0, re1]` and
/// `|Im w| <= im`.
pub fn w_samples(count: usize, re0: f64, re1: f64, im: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| c(rng.random_range(re0..re1), rng.random_range(-im..im)))
        .collect()
}
