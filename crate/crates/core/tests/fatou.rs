mod common;

use std::sync::Arc;

use common::{basilica_root, c, gate_point, germ, petal_point, quarter, rabbit_root, w_samples};
use parabolic_core::fatou::{
    attracting_direction, attracting_fatou, extended_attracting_value, repelling_fatou, repelling_inverse,
    repelling_inverse_global, FatouChart,
};
use parabolic_core::germ::{conjugated_germ, model_germ, ModelTag, ParabolicGerm};
use parabolic_core::numerics::local_inverse;
use parabolic_core::Complex64;
use proptest::prelude::*;

fn model(tag: ModelTag) -> Arc<ParabolicGerm> {
    Arc::new(model_germ(tag).unwrap())
}

fn max_residual(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Backward step of the germ, by Newton from a point one step further out.
fn inverse_step(g: &ParabolicGerm, z: Complex64) -> Complex64 {
    let seed = z - (g.eval(z).unwrap() - z);
    local_inverse(|x| g.eval_with_derivative(x), z, seed, 1e-15).unwrap()
}

#[test]
fn moebius_attracting_is_minus_one_over_z_up_to_a_constant() {
    let g = model(ModelTag::Moebius);
    let chart = FatouChart::attracting(&g, 0).unwrap();
    let samples: Vec<Complex64> = w_samples(100, 25.0, 400.0, 100.0, 1)
        .into_iter()
        .map(|w| petal_point(&g, 0, w))
        .collect();
    let offsets: Vec<Complex64> = samples
        .iter()
        .map(|&z| attracting_fatou(&chart, z).unwrap() + 1.0 / z)
        .collect();
    let fitted = offsets.iter().sum::<Complex64>() / offsets.len() as f64;
    let worst = max_residual(offsets.iter().map(|o| (o - fitted).norm()));
    assert!(worst < 1e-9, "{worst:e}");
    let residual = max_residual(samples.iter().map(|&z| {
        let gz = g.eval(z).unwrap();
        (chart.value(gz).unwrap() - chart.value(z).unwrap() - 1.0).norm()
    }));
    assert!(residual < 1e-9, "{residual:e}");
}

#[test]
fn moebius_repelling_chart_and_inverse() {
    let g = model(ModelTag::Moebius);
    let chart = FatouChart::repelling(&g, 0).unwrap();
    for w in w_samples(50, 25.0, 200.0, 50.0, 2) {
        let z = gate_point(&g, 0, w);
        let v = repelling_fatou(&chart, z).unwrap();
        // the inverse of z/(1-z) is z/(1+z), and 1/z conjugates it to +1
        assert!((v - 1.0 / z).norm() < 1e-9);
        let back = z / (1.0 + z);
        assert!((chart.value(back).unwrap() - v - 1.0).norm() < 1e-9);
    }
    for target in [c(0.3, 2.0), c(-4.0, -1.5), c(10.0, 3.0)] {
        let z = repelling_inverse(&chart, target).unwrap();
        assert!((z - 1.0 / target).norm() < 1e-9);
    }
}

fn check_functional_equation(g: &Arc<ParabolicGerm>, count: usize, seed: u64) {
    for j in 0..g.q() {
        let chart = FatouChart::attracting(g, j).unwrap();
        let worst = max_residual(w_samples(count, 25.0, 200.0, 60.0, seed + j as u64).into_iter().map(|w| {
            let z = petal_point(g, j, w);
            assert!(chart.in_petal(z));
            let gz = g.eval(z).unwrap();
            (chart.value(gz).unwrap() - chart.value(z).unwrap() - 1.0).norm()
        }));
        assert!(worst < 1e-8, "petal {j}: {worst:e}");
    }
}

#[test]
fn functional_equation_on_polynomial_germs() {
    check_functional_equation(&germ(&quarter()), 100, 10);
    check_functional_equation(&germ(&basilica_root()), 100, 20);
    check_functional_equation(&germ(&rabbit_root()), 40, 30);
}

#[test]
fn repelling_functional_equation() {
    for g in [germ(&quarter()), germ(&basilica_root()), model(ModelTag::Quad)] {
        for i in 0..g.q() {
            let chart = FatouChart::repelling(&g, i).unwrap();
            let worst = max_residual(w_samples(40, 25.0, 200.0, 60.0, 40 + i as u64).into_iter().map(|w| {
                let z = gate_point(&g, i, w);
                assert!(chart.in_petal(z));
                let back = inverse_step(&g, z);
                (chart.value(back).unwrap() - chart.value(z).unwrap() - 1.0).norm()
            }));
            assert!(worst < 1e-8, "gate {i}: {worst:e}");
        }
    }
}

#[test]
fn two_precisions_agree() {
    let g = model(ModelTag::Quad);
    let coarse = FatouChart::attracting(&g, 0).unwrap().with_tol(1e-8);
    let fine = FatouChart::attracting(&g, 0).unwrap().with_tol(1e-10);
    let z = c(-0.2, 0.0);
    let (a, b) = (extended_attracting_value(&coarse, z).unwrap(), extended_attracting_value(&fine, z).unwrap());
    assert!((a - b).norm() < 1e-7, "{a} vs {b}");

    let coarse = FatouChart::repelling(&g, 0).unwrap().with_tol(1e-8);
    let fine = FatouChart::repelling(&g, 0).unwrap().with_tol(1e-10);
    let z = gate_point(&g, 0, c(30.0, 4.0));
    assert!((coarse.value(z).unwrap() - fine.value(z).unwrap()).norm() < 1e-7);
}

#[test]
fn extended_value_is_independent_of_entry_time() {
    let g = germ(&quarter());
    let chart = FatouChart::attracting(&g, 0).unwrap();
    for z in [c(0.0, 0.0), c(0.25, 0.0), c(-0.3, 0.2), c(0.1, -0.4)] {
        let first = chart.extended(z, 0).unwrap();
        let later = chart.extended(z, 5).unwrap();
        assert!((first.value - later.value).norm() < 1e-9, "{z}");
    }
    let z = petal_point(&g, 0, c(40.0, 3.0));
    assert_eq!(chart.extended(z, 0).unwrap().entry_time, 0);
    assert_eq!(chart.extended_value(z).unwrap(), chart.value(z).unwrap());
}

#[test]
fn critical_value_normalization() {
    let param = quarter();
    let g = germ(&param);
    let raw = FatouChart::attracting(&g, 0).unwrap();
    let s = -raw.extended_value(param.c).unwrap();
    let normalized = FatouChart::attracting(&g, 0).unwrap().with_normalization(s);
    assert!(normalized.extended_value(param.c).unwrap().norm() < 1e-12);
}

#[test]
fn repelling_global_inverse() {
    for g in [germ(&quarter()), germ(&basilica_root())] {
        for i in 0..g.q() {
            let chart = FatouChart::repelling(&g, i).unwrap();
            for w in w_samples(20, 45.0, 120.0, 30.0, 50 + i as u64) {
                let z = gate_point(&g, i, w);
                let v = chart.value(z).unwrap();
                assert!((repelling_inverse_global(&chart, v, 0).unwrap() - z).norm() < 1e-8);
            }
            for target in [c(1.0, 2.0), c(-3.0, -2.5), c(0.5, 1.6)] {
                let n = chart.depth_shift(target);
                let a = repelling_inverse_global(&chart, target, n).unwrap();
                let b = repelling_inverse_global(&chart, target, n + 3).unwrap();
                assert!((a - b).norm() < 1e-8, "{target}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn normalization_shifts_values_exactly() {
    let g = germ(&basilica_root());
    let s = c(0.37, -1.25);
    for j in 0..2 {
        let plain = FatouChart::attracting(&g, j).unwrap();
        let shifted = FatouChart::attracting(&g, j).unwrap().with_normalization(s);
        for w in w_samples(10, 25.0, 80.0, 20.0, 60) {
            let z = petal_point(&g, j, w);
            assert_eq!(shifted.value(z).unwrap(), plain.value(z).unwrap() + s);
        }
    }
}

#[test]
fn image_contains_a_right_half_plane() {
    for g in [germ(&quarter()), germ(&basilica_root()), model(ModelTag::Quad)] {
        let chart = FatouChart::attracting(&g, 0).unwrap();
        let r = 2.0 * chart.entry_radius();
        for target in w_samples(20, r, 4.0 * r, 3.0 * r, 70) {
            let z = chart.local_inverse(target).unwrap();
            assert!(chart.in_petal(z));
            assert!((chart.value(z).unwrap() - target).norm() < 1e-8);
        }
    }
}

#[test]
fn directions() {
    let quad = model(ModelTag::Quad);
    assert!((attracting_direction(&quad, 0) + 1.0).norm() < 1e-15);
    let g = germ(&basilica_root());
    assert!((attracting_direction(&g, 0) - 1.0).norm() < 1e-12);
    assert!((attracting_direction(&g, 1) + 1.0).norm() < 1e-12);

    // conjugating by λ multiplies a by λ^{-q}; rotating a by e^{iθ}
    // rotates every direction by e^{-iθ/q}
    let theta = 0.9;
    let rotated = conjugated_germ(&g, Complex64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)).unwrap();
    assert!((rotated.a() - g.a() * Complex64::from_polar(1.0, theta)).norm() < 1e-12);
    let turn = Complex64::from_polar(1.0, -theta / 2.0);
    for j in 0..2 {
        let v = attracting_direction(&g, j) * turn;
        let matched = (0..2).any(|k| (attracting_direction(&rotated, k) - v).norm() < 1e-12);
        assert!(matched, "direction {j}");
    }
}

#[test]
fn basilica_orbits_along_each_direction() {
    let g = germ(&basilica_root());
    for j in 0..2 {
        let chart = FatouChart::attracting(&g, j).unwrap();
        // w = 50 on the axis: a = -2, q = 2, so |u|² = 1/200
        let mut z = g.z0() + attracting_direction(&g, j) * (1.0f64 / 200.0).sqrt();
        let start = z;
        let mut previous = chart.extended_value(z).unwrap();
        for _ in 0..200 {
            z = g.eval(z).unwrap();
            let v = chart.extended_value(z).unwrap();
            assert!((v - previous - 1.0).norm() < 1e-8);
            previous = v;
        }
        assert!((z - g.z0()).norm() < 0.5 * (start - g.z0()).norm());
        assert_eq!(g.nearest_attracting(z), j);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn attracting_functional_equation_quad(re in 25.0f64..300.0, im in -80.0f64..80.0) {
        let g = model(ModelTag::Quad);
        let chart = FatouChart::attracting(&g, 0).unwrap();
        let z = petal_point(&g, 0, c(re, im));
        let gz = g.eval(z).unwrap();
        prop_assert!((chart.value(gz).unwrap() - chart.value(z).unwrap() - 1.0).norm() < 1e-8);
    }
}
