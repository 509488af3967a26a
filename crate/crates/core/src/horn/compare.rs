use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{End, HornMapData, InvariantVector};
use crate::numerics::exp_2pi_i;

pub const TOL_COMPARE: f64 = 1e-5;
pub const SEPARATION: f64 = 1e-2;
/// Coefficients below this modulus (at the common sampling height) take no
/// part in alignment or distance.
pub const COEFFICIENT_FLOOR: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Distinct,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Equivalent => "equivalent",
            Verdict::Distinct => "distinct",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Constants carrying the first vector onto the second: gate `i` of the
/// first matches gate `i + shift` of the second, its repelling coordinate
/// moves by `s[i]` and the attracting coordinate of petal `j` by `t[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedAction {
    pub shift: usize,
    pub s: Vec<Complex64>,
    pub t: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub verdict: Verdict,
    pub distance: f64,
    pub aligned_action: Option<AlignedAction>,
    pub witnesses: Vec<String>,
}

fn verdict(distance: f64, tol: f64, sep: f64) -> Verdict {
    if distance <= tol {
        Verdict::Equivalent
    } else if distance > sep {
        Verdict::Distinct
    } else {
        Verdict::Inconclusive
    }
}

/// Compare two invariant vectors modulo the constants of their Fatou
/// coordinates and a cyclic relabeling of the gates.
pub fn compare_invariants(a: &InvariantVector, b: &InvariantVector, tol: f64, sep: f64) -> ConjugacyReport {
    if a.q != b.q {
        let distance = a.q.abs_diff(b.q) as f64;
        return ConjugacyReport {
            verdict: Verdict::Distinct,
            distance,
            aligned_action: None,
            witnesses: vec![format!("petal count {} vs {}", a.q, b.q)],
        };
    }
    let alpha_gap = (a.alpha - b.alpha).norm();
    let best = (0..a.q)
        .map(|shift| align(a, b, shift))
        .min_by(|x, y| x.distance.total_cmp(&y.distance))
        .expect("q >= 1");
    let mut mismatches = best.mismatches;
    mismatches.push((alpha_gap, "formal invariant".to_string()));
    mismatches.sort_by(|x, y| y.0.total_cmp(&x.0));
    let distance = best.distance.max(alpha_gap);
    let mut witnesses: Vec<String> = Vec::new();
    // a formal invariant gap decides on its own
    let verdict = if alpha_gap > tol {
        witnesses.push(format!("formal invariant {} vs {} (|Δ| = {alpha_gap:.3e})", a.alpha, b.alpha));
        Verdict::Distinct
    } else {
        verdict(distance, tol, sep)
    };
    witnesses.extend(mismatches.iter().take(3).map(|(d, what)| format!("{what}: {d:.3e}")));
    witnesses.extend(best.notes);
    ConjugacyReport {
        verdict,
        distance,
        aligned_action: Some(best.action),
        witnesses,
    }
}

struct Alignment {
    action: AlignedAction,
    distance: f64,
    mismatches: Vec<(f64, String)>,
    notes: Vec<String>,
}

/// Coefficient pairs of one gate end on the common height, `k != 0`.
fn coefficient_pairs(x: &HornMapData, y: &HornMapData) -> Vec<(i64, Complex64, Complex64)> {
    let height = x.height.max(y.height);
    x.decaying_frequencies()
        .filter(|&k| k != 0)
        .map(|k| (k, x.coefficient_at(k, height), y.coefficient_at(k, height)))
        .filter(|(_, c1, c2)| c1.norm().max(c2.norm()) >= COEFFICIENT_FLOOR)
        .collect()
}

/// `c_k ↦ c_k e^{-2πiks}`.
fn rotate(c: Complex64, k: i64, s: Complex64) -> Complex64 {
    c * exp_2pi_i(-s * k as f64)
}

/// Mismatch of one pair under the shift `s`, measured halfway: an imaginary
/// shift rescales coefficients like a change of sampling height, so both
/// sides are moved to the mean height.
fn mismatch(k: i64, c1: Complex64, c2: Complex64, s: Complex64) -> f64 {
    (rotate(c1, k, s * 0.5) - rotate(c2, k, -s * 0.5)).norm()
}

fn pair_mismatch(pairs: &[(i64, Complex64, Complex64)], s: Complex64) -> f64 {
    pairs
        .iter()
        .map(|&(k, c1, c2)| mismatch(k, c1, c2, s))
        .fold(0.0, f64::max)
}

/// Repelling constant from the dominant coefficient pair, best over the
/// `|k|` branches; `None` when no pair is above the floor on both sides.
fn solve_shift(pairs: &[(i64, Complex64, Complex64)]) -> Option<Complex64> {
    let &(k, c1, c2) = pairs
        .iter()
        .filter(|(_, c1, c2)| c1.norm().min(c2.norm()) >= COEFFICIENT_FLOOR)
        .max_by(|x, y| x.1.norm().min(x.2.norm()).total_cmp(&y.1.norm().min(y.2.norm())))?;
    let log = (c2 / c1).ln();
    (0..k.abs())
        .map(|m| I * (log + I * TAU * m as f64) / (TAU * k as f64))
        .min_by(|x, y| pair_mismatch(pairs, *x).total_cmp(&pair_mismatch(pairs, *y)))
}

fn align(a: &InvariantVector, b: &InvariantVector, shift: usize) -> Alignment {
    let q = a.q;
    let mut mismatches = Vec::new();
    let mut notes = Vec::new();
    let mut s = vec![ZERO; q];
    let mut pinned = vec![false; q];
    let mut upper_gap = vec![ZERO; q];
    let mut lower_gap = vec![ZERO; q];

    for i in 0..q {
        let i2 = (i + shift) % q;
        let blocks = [End::Upper, End::Lower].map(|end| (a.block(i, end), b.block(i2, end)));
        let mut pairs = Vec::new();
        for (end, (x, y)) in [End::Upper, End::Lower].into_iter().zip(blocks) {
            let (Some(x), Some(y)) = (x, y) else {
                notes.push(format!("gate {i} {} block missing", end.name()));
                continue;
            };
            pairs.extend(coefficient_pairs(x, y).into_iter().map(|p| (p, end)));
            let gap = x.coefficient(0) - y.coefficient(0);
            match end {
                End::Upper => upper_gap[i] = gap,
                End::Lower => lower_gap[i] = gap,
            }
        }
        let plain: Vec<_> = pairs.iter().map(|(p, _)| *p).collect();
        if let Some(shift_i) = solve_shift(&plain) {
            s[i] = shift_i;
            pinned[i] = true;
        }
        for ((k, c1, c2), end) in pairs {
            let d = mismatch(k, c1, c2, s[i]);
            mismatches.push((d, format!("gate {i} {} k={k}", end.name())));
        }
    }

    // upper gap of gate i and lower gap of gate i-1 both see petal i:
    // A_i - s_i = t_i = B_{i-1} - s_{i-1}
    let link = |s: &[Complex64], i: usize| {
        let prev = (i + q - 1) % q;
        (upper_gap[i] - s[i]) - (lower_gap[prev] - s[prev])
    };
    for i in 1..q {
        let e = link(&s, i);
        if pinned[i] {
            s[i] += e.re.round();
        } else {
            s[i] += e;
        }
    }
    for i in 0..q {
        mismatches.push((link(&s, i).norm(), format!("constant term at petal {i}")));
    }
    let t: Vec<Complex64> = (0..q).map(|i| upper_gap[i] - s[i]).collect();

    for j in 0..q {
        let j2 = (j + shift) % q;
        match (a.critical_values.get(j).copied().flatten(), b.critical_values.get(j2).copied().flatten()) {
            (Some(v1), Some(v2)) => {
                let d = (v1 * exp_2pi_i(t[j]) - v2).norm();
                mismatches.push((d, format!("critical value in petal {j}")));
            }
            (None, None) => {}
            _ => notes.push(format!("critical value in petal {j} present on one side only")),
        }
    }

    let distance = mismatches.iter().map(|m| m.0).fold(0.0, f64::max);
    Alignment {
        action: AlignedAction { shift, s, t },
        distance,
        mismatches,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::Normalization;

    fn block(gate: usize, end: End, coefficients: &[(i64, Complex64)]) -> HornMapData {
        let mut fourier = vec![ZERO; 64];
        for &(k, c) in coefficients {
            fourier[k.rem_euclid(64) as usize] = c;
        }
        HornMapData {
            gate,
            end,
            height: 2.0,
            samples: 64,
            fourier,
            periodicity_residual: 0.0,
            decay_ok: true,
        }
    }

    fn vector(q: usize, s: &[Complex64], t: &[Complex64]) -> InvariantVector {
        // synthetic data with the action applied
        let mut gates = Vec::new();
        for i in 0..q {
            let base = Complex64::new(0.1 * i as f64, 0.3);
            let c1 = Complex64::new(1e-3, 2e-4 * (i + 1) as f64);
            let c2 = Complex64::new(-4e-6, 1e-6);
            gates.push(block(
                i,
                End::Upper,
                &[(0, base - s[i] - t[i]), (1, rotate(c1, 1, s[i])), (2, rotate(c2, 2, s[i]))],
            ));
            gates.push(block(
                i,
                End::Lower,
                &[(0, base * 2.0 - s[i] - t[(i + 1) % q]), (-1, rotate(c1.conj(), -1, s[i]))],
            ));
        }
        InvariantVector {
            q,
            alpha: Complex64::new(0.75, 0.0),
            source: "synthetic".into(),
            gates,
            critical_values: (0..q).map(|j| Some(Complex64::from_polar(0.2, j as f64) * exp_2pi_i(t[j]))).collect(),
            normalization: Normalization::zero(q),
        }
    }

    #[test]
    fn action_is_recovered() {
        let zero = vec![ZERO; 3];
        let s = vec![Complex64::new(0.3, 0.05), Complex64::new(-0.7, 0.0), Complex64::new(1.4, -0.02)];
        let t = vec![Complex64::new(0.2, 0.1), Complex64::new(2.5, 0.0), Complex64::new(-0.1, 0.3)];
        let report = compare_invariants(&vector(3, &zero, &zero), &vector(3, &s, &t), 1e-5, 1e-2);
        assert_eq!(report.verdict, Verdict::Equivalent, "{report:?}");
        assert!(report.distance < 1e-12);
    }

    #[test]
    fn identical_vectors_have_distance_zero() {
        let zero = vec![ZERO; 2];
        let v = vector(2, &zero, &zero);
        let report = compare_invariants(&v, &v, 1e-5, 1e-2);
        assert_eq!(report.verdict, Verdict::Equivalent);
        assert_eq!(report.distance, 0.0);
    }

    #[test]
    fn petal_count_mismatch_is_distinct() {
        let v1 = vector(1, &[ZERO], &[ZERO]);
        let v2 = vector(2, &[ZERO; 2], &[ZERO; 2]);
        assert_eq!(compare_invariants(&v1, &v2, 1e-5, 1e-2).verdict, Verdict::Distinct);
    }

    #[test]
    fn perturbed_coefficient_is_seen() {
        let zero = vec![ZERO; 1];
        let v1 = vector(1, &zero, &zero);
        let mut v2 = v1.clone();
        v2.gates[0].fourier[2] *= 1.5;
        let report = compare_invariants(&v1, &v2, 1e-7, 1e-6);
        assert_ne!(report.verdict, Verdict::Equivalent);
        assert!(report.witnesses[0].contains("k=2"), "{:?}", report.witnesses);
    }

    #[test]
    fn noise_on_one_side_does_not_pin_the_constant() {
        let zero = vec![ZERO; 1];
        let v1 = vector(1, &zero, &zero);
        let mut v2 = v1.clone();
        for block in &mut v2.gates {
            for (k, c) in block.fourier.iter_mut().enumerate() {
                if k != 0 {
                    *c = Complex64::new(1e-16, 0.0);
                }
            }
        }
        let report = compare_invariants(&v1, &v2, 1e-5, 1e-2);
        assert!(report.distance < 1.0, "{}", report.distance);
        assert!(report.distance > 1e-4);
    }

    #[test]
    fn thresholds_split_three_ways() {
        assert_eq!(verdict(1e-6, 1e-5, 1e-2), Verdict::Equivalent);
        assert_eq!(verdict(1e-3, 1e-5, 1e-2), Verdict::Inconclusive);
        assert_eq!(verdict(0.5, 1e-5, 1e-2), Verdict::Distinct);
    }
}
