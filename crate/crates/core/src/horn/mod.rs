//! Horn maps between adjacent petals, their Fourier data, critical-value
//! invariants, and comparison of invariant vectors modulo the choice of
//! Fatou-coordinate constants.

mod compare;
mod io;

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fatou::{depth_shift, entry_petal, repelling_inverse_global, FatouChart, ENTRY_RADIUS, FATOU_TOL, ITER_CAP};
use crate::germ::ParabolicGerm;
use crate::numerics::{dft, exp_2pi_i, symmetric_index};

pub use compare::{compare_invariants, AlignedAction, ConjugacyReport, Verdict, COEFFICIENT_FLOOR, SEPARATION, TOL_COMPARE};
pub use io::{invariants_from_json, invariants_to_json, load_invariants, save_invariants, INVARIANTS_FORMAT};

/// Lowest admissible sampling height.
pub const M_MIN: f64 = 1.5;
pub const DEFAULT_M: f64 = 2.0;
pub const DEFAULT_K: usize = 256;
/// Bound on `|H(Z+1) - H(Z) - 1|`.
pub const PERIODICITY_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Upper,
    Lower,
}

impl End {
    pub fn sign(self) -> f64 {
        match self {
            End::Upper => 1.0,
            End::Lower => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            End::Upper => "upper",
            End::Lower => "lower",
        }
    }
}

/// Additive constants of the Fatou coordinates: one per attracting petal and
/// one per gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub attracting: Vec<Complex64>,
    pub repelling: Vec<Complex64>,
}

impl Normalization {
    pub fn zero(q: usize) -> Normalization {
        Normalization {
            attracting: vec![ZERO; q],
            repelling: vec![ZERO; q],
        }
    }

    fn check(&self, q: usize) -> Result<()> {
        if self.attracting.len() != q || self.repelling.len() != q {
            return Err(LabError::InvalidInput(format!(
                "normalization has {}/{} constants, germ has q = {q}",
                self.attracting.len(),
                self.repelling.len()
            )));
        }
        Ok(())
    }
}

/// Sampled horn map `H(Z) - Z` on the line `Im Z = ±M`.
#[derive(Debug, Clone, PartialEq)]
pub struct HornMapData {
    pub gate: usize,
    pub end: End,
    /// Height the samples were taken at.
    pub height: f64,
    pub samples: usize,
    /// Normalized DFT of the samples, storage order: slot `k` is frequency
    /// `k` for `k <= K/2`, `k - K` past it.
    pub fourier: Vec<Complex64>,
    pub periodicity_residual: f64,
    pub decay_ok: bool,
}

impl HornMapData {
    /// Coefficient of `e^{2πikx}` on the sampling line.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let len = self.fourier.len() as i64;
        if k.abs() >= len / 2 {
            return ZERO;
        }
        self.fourier[k.rem_euclid(len) as usize]
    }

    /// Coefficient as it would be sampled at `height`, for frequencies on
    /// the decaying side of this end.
    pub fn coefficient_at(&self, k: i64, height: f64) -> Complex64 {
        self.coefficient(k) * (-TAU * k.abs() as f64 * (height - self.height)).exp()
    }

    /// Frequencies that decay towards this end: `k >= 0` upper, `k <= 0` lower.
    pub fn decaying_frequencies(&self) -> impl Iterator<Item = i64> {
        let sign = self.end.sign() as i64;
        (0..self.samples as i64 / 2).map(move |k| k * sign)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantVector {
    pub q: usize,
    pub alpha: Complex64,
    pub source: String,
    /// Blocks in order gate 0 upper, gate 0 lower, gate 1 upper, …
    pub gates: Vec<HornMapData>,
    /// `e^{2πiψ_j(x)}` for the marked point `x` in petal `j`, if any.
    pub critical_values: Vec<Option<Complex64>>,
    pub normalization: Normalization,
}

impl InvariantVector {
    pub fn block(&self, gate: usize, end: End) -> Option<&HornMapData> {
        self.gates.iter().find(|b| b.gate == gate && b.end == end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HornOptions {
    pub height: f64,
    pub samples: usize,
    pub fatou_tol: f64,
    /// Largest raise of the height tried when the sampling line leaves the
    /// domain of the horn map.
    pub max_lift: f64,
    pub lift_step: f64,
}

impl Default for HornOptions {
    fn default() -> Self {
        HornOptions {
            height: DEFAULT_M,
            samples: DEFAULT_K,
            fatou_tol: FATOU_TOL,
            max_lift: 4.0,
            lift_step: 0.25,
        }
    }
}

impl HornOptions {
    fn validate(&self) -> Result<()> {
        if !self.samples.is_power_of_two() || self.samples < 64 {
            return Err(LabError::InvalidInput(format!(
                "sample count {} is not a power of two >= 64",
                self.samples
            )));
        }
        if !(self.height >= M_MIN) {
            return Err(LabError::InvalidInput(format!("height {} below {M_MIN}", self.height)));
        }
        if !(self.fatou_tol > 0.0) {
            return Err(LabError::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Charts of one germ under a fixed normalization.
struct HornCharts {
    attracting: Vec<FatouChart>,
    repelling: Vec<FatouChart>,
}

impl HornCharts {
    fn new(germ: &Arc<ParabolicGerm>, normalization: &Normalization, tol: f64) -> Result<HornCharts> {
        normalization.check(germ.q())?;
        let attracting = (0..germ.q())
            .map(|j| Ok(FatouChart::attracting(germ, j)?.with_tol(tol).with_normalization(normalization.attracting[j])))
            .collect::<Result<Vec<_>>>()?;
        let repelling = (0..germ.q())
            .map(|i| Ok(FatouChart::repelling(germ, i)?.with_tol(tol).with_normalization(normalization.repelling[i])))
            .collect::<Result<Vec<_>>>()?;
        Ok(HornCharts { attracting, repelling })
    }

    fn eval(&self, gate: usize, end: End, z: Complex64) -> Result<Complex64> {
        self.eval_deeper(gate, end, z, 0)
    }

    /// `extra` more lifting steps than the minimum in the repelling inverse.
    fn eval_deeper(&self, gate: usize, end: End, z: Complex64, extra: usize) -> Result<Complex64> {
        let q = self.repelling.len();
        let petal = match end {
            End::Upper => gate,
            End::Lower => (gate + 1) % q,
        };
        let chart = &self.repelling[gate];
        let zeta = repelling_inverse_global(chart, z, depth_shift(chart, z) + extra)?;
        Ok(-self.attracting[petal].extended_value(zeta)?)
    }

    fn block(&self, gate: usize, end: End, height: f64, samples: usize) -> Result<HornMapData> {
        let y = end.sign() * height;
        let values = (0..samples)
            .into_par_iter()
            .map(|j| {
                let z = Complex64::new(j as f64 / samples as f64, y);
                Ok(self.eval(gate, end, z)? - z)
            })
            .collect::<Result<Vec<_>>>()?;
        let fourier = dft(&values)?;
        let periodicity_residual = (0..8)
            .into_par_iter()
            .map(|j| {
                let z = Complex64::new(j as f64 / 8.0 + 0.0625, y);
                let h0 = self.eval(gate, end, z)?;
                // a different lifting depth keeps the two evaluations independent
                let h1 = self.eval_deeper(gate, end, z + 1.0, 3)?;
                Ok((h1 - h0 - 1.0).norm())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let decay_ok = decay_check(&fourier, end);
        Ok(HornMapData {
            gate,
            end,
            height,
            samples,
            fourier,
            periodicity_residual,
            decay_ok,
        })
    }

    /// Sample at `options.height`, raising the line until every sample lies
    /// in the domain of the horn map and the line clears its singularities
    /// (periodic samples whose coefficients decay). A block that never
    /// passes the checks is returned flagged from the highest line.
    fn lifted_block(&self, gate: usize, end: End, options: &HornOptions) -> Result<HornMapData> {
        let mut height = options.height;
        loop {
            let can_lift = height + options.lift_step <= options.height + options.max_lift + 1e-12;
            match self.block(gate, end, height, options.samples) {
                Ok(block) if block.decay_ok && block.periodicity_residual < PERIODICITY_TOL => return Ok(block),
                Ok(block) if !can_lift => return Ok(block),
                Err(e) if !can_lift => return Err(e),
                _ => height += options.lift_step,
            }
        }
    }
}

/// Coefficients on the growing side are at noise level and those on the
/// decaying side do not grow by more than a factor 10 beyond `k = 1`.
fn decay_check(fourier: &[Complex64], end: End) -> bool {
    let len = fourier.len();
    let sign = end.sign() as i64;
    let at = |k: i64| fourier[k.rem_euclid(len as i64) as usize].norm();
    let scale = 1.0 + at(0);
    let wrong_side = (1..len as i64 / 2).map(|k| at(-sign * k)).fold(0.0, f64::max);
    let first = at(sign).max(1e-12 * scale);
    let growth = (2..len as i64 / 2).all(|k| at(sign * k) <= 10.0 * first);
    wrong_side <= 1e-7 * scale && growth
}

/// Horn map of gate `gate` at one end, with zero chart constants:
/// `H(Z) = -ψ_att(Ψ_rep(Z))`, where `Ψ_rep` is the global inverse of the
/// repelling coordinate of the gate and `ψ_att` the extended coordinate of
/// petal `gate` (upper end) or `gate + 1` (lower end).
pub fn horn_map(germ: &Arc<ParabolicGerm>, gate: usize, end: End, z: Complex64) -> Result<Complex64> {
    if end.sign() * z.im < M_MIN {
        return Err(LabError::InvalidInput(format!(
            "Im Z = {} is not beyond {M_MIN} on the {} end",
            z.im,
            end.name()
        )));
    }
    gate_in_range(germ, gate)?;
    HornCharts::new(germ, &Normalization::zero(germ.q()), FATOU_TOL)?.eval(gate, end, z)
}

fn gate_in_range(germ: &ParabolicGerm, gate: usize) -> Result<()> {
    if gate >= germ.q() {
        return Err(LabError::InvalidInput(format!("gate {gate} out of range for q = {}", germ.q())));
    }
    Ok(())
}

/// Fourier block of one gate end at height `height` with `samples` points.
pub fn horn_fourier(germ: &Arc<ParabolicGerm>, gate: usize, end: End, height: f64, samples: usize) -> Result<HornMapData> {
    let options = HornOptions {
        height,
        samples,
        ..HornOptions::default()
    };
    options.validate()?;
    gate_in_range(germ, gate)?;
    HornCharts::new(germ, &Normalization::zero(germ.q()), options.fatou_tol)?.block(gate, end, height, samples)
}

/// `e^{2πiψ_j(x)}` for the marked point `x` whose orbit enters petal `j`,
/// `ψ_j` carrying the constant `constant`.
pub fn critical_value_invariant(germ: &Arc<ParabolicGerm>, petal: usize, constant: Complex64) -> Result<Complex64> {
    let chart = FatouChart::attracting(germ, petal)?.with_normalization(constant);
    let x = marked_point_in(germ, petal)?;
    Ok(exp_2pi_i(chart.extended_value(x)?))
}

fn marked_point_in(germ: &ParabolicGerm, petal: usize) -> Result<Complex64> {
    for &x in germ.marked_points() {
        if entry_petal(germ, x, ITER_CAP, ENTRY_RADIUS)?.0 == petal {
            return Ok(x);
        }
    }
    Err(LabError::NotInPetal(format!("no marked point is attracted through petal {petal}")))
}

/// Invariant vector with zero chart constants.
pub fn invariant_vector(germ: &Arc<ParabolicGerm>, height: f64, samples: usize) -> Result<InvariantVector> {
    let options = HornOptions {
        height,
        samples,
        ..HornOptions::default()
    };
    invariant_vector_with(germ, &Normalization::zero(germ.q()), &options)
}

pub fn invariant_vector_with(
    germ: &Arc<ParabolicGerm>,
    normalization: &Normalization,
    options: &HornOptions,
) -> Result<InvariantVector> {
    options.validate()?;
    let q = germ.q();
    let charts = HornCharts::new(germ, normalization, options.fatou_tol)?;
    let jobs: Vec<(usize, End)> = (0..q).flat_map(|i| [(i, End::Upper), (i, End::Lower)]).collect();
    let gates = jobs
        .par_iter()
        .map(|&(i, end)| charts.lifted_block(i, end, options))
        .collect::<Result<Vec<_>>>()?;

    let mut critical_values = vec![None; q];
    for &x in germ.marked_points() {
        let (petal, _) = entry_petal(germ, x, ITER_CAP, ENTRY_RADIUS)?;
        if critical_values[petal].is_none() {
            critical_values[petal] = Some(exp_2pi_i(charts.attracting[petal].extended_value(x)?));
        }
    }
    Ok(InvariantVector {
        q,
        alpha: germ.alpha(),
        source: germ.source().describe(),
        gates,
        critical_values,
        normalization: normalization.clone(),
    })
}

/// Signed frequency of a storage slot, re-exported for callers reading
/// [`HornMapData::fourier`] directly.
pub fn frequency(slot: usize, samples: usize) -> i64 {
    symmetric_index(slot, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::{model_germ, ModelTag};

    #[test]
    fn moebius_horn_map_is_a_translation() {
        let germ = Arc::new(model_germ(ModelTag::Moebius).unwrap());
        let block = horn_fourier(&germ, 0, End::Upper, 2.0, 64).unwrap();
        for k in 1..32 {
            assert!(block.coefficient(k).norm() < 1e-8, "k = {k}");
            assert!(block.coefficient(-k).norm() < 1e-8);
        }
        assert!(block.periodicity_residual < 1e-9);
        assert!(block.decay_ok);
    }

    #[test]
    fn horn_map_rejects_low_lines() {
        let germ = Arc::new(model_germ(ModelTag::Quad).unwrap());
        assert!(horn_map(&germ, 0, End::Upper, Complex64::new(0.0, 1.0)).is_err());
        assert!(horn_map(&germ, 0, End::Lower, Complex64::new(0.0, 2.0)).is_err());
        assert!(horn_fourier(&germ, 0, End::Upper, 2.0, 100).is_err());
    }

    #[test]
    fn quad_horn_map_is_periodic() {
        let germ = Arc::new(model_germ(ModelTag::Quad).unwrap());
        // the line Im Z = -2 still meets the basin of infinity of z + z^2
        assert!(horn_fourier(&germ, 0, End::Lower, 2.0, 64).is_err());
        let block = horn_fourier(&germ, 0, End::Lower, 2.5, 64).unwrap();
        assert!(block.periodicity_residual < PERIODICITY_TOL);
        assert!(block.coefficient(-1).norm() > 1e-8);
    }
}
