use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};

/// Normalized forward transform: `c_k = (1/K) Σ_j x_j e^{-2πi jk/K}`.
pub fn dft(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let len = samples.len();
    if len < 2 {
        return Err(LabError::InvalidInput("dft needs at least two samples".into()));
    }
    let mut buffer = samples.to_vec();
    FftPlanner::new().plan_fft_forward(len).process(&mut buffer);
    let scale = 1.0 / len as f64;
    buffer.iter_mut().for_each(|v| *v *= scale);
    Ok(buffer)
}

/// Inverse of [`dft`]: `x_j = Σ_k c_k e^{2πi jk/K}`.
pub fn inverse_dft(coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
    if coefficients.len() < 2 {
        return Err(LabError::InvalidInput("dft needs at least two samples".into()));
    }
    let mut buffer = coefficients.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(buffer.len())
        .process(&mut buffer);
    Ok(buffer)
}

/// Signed frequency of storage slot `k` in a length-`len` transform:
/// slots past the midpoint stand for `k - len`.
pub fn symmetric_index(k: usize, len: usize) -> i64 {
    if k <= len / 2 {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cis_turns;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(samples: &[Complex64]) -> Vec<Complex64> {
        let len = samples.len();
        (0..len)
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, x)| x * cis_turns(-((j * k) as f64) / len as f64))
                    .sum::<Complex64>()
                    / len as f64
            })
            .collect()
    }

    #[test]
    fn constant_samples() {
        let v = Complex64::new(0.3, -1.2);
        let out = dft(&vec![v; 16]).unwrap();
        assert!((out[0] - v).norm() < 1e-15);
        assert!(out[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn single_mode() {
        let samples: Vec<_> = (0..32).map(|j| cis_turns(j as f64 / 32.0)).collect();
        let out = dft(&samples).unwrap();
        for (k, c) in out.iter().enumerate() {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-14, "k={k}: {c}");
        }
    }

    #[test]
    fn agrees_with_direct_sum_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<_> = (0..64)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let fast = dft(&samples).unwrap();
        for (a, b) in fast.iter().zip(naive(&samples)) {
            assert!((a - b).norm() < 1e-13);
        }
        let back = inverse_dft(&fast).unwrap();
        for (a, b) in back.iter().zip(&samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_indices() {
        assert_eq!(symmetric_index(0, 8), 0);
        assert_eq!(symmetric_index(4, 8), 4);
        assert_eq!(symmetric_index(5, 8), -3);
        assert_eq!(symmetric_index(7, 8), -1);
    }

    #[test]
    fn too_short() {
        assert!(dft(&[Complex64::new(1.0, 0.0)]).is_err());
    }
}
