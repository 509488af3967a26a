use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::map::UnicriticalMap;
use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A truncated Taylor expansion `Σ a_j (z - basepoint)^j`, `j = 0..=order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    basepoint: Complex64,
    coefficients: Vec<Complex64>,
}

impl Jet {
    pub fn new(basepoint: Complex64, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(LabError::InvalidInput("a jet needs at least one coefficient".into()));
        }
        Ok(Self {
            basepoint,
            coefficients,
        })
    }

    /// The jet of the identity map at `basepoint`.
    pub fn identity(basepoint: Complex64, order: usize) -> Self {
        let mut coefficients = vec![ZERO; order + 1];
        coefficients[0] = basepoint;
        if order >= 1 {
            coefficients[1] = ONE;
        }
        Self {
            basepoint,
            coefficients,
        }
    }

    pub fn constant(basepoint: Complex64, value: Complex64, order: usize) -> Self {
        let mut coefficients = vec![ZERO; order + 1];
        coefficients[0] = value;
        Self {
            basepoint,
            coefficients,
        }
    }

    pub fn basepoint(&self) -> Complex64 {
        self.basepoint
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, j: usize) -> Complex64 {
        self.coefficients.get(j).copied().unwrap_or(ZERO)
    }

    /// Same jet truncated (or zero-padded) to another order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coefficients = self.coefficients.clone();
        coefficients.resize(order + 1, ZERO);
        Self {
            basepoint: self.basepoint,
            coefficients,
        }
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.basepoint != other.basepoint {
            return Err(LabError::InvalidInput("jets have different basepoints".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order().min(other.order());
        let coefficients = (0..=order)
            .map(|j| self.coefficients[j] + other.coefficients[j])
            .collect();
        Ok(Jet {
            basepoint: self.basepoint,
            coefficients,
        })
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order().min(other.order());
        Ok(Jet {
            basepoint: self.basepoint,
            coefficients: series::mul(&self.coefficients, &other.coefficients, order + 1),
        })
    }

    pub fn scale(&self, factor: Complex64) -> Jet {
        Jet {
            basepoint: self.basepoint,
            coefficients: self.coefficients.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn powu(&self, exponent: u32) -> Jet {
        Jet {
            basepoint: self.basepoint,
            coefficients: series::powu(&self.coefficients, exponent, self.coefficients.len()),
        }
    }

    /// `self ∘ inner`, truncated to the smaller of the two orders.
    ///
    /// Exact (up to truncation) when the constant term of `inner` equals the
    /// basepoint of `self`; otherwise this composes the truncated polynomial.
    pub fn compose(&self, inner: &Jet) -> Jet {
        let len = self.coefficients.len().min(inner.coefficients.len());
        let mut shifted = inner.coefficients[..len].to_vec();
        shifted[0] -= self.basepoint;
        // Horner in the shifted inner series
        let mut acc = vec![ZERO; len];
        for &a in self.coefficients[..len].iter().rev() {
            acc = series::mul(&acc, &shifted, len);
            acc[0] += a;
        }
        Jet {
            basepoint: inner.basepoint,
            coefficients: acc,
        }
    }

    /// Evaluate the truncated polynomial at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let u = z - self.basepoint;
        self.coefficients
            .iter()
            .rev()
            .fold(ZERO, |acc, &a| acc * u + a)
    }

    /// Value and derivative of the truncated polynomial at `z`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let u = z - self.basepoint;
        let mut value = ZERO;
        let mut slope = ZERO;
        for &a in self.coefficients.iter().rev() {
            slope = slope * u + value;
            value = value * u + a;
        }
        (value, slope)
    }
}

/// Jet of `f^n` at `basepoint`, by `n` truncated compositions with `f`.
pub fn iterate_jet(map: &UnicriticalMap, basepoint: Complex64, n: usize, order: usize) -> Result<Jet> {
    if n == 0 {
        return Err(LabError::InvalidInput("iteration count must be positive".into()));
    }
    if order < 2 {
        return Err(LabError::InvalidInput("jet order must be at least 2".into()));
    }
    let mut jet = Jet::identity(basepoint, order);
    for _ in 0..n {
        jet = jet.powu(map.degree());
        jet.coefficients[0] += map.c();
        if !jet.coefficients.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(LabError::InvalidInput("jet coefficients overflowed".into()));
        }
    }
    Ok(jet)
}

/// Truncated power-series arithmetic on plain coefficient slices.
pub mod series {
    use super::{ONE, ZERO};
    use num_complex::Complex64;

    /// Product truncated to `len` coefficients.
    pub fn mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; len];
        for (i, &ai) in a.iter().enumerate().take(len) {
            if ai == ZERO {
                continue;
            }
            for (j, &bj) in b.iter().enumerate().take(len - i) {
                out[i + j] += ai * bj;
            }
        }
        out
    }

    pub fn powu(a: &[Complex64], mut exponent: u32, len: usize) -> Vec<Complex64> {
        let mut result = vec![ZERO; len];
        result[0] = ONE;
        let mut base = a[..a.len().min(len)].to_vec();
        base.resize(len, ZERO);
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = mul(&result, &base, len);
            }
            exponent >>= 1;
            if exponent > 0 {
                base = mul(&base, &base, len);
            }
        }
        result
    }

    /// `1 / a`, requires `a[0] != 0`.
    pub fn reciprocal(a: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; len];
        out[0] = ONE / a[0];
        for n in 1..len {
            let mut acc = ZERO;
            for k in 1..=n.min(a.len() - 1) {
                acc += a[k] * out[n - k];
            }
            out[n] = -acc * out[0];
        }
        out
    }

    /// `log(1 + s)` for a series with `s[0] == 0`.
    pub fn log1p(s: &[Complex64], len: usize) -> Vec<Complex64> {
        // L' = s' / (1 + s)
        let mut one_plus = s[..s.len().min(len)].to_vec();
        one_plus.resize(len, ZERO);
        one_plus[0] += ONE;
        let inv = reciprocal(&one_plus, len);
        let deriv: Vec<Complex64> = (1..len).map(|k| s.get(k).copied().unwrap_or(ZERO) * k as f64).collect();
        let quotient = mul(&deriv, &inv, len.saturating_sub(1));
        let mut out = vec![ZERO; len];
        for (k, q) in quotient.into_iter().enumerate() {
            out[k + 1] = q / (k + 1) as f64;
        }
        out
    }

    /// `exp(s)` for a series with `s[0] == 0`.
    pub fn exp(s: &[Complex64], len: usize) -> Vec<Complex64> {
        // E' = s' E
        let mut out = vec![ZERO; len];
        out[0] = ONE;
        for n in 1..len {
            let mut acc = ZERO;
            for k in 1..=n.min(s.len() - 1) {
                acc += s[k] * out[n - k] * k as f64;
            }
            out[n] = acc / n as f64;
        }
        out
    }
}
