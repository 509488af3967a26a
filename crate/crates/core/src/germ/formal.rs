use num_complex::Complex64;

use crate::numerics::series;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Truncated formal Fatou coordinate of a parabolic germ
/// `u ↦ u + a u^{q+1} + …`:
///
/// `Φ(u) = Σ_{j=-q}^{D-q-1} c_j u^j + β log u`, with `Φ(g(u)) - Φ(u) - 1 = O(u^D)`.
///
/// The constant term is fixed to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalFatou {
    q: usize,
    /// `c_{-q}, …, c_{D-q-1}`.
    coefficients: Vec<Complex64>,
    beta: Complex64,
}

/// Defect order `D` as a multiple of `q`.
pub(crate) const DEPTH_PER_PETAL: usize = 8;

impl FormalFatou {
    /// Number of germ coefficients (jet order + 1) needed by [`solve`](Self::solve).
    pub fn required_jet_len(q: usize) -> usize {
        DEPTH_PER_PETAL * q + q + 1
    }

    /// `jet[m]` is the coefficient of `u^m` in the germ, `jet[1] = 1`,
    /// `jet[q+1] = a`. Coefficients `2..=q` are treated as zero.
    pub fn solve(q: usize, jet: &[Complex64]) -> FormalFatou {
        let depth = DEPTH_PER_PETAL * q;
        let len = depth + q;
        // s(u) = g(u)/u - 1
        let mut s: Vec<Complex64> = (0..len).map(|m| jet.get(m + 1).copied().unwrap_or(ZERO)).collect();
        for v in s.iter_mut().take(q) {
            *v = ZERO;
        }
        let a = s[q];
        let log = series::log1p(&s, len);
        let qi = q as i64;
        // (1+s)^j - 1 for j = -q .. depth-q-1, index j + q
        let powers: Vec<Vec<Complex64>> = (-qi..depth as i64 - qi)
            .map(|j| {
                if j == 0 {
                    return vec![ZERO; len];
                }
                let scaled: Vec<Complex64> = log.iter().map(|v| v * j as f64).collect();
                let mut p = series::exp(&scaled, len);
                p[0] -= 1.0;
                p
            })
            .collect();

        let mut coefficients = vec![ZERO; depth];
        let mut beta = ZERO;
        for m in 0..depth {
            let mut e = if m == 0 { Complex64::new(-1.0, 0.0) } else { ZERO };
            let mi = m as i64;
            for j in -qi..mi - qi {
                if j != 0 {
                    e += coefficients[(j + qi) as usize] * powers[(j + qi) as usize][(mi - j) as usize];
                }
            }
            if m > q {
                e += beta * log[m];
            }
            if m == q {
                beta = -e / a;
            } else {
                let j = mi - qi;
                coefficients[m] = -e / (a * j as f64);
            }
        }
        FormalFatou { q, coefficients, beta }
    }

    /// `D / q`; the defect of the truncated coordinate is `O(u^D)`.
    pub fn depth_per_petal() -> usize {
        DEPTH_PER_PETAL
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Coefficient of `log u`; equals `q·α`.
    pub fn log_coefficient(&self) -> Complex64 {
        self.beta
    }

    /// Coefficient of `u^j`, `j >= -q`.
    pub fn coefficient(&self, j: i64) -> Complex64 {
        let index = j + self.q as i64;
        if index < 0 {
            return ZERO;
        }
        self.coefficients.get(index as usize).copied().unwrap_or(ZERO)
    }

    /// `Φ(u)` and `Φ'(u)`, taking `Log(u / direction)` for `log u`.
    pub fn eval(&self, u: Complex64, direction: Complex64) -> (Complex64, Complex64) {
        let mut value = ZERO;
        let mut slope = ZERO;
        for &c in self.coefficients.iter().rev() {
            slope = slope * u + value;
            value = value * u + c;
        }
        // value = P(u), Φ = u^{-q} P(u)
        let inv = u.powi(-(self.q as i32));
        let phi = inv * value + self.beta * (u / direction).ln();
        let dphi = inv * (slope - value * self.q as f64 / u) + self.beta / u;
        (phi, dphi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jet(coefficients: &[Complex64]) -> Vec<Complex64> {
        let mut v = vec![ZERO];
        v.extend_from_slice(coefficients);
        v
    }

    #[test]
    fn quadratic_map_leading_terms() {
        let f = FormalFatou::solve(1, &jet(&[c(1.0, 0.0), c(1.0, 0.0)]));
        assert!((f.coefficient(-1) + 1.0).norm() < 1e-15);
        assert!((f.log_coefficient() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn moebius_is_exactly_minus_one_over_u() {
        let coefficients = vec![c(1.0, 0.0); 20];
        let f = FormalFatou::solve(1, &jet(&coefficients));
        assert!((f.coefficient(-1) + 1.0).norm() < 1e-15);
        for j in 0..7 {
            assert!(f.coefficient(j).norm() < 1e-13, "{j}: {}", f.coefficient(j));
        }
        assert!(f.log_coefficient().norm() < 1e-15);
    }

    #[test]
    fn log_coefficient_for_pure_power() {
        // g = u + u^{q+1} has α = (q+1)/(2q), so β = (q+1)/2
        for q in 1..5 {
            let mut coefficients = vec![ZERO; q + 1];
            coefficients[0] = c(1.0, 0.0);
            coefficients[q] = c(1.0, 0.0);
            let f = FormalFatou::solve(q, &jet(&coefficients));
            assert!((f.log_coefficient() - (q as f64 + 1.0) / 2.0).norm() < 1e-13);
        }
    }

    #[test]
    fn defect_is_high_order() {
        let g = |u: Complex64| u + u * u * c(0.3, -0.7) + u * u * u * c(1.1, 0.2) - u.powi(5) * 0.4;
        let coefficients = jet(&[c(1.0, 0.0), c(0.3, -0.7), c(1.1, 0.2), ZERO, c(-0.4, 0.0)]);
        let f = FormalFatou::solve(1, &coefficients);
        let a = c(0.3, -0.7);
        let direction = -a.conj() / a.norm();
        for r in [2e-2, 1e-2] {
            let u = direction * r;
            let defect = (f.eval(g(u), direction).0 - f.eval(u, direction).0 - 1.0).norm();
            assert!(defect < 1e-10, "r = {r}: {defect:e}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let coefficients = jet(&[c(1.0, 0.0), ZERO, c(0.5, 0.5), c(0.2, 0.0)]);
        let f = FormalFatou::solve(2, &coefficients);
        let u = c(0.05, 0.02);
        let h = 1e-7;
        let fd = (f.eval(u + h, c(1.0, 0.0)).0 - f.eval(u - h, c(1.0, 0.0)).0) / (2.0 * h);
        let (_, d) = f.eval(u, c(1.0, 0.0));
        assert!((fd - d).norm() < 1e-5 * d.norm());
    }
}
