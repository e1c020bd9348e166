//! Hermite polynomials `H_n(z)` at complex argument, the orthonormal families
//! `H_{s,n}` and `h_{s,n}`, the Bargmann monomials `Phi_n`, and the reproducing
//! kernel of the space spanned by `H_{s,n}`.
//!
//! `H_n` is orthogonal against the anisotropic planar weight
//! `exp(-(1-s)x^2 - (1/s - 1)y^2)` with squared norm
//! `b_n(s) = pi sqrt(s) / (1-s) * (2(1+s)/(1-s))^n * n!`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gausspoly::GaussPoly;
use crate::numeric::{factorial, ln_factorial, MAX_FACTORIAL_ARG};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Shape parameter `s` of the measure, `0 < s < 1`, and the derived
/// `epsilon = (1-s)/(1+s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    s: f64,
    epsilon: f64,
}

impl ModelParams {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Range {
                name: "s",
                value: s,
                expected: "0 < s < 1",
            });
        }
        Ok(Self {
            s,
            epsilon: (1.0 - s) / (1.0 + s),
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `b_{n+1} / (b_n (n+1)) = 2(1+s)/(1-s)`.
    pub fn norm_ratio(&self) -> f64 {
        2.0 * (1.0 + self.s) / (1.0 - self.s)
    }

    /// Total mass of the weight, `b_0(s) = pi sqrt(s) / (1-s)`.
    pub fn total_mass(&self) -> f64 {
        PI * self.s.sqrt() / (1.0 - self.s)
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_FACTORIAL_ARG {
        Err(Error::Range {
            name: "n",
            value: n as f64,
            expected: "n <= 170 (use hsn for the normalized family)",
        })
    } else {
        Ok(())
    }
}

/// `H_n(z)` from the explicit sum
/// `n! sum_m (-1)^m (2z)^(n-2m) / (m! (n-2m)!)`.
///
/// The coefficients are built by ratio and the sum is evaluated by Horner's
/// rule in `(2z)^2`. Kept as an oracle for [`hermite_rec`].
pub fn hermite_sum(n: usize, z: Complex64) -> Result<Complex64> {
    check_degree(n)?;
    let two_z = 2.0 * z;
    let u = two_z * two_z;
    let half = n / 2;
    let mut acc = ZERO;
    let mut coeff = 1.0;
    for m in 0..=half {
        let signed = if m % 2 == 0 { coeff } else { -coeff };
        acc = acc * u + signed;
        let k = (n - 2 * m) as f64;
        coeff *= k * (k - 1.0) / (m + 1) as f64;
    }
    Ok(if n % 2 == 1 { acc * two_z } else { acc })
}

/// `H_n(z)` from `H_{n+1} = 2z H_n - 2n H_{n-1}`.
pub fn hermite_rec(n: usize, z: Complex64) -> Result<Complex64> {
    check_degree(n)?;
    let (mut prev, mut cur) = (ZERO, ONE);
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Integer coefficients of `H_n` in ascending degree. Exact while they stay
/// below `2^53` (n <= 25 or so).
pub fn hermite_coefficients(n: usize) -> Result<Vec<f64>> {
    check_degree(n)?;
    let mut prev: Vec<f64> = Vec::new();
    let mut cur = vec![1.0];
    for k in 0..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `ln b_n(s)`.
pub fn ln_bn(n: usize, p: &ModelParams) -> f64 {
    p.total_mass().ln() + n as f64 * p.norm_ratio().ln() + ln_factorial(n)
}

/// Squared norm `b_n(s)` of `H_n`. Computed in the log domain above `n = 30`;
/// overflows to infinity for large `n`, use [`ln_bn`] there.
pub fn bn(n: usize, p: &ModelParams) -> f64 {
    if n <= 30 {
        p.total_mass() * p.norm_ratio().powi(n as i32) * factorial(n)
    } else {
        ln_bn(n, p).exp()
    }
}

/// `H_{s,0}, ..., H_{s,n_max}` at `z`, from the normalized recurrence
/// `H_{s,k+1} = (2z H_{s,k} - 2k H_{s,k-1} / sqrt(r k)) / sqrt(r (k+1))`
/// with `r = 2(1+s)/(1-s)`. Never forms `H_n` or `b_n` separately.
pub fn hsn_seq(n_max: usize, p: &ModelParams, z: Complex64) -> Vec<Complex64> {
    let r = p.norm_ratio();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(Complex64::new(1.0 / p.total_mass().sqrt(), 0.0));
    for k in 0..n_max {
        let mut next = 2.0 * z * out[k];
        if k > 0 {
            next -= out[k - 1] * (2.0 * k as f64 / (r * k as f64).sqrt());
        }
        out.push(next / (r * (k + 1) as f64).sqrt());
    }
    out
}

/// `H_{s,n}(z) = H_n(z) / sqrt(b_n(s))`.
pub fn hsn(n: usize, p: &ModelParams, z: Complex64) -> Complex64 {
    hsn_seq(n, p, z)[n]
}

/// `h_{s,n}(z) = exp(-z^2/2) H_{s,n}(z)`; the exponent is `z^2`, not `|z|^2`.
pub fn hsn_small(n: usize, p: &ModelParams, z: Complex64) -> Complex64 {
    (-0.5 * z * z).exp() * hsn(n, p, z)
}

pub fn hsn_small_seq(n_max: usize, p: &ModelParams, z: Complex64) -> Vec<Complex64> {
    let g = (-0.5 * z * z).exp();
    hsn_seq(n_max, p, z).into_iter().map(|v| v * g).collect()
}

/// Bargmann monomials `Phi_k(z) = z^k / sqrt(k!)` for `k <= n_max`.
pub fn phi_seq(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(ONE);
    for k in 1..=n_max {
        let v = out[k - 1] * z / (k as f64).sqrt();
        out.push(v);
    }
    out
}

pub fn phi(n: usize, z: Complex64) -> Complex64 {
    phi_seq(n, z)[n]
}

/// Bargmann reproducing kernel `exp(z conj(w))`.
pub fn bargmann_kernel(z: Complex64, w: Complex64) -> Complex64 {
    (z * w.conj()).exp()
}

/// `Phi_n` as an exact function.
pub fn phi_poly(n: usize) -> GaussPoly {
    GaussPoly::monomial(n, Complex64::new((-0.5 * ln_factorial(n)).exp(), 0.0))
}

/// Coefficients of `H_{s,n}`, built with the normalized recurrence.
pub fn hsn_poly(n: usize, p: &ModelParams) -> GaussPoly {
    let r = p.norm_ratio();
    let mut prev: Vec<Complex64> = Vec::new();
    let mut cur = vec![Complex64::new(1.0 / p.total_mass().sqrt(), 0.0)];
    for k in 0..n {
        let mut next = vec![ZERO; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        if k > 0 {
            let f = 2.0 * k as f64 / (r * k as f64).sqrt();
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= f * c;
            }
        }
        let norm = (r * (k + 1) as f64).sqrt();
        next.iter_mut().for_each(|c| *c /= norm);
        prev = cur;
        cur = next;
    }
    GaussPoly::polynomial(cur)
}

/// `h_{s,n}` as an exact function (`alpha = -1/2`).
pub fn hsn_small_poly(n: usize, p: &ModelParams) -> GaussPoly {
    hsn_poly(n, p).gauss_multiply(Complex64::new(-0.5, 0.0))
}

/// How [`kernel_ks`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Closed,
    /// Partial sum `sum_{n <= N} H_{s,n}(z) conj(H_{s,n}(w))`.
    Series(usize),
}

/// Reproducing kernel of the `H_{s,n}` space.
///
/// Closed form:
/// `(1-s^2)/(2 pi s) exp[-(1-s)^2/(4s) (z^2 + conj(w)^2) + (1-s^2)/(2s) z conj(w)]`.
pub fn kernel_ks(p: &ModelParams, z: Complex64, w: Complex64, mode: KernelMode) -> Complex64 {
    match mode {
        KernelMode::Closed => {
            let s = p.s();
            let wb = w.conj();
            let pre = (1.0 - s * s) / (2.0 * PI * s);
            let expo = -(1.0 - s).powi(2) / (4.0 * s) * (z * z + wb * wb)
                + (1.0 - s * s) / (2.0 * s) * z * wb;
            pre * expo.exp()
        }
        KernelMode::Series(n) => {
            let hz = hsn_seq(n, p, z);
            let hw = hsn_seq(n, p, w);
            crate::numeric::compensated_sum(hz.iter().zip(&hw).map(|(a, b)| a * b.conj()))
        }
    }
}

/// `H_n(z)` from the Rodrigues-type formula with free parameter `a`:
/// `exp(-a z^2) [2(1+a) z - d/dz]^n exp(a z^2)`.
///
/// The operator is applied symbolically to the seed `exp(a z^2)`; the result
/// does not depend on `a`.
pub fn rodrigues_hermite(n: usize, a: Complex64, z: Complex64) -> Complex64 {
    let lift = 2.0 * (1.0 + a);
    let mut f = GaussPoly::gaussian(a);
    for _ in 0..n {
        f = f.mul_z().scale(lift).axpy_same(-ONE, &f.differentiate());
    }
    f.evaluate(z) * (-a * z * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(0.0).is_err());
        assert!(ModelParams::new(1.0).is_err());
        assert!(ModelParams::new(f64::NAN).is_err());
        assert!(matches!(
            ModelParams::new(2.0),
            Err(Error::Range { name: "s", .. })
        ));
        let eps: Vec<f64> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&s| ModelParams::new(s).unwrap().epsilon())
            .collect();
        assert!(eps.iter().all(|&e| e > 0.0 && e < 1.0));
        assert!(eps[0] > eps[1] && eps[1] > eps[2]);
    }

    #[test]
    fn hermite_sum_examples() {
        assert_eq!(hermite_sum(0, c(3.0, -7.0)).unwrap(), ONE);
        assert_eq!(hermite_sum(1, c(2.0, 1.0)).unwrap(), c(4.0, 2.0));
        // 8z^3 - 12z at z = 1 + i
        let z = c(1.0, 1.0);
        let oracle = 8.0 * z * z * z - 12.0 * z;
        assert_eq!(oracle, c(-28.0, 4.0));
        assert!(rel_diff(hermite_sum(3, z).unwrap(), oracle) < 1e-15);
    }

    #[test]
    fn hermite_rec_examples() {
        assert_eq!(hermite_rec(2, c(0.0, 1.0)).unwrap(), c(-6.0, 0.0));
        assert_eq!(hermite_rec(0, c(5.0, -2.0)).unwrap(), ONE);
        // H_6(x) = 64x^6 - 480x^4 + 720x^2 - 120
        let x: f64 = 0.7;
        let table = 64.0 * x.powi(6) - 480.0 * x.powi(4) + 720.0 * x.powi(2) - 120.0;
        let v = hermite_rec(6, c(x, 0.0)).unwrap();
        assert!(rel_diff(v, c(table, 0.0)) < 1e-12);
        assert!(rel_diff(v, hermite_sum(6, c(x, 0.0)).unwrap()) < 1e-12);
    }

    #[test]
    fn degree_cap() {
        assert!(hermite_sum(170, c(0.1, 0.0)).is_ok());
        assert!(matches!(
            hermite_sum(171, ONE),
            Err(Error::Range { name: "n", .. })
        ));
        assert!(hermite_rec(171, ONE).is_err());
    }

    #[test]
    fn bn_examples() {
        let p = ModelParams::new(0.5).unwrap();
        let b0 = PI * 2f64.sqrt();
        assert!((bn(0, &p) - b0).abs() < 1e-14 * b0);
        assert!((bn(0, &p) - 4.442883).abs() < 1e-6);
        assert!((bn(1, &p) - 6.0 * b0).abs() < 1e-14 * b0);
        assert!((bn(1, &p) - 26.657298).abs() < 1e-6);
        for n in 0..60 {
            let ratio = bn(n + 1, &p) / bn(n, &p);
            let exact = p.norm_ratio() * (n + 1) as f64;
            assert!((ratio - exact).abs() < 1e-12 * exact, "n = {n}");
        }
        // linear and log routes agree across the switch
        let direct = p.total_mass() * p.norm_ratio().powi(31) * factorial(31);
        assert!((bn(31, &p) - direct).abs() < 1e-12 * direct);
        assert!(ln_bn(300, &p).is_finite());
    }

    #[test]
    fn hsn_examples() {
        let p = ModelParams::new(0.5).unwrap();
        let h0 = 1.0 / (PI * 2f64.sqrt()).sqrt();
        assert!((hsn(0, &p, c(1.3, -0.4)) - h0).norm() < 1e-15);
        assert!((h0 - 0.474425).abs() < 1e-6);
        let h1 = 2.0 / (6.0 * PI * 2f64.sqrt()).sqrt();
        assert!((hsn(1, &p, ONE) - h1).norm() < 1e-15);
        assert!((h1 - 0.387366).abs() < 1e-6);
    }

    #[test]
    fn hsn_matches_unnormalized_route() {
        let p = ModelParams::new(0.35).unwrap();
        let z = c(0.8, -1.1);
        for n in 0..=100 {
            let direct = hermite_rec(n, z).unwrap() * (-0.5 * ln_bn(n, &p)).exp();
            assert!(rel_diff(hsn(n, &p, z), direct) < 1e-12, "n = {n}");
        }
        assert!(hsn(400, &p, z).is_finite());
    }

    #[test]
    fn hsn_small_examples() {
        let p = ModelParams::new(0.5).unwrap();
        assert!((hsn_small(0, &p, ZERO) - 0.474425).norm() < 1e-6);
        let v = hsn_small(2, &p, ONE);
        assert!(rel_diff(v, (-0.5f64).exp() * hsn(2, &p, ONE)) < 1e-15);
        // grows on the imaginary axis
        let y = 3.0;
        let ratio = hsn_small(2, &p, c(0.0, y)) / hsn(2, &p, c(0.0, y));
        assert!(rel_diff(ratio, c((y * y / 2.0).exp(), 0.0)) < 1e-14);
    }

    #[test]
    fn hsn_poly_matches_values() {
        let p = ModelParams::new(0.6).unwrap();
        let z = c(-0.9, 0.4);
        for n in 0..15 {
            assert!(rel_diff(hsn_poly(n, &p).evaluate(z), hsn(n, &p, z)) < 1e-12);
            assert!(rel_diff(hsn_small_poly(n, &p).evaluate(z), hsn_small(n, &p, z)) < 1e-12);
            assert!(rel_diff(phi_poly(n).evaluate(z), phi(n, z)) < 1e-14);
        }
    }

    #[test]
    fn kernel_examples() {
        let p = ModelParams::new(0.5).unwrap();
        let k = kernel_ks(&p, ZERO, ZERO, KernelMode::Closed);
        assert!((k - 0.75 / PI).norm() < 1e-15);
        assert!((k.re - 0.238732).abs() < 1e-6);
        let k0 = kernel_ks(&p, ZERO, ZERO, KernelMode::Series(0));
        assert!((k0.re - 1.0 / bn(0, &p)).abs() < 1e-15);

        let (z, w) = (c(1.0, 0.5), c(-0.3, 0.2));
        let series = kernel_ks(&p, z, w, KernelMode::Series(60));
        let closed = kernel_ks(&p, z, w, KernelMode::Closed);
        assert!(rel_diff(series, closed) < 1e-8);
    }

    #[test]
    fn kernel_series_residual_shrinks() {
        let p = ModelParams::new(0.5).unwrap();
        let pts = [c(2.0, 0.0), c(0.0, 2.0), c(1.2, -1.4), c(-0.5, 0.3)];
        for &z in &pts {
            for &w in &pts {
                let closed = kernel_ks(&p, z, w, KernelMode::Closed);
                let res: Vec<f64> = [10, 20, 40, 60]
                    .iter()
                    .map(|&n| rel_diff(kernel_ks(&p, z, w, KernelMode::Series(n)), closed))
                    .collect();
                for pair in res.windows(2) {
                    assert!(pair[1] <= pair[0] || pair[1] < 1e-13, "{z} {w} {res:?}");
                }
            }
        }
    }

    #[test]
    fn rodrigues_examples() {
        let z = c(0.4, -1.2);
        assert!(rel_diff(rodrigues_hermite(1, ZERO, z), 2.0 * z) < 1e-15);
        for n in 0..10 {
            let v = rodrigues_hermite(n, c(-1.0, 0.0), z);
            assert!(rel_diff(v, hermite_sum(n, z).unwrap()) < 1e-12);
        }
        let z = c(1.0, -1.0);
        let v = rodrigues_hermite(5, c(0.3, 0.2), z);
        assert!(rel_diff(v, hermite_sum(5, z).unwrap()) < 1e-9);
    }

    #[test]
    fn rodrigues_ghost_parameter_is_inert() {
        let ghosts = [
            c(-1.0, 0.0),
            c(-0.5, 0.0),
            ZERO,
            c(0.3, 0.2),
            c(1.1, -0.4),
        ];
        for n in 0..=8 {
            for z in [c(0.7, 0.1), c(-1.5, 2.0), c(0.0, -0.9)] {
                let vals: Vec<Complex64> =
                    ghosts.iter().map(|&a| rodrigues_hermite(n, a, z)).collect();
                for a in &vals {
                    for b in &vals {
                        assert!(rel_diff(*a, *b) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn parity_in_exact_coefficients() {
        for n in 0..=25 {
            let coeffs = hermite_coefficients(n).unwrap();
            for (k, &c) in coeffs.iter().enumerate() {
                if (n + k) % 2 == 1 {
                    assert_eq!(c, 0.0);
                }
            }
        }
    }

    #[test]
    fn derivative_identity_by_finite_differences() {
        let h = 1e-6;
        for n in 1..=15 {
            for z in [c(0.3, 0.2), c(-1.1, 0.6), c(0.9, -1.4)] {
                let fd = (hermite_rec(n, z + h).unwrap() - hermite_rec(n, z - h).unwrap())
                    / (2.0 * h);
                let exact = 2.0 * n as f64 * hermite_rec(n - 1, z).unwrap();
                assert!(rel_diff(fd, exact) < 1e-5, "n = {n}, z = {z}");
            }
        }
    }

    /// Classical real recurrence in plain f64, independent of the complex path.
    fn real_hermite(n: usize, x: f64) -> f64 {
        let (mut a, mut b) = (0.0, 1.0);
        for k in 0..n {
            let next = 2.0 * x * b - 2.0 * k as f64 * a;
            a = b;
            b = next;
        }
        b
    }

    proptest! {
        #[test]
        fn sum_and_recurrence_agree(n in 0usize..=60, r in 0.0..5.0f64, t in 0.0..6.3f64) {
            let z = Complex64::from_polar(r, t);
            let a = hermite_sum(n, z).unwrap();
            let b = hermite_rec(n, z).unwrap();
            // Near a root the alternating sum cancels; measure against the sum of |terms|.
            let scale = hermite_sum(n, c(0.0, z.norm())).unwrap().norm().max(1e-14);
            prop_assert!((a - b).norm() < 1e-10 * scale, "n={} z={} {} vs {}", n, z, a, b);
        }

        #[test]
        fn real_axis_agreement(n in 0usize..=20, x in -5.0..5.0f64) {
            let v = hermite_sum(n, c(x, 0.0)).unwrap();
            let scale = hermite_sum(n, c(0.0, x.abs())).unwrap().norm();
            prop_assert!((v - real_hermite(n, x)).norm() < 1e-12 * scale);
        }

        #[test]
        fn parity(n in 0usize..=40, re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let p = ModelParams::new(0.45).unwrap();
            let z = c(re, im);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!(rel_diff(hsn(n, &p, -z), sign * hsn(n, &p, z)) < 1e-13);
            prop_assert!(rel_diff(hermite_rec(n, -z).unwrap(), sign * hermite_rec(n, z).unwrap()) < 1e-13);
        }
    }
}
