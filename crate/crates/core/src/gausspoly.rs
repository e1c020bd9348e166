//! Functions of the form `exp(alpha z^2 + beta z) * p(z)` with exact
//! coefficient arithmetic.
//!
//! Every basis function and coherent-state expansion in this crate is of this
//! shape, and the shape is closed under multiplication by `z`,
//! differentiation, multiplication by a Gaussian and dilation. The heat
//! operator `exp(gamma d^2/dz^2)` is supported on pure polynomials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Anything that can be evaluated at a complex point.
pub trait Evaluate {
    fn eval(&self, z: Complex64) -> Complex64;
}

impl<F> Evaluate for F
where
    F: Fn(Complex64) -> Complex64,
{
    fn eval(&self, z: Complex64) -> Complex64 {
        self(z)
    }
}

impl Evaluate for GaussPoly {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.evaluate(z)
    }
}

/// `f(z) = exp(alpha z^2 + beta z) * sum_k coeffs[k] z^k`.
///
/// Trailing zero coefficients are trimmed; the zero function has an empty
/// coefficient list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussPoly {
    alpha: Complex64,
    beta: Complex64,
    coeffs: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl GaussPoly {
    pub fn new(alpha: Complex64, beta: Complex64, coeffs: Vec<Complex64>) -> Self {
        let mut f = Self {
            alpha,
            beta,
            coeffs,
        };
        f.trim();
        f
    }

    /// A pure polynomial (`alpha = beta = 0`).
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        Self::new(ZERO, ZERO, coeffs)
    }

    pub fn from_real_coeffs(coeffs: &[f64]) -> Self {
        Self::polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `c * z^k`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::polynomial(coeffs)
    }

    /// `exp(alpha z^2)`.
    pub fn gaussian(alpha: Complex64) -> Self {
        Self::new(alpha, ZERO, vec![ONE])
    }

    pub fn zero() -> Self {
        Self::polynomial(Vec::new())
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Polynomial degree, `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_polynomial(&self) -> bool {
        self.alpha == ZERO && self.beta == ZERO
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
    }

    /// Horner evaluation of the polynomial part only.
    pub fn evaluate_polynomial(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let p = self.evaluate_polynomial(z);
        if self.is_polynomial() {
            p
        } else {
            (self.alpha * z * z + self.beta * z).exp() * p
        }
    }

    pub fn mul_z(&self) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ZERO);
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(self.alpha, self.beta, coeffs)
    }

    /// `d/dz`, keeping the exponential factor:
    /// `exp(..) [(2 alpha z + beta) p + p']`.
    pub fn differentiate(&self) -> Self {
        let len = self.coeffs.len() + 1;
        let mut out = vec![ZERO; len];
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                out[k - 1] += c * k as f64;
            }
            out[k] += self.beta * c;
            out[k + 1] += 2.0 * self.alpha * c;
        }
        Self::new(self.alpha, self.beta, out)
    }

    /// Multiplication by `exp(gamma z^2)`.
    pub fn gauss_multiply(&self, gamma: Complex64) -> Self {
        Self::new(self.alpha + gamma, self.beta, self.coeffs.clone())
    }

    /// `z -> f(c z)`.
    pub fn dilate(&self, c: Complex64) -> Self {
        let mut power = ONE;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| {
                let v = a * power;
                power *= c;
                v
            })
            .collect();
        Self::new(self.alpha * c * c, self.beta * c, coeffs)
    }

    /// `exp(gamma d^2/dz^2)` applied termwise:
    /// `z^n -> sum_m gamma^m n! / (m! (n-2m)!) z^(n-2m)`.
    ///
    /// Only defined for pure polynomials.
    pub fn heat_apply(&self, gamma: Complex64) -> Result<Self> {
        if !self.is_polynomial() {
            return Err(Error::Domain(format!(
                "heat operator needs a pure polynomial, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        let mut out = vec![ZERO; self.coeffs.len()];
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let mut term = c;
            let mut m = 0;
            loop {
                out[n - 2 * m] += term;
                if 2 * m + 2 > n {
                    break;
                }
                let k = (n - 2 * m) as f64;
                term *= gamma * (k * (k - 1.0)) / (m + 1) as f64;
                m += 1;
            }
        }
        Ok(Self::polynomial(out))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(
            self.alpha,
            self.beta,
            self.coeffs.iter().map(|&a| a * c).collect(),
        )
    }

    /// Rescale each coefficient by a degree-dependent factor.
    pub fn scale_by_degree<F: Fn(usize) -> Complex64>(&self, factor: F) -> Self {
        Self::new(
            self.alpha,
            self.beta,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a * factor(k))
                .collect(),
        )
    }

    fn check_same_exponent(&self, other: &Self) -> Result<()> {
        if self.alpha == other.alpha && self.beta == other.beta {
            Ok(())
        } else {
            Err(Error::ExponentMismatch {
                lhs_alpha: self.alpha,
                lhs_beta: self.beta,
                rhs_alpha: other.alpha,
                rhs_beta: other.beta,
            })
        }
    }

    /// Sum of two functions sharing the same exponential factor. The zero
    /// function is compatible with everything.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.try_axpy(ONE, other)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_axpy(-ONE, other)
    }

    /// `self + c * other`.
    pub fn try_axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        if other.coeffs.is_empty() {
            return Ok(self.clone());
        }
        if self.coeffs.is_empty() {
            return Ok(other.scale(c));
        }
        self.check_same_exponent(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(ZERO);
                let b = other.coeffs.get(k).copied().unwrap_or(ZERO);
                a + c * b
            })
            .collect();
        Ok(Self::new(self.alpha, self.beta, coeffs))
    }

    /// Exponents are known to match (both sides derived from one function).
    pub(crate) fn axpy_same(&self, c: Complex64, other: &Self) -> Self {
        self.try_axpy(c, other)
            .expect("operands derived from the same function share their exponent")
    }

    /// The first `len` Taylor coefficients of the whole function about 0.
    pub fn taylor_coefficients(&self, len: usize) -> Vec<Complex64> {
        // e(z) = exp(alpha z^2 + beta z) obeys e' = (2 alpha z + beta) e.
        let mut e = vec![ZERO; len];
        if len > 0 {
            e[0] = ONE;
        }
        for k in 0..len.saturating_sub(1) {
            let mut next = self.beta * e[k];
            if k >= 1 {
                next += 2.0 * self.alpha * e[k - 1];
            }
            e[k + 1] = next / (k + 1) as f64;
        }
        let mut out = vec![ZERO; len];
        for (i, &c) in self.coeffs.iter().enumerate().take(len) {
            for j in 0..len - i {
                out[i + j] += c * e[j];
            }
        }
        out
    }
}

/// Outcome of [`equal_on_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridComparison {
    pub equal: bool,
    pub max_deviation: f64,
    /// Grid point where the deviation is largest.
    pub at: Complex64,
}

/// Side of the fixed comparison grid.
pub const GRID_SIDE: usize = 7;

/// The 7x7 tensor grid over `[-radius, radius]^2`, row-major in the real part.
pub fn comparison_grid(radius: f64) -> Vec<Complex64> {
    let step = 2.0 * radius / (GRID_SIDE - 1) as f64;
    let axis: Vec<f64> = (0..GRID_SIDE).map(|i| -radius + step * i as f64).collect();
    axis.iter()
        .flat_map(|&x| axis.iter().map(move |&y| Complex64::new(x, y)))
        .collect()
}

/// Compares two functions on [`comparison_grid`].
///
/// The deviation at a point is `|f - g| / max(1, |f|, |g|)`: relative where the
/// values are large, absolute where they are small or vanish.
pub fn equal_on_grid(
    f: &impl Evaluate,
    g: &impl Evaluate,
    radius: f64,
    tol: f64,
) -> GridComparison {
    let mut worst = GridComparison {
        equal: true,
        max_deviation: 0.0,
        at: ZERO,
    };
    for z in comparison_grid(radius) {
        let (a, b) = (f.eval(z), g.eval(z));
        let dev = (a - b).norm() / a.norm().max(b.norm()).max(1.0);
        if dev > worst.max_deviation || dev.is_nan() {
            worst.max_deviation = dev;
            worst.at = z;
        }
    }
    worst.equal = worst.max_deviation <= tol;
    worst
}
