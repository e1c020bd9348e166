//! The unitary pair between `X_s` and the Bargmann space.
//!
//! `A` has kernel
//! `A(z, conj w) = P exp(sqrt(2 eps) z conj(w) - (eps z^2 + conj(w)^2) / 2)`
//! with `P = ((1-s)/(pi sqrt s))^(1/2)`, and maps `h_{s,n}` to `Phi_n`. Its
//! inverse `W` integrates against `conj(A(z, conj w))` over the Bargmann side.
//!
//! Every integral is a Gauss-Hermite sum: the Gaussian parts of the kernel
//! and the weight are folded into the grid, the rest is a smooth factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::gausspoly::{Evaluate, GaussPoly};
use crate::hermite::{hsn_small_seq, phi_seq, ModelParams};
use crate::numeric::{compensated_sum, rel_diff};
use crate::quadrature::{build_grid, integrate_nodes, tensor_nodes, Measure, Node};
use crate::{Error, Result};

const MINUS_HALF: Complex64 = Complex64::new(-0.5, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Kernel prefactor and the constants it depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformKernelParams {
    pub p: ModelParams,
    /// `((1-s)/(pi sqrt s))^(1/2)`.
    pub prefactor: f64,
    /// `sqrt(2 eps)`.
    pub coupling: f64,
}

impl TransformKernelParams {
    pub fn new(p: &ModelParams) -> Self {
        Self {
            p: *p,
            prefactor: (1.0 / p.total_mass()).sqrt(),
            coupling: (2.0 * p.epsilon()).sqrt(),
        }
    }
}

/// `A(z, conj w)`; `w` enters only through `conj(w)`.
pub fn kernel_a(p: &ModelParams, z: Complex64, w: Complex64) -> Complex64 {
    let k = TransformKernelParams::new(p);
    let wb = w.conj();
    k.prefactor * (k.coupling * z * wb - 0.5 * (p.epsilon() * z * z + wb * wb)).exp()
}

/// Kernel of `W = A^{-1}`: the complex conjugate of `A(z, conj w)`.
pub fn kernel_a_inverse(p: &ModelParams, z: Complex64, w: Complex64) -> Complex64 {
    kernel_a(p, z, w).conj()
}

/// Weight used on the Bargmann side of `W`, `exp(-k |z|^2) dx dy / pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BargmannWeight {
    /// `exp(-|z|^2)`, the Bargmann measure.
    Full,
    /// `exp(-|z|^2 / 2)`.
    Half,
}

impl BargmannWeight {
    pub fn exponent(&self) -> f64 {
        match self {
            BargmannWeight::Full => 1.0,
            BargmannWeight::Half => 0.5,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BargmannWeight::Full => "exp(-|z|^2)",
            BargmannWeight::Half => "exp(-|z|^2/2)",
        }
    }
}

/// The weight with which `W` inverts `A`. Chosen by the round-trip check in
/// [`resolve_bargmann_weight`]; the other candidate leaves an O(1) residual.
pub const RESOLVED_WEIGHT: BargmannWeight = BargmannWeight::Full;

fn check_order(order: usize) -> Result<()> {
    if order < 2 {
        Err(Error::Range {
            name: "order",
            value: order as f64,
            expected: "quadrature order >= 2",
        })
    } else {
        Ok(())
    }
}

fn check_xs(f: &GaussPoly) -> Result<()> {
    if f.alpha() == MINUS_HALF || f.coeffs().is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "A acts on X_s functions exp(-z^2/2) F(z); got alpha = {}",
            f.alpha()
        )))
    }
}

/// Prebuilt grids for repeated transforms at one `s` and order.
#[derive(Debug, Clone)]
pub struct Transformer {
    kernel: TransformKernelParams,
    order: usize,
    /// `HS_HOL` nodes: the `X_s` weight times `|exp(-w^2/2)|^2`.
    xs_nodes: Vec<Node>,
    /// Bargmann side: `exp(-k|z|^2)` times `|exp(-eps conj(z)^2/2)|`, mass `1/pi`.
    w_nodes: Vec<Node>,
    weight: BargmannWeight,
}

impl Transformer {
    pub fn new(p: &ModelParams, order: usize) -> Result<Self> {
        Self::with_weight(p, order, RESOLVED_WEIGHT)
    }

    pub fn with_weight(p: &ModelParams, order: usize, weight: BargmannWeight) -> Result<Self> {
        check_order(order)?;
        let grid = build_grid(Measure::HsHol(*p), order)?;
        let k = weight.exponent();
        let eps = p.epsilon();
        Ok(Self {
            kernel: TransformKernelParams::new(p),
            order,
            xs_nodes: grid.nodes,
            w_nodes: tensor_nodes(k + 0.5 * eps, k - 0.5 * eps, 1.0 / PI, order),
            weight,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.kernel.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weight(&self) -> BargmannWeight {
        self.weight
    }

    /// `(A f)(z)` from the reduced `F = exp(w^2/2) f`, tabulated or not.
    fn a_reduced<F: Fn(usize, Complex64) -> Complex64>(&self, reduced: F, z: Complex64) -> Complex64 {
        let k = &self.kernel;
        let front = k.prefactor * (-0.5 * k.p.epsilon() * z * z).exp();
        let sum = integrate_nodes(&self.xs_nodes, |i, w| {
            (k.coupling * z * w.conj()).exp() * reduced(i, w)
        });
        front * sum
    }

    /// `(W f)(w) exp(w^2/2)`: the reduced form of `W f`, which is what `A`
    /// consumes.
    fn w_reduced<F: Fn(usize, Complex64) -> Complex64>(&self, f: F, w: Complex64) -> Complex64 {
        let k = &self.kernel;
        let eps = k.p.epsilon();
        let sum = integrate_nodes(&self.w_nodes, |i, z| {
            let phase = (I * (eps * z.re * z.im)).exp();
            (k.coupling * z.conj() * w).exp() * phase * f(i, z)
        });
        k.prefactor * sum
    }

    /// `(A f)(z)` for `f = exp(-w^2/2) F(w)`.
    pub fn apply_a(&self, f: &GaussPoly, z: Complex64) -> Result<Complex64> {
        check_xs(f)?;
        let reduced = f.gauss_multiply(-MINUS_HALF);
        Ok(self.a_reduced(|_, w| reduced.evaluate(w), z))
    }

    /// `(W f)(w)` for a Bargmann-space function `f`.
    pub fn apply_w(&self, f: &impl Evaluate, w: Complex64) -> Complex64 {
        (-0.5 * w * w).exp() * self.w_reduced(|_, z| f.eval(z), w)
    }

    /// Left side of `int A(z, conj q) conj(A(w, conj q)) dmu_X(q) = exp(z conj w)`.
    pub fn a_identity(&self, z: Complex64, w: Complex64) -> Complex64 {
        let k = &self.kernel;
        let (eps, wb) = (k.p.epsilon(), w.conj());
        let front = k.prefactor * k.prefactor * (-0.5 * eps * (z * z + wb * wb)).exp();
        front * integrate_nodes(&self.xs_nodes, |_, q| (k.coupling * (z * q.conj() + wb * q)).exp())
    }

    /// `(A (W f))(z)` at every point of `zs`, with `W f` tabulated on the
    /// `X_s` nodes.
    pub fn a_after_w(&self, f: &(impl Evaluate + Sync), zs: &[Complex64]) -> Vec<Complex64> {
        let table: Vec<Complex64> = self
            .xs_nodes
            .par_iter()
            .map(|n| self.w_reduced(|_, z| f.eval(z), n.z()))
            .collect();
        zs.iter().map(|&z| self.a_reduced(|i, _| table[i], z)).collect()
    }

    /// `(W (A f))(w)` at every point of `ws`, with `A f` tabulated on the
    /// Bargmann-side nodes.
    pub fn w_after_a(&self, f: &GaussPoly, ws: &[Complex64]) -> Result<Vec<Complex64>> {
        check_xs(f)?;
        let reduced = f.gauss_multiply(-MINUS_HALF);
        let table: Vec<Complex64> = self
            .w_nodes
            .par_iter()
            .map(|n| self.a_reduced(|_, q| reduced.evaluate(q), n.z()))
            .collect();
        Ok(ws
            .iter()
            .map(|&w| (-0.5 * w * w).exp() * self.w_reduced(|i, _| table[i], w))
            .collect())
    }
}

/// `(A f)(z)` for `f = exp(-w^2/2) F(w)` in `X_s`.
pub fn apply_a(p: &ModelParams, f: &GaussPoly, z: Complex64, order: usize) -> Result<Complex64> {
    check_xs(f)?;
    Transformer::new(p, order)?.apply_a(f, z)
}

/// `(W f)(w)` with the resolved Bargmann-side weight.
pub fn apply_w(p: &ModelParams, f: &impl Evaluate, w: Complex64, order: usize) -> Result<Complex64> {
    apply_w_with(p, f, w, order, RESOLVED_WEIGHT)
}

pub fn apply_w_with(
    p: &ModelParams,
    f: &impl Evaluate,
    w: Complex64,
    order: usize,
    weight: BargmannWeight,
) -> Result<Complex64> {
    Ok(Transformer::with_weight(p, order, weight)?.apply_w(f, w))
}

/// Relative residual of `int A(z, conj q) conj(A(w, conj q)) dmu_X(q) = exp(z conj w)`.
pub fn verify_a_identity(p: &ModelParams, z: Complex64, w: Complex64, order: usize) -> Result<f64> {
    let t = Transformer::new(p, order)?;
    let exact = (z * w.conj()).exp();
    Ok((t.a_identity(z, w) - exact).norm() / exact.norm())
}

/// Both sides of `sum_{n<=N} Phi_n(z) conj(h_{s,n}(w)) = A(z, conj w)`.
pub fn generating_identity(
    p: &ModelParams,
    z: Complex64,
    w: Complex64,
    n: usize,
) -> (Complex64, Complex64) {
    let phis = phi_seq(n, z);
    let hs = hsn_small_seq(n, p, w);
    let partial = compensated_sum(phis.iter().zip(&hs).map(|(a, b)| a * b.conj()));
    (partial, kernel_a(p, z, w))
}

/// Outcome of the round-trip check for one candidate weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightReport {
    pub weight: BargmannWeight,
    pub label: &'static str,
    /// `max |W(Phi_n)(w) - h_{s,n}(w)|` over the sample points and `n`.
    pub residual: f64,
    pub resolved: bool,
}

/// Tests both Bargmann-side weights against `W Phi_n = h_{s,n}`, `n <= n_max`,
/// at `points`. Since `A h_{s,n} = Phi_n`, this is the `W A = 1` round trip
/// on the basis.
pub fn resolve_bargmann_weight(
    p: &ModelParams,
    order: usize,
    n_max: usize,
    points: &[Complex64],
) -> Result<Vec<WeightReport>> {
    [BargmannWeight::Full, BargmannWeight::Half]
        .into_iter()
        .map(|weight| {
            let t = Transformer::with_weight(p, order, weight)?;
            let mut residual: f64 = 0.0;
            for n in 0..=n_max {
                let f = move |z: Complex64| phi_seq(n, z)[n];
                for &w in points {
                    let exact = hsn_small_seq(n, p, w)[n];
                    residual = residual.max((t.apply_w(&f, w) - exact).norm());
                }
            }
            Ok(WeightReport {
                weight,
                label: weight.label(),
                residual,
                resolved: weight == RESOLVED_WEIGHT,
            })
        })
        .collect()
}

/// Relative gap of the generating identity.
pub fn generating_gap(p: &ModelParams, z: Complex64, w: Complex64, n: usize) -> f64 {
    let (partial, closed) = generating_identity(p, z, w, n);
    rel_diff(partial, closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hsn_small, hsn_small_poly, phi, phi_poly};
    use crate::quadrature::inner_product_xs_on;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(s: f64) -> ModelParams {
        ModelParams::new(s).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let p = params(0.5);
        let k0 = kernel_a(&p, c(0.0, 0.0), c(0.0, 0.0));
        assert!((k0.re - 0.474425).abs() < 1e-6 && k0.im == 0.0);
        let kp = TransformKernelParams::new(&p);
        assert!((kp.prefactor.powi(2) * p.total_mass() - 1.0).abs() < 1e-13);

        let z = c(0.3, -0.8);
        let expect = kp.prefactor * (-0.5 * p.epsilon() * z * z).exp();
        assert!((kernel_a(&p, z, c(0.0, 0.0)) - expect).norm() < 1e-15);

        // The prefactor itself vanishes as s -> 1; only the exponential has a limit.
        let near_one = params(1.0 - 1e-12);
        let kp = TransformKernelParams::new(&near_one);
        let (z, w) = (c(0.4, 0.1), c(-0.2, 0.7));
        let limit = (-0.5 * w.conj() * w.conj()).exp();
        assert!((kernel_a(&near_one, z, w) / kp.prefactor - limit).norm() < 1e-5);
        assert!(kp.prefactor < 1e-5);
    }

    #[test]
    fn inverse_kernel_is_conjugate() {
        let p = params(0.35);
        for (z, w) in [(c(0.1, 0.2), c(-1.0, 0.5)), (c(1.4, -0.3), c(0.0, 1.1))] {
            let a = kernel_a(&p, z, w);
            assert!((kernel_a_inverse(&p, z, w) - a.conj()).norm() <= 1e-13 * a.norm());
        }
    }

    #[test]
    fn a_maps_h_to_phi() {
        let p = params(0.5);
        let t = Transformer::new(&p, 40).unwrap();
        let v = t.apply_a(&hsn_small_poly(0, &p), c(0.9, -0.4)).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
        let z = c(0.7, 0.2);
        let v = t.apply_a(&hsn_small_poly(3, &p), z).unwrap();
        assert!((v - z * z * z / 6f64.sqrt()).norm() < 1e-8);
        for n in 0..=6 {
            for z in [c(0.0, 0.0), c(1.2, -0.5), c(-0.3, 1.4)] {
                let v = t.apply_a(&hsn_small_poly(n, &p), z).unwrap();
                assert!((v - phi(n, z)).norm() < 1e-7, "n = {n}, z = {z}");
            }
        }
    }

    #[test]
    fn apply_a_refuses_other_exponents() {
        let p = params(0.5);
        let f = GaussPoly::from_real_coeffs(&[1.0, 2.0]);
        assert!(matches!(apply_a(&p, &f, c(0.0, 0.0), 20), Err(Error::Domain(_))));
    }

    #[test]
    fn a_identity_examples() {
        let p = params(0.5);
        assert!(verify_a_identity(&p, c(0.0, 0.0), c(0.0, 0.0), 40).unwrap() < 1e-10);
        let p = params(0.3);
        assert!(verify_a_identity(&p, c(1.0, 1.0), c(1.0, -1.0), 80).unwrap() < 1e-8);
    }

    #[test]
    fn a_identity_residual_does_not_grow_with_order() {
        // All three orders sit at the rounding floor.
        let p = params(0.5);
        let (z, w) = (c(1.2, -0.4), c(-0.6, 1.0));
        let r: Vec<f64> = [40, 80, 120]
            .iter()
            .map(|&o| verify_a_identity(&p, z, w, o).unwrap())
            .collect();
        for pair in r.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-13, "{r:?}");
        }
        // a coarse rule is visibly worse
        assert!(verify_a_identity(&p, z, w, 6).unwrap() > r[2]);
    }

    #[test]
    fn w_inverts_on_basis() {
        let p = params(0.5);
        let t = Transformer::new(&p, 60).unwrap();
        let v = t.apply_w(&|_z: Complex64| c(1.0, 0.0), c(0.3, 0.3));
        assert!((v - hsn_small(0, &p, c(0.3, 0.3))).norm() < 1e-7);
        let w = c(0.4, -0.1);
        let v = t.apply_w(&phi_poly(2), w);
        assert!((v - hsn_small(2, &p, w)).norm() < 1e-7);
    }

    #[test]
    fn weight_resolution() {
        let p = params(0.5);
        let pts = [c(0.0, 0.0), c(0.5, -0.7)];
        let reports = resolve_bargmann_weight(&p, 60, 4, &pts).unwrap();
        let full = reports.iter().find(|r| r.weight == BargmannWeight::Full).unwrap();
        let half = reports.iter().find(|r| r.weight == BargmannWeight::Half).unwrap();
        assert!(full.resolved && full.residual < 1e-10);
        assert!(!half.resolved && half.residual > 1e-2);
    }

    #[test]
    fn nested_round_trips() {
        let p = params(0.4);
        let t = Transformer::new(&p, 40).unwrap();
        let pts = [c(0.2, -0.3), c(-1.0, 0.6)];
        for n in [0, 3, 6] {
            let f = phi_poly(n);
            let back = t.a_after_w(&f, &pts);
            for (&z, v) in pts.iter().zip(&back) {
                assert!((v - phi(n, z)).norm() < 1e-6, "AW n = {n}");
            }
            let back = t.w_after_a(&hsn_small_poly(n, &p), &pts).unwrap();
            for (&w, v) in pts.iter().zip(&back) {
                assert!((v - hsn_small(n, &p, w)).norm() < 1e-6, "WA n = {n}");
            }
        }
    }

    #[test]
    fn generating_identity_examples() {
        let p = params(0.5);
        let (partial, closed) = generating_identity(&p, c(0.0, 0.0), c(0.0, 0.0), 0);
        assert!((partial.re - 0.474425).abs() < 1e-6);
        assert!((partial - closed).norm() < 1e-12);
        assert!(generating_gap(&p, c(1.0, 0.0), c(0.5, 0.0), 50) < 1e-9);

        let w = c(0.8, -0.6);
        let (partial, closed) = generating_identity(&p, c(0.0, 0.0), w, 20);
        assert!((partial - hsn_small(0, &p, w).conj()).norm() < 1e-15);
        let expect = TransformKernelParams::new(&p).prefactor * (-0.5 * w.conj() * w.conj()).exp();
        assert!((closed - expect).norm() < 1e-15);
    }

    #[test]
    fn isometry_on_basis() {
        let p = params(0.6);
        let t = Transformer::new(&p, 40).unwrap();
        let xs_grid = build_grid(Measure::HsHol(p), 40).unwrap();
        let bg = build_grid(Measure::Bargmann, 12).unwrap();
        // A h_n is tabulated on the Bargmann grid once per n.
        let images: Vec<Vec<Complex64>> = (0..=4)
            .map(|n| {
                let h = hsn_small_poly(n, &p);
                bg.nodes.iter().map(|nd| t.apply_a(&h, nd.z()).unwrap()).collect()
            })
            .collect();
        for m in 0..=4 {
            for n in 0..=4 {
                let lhs = crate::numeric::compensated_sum(
                    bg.nodes
                        .iter()
                        .enumerate()
                        .map(|(i, nd)| nd.weight * images[m][i] * images[n][i].conj()),
                );
                let rhs = inner_product_xs_on(&hsn_small_poly(m, &p), &hsn_small_poly(n, &p), &xs_grid).unwrap();
                assert!((lhs - rhs).norm() < 1e-7, "({m}, {n})");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn apply_a_is_linear(
            a in -1.0..1.0f64, b in -1.0..1.0f64,
            zr in -1.5..1.5f64, zi in -1.5..1.5f64,
            n in 0usize..6, m in 0usize..6,
        ) {
            let p = params(0.45);
            let t = Transformer::new(&p, 24).unwrap();
            let z = c(zr, zi);
            let (f, g) = (hsn_small_poly(n, &p), hsn_small_poly(m, &p));
            let sum = f.scale(c(a, 0.0)).try_add(&g.scale(c(0.0, b))).unwrap();
            let lhs = t.apply_a(&sum, z).unwrap();
            let rhs = a * t.apply_a(&f, z).unwrap() + c(0.0, b) * t.apply_a(&g, z).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
        }
    }
}
