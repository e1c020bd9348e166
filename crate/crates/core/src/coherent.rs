//! Coherent states `eta = N(z) sum_n conj(phi_n(z)) e_n` for the nine pairings
//! of a coefficient family `phi_n` with a vector basis `e_n`, both drawn from
//! `Phi_n`, `H_{s,n}` and `h_{s,n}`; the ladder operators of the three spaces;
//! and Poisson photon statistics.
//!
//! | row | `phi_n`   | `e_n`     | `N`                  |
//! |-----|-----------|-----------|----------------------|
//! | 1-3 | `Phi_n`   | cycling   | `exp(-|z|^2/2)`      |
//! | 4-6 | `H_{s,n}` | cycling   | `kappa_s(z)`         |
//! | 7-9 | `h_{s,n}` | cycling   | `kappa~_s(z)`        |
//!
//! with `e_n` cycling through `Phi_n`, `H_{s,n}`, `h_{s,n}` inside each group.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::gausspoly::GaussPoly;
use crate::hermite::{hsn_poly, hsn_seq, hsn_small_poly, hsn_small_seq, phi_poly, phi_seq, ModelParams};
use crate::numeric::{compensated_sum, ln_factorial};
use crate::quadrature::{build_grid, inner_product, inner_product_xs_on, Measure};
use crate::squeeze::PmfTable;
use crate::{Error, Result};

/// Tail bound required before a truncated state is trusted.
pub const TRUNCATION_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisKind {
    /// `Phi_n = z^n / sqrt(n!)`.
    Phi,
    /// `H_{s,n}`.
    Hs,
    /// `h_{s,n} = exp(-z^2/2) H_{s,n}`.
    SmallH,
}

impl BasisKind {
    fn values(&self, p: &ModelParams, n_max: usize, z: Complex64) -> Vec<Complex64> {
        match self {
            BasisKind::Phi => phi_seq(n_max, z),
            BasisKind::Hs => hsn_seq(n_max, p, z),
            BasisKind::SmallH => hsn_small_seq(n_max, p, z),
        }
    }

    fn poly(&self, p: &ModelParams, n: usize) -> GaussPoly {
        match self {
            BasisKind::Phi => phi_poly(n),
            BasisKind::Hs => hsn_poly(n, p),
            BasisKind::SmallH => hsn_small_poly(n, p),
        }
    }
}

/// One row of the table, 1 to 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CsFamily {
    pub row: u8,
    pub coeff_basis: BasisKind,
    pub vector_basis: BasisKind,
}

const KINDS: [BasisKind; 3] = [BasisKind::Phi, BasisKind::Hs, BasisKind::SmallH];

impl CsFamily {
    pub fn new(row: u8) -> Result<Self> {
        if !(1..=9).contains(&row) {
            return Err(Error::Range {
                name: "row",
                value: row as f64,
                expected: "coherent-state row in 1..=9",
            });
        }
        let i = (row - 1) as usize;
        Ok(Self {
            row,
            coeff_basis: KINDS[i / 3],
            vector_basis: KINDS[i % 3],
        })
    }

    pub fn all() -> impl Iterator<Item = CsFamily> {
        (1..=9).map(|r| CsFamily::new(r).expect("rows 1..=9 exist"))
    }
}

/// `sqrt(2 pi s / (1 - s^2)) exp(-(1-s^2)/(4s) |z|^2 + c (z^2 + conj(z)^2))`.
fn kappa_with(p: &ModelParams, z: Complex64, c: f64) -> f64 {
    let s = p.s();
    let re_z2 = 2.0 * (z * z).re;
    (2.0 * PI * s / (1.0 - s * s)).sqrt()
        * (-(1.0 - s * s) / (4.0 * s) * z.norm_sqr() + c * re_z2).exp()
}

/// `kappa_s(z)`, the `H_{s,n}` normalizer, `K_s(z, z)^(-1/2)`.
pub fn kappa(p: &ModelParams, z: Complex64) -> f64 {
    let s = p.s();
    kappa_with(p, z, (1.0 - s).powi(2) / (8.0 * s))
}

/// `kappa~_s(z) = kappa_s(z) exp((z^2 + conj(z)^2)/4)`, the `h_{s,n}` normalizer.
pub fn kappa_tilde(p: &ModelParams, z: Complex64) -> f64 {
    let s = p.s();
    kappa_with(p, z, (1.0 + s * s) / (8.0 * s))
}

/// `N(z)` of a row.
pub fn normalizer(row: u8, p: &ModelParams, z: Complex64) -> Result<f64> {
    Ok(match CsFamily::new(row)?.coeff_basis {
        BasisKind::Phi => (-0.5 * z.norm_sqr()).exp(),
        BasisKind::Hs => kappa(p, z),
        BasisKind::SmallH => kappa_tilde(p, z),
    })
}

/// A truncated coherent state, `coeffs[n] = N(z) conj(phi_n(z))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateCoefficients {
    pub family: CsFamily,
    pub label_z: Complex64,
    pub s: f64,
    pub n: usize,
    pub normalizer: f64,
    pub coeffs: Vec<Complex64>,
}

impl StateCoefficients {
    /// `sum |coeffs_n|^2`; at most 1 and tends to 1 as `N` grows.
    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|c| Complex64::new(c.norm_sqr(), 0.0))).re
    }

    /// `sum coeffs_n e_n(w)`.
    pub fn evaluate(&self, p: &ModelParams, w: Complex64) -> Complex64 {
        let e = self.family.vector_basis.values(p, self.n, w);
        compensated_sum(self.coeffs.iter().zip(&e).map(|(c, v)| c * v))
    }

    /// The truncated state as an exact function.
    pub fn to_gausspoly(&self, p: &ModelParams) -> GaussPoly {
        self.coeffs
            .iter()
            .enumerate()
            .fold(GaussPoly::zero(), |acc, (n, &c)| {
                acc.try_axpy(c, &self.family.vector_basis.poly(p, n))
                    .expect("members of one basis share their exponent")
            })
    }
}

pub fn cs_coefficients(row: u8, p: &ModelParams, z: Complex64, n: usize) -> Result<StateCoefficients> {
    let family = CsFamily::new(row)?;
    let norm = normalizer(row, p, z)?;
    let coeffs = family
        .coeff_basis
        .values(p, n, z)
        .into_iter()
        .map(|v| norm * v.conj())
        .collect();
    Ok(StateCoefficients {
        family,
        label_z: z,
        s: p.s(),
        n,
        normalizer: norm,
        coeffs,
    })
}

/// The truncated state of `row` with label `z`, evaluated at `w`.
pub fn cs_evaluate(row: u8, p: &ModelParams, z: Complex64, w: Complex64, n: usize) -> Result<Complex64> {
    Ok(cs_coefficients(row, p, z, n)?.evaluate(p, w))
}

/// `|z|^(N+1) / sqrt((N+1)!)`, the leading neglected term of the exponential
/// series.
pub fn truncation_tail(z: Complex64, n: usize) -> f64 {
    let m = (n + 1) as f64;
    (m * z.norm().ln() - 0.5 * ln_factorial(n + 1)).exp()
}

/// Ladder operators of the three spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ladder {
    /// `d/dz` on the Bargmann space.
    BMinusPhi,
    /// Multiplication by `z` on the Bargmann space.
    BPlusPhi,
    /// `sqrt((1+s)/(2(1-s))) d/dz` on `H_s`.
    AsMinus,
    /// `sqrt((1-s)/(2(1+s))) (2z - d/dz)` on `H_s`.
    AsPlus,
    /// `sqrt((1+s)/(2(1-s))) (z + d/dz)` on `X_s`.
    XsMinus,
    /// `sqrt((1-s)/(2(1+s))) (z - d/dz)` on `X_s`.
    XsPlus,
}

impl Ladder {
    pub const ALL: [Ladder; 6] = [
        Ladder::BMinusPhi,
        Ladder::BPlusPhi,
        Ladder::AsMinus,
        Ladder::AsPlus,
        Ladder::XsMinus,
        Ladder::XsPlus,
    ];

    /// `(lowering, raising)` for the space with basis `kind`.
    pub fn pair(kind: BasisKind) -> (Ladder, Ladder) {
        match kind {
            BasisKind::Phi => (Ladder::BMinusPhi, Ladder::BPlusPhi),
            BasisKind::Hs => (Ladder::AsMinus, Ladder::AsPlus),
            BasisKind::SmallH => (Ladder::XsMinus, Ladder::XsPlus),
        }
    }

    pub fn basis(&self) -> BasisKind {
        match self {
            Ladder::BMinusPhi | Ladder::BPlusPhi => BasisKind::Phi,
            Ladder::AsMinus | Ladder::AsPlus => BasisKind::Hs,
            Ladder::XsMinus | Ladder::XsPlus => BasisKind::SmallH,
        }
    }

    pub fn is_lowering(&self) -> bool {
        matches!(self, Ladder::BMinusPhi | Ladder::AsMinus | Ladder::XsMinus)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ladder::BMinusPhi => "B_MINUS_PHI",
            Ladder::BPlusPhi => "B_PLUS_PHI",
            Ladder::AsMinus => "AS_MINUS",
            Ladder::AsPlus => "AS_PLUS",
            Ladder::XsMinus => "XS_MINUS",
            Ladder::XsPlus => "XS_PLUS",
        }
    }
}

/// Apply a ladder operator in exact arithmetic.
pub fn ladder_apply(which: Ladder, p: &ModelParams, f: &GaussPoly) -> GaussPoly {
    let s = p.s();
    let k_minus = Complex64::new(((1.0 + s) / (2.0 * (1.0 - s))).sqrt(), 0.0);
    let k_plus = Complex64::new(((1.0 - s) / (2.0 * (1.0 + s))).sqrt(), 0.0);
    let one = Complex64::new(1.0, 0.0);
    match which {
        Ladder::BMinusPhi => f.differentiate(),
        Ladder::BPlusPhi => f.mul_z(),
        Ladder::AsMinus => f.differentiate().scale(k_minus),
        Ladder::AsPlus => f.mul_z().scale(2.0 * k_plus).axpy_same(-k_plus, &f.differentiate()),
        Ladder::XsMinus => f.mul_z().axpy_same(one, &f.differentiate()).scale(k_minus),
        Ladder::XsPlus => f.mul_z().axpy_same(-one, &f.differentiate()).scale(k_plus),
    }
}

/// `||b^- eta - conj(z) eta|| / ||eta||` for the truncated state of row 1, 2
/// or 3, with the norm of the state's own space computed on a grid of `order`.
///
/// Refuses truncations whose tail bound [`truncation_tail`] exceeds
/// [`TRUNCATION_LIMIT`].
pub fn eigenvalue_residual(row: u8, p: &ModelParams, z: Complex64, n: usize, order: usize) -> Result<f64> {
    if !(1..=3).contains(&row) {
        return Err(Error::Range {
            name: "row",
            value: row as f64,
            expected: "eigenfunction rows are 1, 2 and 3",
        });
    }
    let tail = truncation_tail(z, n);
    if tail.is_nan() || tail >= TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            n,
            tail,
            limit: TRUNCATION_LIMIT,
        });
    }
    let state = cs_coefficients(row, p, z, n)?;
    let eta = state.to_gausspoly(p);
    let (lower, _) = Ladder::pair(state.family.vector_basis);
    let residual = ladder_apply(lower, p, &eta).axpy_same(-z.conj(), &eta);
    let (num, den) = match state.family.vector_basis {
        BasisKind::Phi => {
            let grid = build_grid(Measure::Bargmann, order)?;
            (inner_product(&residual, &residual, &grid), inner_product(&eta, &eta, &grid))
        }
        BasisKind::Hs => {
            let grid = build_grid(Measure::HsHol(*p), order)?;
            (inner_product(&residual, &residual, &grid), inner_product(&eta, &eta, &grid))
        }
        BasisKind::SmallH => {
            let grid = build_grid(Measure::HsHol(*p), order)?;
            (
                inner_product_xs_on(&residual, &residual, &grid)?,
                inner_product_xs_on(&eta, &eta, &grid)?,
            )
        }
    };
    Ok((num.re.max(0.0) / den.re).sqrt())
}

/// `P(n, lambda) = exp(-lambda) lambda^n / n!`.
pub fn poisson_pmf(n: usize, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Range {
            name: "lambda",
            value: lambda,
            expected: "lambda >= 0",
        });
    }
    if lambda == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    Ok((-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp())
}

/// Poisson probabilities up to the first `n > lambda` whose geometric tail
/// bound `P(n) q / (1 - q)`, `q = lambda/(n+1)`, is below `tail_tol`.
pub fn poisson_table(lambda: f64, tail_tol: f64) -> Result<PmfTable> {
    let mut probs = vec![poisson_pmf(0, lambda)?];
    let mut n = 0;
    loop {
        let q = lambda / (n + 1) as f64;
        if q < 1.0 {
            let tail = probs[n] * q / (1.0 - q);
            if tail < tail_tol {
                return Ok(PmfTable::from_probabilities(probs, tail));
            }
        }
        n += 1;
        probs.push(poisson_pmf(n, lambda)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gausspoly::equal_on_grid;
    use crate::hermite::{kernel_ks, KernelMode};
    use crate::numeric::rel_diff;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(s: f64) -> ModelParams {
        ModelParams::new(s).unwrap()
    }

    #[test]
    fn table_layout() {
        let rows: Vec<(BasisKind, BasisKind)> =
            CsFamily::all().map(|f| (f.coeff_basis, f.vector_basis)).collect();
        use BasisKind::*;
        assert_eq!(
            rows,
            vec![
                (Phi, Phi), (Phi, Hs), (Phi, SmallH),
                (Hs, Phi), (Hs, Hs), (Hs, SmallH),
                (SmallH, Phi), (SmallH, Hs), (SmallH, SmallH),
            ]
        );
        assert!(CsFamily::new(0).is_err() && CsFamily::new(10).is_err());
    }

    #[test]
    fn normalizer_examples() {
        let p = params(0.5);
        assert_eq!(normalizer(1, &p, c(0.0, 0.0)).unwrap(), 1.0);
        let k = normalizer(4, &p, c(0.0, 0.0)).unwrap();
        assert!((k - 2.046654).abs() < 1e-6);
        let z = c(0.7, -0.4);
        let ratio = normalizer(7, &p, z).unwrap() / normalizer(4, &p, z).unwrap();
        assert!((ratio - (0.5 * (z * z).re).exp()).abs() < 1e-14);
    }

    #[test]
    fn normalizers_match_kernel_diagonal() {
        for s in [0.2, 0.5, 0.8] {
            let p = params(s);
            for z in [c(0.0, 0.0), c(0.9, 0.3), c(-0.4, 1.2)] {
                let k = kernel_ks(&p, z, z, KernelMode::Closed).re;
                assert!((kappa(&p, z) - k.powf(-0.5)).abs() <= 1e-12 * kappa(&p, z));
                let ks = (-(z * z).re).exp() * k;
                assert!((kappa_tilde(&p, z) - ks.powf(-0.5)).abs() <= 1e-12 * kappa_tilde(&p, z));
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let p = params(0.5);
        let vac = cs_coefficients(1, &p, c(0.0, 0.0), 5).unwrap();
        assert_eq!(vac.coeffs[0], c(1.0, 0.0));
        assert!(vac.coeffs[1..].iter().all(|v| *v == c(0.0, 0.0)));
        let st = cs_coefficients(4, &p, c(0.5, 0.0), 30).unwrap();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-8);
        let st = cs_coefficients(1, &p, c(1.0, 1.0), 60).unwrap();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norms_increase_to_one() {
        let p = params(0.4);
        let z = c(0.6, -0.5);
        for row in 1..=9 {
            let mut prev = 0.0;
            for n in [0, 2, 5, 10, 20, 40] {
                let v = cs_coefficients(row, &p, z, n).unwrap().norm_sqr();
                assert!(v >= prev - 1e-15 && v <= 1.0 + 1e-9, "row {row}, n {n}");
                prev = v;
            }
            assert!((prev - 1.0).abs() < 1e-8, "row {row}: {prev}");
        }
    }

    #[test]
    fn evaluate_examples() {
        let p = params(0.5);
        let v = cs_evaluate(1, &p, c(1.0, 0.0), c(1.0, 0.0), 40).unwrap();
        assert!((v.re - 1.648721).abs() < 1e-6);
        assert!((v - (0.5f64).exp()).norm() < 1e-9);
        assert_eq!(cs_evaluate(1, &p, c(0.0, 0.0), c(3.0, -1.0), 10).unwrap(), c(1.0, 0.0));

        let (z, w) = (c(0.0, 0.8), c(0.3, 0.0));
        let mut brute = c(0.0, 0.0);
        let mut fact = 1.0;
        for n in 0..=40usize {
            if n > 0 {
                fact *= n as f64;
            }
            let phi_bar = z.conj().powu(n as u32) / fact.sqrt();
            let h = crate::hermite::hermite_sum(n, w).unwrap() / crate::hermite::bn(n, &p).sqrt();
            brute += phi_bar * h;
        }
        brute *= (-0.5 * z.norm_sqr()).exp();
        assert!(rel_diff(cs_evaluate(2, &p, z, w, 40).unwrap(), brute) < 1e-10);
    }

    #[test]
    fn ladder_examples() {
        let p = params(0.5);
        let d = ladder_apply(Ladder::BMinusPhi, &p, &phi_poly(3));
        assert!(equal_on_grid(&d, &phi_poly(2).scale(c(3f64.sqrt(), 0.0)), 2.0, 1e-14).equal);

        let a = ladder_apply(Ladder::AsMinus, &p, &hsn_poly(1, &p));
        let h0 = hsn_poly(0, &p);
        assert_eq!(a.coeffs().len(), 1);
        assert!((a.coeffs()[0] - h0.coeffs()[0]).norm() < 1e-15);

        let x = ladder_apply(Ladder::XsPlus, &p, &hsn_small_poly(0, &p));
        assert!(equal_on_grid(&x, &hsn_small_poly(1, &p), 2.0, 1e-10).equal);
    }

    #[test]
    fn ladder_relations_all_spaces() {
        for s in [0.3, 0.6] {
            let p = params(s);
            for kind in KINDS {
                let (lo, hi) = Ladder::pair(kind);
                for n in 0..=10 {
                    let b = kind.poly(&p, n);
                    let up = ladder_apply(hi, &p, &b);
                    let want = kind.poly(&p, n + 1).scale(c(((n + 1) as f64).sqrt(), 0.0));
                    assert!(equal_on_grid(&up, &want, 2.0, 1e-9).equal, "{kind:?} raise {n}");
                    let down = ladder_apply(lo, &p, &b);
                    let want = if n == 0 {
                        GaussPoly::zero()
                    } else {
                        kind.poly(&p, n - 1).scale(c((n as f64).sqrt(), 0.0))
                    };
                    assert!(equal_on_grid(&down, &want, 2.0, 1e-9).equal, "{kind:?} lower {n}");
                }
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let p = params(0.5);
        assert!(eigenvalue_residual(1, &p, c(0.0, 0.0), 10, 20).unwrap() < 1e-15);
        assert!(eigenvalue_residual(1, &p, c(1.0, 0.5), 40, 80).unwrap() < 1e-8);
        assert!(eigenvalue_residual(2, &p, c(0.7, 0.0), 40, 80).unwrap() < 1e-7);
        assert!(eigenvalue_residual(3, &p, c(0.3, -0.6), 40, 80).unwrap() < 1e-7);
        assert!(matches!(
            eigenvalue_residual(1, &p, c(3.0, 0.0), 10, 40),
            Err(Error::Truncation { n: 10, .. })
        ));
        assert!(eigenvalue_residual(4, &p, c(0.0, 0.0), 10, 20).is_err());
    }

    #[test]
    fn poisson_examples() {
        assert!((poisson_pmf(0, 1.7).unwrap() - (-1.7f64).exp()).abs() < 1e-16);
        assert!((poisson_pmf(2, 1.0).unwrap() - 0.183940).abs() < 1e-6);
        assert!(poisson_pmf(3, -0.1).is_err());
        let t = poisson_table(2.5, 1e-14).unwrap();
        assert!((t.mean - 2.5).abs() < 1e-10);
        assert!((t.total - 1.0).abs() < 1e-12);
        assert!(t.tail_bound < 1e-14);
        let t = poisson_table(0.0, 1e-14).unwrap();
        assert_eq!(t.probabilities, vec![1.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn unit_commutators(
            s in 0.1..0.9f64,
            coeffs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..7),
            which in 0usize..3,
        ) {
            let p = params(s);
            let kind = KINDS[which];
            let alpha = if kind == BasisKind::SmallH { c(-0.5, 0.0) } else { c(0.0, 0.0) };
            let f = GaussPoly::new(alpha, c(0.0, 0.0), coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let (lo, hi) = Ladder::pair(kind);
            let lr = ladder_apply(lo, &p, &ladder_apply(hi, &p, &f));
            let rl = ladder_apply(hi, &p, &ladder_apply(lo, &p, &f));
            let cmp = equal_on_grid(&lr.try_sub(&rl).unwrap(), &f, 1.5, 1e-10);
            prop_assert!(cmp.equal, "{:?} {:?}", kind, cmp);
        }

        #[test]
        fn poisson_sums_to_one(lambda in 0.0..30.0f64) {
            let t = poisson_table(lambda, 1e-14).unwrap();
            prop_assert!((t.total - 1.0).abs() < 1e-10);
            prop_assert!((t.mean - lambda).abs() < 1e-10 * lambda.max(1.0));
        }
    }
}
