//! The squeeze operator `S(xi) = exp(xi K+ - conj(xi) K-)` on the Bargmann
//! space and the objects built from it.
//!
//! With `zeta = tanh|xi| xi/|xi|` and `rho = 1 - |zeta|^2` the squeezed basis is
//!
//! ```text
//! Phi^xi_n(z) = rho^(1/4) exp(zeta z^2/2) sqrt(n!)
//!               * sum_m (-conj(zeta)/2)^m rho^((n-2m)/2) z^(n-2m) / (m! (n-2m)!)
//! ```
//!
//! which only takes square roots of the positive `rho`. It is computed here in
//! four ways: the expanded sum, a three-term recurrence, the Hermite form with
//! an explicit square-root branch, and the disentangled product of
//! exponentials acting on `z^n / sqrt(n!)`. A truncated Fock-space matrix
//! exponential gives a fifth, independent route.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gausspoly::GaussPoly;
use crate::hermite::{hermite_rec, hsn_seq, hsn_small_seq, phi_seq, ModelParams};
use crate::numeric::{compensated_sum, ln_factorial, rel_diff};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Squeeze label `xi` and the disc parameter `zeta = tanh|xi| xi/|xi|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    xi: Complex64,
    zeta: Complex64,
}

impl SqueezeParams {
    /// `xi = 0` gives `zeta = 0`, the identity squeeze.
    pub fn from_xi(xi: Complex64) -> Self {
        let r = xi.norm();
        let zeta = if r == 0.0 { ZERO } else { xi * (r.tanh() / r) };
        Self { xi, zeta }
    }

    /// Inverse of [`from_xi`](Self::from_xi); requires `|zeta| < 1`.
    pub fn from_zeta(zeta: Complex64) -> Result<Self> {
        let r = zeta.norm();
        if r.is_nan() || r >= 1.0 {
            return Err(Error::Range {
                name: "|zeta|",
                value: r,
                expected: "|zeta| < 1",
            });
        }
        let xi = if r == 0.0 { ZERO } else { zeta * (r.atanh() / r) };
        Ok(Self { xi, zeta })
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    /// `rho = 1 - |zeta|^2 = sech^2 |xi|`.
    pub fn rho(&self) -> f64 {
        let r = self.xi.norm();
        if r > 0.5 {
            1.0 / r.cosh().powi(2)
        } else {
            1.0 - self.zeta.norm_sqr()
        }
    }

    /// `cosh|xi| = 1/sqrt(rho)`.
    pub fn cosh_r(&self) -> f64 {
        self.xi.norm().cosh()
    }

    /// `sinh|xi| = |zeta| / sqrt(rho)`.
    pub fn sinh_r(&self) -> f64 {
        self.xi.norm().sinh()
    }

    pub fn is_identity(&self) -> bool {
        self.zeta == ZERO
    }

    /// The inverse squeeze `S(-xi)`.
    pub fn inverse(&self) -> Self {
        Self {
            xi: -self.xi,
            zeta: -self.zeta,
        }
    }
}

/// `zeta` for a squeeze label.
pub fn zeta_from_xi(xi: Complex64) -> SqueezeParams {
    SqueezeParams::from_xi(xi)
}

/// Coefficients of `Phi^xi_n` without its Gaussian factor, from the expanded
/// sum.
fn closed_coefficients(n: usize, q: &SqueezeParams) -> Vec<Complex64> {
    let rho = q.rho();
    let half_zb = -0.5 * q.zeta.conj();
    let ln_sqrt_nf = 0.5 * ln_factorial(n);
    let mut out = vec![ZERO; n + 1];
    let mut zpow = ONE;
    for m in 0..=n / 2 {
        let k = n - 2 * m;
        let mag = (ln_sqrt_nf - ln_factorial(m) - ln_factorial(k) + 0.5 * k as f64 * rho.ln()).exp();
        out[k] = zpow * mag * rho.powf(0.25);
        zpow *= half_zb;
    }
    out
}

/// `Phi^xi_n(z)` from the branch-free expanded sum.
pub fn squeezed_basis_closed(n: usize, q: &SqueezeParams, z: Complex64) -> Complex64 {
    squeezed_basis_closed_poly(n, q).evaluate(z)
}

/// `Phi^xi_n` as an exact function, from the expanded sum.
pub fn squeezed_basis_closed_poly(n: usize, q: &SqueezeParams) -> GaussPoly {
    GaussPoly::new(0.5 * q.zeta, ZERO, closed_coefficients(n, q))
}

/// `Phi^xi_0, ..., Phi^xi_{n_max}` at `z` by the recurrence
/// `g_{n+1} = (sqrt(rho) z g_n - conj(zeta) sqrt(n) g_{n-1}) / sqrt(n+1)`,
/// `Phi^xi_n = rho^(1/4) exp(zeta z^2/2) g_n`.
pub fn squeezed_basis_seq(n_max: usize, q: &SqueezeParams, z: Complex64) -> Vec<Complex64> {
    let rho = q.rho();
    let sr = rho.sqrt();
    let zb = q.zeta.conj();
    let mut g = Vec::with_capacity(n_max + 1);
    g.push(ONE);
    for k in 0..n_max {
        let mut next = sr * z * g[k];
        if k > 0 {
            next -= zb * (k as f64).sqrt() * g[k - 1];
        }
        g.push(next / ((k + 1) as f64).sqrt());
    }
    let front = rho.powf(0.25) * (0.5 * q.zeta * z * z).exp();
    g.into_iter().map(|v| front * v).collect()
}

/// `Phi^xi_n(z)` in the printed Hermite form
/// `rho^(1/4) exp(zeta z^2/2) conj(zeta)^(n/2) / sqrt(2^n n!) H_n(c z)`,
/// `c = sqrt(rho / (2 conj(zeta)))`, with `conj(zeta)^(1/2)` taken as
/// `branch` times the principal root. Both branches give the same value.
///
/// Falls back to `Phi_n` at `zeta = 0`.
pub fn squeezed_basis_branch(n: usize, q: &SqueezeParams, z: Complex64, branch: f64) -> Result<Complex64> {
    if q.is_identity() {
        return Ok(phi_seq(n, z)[n]);
    }
    let rho = q.rho();
    let root = branch.signum() * q.zeta.conj().sqrt();
    let c = (0.5 * rho).sqrt() / root;
    let h = hermite_rec(n, c * z)?;
    let scale = (-0.5 * (n as f64 * 2f64.ln() + ln_factorial(n))).exp();
    Ok(rho.powf(0.25) * (0.5 * q.zeta * z * z).exp() * root.powu(n as u32) * scale * h)
}

/// `Phi^xi_n` from the disentangled squeeze
/// `exp(zeta K+) exp(ln(rho) K0) exp(-conj(zeta) K-)` acting on
/// `z^n / sqrt(n!)`: a heat step with `gamma = -conj(zeta)/2`, the scaling
/// `z^k -> rho^((k + 1/2)/2) z^k`, then multiplication by `exp(zeta z^2 / 2)`.
pub fn squeezed_basis_disentangle(n: usize, q: &SqueezeParams) -> GaussPoly {
    let rho = q.rho();
    GaussPoly::monomial(n, Complex64::new((-0.5 * ln_factorial(n)).exp(), 0.0))
        .heat_apply(-0.5 * q.zeta.conj())
        .expect("monomials are pure polynomials")
        .scale_by_degree(|k| Complex64::new(rho.powf(0.5 * (k as f64 + 0.5)), 0.0))
        .gauss_multiply(0.5 * q.zeta)
}

/// Truncated `S(xi)` in the basis `Phi_0, ..., Phi_{dim-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    pub dim: usize,
    pub entries: DMatrix<Complex64>,
}

impl FockMatrix {
    /// Column `n` restricted to its first `len` rows: the `Phi_k` coefficients
    /// of `Phi^xi_n`.
    pub fn column(&self, n: usize, len: usize) -> Vec<Complex64> {
        (0..len).map(|k| self.entries[(k, n)]).collect()
    }

    /// `max |(M^H M - I)_{jk}|` over the leading `len x len` block.
    pub fn unitarity_defect(&self, len: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..len {
            for k in 0..len {
                let v: Complex64 = (0..self.dim)
                    .map(|i| self.entries[(i, j)].conj() * self.entries[(i, k)])
                    .sum();
                let target = if j == k { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// `K+` on `dim` Fock states: `(K+)_{n+2, n} = sqrt((n+1)(n+2))/2`.
pub fn k_plus(dim: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for n in 0..dim.saturating_sub(2) {
        m[(n + 2, n)] = Complex64::new((((n + 1) * (n + 2)) as f64).sqrt() / 2.0, 0.0);
    }
    m
}

/// Matrix exponential by scaling and squaring around a Taylor series.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = a.nrows();
    let norm = (0..dim)
        .map(|j| (0..dim).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(squarings));
    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        if term.iter().all(|v| v.norm() < 1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(xi K+ - conj(xi) K-)` on `n_max + 1 + buffer` Fock states.
pub fn fock_squeeze_matrix(xi: Complex64, n_max: usize, buffer: usize) -> FockMatrix {
    let dim = n_max + 1 + buffer;
    let kp = k_plus(dim);
    let km = kp.transpose();
    let generator = kp * xi - km * xi.conj();
    FockMatrix {
        dim,
        entries: expm(&generator),
    }
}

/// `Phi_k` coefficients of an entire function: Taylor coefficients times
/// `sqrt(k!)`.
pub fn fock_coefficients(f: &GaussPoly, len: usize) -> Vec<Complex64> {
    f.taylor_coefficients(len)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c * (0.5 * ln_factorial(k)).exp())
        .collect()
}

/// Deviations of the squeezed basis routes for `n <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeWayReport {
    /// Closed form vs disentangled pipeline on the comparison grid.
    pub closed_vs_disentangle: f64,
    /// Closed-form `Phi_k` coefficients vs Fock columns.
    pub closed_vs_fock: f64,
    /// Disentangled `Phi_k` coefficients vs Fock columns.
    pub disentangle_vs_fock: f64,
    pub buffer: usize,
}

/// Compares the three squeezed-basis routes for `n <= n_max`.
pub fn three_way(q: &SqueezeParams, n_max: usize, buffer: usize, radius: f64) -> ThreeWayReport {
    let fock = fock_squeeze_matrix(q.xi, n_max, buffer);
    let len = n_max + 1;
    let mut report = ThreeWayReport {
        closed_vs_disentangle: 0.0,
        closed_vs_fock: 0.0,
        disentangle_vs_fock: 0.0,
        buffer,
    };
    for n in 0..=n_max {
        let closed = squeezed_basis_closed_poly(n, q);
        let dis = squeezed_basis_disentangle(n, q);
        let cmp = crate::gausspoly::equal_on_grid(&closed, &dis, radius, 0.0);
        report.closed_vs_disentangle = report.closed_vs_disentangle.max(cmp.max_deviation);
        let col = fock.column(n, len);
        let max_gap = |f: &GaussPoly| {
            fock_coefficients(f, len)
                .iter()
                .zip(&col)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        report.closed_vs_fock = report.closed_vs_fock.max(max_gap(&closed));
        report.disentangle_vs_fock = report.disentangle_vs_fock.max(max_gap(&dis));
    }
    report
}

/// `max |M_30 - M_50|` over the leading block: how far the buffer-30 columns
/// are from converged.
pub fn fock_buffer_drift(xi: Complex64, n_max: usize, buffer: usize, reference: usize) -> f64 {
    let a = fock_squeeze_matrix(xi, n_max, buffer);
    let b = fock_squeeze_matrix(xi, n_max, reference);
    let mut worst: f64 = 0.0;
    for j in 0..=n_max {
        for i in 0..=n_max {
            worst = worst.max((a.entries[(i, j)] - b.entries[(i, j)]).norm());
        }
    }
    worst
}

/// Kernel of `S(xi)`:
/// `rho^(1/4) exp((zeta z^2 - conj(zeta) conj(w)^2)/2) exp(sqrt(rho) z conj(w))`.
pub fn squeeze_kernel(q: &SqueezeParams, z: Complex64, w: Complex64) -> Complex64 {
    let rho = q.rho();
    let wb = w.conj();
    rho.powf(0.25) * (0.5 * (q.zeta * z * z - q.zeta.conj() * wb * wb) + rho.sqrt() * z * wb).exp()
}

/// `sum_{n<=N} Phi^xi_n(z) conj(Phi_n(w))`, which sums to the squeeze kernel.
pub fn squeeze_kernel_partial(q: &SqueezeParams, z: Complex64, w: Complex64, n: usize) -> Complex64 {
    let a = squeezed_basis_seq(n, q, z);
    let b = phi_seq(n, w);
    compensated_sum(a.iter().zip(&b).map(|(x, y)| x * y.conj()))
}

/// `sum_{n<=N} Phi^xi_n(z) conj(Phi^xi_n(w))`; equals `exp(z conj w)` in the
/// limit for every `xi`.
pub fn squeezed_reproducing_partial(q: &SqueezeParams, z: Complex64, w: Complex64, n: usize) -> Complex64 {
    let a = squeezed_basis_seq(n, q, z);
    let b = squeezed_basis_seq(n, q, w);
    compensated_sum(a.iter().zip(&b).map(|(x, y)| x * y.conj()))
}

/// Relative gap between the partial reproducing sum and `exp(z conj w)`.
pub fn xi_invariance_gap(q: &SqueezeParams, z: Complex64, w: Complex64, n: usize) -> f64 {
    rel_diff(squeezed_reproducing_partial(q, z, w, n), (z * w.conj()).exp())
}

/// Representation used by [`squeezed_cs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CsMode {
    /// `exp(-|w|^2/2) sum (conj(w)^n / sqrt(n!)) Phi^xi_n(z)`.
    SqueezedSeries,
    /// `exp(-|w|^2/2) sum conj(Phi^{-xi}_n(w)) Phi_n(z)`.
    InverseSeries,
    /// `exp(-|w|^2/2) S^xi(z, conj w)`.
    Kernel,
}

impl CsMode {
    pub fn name(&self) -> &'static str {
        match self {
            CsMode::SqueezedSeries => "SQUEEZED_SERIES",
            CsMode::InverseSeries => "INVERSE_SERIES",
            CsMode::Kernel => "KERNEL",
        }
    }
}

impl std::str::FromStr for CsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SQUEEZED_SERIES" => Ok(CsMode::SqueezedSeries),
            "INVERSE_SERIES" => Ok(CsMode::InverseSeries),
            "KERNEL" => Ok(CsMode::Kernel),
            other => Err(Error::Domain(format!(
                "unknown mode {other:?}; expected SQUEEZED_SERIES, INVERSE_SERIES or KERNEL"
            ))),
        }
    }
}

/// Squeezed coherent state `S(xi) eta_{conj w}` evaluated at `z`. `n` is the
/// truncation of the series modes and is ignored by `Kernel`.
pub fn squeezed_cs(q: &SqueezeParams, w: Complex64, z: Complex64, n: usize, mode: CsMode) -> Complex64 {
    let front = (-0.5 * w.norm_sqr()).exp();
    let sum = match mode {
        CsMode::SqueezedSeries => {
            let a = phi_seq(n, w);
            let b = squeezed_basis_seq(n, q, z);
            compensated_sum(a.iter().zip(&b).map(|(x, y)| x.conj() * y))
        }
        CsMode::InverseSeries => {
            let a = squeezed_basis_seq(n, &q.inverse(), w);
            let b = phi_seq(n, z);
            compensated_sum(a.iter().zip(&b).map(|(x, y)| x.conj() * y))
        }
        CsMode::Kernel => squeeze_kernel(q, z, w),
    };
    front * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderSign {
    Minus,
    Plus,
}

/// `a^-_xi = (d/dz - zeta z)/sqrt(rho)`, `a^+_xi = (z - conj(zeta) d/dz)/sqrt(rho)`.
pub fn squeezed_ladder_apply(sign: LadderSign, q: &SqueezeParams, f: &GaussPoly) -> GaussPoly {
    let inv = Complex64::new(1.0 / q.rho().sqrt(), 0.0);
    let out = match sign {
        LadderSign::Minus => f.differentiate().axpy_same(-q.zeta, &f.mul_z()),
        LadderSign::Plus => f.mul_z().axpy_same(-q.zeta.conj(), &f.differentiate()),
    };
    out.scale(inv)
}

/// `(a^+_xi)^n Phi^xi_0 / sqrt(n!)`.
pub fn rodrigues_squeezed(n: usize, q: &SqueezeParams) -> GaussPoly {
    let mut f = squeezed_basis_closed_poly(0, q);
    for _ in 0..n {
        f = squeezed_ladder_apply(LadderSign::Plus, q, &f);
    }
    f.scale(Complex64::new((-0.5 * ln_factorial(n)).exp(), 0.0))
}

/// Both sides of
/// `H_n(c z) = (2/(conj(zeta) rho))^(n/2) exp(-zeta z^2/2) (z - conj(zeta) d/dz)^n exp(zeta z^2/2)`,
/// `c = sqrt(rho/(2 conj(zeta)))`, with one consistent branch of
/// `conj(zeta)^(1/2)`. Needs `zeta != 0`.
pub fn rodrigues_squeezed_hermite(n: usize, q: &SqueezeParams, z: Complex64) -> Result<(Complex64, Complex64)> {
    if q.is_identity() {
        return Err(Error::Domain(
            "the Hermite-side squeezed Rodrigues identity needs zeta != 0".into(),
        ));
    }
    let rho = q.rho();
    let root = q.zeta.conj().sqrt();
    let c = (0.5 * rho).sqrt() / root;
    let lhs = hermite_rec(n, c * z)?;
    let mut f = GaussPoly::gaussian(0.5 * q.zeta);
    for _ in 0..n {
        f = f.mul_z().axpy_same(-q.zeta.conj(), &f.differentiate());
    }
    let front = ((2.0 / rho).sqrt() / root).powu(n as u32);
    let rhs = front * (-0.5 * q.zeta * z * z).exp() * f.evaluate(z);
    Ok((lhs, rhs))
}

/// Residuals of the dilation relation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationResiduals {
    /// `exp(-d^2 |w|^2) |Phi^xi_n(d w)|^2`, `d^2 = 2 zeta / rho`.
    pub lhs: f64,
    /// `kappa^2 |H_{s,n}(w)|^2`.
    pub rhs_h: f64,
    /// `kappa~^2 |h_{s,n}(w)|^2`.
    pub rhs_small_h: f64,
    pub residual_h: f64,
    pub residual_small_h: f64,
    /// Gap between the two right-hand sides.
    pub rhs_gap: f64,
}

/// Dilation relation at `zeta = (1-s)/(1+s)`.
///
/// The dilation `z -> d w` is applied to both the holomorphic factor and its
/// conjugate, so `|z|^2` becomes `d^2 |w|^2`.
pub fn dilation_check(p: &ModelParams, n: usize, w: Complex64) -> DilationResiduals {
    let q = SqueezeParams::from_zeta(Complex64::new(p.epsilon(), 0.0))
        .expect("epsilon lies in (0, 1)");
    let d = (2.0 * p.epsilon() / q.rho()).sqrt();
    let phi = squeezed_basis_seq(n, &q, d * w)[n];
    let lhs = (-d * d * w.norm_sqr()).exp() * phi.norm_sqr();
    let kappa_sq = crate::coherent::kappa(p, w).powi(2);
    let kappa_t_sq = crate::coherent::kappa_tilde(p, w).powi(2);
    let rhs_h = kappa_sq * hsn_seq(n, p, w)[n].norm_sqr();
    let rhs_small_h = kappa_t_sq * hsn_small_seq(n, p, w)[n].norm_sqr();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    DilationResiduals {
        lhs,
        rhs_h,
        rhs_small_h,
        residual_h: rel(lhs, rhs_h),
        residual_small_h: rel(lhs, rhs_small_h),
        rhs_gap: rel(rhs_h, rhs_small_h),
    }
}

/// [`dilation_check`] addressed by squeeze parameters; `zeta` must be real
/// and positive.
pub fn dilation_check_squeezed(q: &SqueezeParams, n: usize, w: Complex64) -> Result<DilationResiduals> {
    let z = q.zeta();
    if z.im != 0.0 || z.re.is_nan() || z.re <= 0.0 {
        return Err(Error::Domain(format!(
            "the dilation relation ties zeta to s = (1-zeta)/(1+zeta) and needs real zeta in (0, 1), got {z}"
        )));
    }
    let p = ModelParams::new((1.0 - z.re) / (1.0 + z.re))?;
    Ok(dilation_check(&p, n, w))
}

/// `P(n, z, xi) = exp(-|z|^2) |Phi^xi_n(z)|^2`.
pub fn squeezed_pmf(n: usize, q: &SqueezeParams, z: Complex64) -> f64 {
    (-z.norm_sqr()).exp() * squeezed_basis_seq(n, q, z)[n].norm_sqr()
}

/// A probability table summed until its tail is negligible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfTable {
    pub probabilities: Vec<f64>,
    pub total: f64,
    pub mean: f64,
    /// Bound on the mass beyond the last entry.
    pub tail_bound: f64,
}

impl PmfTable {
    pub(crate) fn from_probabilities(probabilities: Vec<f64>, tail_bound: f64) -> Self {
        let total = compensated_sum(probabilities.iter().map(|&p| Complex64::new(p, 0.0))).re;
        let mean = compensated_sum(
            probabilities
                .iter()
                .enumerate()
                .map(|(n, &p)| Complex64::new(n as f64 * p, 0.0)),
        )
        .re;
        Self {
            probabilities,
            total,
            mean,
            tail_bound,
        }
    }

    /// `n,probability` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,probability\n");
        for (n, p) in self.probabilities.iter().enumerate() {
            let _ = writeln!(out, "{n},{p:.16e}");
        }
        out
    }
}

/// Hard cap on adaptive tables.
pub const MAX_PMF_TERMS: usize = 4000;

/// Squeezed photon statistics summed until the tail is below `tail_tol`.
///
/// Past the mean the terms of each parity decay at least geometrically with
/// ratio close to `|zeta|`; the tail is bounded by the last two terms over
/// `1 - |zeta|`, and summation stops once that bound and the ratio both hold.
pub fn squeezed_pmf_table(q: &SqueezeParams, z: Complex64, tail_tol: f64) -> Result<PmfTable> {
    let r = q.xi.norm();
    let mean_guess = z.norm_sqr() * (2.0 * r).exp() + q.sinh_r().powi(2);
    let ratio_cap = 0.5 * (1.0 + q.zeta.norm());
    let front = (-z.norm_sqr()).exp();
    let rho = q.rho();
    let (sr, zb) = (rho.sqrt(), q.zeta.conj());
    let pre = rho.powf(0.25) * (0.5 * q.zeta * z * z).exp();
    let mut probs = Vec::new();
    let (mut g_prev, mut g) = (ZERO, ONE);
    for n in 0..MAX_PMF_TERMS {
        let p = front * (pre * g).norm_sqr();
        probs.push(p);
        if n >= 2 && (n as f64) > mean_guess {
            let last_two = probs[n] + probs[n - 1];
            let earlier = probs[n - 1] + probs[n - 2];
            let decaying = earlier == 0.0 || last_two <= ratio_cap * earlier;
            let tail = last_two / (1.0 - ratio_cap);
            if decaying && tail < tail_tol {
                return Ok(PmfTable::from_probabilities(probs, tail));
            }
        }
        let next = (sr * z * g - zb * (n as f64).sqrt() * g_prev) / ((n + 1) as f64).sqrt();
        g_prev = g;
        g = next;
    }
    let tail = probs[MAX_PMF_TERMS - 1] + probs[MAX_PMF_TERMS - 2];
    Err(Error::Truncation {
        n: MAX_PMF_TERMS,
        tail,
        limit: tail_tol,
    })
}
