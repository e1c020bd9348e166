//! Tensor Gauss-Hermite quadrature for the planar Gaussian measures, inner
//! products, Gram matrices and resolution-of-identity checks.
//!
//! Inner products follow the convention linear in the first argument:
//! `<f, g> = sum_nodes weight * f(z) * conj(g(z))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

pub use crate::gausspoly::Evaluate;
use crate::gausspoly::GaussPoly;
use crate::hermite::{hsn_seq, phi_seq, ModelParams};
use crate::numeric::CompensatedSum;
use crate::squeeze::{squeezed_basis_seq, SqueezeParams};
use crate::{Error, Result};

/// Order used when callers do not pick one.
pub const DEFAULT_ORDER: usize = 80;

/// One-dimensional Gauss-Hermite rule for `int exp(-t^2) g(t) dt`, nodes
/// ascending.
///
/// Roots are found by Newton iteration on the orthonormal Hermite recurrence,
/// which keeps the weights accurate in the relative sense even where they
/// underflow towards 1e-300.
pub fn gauss_hermite(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1, "Gauss-Hermite order must be positive");
    let n = order;
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let mut rule: Vec<(f64, f64)> = x.into_iter().zip(w).collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// The planar measures of the three function spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Measure {
    /// `exp(-(1-s)x^2 - (1/s - 1)y^2) dx dy`.
    HsHol(ModelParams),
    /// `pi^-1 exp(-|z|^2) dx dy`.
    Bargmann,
    /// `exp(s x^2 - y^2/s) dx dy`.
    XsHol(ModelParams),
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::HsHol(_) => "HS_HOL",
            Measure::Bargmann => "BARGMANN",
            Measure::XsHol(_) => "XS_HOL",
        }
    }

    /// Total mass, where finite.
    pub fn total_mass(&self) -> Option<f64> {
        match self {
            Measure::HsHol(p) => Some(p.total_mass()),
            Measure::Bargmann => Some(1.0),
            Measure::XsHol(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

impl Node {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<Node>,
    pub order: usize,
    pub measure: Measure,
}

/// Nodes for `mass * exp(-ax x^2 - ay y^2) dx dy`, `ax, ay > 0`, x-major.
pub(crate) fn tensor_nodes(ax: f64, ay: f64, mass: f64, order: usize) -> Vec<Node> {
    let rule = gauss_hermite(order);
    let (sx, sy) = (ax.sqrt(), ay.sqrt());
    let scale = mass / (sx * sy);
    rule.iter()
        .flat_map(|&(u, wu)| {
            rule.iter().map(move |&(v, wv)| Node {
                x: u / sx,
                y: v / sy,
                weight: wu * wv * scale,
            })
        })
        .collect()
}

/// Tensor Gauss-Hermite grid with `order^2` nodes for `measure`.
///
/// `XS_HOL` is refused: its weight grows along the real axis. Inner products
/// there go through [`inner_product_xs`].
pub fn build_grid(measure: Measure, order: usize) -> Result<QuadratureGrid> {
    if order < 2 {
        return Err(Error::Range {
            name: "order",
            value: order as f64,
            expected: "quadrature order >= 2",
        });
    }
    let nodes = match measure {
        Measure::HsHol(p) => tensor_nodes(1.0 - p.s(), 1.0 / p.s() - 1.0, 1.0, order),
        Measure::Bargmann => tensor_nodes(1.0, 1.0, 1.0 / PI, order),
        Measure::XsHol(_) => return Err(Error::UnquadrableMeasure("XS_HOL")),
    };
    Ok(QuadratureGrid {
        nodes,
        order,
        measure,
    })
}

impl QuadratureGrid {
    pub fn total_weight(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for n in &self.nodes {
            acc.add(Complex64::new(n.weight, 0.0));
        }
        acc.total().re
    }

    /// `sum weight * integrand(z)` in node order with compensation.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, integrand: F) -> Complex64 {
        integrate_nodes(&self.nodes, |_, z| integrand(z))
    }
}

/// `sum weight * integrand(index, z)` over `nodes` in order.
pub(crate) fn integrate_nodes<F: FnMut(usize, Complex64) -> Complex64>(
    nodes: &[Node],
    mut integrand: F,
) -> Complex64 {
    let mut acc = CompensatedSum::new();
    for (i, n) in nodes.iter().enumerate() {
        acc.add(n.weight * integrand(i, n.z()));
    }
    acc.total()
}

/// `<f, g> = sum weight f(z) conj(g(z))`.
pub fn inner_product(f: &impl Evaluate, g: &impl Evaluate, grid: &QuadratureGrid) -> Complex64 {
    grid.integrate(|z| f.eval(z) * g.eval(z).conj())
}

const MINUS_HALF: Complex64 = Complex64::new(-0.5, 0.0);

fn check_xs_factor(f: &GaussPoly) -> Result<()> {
    if f.alpha() == MINUS_HALF || f.coeffs().is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "X_s inner products need the exp(-z^2/2) factor (alpha = -1/2), got alpha = {}",
            f.alpha()
        )))
    }
}

/// Inner product in `X_s` for `f = exp(-z^2/2) F`, `g = exp(-z^2/2) G`.
///
/// `|exp(-z^2/2)|^2 exp(s x^2 - y^2/s)` is exactly the `HS_HOL` weight, so the
/// integral is `<F, G>` over that measure.
pub fn inner_product_xs(
    f: &GaussPoly,
    g: &GaussPoly,
    p: &ModelParams,
    order: usize,
) -> Result<Complex64> {
    let grid = build_grid(Measure::HsHol(*p), order)?;
    inner_product_xs_on(f, g, &grid)
}

/// As [`inner_product_xs`] on a prebuilt `HS_HOL` grid.
pub fn inner_product_xs_on(
    f: &GaussPoly,
    g: &GaussPoly,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    check_xs_factor(f)?;
    check_xs_factor(g)?;
    if !matches!(grid.measure, Measure::HsHol(_)) {
        return Err(Error::IncompatibleMeasure {
            family: "X_s functions",
            measure: grid.measure.name(),
        });
    }
    let fr = f.gauss_multiply(-MINUS_HALF);
    let gr = g.gauss_multiply(-MINUS_HALF);
    Ok(inner_product(&fr, &gr, grid))
}

/// Orthonormal families whose Gram matrices can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BasisFamily {
    /// `H_{s,n}` over `HS_HOL`.
    Hsn,
    /// `h_{s,n}` over `X_s`, reduced onto an `HS_HOL` grid.
    HsnSmall,
    /// `Phi_n = z^n / sqrt(n!)` over `BARGMANN`.
    Phi,
    /// `Phi^xi_n` over `BARGMANN`.
    Squeezed(SqueezeParams),
}

impl BasisFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BasisFamily::Hsn => "HSN",
            BasisFamily::HsnSmall => "HSN_SMALL",
            BasisFamily::Phi => "PHI",
            BasisFamily::Squeezed(_) => "SQUEEZED",
        }
    }

    /// Values of members `0..=n_max` at `z`, in the form the matching grid
    /// integrates (the `h_{s,n}` come without their Gaussian factor).
    fn values(&self, measure: &Measure, n_max: usize, z: Complex64) -> Vec<Complex64> {
        match (self, measure) {
            (BasisFamily::Hsn | BasisFamily::HsnSmall, Measure::HsHol(p)) => hsn_seq(n_max, p, z),
            (BasisFamily::Squeezed(q), _) => squeezed_basis_seq(n_max, q, z),
            _ => phi_seq(n_max, z),
        }
    }

    fn check(&self, measure: &Measure) -> Result<()> {
        let ok = matches!(
            (self, measure),
            (BasisFamily::Hsn | BasisFamily::HsnSmall, Measure::HsHol(_))
                | (BasisFamily::Phi | BasisFamily::Squeezed(_), Measure::Bargmann)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleMeasure {
                family: self.name(),
                measure: measure.name(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub family: &'static str,
    pub measure: &'static str,
    pub order: usize,
    /// `matrix[m][n] = <e_m, e_n>`.
    pub matrix: Vec<Vec<Complex64>>,
    pub max_offdiag: f64,
    pub max_diag_dev: f64,
}

impl GramReport {
    fn from_matrix(
        family: &'static str,
        measure: &'static str,
        order: usize,
        matrix: Vec<Vec<Complex64>>,
    ) -> Self {
        let mut max_offdiag: f64 = 0.0;
        let mut max_diag_dev: f64 = 0.0;
        for (m, row) in matrix.iter().enumerate() {
            for (n, v) in row.iter().enumerate() {
                if m == n {
                    max_diag_dev = max_diag_dev.max((v - 1.0).norm());
                } else {
                    max_offdiag = max_offdiag.max(v.norm());
                }
            }
        }
        Self {
            family,
            measure,
            order,
            matrix,
            max_offdiag,
            max_diag_dev,
        }
    }

    /// `max |G_mn - delta_mn|`.
    pub fn max_deviation(&self) -> f64 {
        self.max_offdiag.max(self.max_diag_dev)
    }

    /// `max |G_mn - conj(G_nm)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, row) in self.matrix.iter().enumerate() {
            for (n, v) in row.iter().enumerate() {
                worst = worst.max((v - self.matrix[n][m].conj()).norm());
            }
        }
        worst
    }

    /// `row,col,re,im` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (m, row) in self.matrix.iter().enumerate() {
            for (n, v) in row.iter().enumerate() {
                let _ = writeln!(out, "{m},{n},{:.16e},{:.16e}", v.re, v.im);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "measure": self.measure,
            "order": self.order,
            "matrix": self.matrix.iter()
                .map(|row| row.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "max_offdiag": self.max_offdiag,
            "max_diag_dev": self.max_diag_dev,
        })
    }
}

/// Gram matrix of members `0..=n_max` of `family` on `grid`.
pub fn gram_matrix(
    family: BasisFamily,
    n_max: usize,
    grid: &QuadratureGrid,
) -> Result<GramReport> {
    if n_max < 1 {
        return Err(Error::Range {
            name: "N",
            value: n_max as f64,
            expected: "N >= 1",
        });
    }
    family.check(&grid.measure)?;
    let table: Vec<Vec<Complex64>> = grid
        .nodes
        .iter()
        .map(|node| family.values(&grid.measure, n_max, node.z()))
        .collect();
    let dim = n_max + 1;
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (m, row) in matrix.iter_mut().enumerate() {
        for (n, entry) in row.iter_mut().enumerate() {
            let mut acc = CompensatedSum::new();
            for (node, vals) in grid.nodes.iter().zip(&table) {
                acc.add(node.weight * vals[m] * vals[n].conj());
            }
            *entry = acc.total();
        }
    }
    Ok(GramReport::from_matrix(
        family.name(),
        grid.measure.name(),
        grid.order,
        matrix,
    ))
}

/// Completeness in Gram form: the weak resolution of the identity
/// `<e_m, (int eta_z (x) eta_z dmu) e_n> = delta_mn` reduces to the Gram
/// identity of the coefficient functions. Returns `max |G_mn - delta_mn|`.
pub fn resolution_check(family: BasisFamily, n_max: usize, grid: &QuadratureGrid) -> Result<f64> {
    Ok(gram_matrix(family, n_max, grid)?.max_deviation())
}
