use std::fmt::Write as _;

use clap::ValueEnum;
use cxhermite::coherent::{eigenvalue_residual, ladder_apply, poisson_pmf, poisson_table, Ladder};
use cxhermite::gausspoly::equal_on_grid;
use cxhermite::hermite::{
    hermite_sum, hsn_poly, hsn_small, hsn_small_poly, kernel_ks, phi, phi_poly, phi_seq,
    rodrigues_hermite, KernelMode,
};
use cxhermite::numeric::{compensated_sum, rel_diff};
use cxhermite::quadrature::{build_grid, gram_matrix, BasisFamily, Measure};
use cxhermite::squeeze::{
    dilation_check, rodrigues_squeezed, rodrigues_squeezed_hermite, squeezed_basis_branch,
    squeezed_basis_closed_poly, squeezed_cs, squeezed_ladder_apply,
    squeezed_pmf, squeezed_pmf_table, three_way, xi_invariance_gap, CsMode, LadderSign,
};
use cxhermite::transforms::{generating_gap, resolve_bargmann_weight, verify_a_identity, Transformer, RESOLVED_WEIGHT};
use cxhermite::{Complex64, GaussPoly};
use serde::Serialize;
use serde_json::{json, Value};

use crate::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Orthogonality,
    Kernels,
    Transforms,
    Eigenfunction,
    Squeeze,
    Dual,
    Rodrigues,
    Pmf,
    Ladders,
}

impl Suite {
    /// Order in which `all` runs the suites.
    const ORDER: [Suite; 9] = [
        Suite::Orthogonality,
        Suite::Kernels,
        Suite::Transforms,
        Suite::Eigenfunction,
        Suite::Squeeze,
        Suite::Dual,
        Suite::Rodrigues,
        Suite::Pmf,
        Suite::Ladders,
    ];

    pub fn name(&self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub params: Value,
    /// `None` when the check could not be evaluated; it then fails.
    pub residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerifyReport {
    /// `id,residual,tol,pass`; a missing residual is an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,residual,tol,pass\n");
        for c in &self.checks {
            let r = c.residual.map(|r| format!("{r:.16e}")).unwrap_or_default();
            let _ = writeln!(out, "{},{r},{:.16e},{}", c.id, c.tol, c.pass);
        }
        out
    }
}

struct Checks<'a> {
    cfg: &'a RunConfig,
    out: Vec<Check>,
}

impl<'a> Checks<'a> {
    /// Records a residual against `min(default_tol, --tol)`.
    fn push(&mut self, id: &str, params: Value, residual: cxhermite::Result<f64>, default_tol: f64) {
        let tol = default_tol.min(self.cfg.tol);
        let (residual, params) = match residual {
            Ok(r) if r.is_finite() => (Some(r), params),
            Ok(r) => (None, with(params, "error", json!(format!("residual is {r}")))),
            Err(e) => (None, with(params, "error", json!(e.to_string()))),
        };
        let pass = residual.is_some_and(|r| r <= tol);
        self.out.push(Check { id: id.to_string(), params, residual, tol, pass });
    }
}

fn with(mut params: Value, key: &str, v: Value) -> Value {
    if let Value::Object(m) = &mut params {
        m.insert(key.to_string(), v);
    }
    params
}

fn pair(v: Complex64) -> Value {
    json!([v.re, v.im])
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sqrt_c(k: usize) -> Complex64 {
    c((k as f64).sqrt(), 0.0)
}

/// Fixed sample points plus the configured `z` and `w`.
fn sample(cfg: &RunConfig) -> Vec<Complex64> {
    vec![c(0.0, 0.0), c(0.5, 0.3), c(-0.4, 0.6), c(0.2, -0.9), cfg.z, cfg.w]
}

/// Largest `equal_on_grid` deviation over pairs, radius 2.
fn worst_pair(pairs: &[(GaussPoly, GaussPoly)]) -> f64 {
    pairs
        .iter()
        .map(|(f, g)| equal_on_grid(f, g, 2.0, 0.0).max_deviation)
        .fold(0.0, f64::max)
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> VerifyReport {
    let mut checks = Checks { cfg, out: Vec::new() };
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::ORDER.to_vec(),
        one => vec![one],
    };
    for s in suites {
        match s {
            Suite::Orthogonality => orthogonality(&mut checks),
            Suite::Kernels => kernels(&mut checks),
            Suite::Transforms => transforms(&mut checks),
            Suite::Eigenfunction => eigenfunction(&mut checks),
            Suite::Squeeze => squeeze(&mut checks),
            Suite::Dual => dual(&mut checks),
            Suite::Rodrigues => rodrigues(&mut checks),
            Suite::Pmf => pmf(&mut checks),
            Suite::Ladders => ladders(&mut checks),
            Suite::All => unreachable!(),
        }
    }
    let pass = checks.out.iter().all(|c| c.pass);
    VerifyReport { suite: suite.name(), checks: checks.out, pass }
}

fn orthogonality(ch: &mut Checks) {
    let cfg = ch.cfg;
    let p = cfg.params;
    for (id, family, measure) in [
        ("orthogonality.hsn", BasisFamily::Hsn, Measure::HsHol(p)),
        ("orthogonality.hsn_small", BasisFamily::HsnSmall, Measure::HsHol(p)),
        ("orthogonality.phi", BasisFamily::Phi, Measure::Bargmann),
    ] {
        let r = build_grid(measure, cfg.quad_order)
            .and_then(|g| gram_matrix(family, cfg.n_max, &g))
            .map(|g| g.max_deviation());
        let params = json!({"s": p.s(), "n_max": cfg.n_max, "quad_order": cfg.quad_order});
        ch.push(id, params, r, 1e-8);
    }
}

fn kernels(ch: &mut Checks) {
    let cfg = ch.cfg;
    let p = cfg.params;
    let pts = sample(cfg);
    let n = 60;
    let mut hs: f64 = 0.0;
    let mut bargmann: f64 = 0.0;
    for &z in &pts {
        for &w in &pts {
            let closed = kernel_ks(&p, z, w, KernelMode::Closed);
            hs = hs.max((kernel_ks(&p, z, w, KernelMode::Series(n)) - closed).norm() / closed.norm());
            let (a, b) = (phi_seq(n, z), phi_seq(n, w));
            let partial = compensated_sum(a.iter().zip(&b).map(|(x, y)| x * y.conj()));
            bargmann = bargmann.max(rel_diff(partial, (z * w.conj()).exp()));
        }
    }
    let params = json!({"s": p.s(), "n": n, "z": pair(cfg.z), "w": pair(cfg.w)});
    ch.push("kernels.hs_series", params.clone(), Ok(hs), 1e-8);
    ch.push("kernels.bargmann_series", params, Ok(bargmann), 1e-8);
}

fn transforms(ch: &mut Checks) {
    let cfg = ch.cfg;
    let p = cfg.params;
    let pts = sample(cfg);
    let mut gap: f64 = 0.0;
    for &z in &pts {
        for &w in &pts {
            gap = gap.max(generating_gap(&p, z, w, 50));
        }
    }
    ch.push("transforms.generating", json!({"s": p.s(), "n": 50}), Ok(gap), 1e-9);

    let params = json!({"s": p.s(), "quad_order": cfg.quad_order});
    let r = pts.iter().zip(pts.iter().rev()).try_fold(0.0f64, |acc, (&z, &w)| {
        Ok::<_, cxhermite::Error>(acc.max(verify_a_identity(&p, z, w, cfg.quad_order)?))
    });
    ch.push("transforms.a_reproducing", params.clone(), r, 1e-8);

    let t = match Transformer::new(&p, cfg.quad_order) {
        Ok(t) => t,
        Err(e) => {
            ch.push("transforms.a_maps_h_to_phi", params, Err(e), 1e-7);
            return;
        }
    };
    let r = (0..=cfg.n_max).try_fold(0.0f64, |acc, n| {
        let h = hsn_small_poly(n, &p);
        pts.iter().try_fold(acc, |acc, &z| Ok::<_, cxhermite::Error>(acc.max((t.apply_a(&h, z)? - phi(n, z)).norm())))
    });
    let params = with(params, "n_max", json!(cfg.n_max));
    ch.push("transforms.a_maps_h_to_phi", params.clone(), r, 1e-7);

    let mut w_err: f64 = 0.0;
    for n in 0..=cfg.n_max {
        let f = phi_poly(n);
        for &w in &pts {
            w_err = w_err.max((t.apply_w(&f, w) - hsn_small(n, &p, w)).norm());
        }
    }
    let params = with(params, "weight", json!(RESOLVED_WEIGHT.label()));
    ch.push("transforms.w_maps_phi_to_h", params, Ok(w_err), 1e-7);

    let weights = resolve_bargmann_weight(&p, cfg.quad_order, cfg.n_max.min(4), &pts[..3]);
    match weights {
        Ok(reports) => {
            let resolved = reports.iter().find(|r| r.resolved).expect("one weight is resolved");
            let rejected = reports.iter().find(|r| !r.resolved).expect("one weight is rejected");
            let params = json!({
                "s": p.s(),
                "weight": resolved.label,
                "rejected_weight": rejected.label,
                "rejected_residual": rejected.residual,
            });
            ch.push("transforms.weight_resolution", params, Ok(resolved.residual), 1e-7);
        }
        Err(e) => ch.push("transforms.weight_resolution", json!({"s": p.s()}), Err(e), 1e-7),
    }

    // Nested quadrature is quadratic in the node count; a fixed order keeps it cheap.
    let nested = 40;
    let top = cfg.n_max.min(6);
    let trip_pts = [c(0.2, -0.3), c(-1.0, 0.6), cfg.z];
    let params = json!({"s": p.s(), "quad_order": nested, "n_max": top, "weight": RESOLVED_WEIGHT.label()});
    let r = Transformer::new(&p, nested).and_then(|t| {
        let mut aw: f64 = 0.0;
        let mut wa: f64 = 0.0;
        for n in 0..=top {
            for (&z, v) in trip_pts.iter().zip(t.a_after_w(&phi_poly(n), &trip_pts)) {
                aw = aw.max((v - phi(n, z)).norm());
            }
            for (&w, v) in trip_pts.iter().zip(t.w_after_a(&hsn_small_poly(n, &p), &trip_pts)?) {
                wa = wa.max((v - hsn_small(n, &p, w)).norm());
            }
        }
        Ok((aw, wa))
    });
    ch.push("transforms.a_after_w", params.clone(), r.clone().map(|x| x.0), 1e-6);
    ch.push("transforms.w_after_a", params, r.map(|x| x.1), 1e-6);
}

fn eigenfunction(ch: &mut Checks) {
    let cfg = ch.cfg;
    let p = cfg.params;
    for row in 1..=3u8 {
        let r = [c(0.0, 0.0), c(0.7, 0.4), c(-1.0, 1.0), cfg.z]
            .iter()
            .try_fold(0.0f64, |acc, &z| Ok::<_, cxhermite::Error>(acc.max(eigenvalue_residual(row, &p, z, 40, cfg.quad_order)?)));
        let params = json!({"row": row, "s": p.s(), "n": 40, "quad_order": cfg.quad_order, "z": pair(cfg.z)});
        ch.push(&format!("eigenfunction.row{row}"), params, r, 1e-7);
    }
}

fn squeeze(ch: &mut Checks) {
    let cfg = ch.cfg;
    let q = cfg.squeeze();
    let base = json!({"xi": pair(cfg.xi), "n_max": cfg.n_max});
    let rep = three_way(&q, cfg.n_max, 30, 2.0);
    ch.push("squeeze.closed_vs_disentangle", base.clone(), Ok(rep.closed_vs_disentangle), 1e-10);
    let fock = rep.closed_vs_fock.max(rep.disentangle_vs_fock);
    ch.push("squeeze.fock_columns", with(base.clone(), "buffer", json!(30)), Ok(fock), 1e-6);

    if !q.is_identity() {
        let mut worst: f64 = 0.0;
        let mut err = None;
        for n in 0..=cfg.n_max {
            for &z in &sample(cfg) {
                match (squeezed_basis_branch(n, &q, z, 1.0), squeezed_basis_branch(n, &q, z, -1.0)) {
                    (Ok(a), Ok(b)) => worst = worst.max((a - b).norm() / a.norm().max(1.0)),
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            }
        }
        let r = match err {
            Some(e) => Err(e),
            None => Ok(worst),
        };
        ch.push("squeeze.branch_independence", base.clone(), r, 1e-13);
    }

    let r = build_grid(Measure::Bargmann, cfg.quad_order)
        .and_then(|g| gram_matrix(BasisFamily::Squeezed(q), cfg.n_max, &g))
        .map(|g| g.max_deviation());
    ch.push("squeeze.orthonormality", with(base.clone(), "quad_order", json!(cfg.quad_order)), r, 1e-7);

    let p = cfg.params;
    let mut gap: f64 = 0.0;
    let mut res: f64 = 0.0;
    for n in 0..=cfg.n_max {
        for w in [c(0.0, 0.0), c(0.4, -0.1), cfg.w] {
            let d = dilation_check(&p, n, w);
            gap = gap.max(d.rhs_gap);
            res = res.max(d.residual_h).max(d.residual_small_h);
        }
    }
    let params = json!({"s": p.s(), "n_max": cfg.n_max, "w": pair(cfg.w)});
    ch.push("squeeze.dilation_rhs_agree", params.clone(), Ok(gap), 1e-12);
    ch.push("squeeze.dilation", params, Ok(res), 1e-8);
}

fn dual(ch: &mut Checks) {
    let cfg = ch.cfg;
    let q = cfg.squeeze();
    let n = 60;
    let pts = sample(cfg);
    let mut pairwise: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for &w in &pts {
        for &z in &pts {
            let a = squeezed_cs(&q, w, z, n, CsMode::SqueezedSeries);
            let b = squeezed_cs(&q, w, z, n, CsMode::InverseSeries);
            let k = squeezed_cs(&q, w, z, n, CsMode::Kernel);
            pairwise = pairwise.max(rel_diff(a, b)).max(rel_diff(a, k)).max(rel_diff(b, k));
            invariance = invariance.max(xi_invariance_gap(&q, z, w, n));
        }
    }
    let params = json!({"xi": pair(cfg.xi), "n": n, "z": pair(cfg.z), "w": pair(cfg.w)});
    ch.push("dual.representations", params.clone(), Ok(pairwise), 1e-7);
    ch.push("dual.xi_invariance", params, Ok(invariance), 1e-7);
}

fn rodrigues(ch: &mut Checks) {
    let cfg = ch.cfg;
    let q = cfg.squeeze();
    let sinh2 = q.sinh_r().powi(2);
    let ghosts = [c(-1.0, 0.0), c(-0.5, 0.0), c(0.0, 0.0), c(0.3, 0.2), c(sinh2, 0.0)];
    let r = (0..=cfg.n_max).try_fold(0.0f64, |acc, n| {
        sample(cfg).iter().try_fold(acc, |acc, &z| {
            let exact = hermite_sum(n, z)?;
            Ok::<_, cxhermite::Error>(ghosts.iter().fold(acc, |acc, &a| acc.max(rel_diff(rodrigues_hermite(n, a, z), exact))))
        })
    });
    let params = json!({"n_max": cfg.n_max, "ghosts": ghosts.iter().map(|a| pair(*a)).collect::<Vec<_>>()});
    ch.push("rodrigues.ghost_parameter", params, r, 1e-9);

    let pairs: Vec<(GaussPoly, GaussPoly)> = (0..=cfg.n_max)
        .map(|n| (rodrigues_squeezed(n, &q), squeezed_basis_closed_poly(n, &q)))
        .collect();
    let base = json!({"xi": pair(cfg.xi), "n_max": cfg.n_max});
    ch.push("rodrigues.squeezed_basis", base.clone(), Ok(worst_pair(&pairs)), 1e-9);

    if !q.is_identity() {
        let r = (0..=cfg.n_max).try_fold(0.0f64, |acc, n| {
            sample(cfg).iter().try_fold(acc, |acc, &z| {
                let (lhs, rhs) = rodrigues_squeezed_hermite(n, &q, z)?;
                Ok::<_, cxhermite::Error>(acc.max(rel_diff(lhs, rhs)))
            })
        });
        ch.push("rodrigues.squeezed_hermite", base, r, 1e-9);
    }
}

fn pmf(ch: &mut Checks) {
    let cfg = ch.cfg;
    let z = cfg.z;
    let lambda = z.norm_sqr();
    let params = json!({"z": pair(z), "tail_tol": 1e-14});
    match poisson_table(lambda, 1e-14) {
        Ok(t) => {
            ch.push("pmf.poisson_total", params.clone(), Ok((t.total - 1.0).abs()), 1e-8);
            ch.push("pmf.poisson_mean", params, Ok((t.mean - lambda).abs()), 1e-10);
        }
        Err(e) => ch.push("pmf.poisson_total", params, Err(e), 1e-8),
    }
    let q = cfg.squeeze();
    let params = json!({"xi": pair(cfg.xi), "z": pair(z), "tail_tol": 1e-10});
    let r = squeezed_pmf_table(&q, z, 1e-10).map(|t| (t.total - 1.0).abs());
    ch.push("pmf.squeezed_total", params, r, 1e-8);

    let id = cxhermite::squeeze::zeta_from_xi(c(0.0, 0.0));
    let r = (0..=cfg.n_max).try_fold(0.0f64, |acc, n| {
        Ok::<_, cxhermite::Error>(acc.max((squeezed_pmf(n, &id, z) - poisson_pmf(n, lambda)?).abs()))
    });
    ch.push("pmf.unsqueezed_is_poisson", json!({"z": pair(z), "n_max": cfg.n_max}), r, 1e-12);
}

fn ladders(ch: &mut Checks) {
    let cfg = ch.cfg;
    let p = cfg.params;
    let probe = |alpha: f64| {
        GaussPoly::new(c(alpha, 0.0), c(0.0, 0.0), vec![c(0.3, -0.2), c(1.0, 0.5), c(-0.4, 0.1), c(0.2, 0.2)])
    };
    type Family<'a> = (&'a str, Box<dyn Fn(usize) -> GaussPoly + 'a>, f64, Ladder, Ladder);
    let families: [Family; 3] = [
        ("phi", Box::new(phi_poly), 0.0, Ladder::BMinusPhi, Ladder::BPlusPhi),
        ("hsn", Box::new(|n| hsn_poly(n, &p)), 0.0, Ladder::AsMinus, Ladder::AsPlus),
        ("hsn_small", Box::new(|n| hsn_small_poly(n, &p)), -0.5, Ladder::XsMinus, Ladder::XsPlus),
    ];
    for (name, basis, alpha, lo, hi) in &families {
        let mut shifts = Vec::new();
        for n in 0..=cfg.n_max {
            let b = basis(n);
            shifts.push((ladder_apply(*hi, &p, &b), basis(n + 1).scale(sqrt_c(n + 1))));
            let want = if n == 0 { GaussPoly::zero() } else { basis(n - 1).scale(sqrt_c(n)) };
            shifts.push((ladder_apply(*lo, &p, &b), want));
        }
        let params = json!({"s": p.s(), "n_max": cfg.n_max});
        ch.push(&format!("ladders.{name}_shift"), params.clone(), Ok(worst_pair(&shifts)), 1e-9);
        let comm = commutator_pairs([probe(*alpha), basis(cfg.n_max)], |f| ladder_apply(*lo, &p, f), |f| ladder_apply(*hi, &p, f));
        ch.push(&format!("ladders.{name}_commutator"), params, comm, 1e-9);
    }

    let q = cfg.squeeze();
    let mut shifts = Vec::new();
    for n in 0..=cfg.n_max {
        let b = squeezed_basis_closed_poly(n, &q);
        let up = squeezed_ladder_apply(LadderSign::Plus, &q, &b);
        shifts.push((up, squeezed_basis_closed_poly(n + 1, &q).scale(sqrt_c(n + 1))));
        let want = if n == 0 { GaussPoly::zero() } else { squeezed_basis_closed_poly(n - 1, &q).scale(sqrt_c(n)) };
        shifts.push((squeezed_ladder_apply(LadderSign::Minus, &q, &b), want));
    }
    let params = json!({"xi": pair(cfg.xi), "n_max": cfg.n_max});
    ch.push("ladders.squeezed_shift", params.clone(), Ok(worst_pair(&shifts)), 1e-9);
    let comm = commutator_pairs(
        [probe(0.0), squeezed_basis_closed_poly(cfg.n_max, &q)],
        |f| squeezed_ladder_apply(LadderSign::Minus, &q, f),
        |f| squeezed_ladder_apply(LadderSign::Plus, &q, f),
    );
    ch.push("ladders.squeezed_commutator", params, comm, 1e-9);
}

/// Worst deviation of `[lo, hi] f` from `f`.
fn commutator_pairs(
    fs: [GaussPoly; 2],
    lo: impl Fn(&GaussPoly) -> GaussPoly,
    hi: impl Fn(&GaussPoly) -> GaussPoly,
) -> cxhermite::Result<f64> {
    let mut pairs = Vec::new();
    for f in fs {
        pairs.push((lo(&hi(&f)).try_sub(&hi(&lo(&f)))?, f));
    }
    Ok(worst_pair(&pairs))
}
