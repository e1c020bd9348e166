//! Command-line front end for `cxhermite`: evaluation, Gram matrices,
//! photon statistics, kernel tables and the verification suites.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cxhermite::coherent::{cs_coefficients, truncation_tail};
use cxhermite::hermite::{
    bargmann_kernel, hermite_rec, hsn_seq, hsn_small_seq, kernel_ks, phi_seq, KernelMode,
};
use cxhermite::quadrature::{build_grid, gram_matrix, BasisFamily, Measure};
use cxhermite::squeeze::{
    squeeze_kernel, squeezed_basis_seq, squeezed_cs, squeezed_pmf, squeezed_pmf_table, three_way,
    zeta_from_xi, CsMode,
};
use cxhermite::transforms::kernel_a;
use cxhermite::{Complex64, ModelParams, SqueezeParams};
use serde_json::{json, Value};

mod verify;

pub use verify::{Check, Suite, VerifyReport};

/// Truncation used by the series forms when `--n` is absent.
pub const DEFAULT_SERIES_N: usize = 60;

#[derive(Debug, Parser)]
#[command(name = "cxhermite", version, about = "Evaluate and verify complex Hermite constructions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Shape parameter of the measure, 0 < s < 1.
    #[arg(long, global = true, default_value_t = 0.5, value_parser = parse_s)]
    pub s: f64,
    #[arg(long, global = true, default_value_t = 0.4, allow_negative_numbers = true, value_parser = parse_finite)]
    pub xi_re: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub xi_im: f64,
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(0..=170))]
    pub n_max: u64,
    /// Single index, or truncation order for series forms.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(0..=170))]
    pub n: Option<u64>,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub z_re: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub z_im: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub w_re: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub w_im: f64,
    /// Gauss-Hermite order per axis.
    #[arg(long, global = true, default_value_t = 80, value_parser = clap::value_parser!(u64).range(2..=400))]
    pub quad_order: u64,
    /// Upper bound on every check tolerance.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Values of one basis family at z.
    Eval {
        #[arg(value_enum)]
        object: Object,
    },
    /// Gram matrix of a basis family on its quadrature grid.
    Gram {
        #[arg(value_enum)]
        family: Family,
    },
    /// Run identity suites; exits 1 if any check fails.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Squeezed basis, squeezed coherent states, pmf and route comparison.
    Squeeze {
        #[arg(long, value_enum, default_value_t = SqueezeMode::Basis)]
        mode: SqueezeMode,
    },
    /// Photon-number probabilities for n <= n-max.
    Stats,
    /// Kernel values at (z, w) and series residuals.
    Kernels,
    /// Coefficients of one of the nine coherent-state families.
    Cs {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=9))]
        row: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Object {
    Hermite,
    Hsn,
    HsnSmall,
    Phi,
    Squeezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Hsn,
    HsnSmall,
    Phi,
    Squeezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SqueezeMode {
    Basis,
    SqueezedSeries,
    InverseSeries,
    Kernel,
    Pmf,
    ThreeWay,
}

fn parse_finite(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

fn parse_s(v: &str) -> Result<f64, String> {
    let s = parse_finite(v)?;
    if s > 0.0 && s < 1.0 {
        Ok(s)
    } else {
        Err("s must lie strictly between 0 and 1".into())
    }
}

fn parse_tol(v: &str) -> Result<f64, String> {
    let t = parse_finite(v)?;
    if t > 0.0 {
        Ok(t)
    } else {
        Err("tol must be positive".into())
    }
}

/// Validated settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub xi: Complex64,
    pub n_max: usize,
    pub n: Option<usize>,
    pub z: Complex64,
    pub w: Complex64,
    pub quad_order: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> cxhermite::Result<Self> {
        let o = cli.opts;
        Ok(Self {
            command: cli.command,
            params: ModelParams::new(o.s)?,
            xi: Complex64::new(o.xi_re, o.xi_im),
            n_max: o.n_max as usize,
            n: o.n.map(|n| n as usize),
            z: Complex64::new(o.z_re, o.z_im),
            w: Complex64::new(o.w_re, o.w_im),
            quad_order: o.quad_order as usize,
            tol: o.tol,
            format: o.format,
            out: o.out,
        })
    }

    pub fn squeeze(&self) -> SqueezeParams {
        zeta_from_xi(self.xi)
    }

    /// Indices to tabulate: `--n` alone, or `0..=n_max`.
    fn indices(&self) -> Vec<usize> {
        match self.n {
            Some(n) => vec![n],
            None => (0..=self.n_max).collect(),
        }
    }

    fn top(&self) -> usize {
        self.n.unwrap_or(self.n_max)
    }
}

/// Rendered output and exit status of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

/// Executes a validated configuration. Library errors (inputs outside a
/// routine's domain) come back as `Err` and map to exit status 2.
pub fn run(cfg: &RunConfig) -> cxhermite::Result<Outcome> {
    let ok = |text: String| Outcome { text, status: 0 };
    match cfg.command {
        Command::Eval { object } => Ok(ok(eval(cfg, object)?)),
        Command::Gram { family } => Ok(ok(gram(cfg, family)?)),
        Command::Verify { suite } => {
            let report = verify::run_suite(cfg, suite);
            let status = if report.pass { 0 } else { 1 };
            let text = match cfg.format {
                Format::Json => json_text(&serde_json::to_value(&report).expect("report serializes")),
                Format::Csv => report.to_csv(),
            };
            Ok(Outcome { text, status })
        }
        Command::Squeeze { mode } => Ok(ok(squeeze(cfg, mode)?)),
        Command::Stats => Ok(ok(stats(cfg))),
        Command::Kernels => Ok(ok(kernels(cfg))),
        Command::Cs { row } => Ok(ok(cs(cfg, row)?)),
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn pair(v: Complex64) -> Value {
    json!([v.re, v.im])
}

fn values_csv(rows: &[(usize, Complex64)]) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, v) in rows {
        let _ = writeln!(out, "{n},{:.16e},{:.16e}", v.re, v.im);
    }
    out
}

fn eval(cfg: &RunConfig, object: Object) -> cxhermite::Result<String> {
    let (p, z, top) = (&cfg.params, cfg.z, cfg.top());
    let all: Vec<Complex64> = match object {
        Object::Hermite => (0..=top).map(|n| hermite_rec(n, z)).collect::<cxhermite::Result<_>>()?,
        Object::Hsn => hsn_seq(top, p, z),
        Object::HsnSmall => hsn_small_seq(top, p, z),
        Object::Phi => phi_seq(top, z),
        Object::Squeezed => squeezed_basis_seq(top, &cfg.squeeze(), z),
    };
    let rows: Vec<(usize, Complex64)> = cfg.indices().into_iter().map(|n| (n, all[n])).collect();
    Ok(match cfg.format {
        Format::Csv => values_csv(&rows),
        Format::Json => json_text(&json!({
            "object": object.to_possible_value().map(|v| v.get_name().to_string()),
            "s": p.s(),
            "xi": pair(cfg.xi),
            "z": pair(z),
            "values": rows.iter().map(|(n, v)| json!({"n": n, "value": pair(*v)})).collect::<Vec<_>>(),
        })),
    })
}

fn gram(cfg: &RunConfig, family: Family) -> cxhermite::Result<String> {
    let (basis, measure) = match family {
        Family::Hsn => (BasisFamily::Hsn, Measure::HsHol(cfg.params)),
        Family::HsnSmall => (BasisFamily::HsnSmall, Measure::HsHol(cfg.params)),
        Family::Phi => (BasisFamily::Phi, Measure::Bargmann),
        Family::Squeezed => (BasisFamily::Squeezed(cfg.squeeze()), Measure::Bargmann),
    };
    let grid = build_grid(measure, cfg.quad_order)?;
    let report = gram_matrix(basis, cfg.n_max, &grid)?;
    Ok(match cfg.format {
        Format::Csv => report.to_csv(),
        Format::Json => json_text(&report.to_json()),
    })
}

fn pmf_csv(probs: &[f64]) -> String {
    let mut out = String::from("n,probability\n");
    for (n, p) in probs.iter().enumerate() {
        let _ = writeln!(out, "{n},{p:.16e}");
    }
    out
}

fn squeeze(cfg: &RunConfig, mode: SqueezeMode) -> cxhermite::Result<String> {
    let q = cfg.squeeze();
    let (z, w) = (cfg.z, cfg.w);
    let cs_mode = match mode {
        SqueezeMode::SqueezedSeries => Some(CsMode::SqueezedSeries),
        SqueezeMode::InverseSeries => Some(CsMode::InverseSeries),
        SqueezeMode::Kernel => Some(CsMode::Kernel),
        _ => None,
    };
    if let Some(m) = cs_mode {
        let n = cfg.n.unwrap_or(DEFAULT_SERIES_N);
        let v = squeezed_cs(&q, w, z, n, m);
        return Ok(match cfg.format {
            Format::Csv => format!("mode,re,im\n{},{:.16e},{:.16e}\n", m.name(), v.re, v.im),
            Format::Json => json_text(&json!({
                "mode": m.name(),
                "xi": pair(cfg.xi),
                "w": pair(w),
                "z": pair(z),
                "n": n,
                "value": pair(v),
            })),
        });
    }
    Ok(match mode {
        SqueezeMode::Basis => {
            let all = squeezed_basis_seq(cfg.top(), &q, z);
            let rows: Vec<(usize, Complex64)> = cfg.indices().into_iter().map(|n| (n, all[n])).collect();
            match cfg.format {
                Format::Csv => values_csv(&rows),
                Format::Json => json_text(&json!({
                    "xi": pair(cfg.xi),
                    "zeta": pair(q.zeta()),
                    "z": pair(z),
                    "values": rows.iter().map(|(n, v)| json!({"n": n, "value": pair(*v)})).collect::<Vec<_>>(),
                })),
            }
        }
        SqueezeMode::Pmf => {
            let table = squeezed_pmf_table(&q, z, 1e-10)?;
            match cfg.format {
                Format::Csv => table.to_csv(),
                Format::Json => json_text(&serde_json::to_value(&table).expect("table serializes")),
            }
        }
        SqueezeMode::ThreeWay => {
            let report = three_way(&q, cfg.n_max, 30, 2.0);
            match cfg.format {
                Format::Csv => format!(
                    "quantity,value\nclosed_vs_disentangle,{:.16e}\nclosed_vs_fock,{:.16e}\ndisentangle_vs_fock,{:.16e}\nbuffer,{}\n",
                    report.closed_vs_disentangle, report.closed_vs_fock, report.disentangle_vs_fock, report.buffer
                ),
                Format::Json => json_text(&serde_json::to_value(report).expect("report serializes")),
            }
        }
        _ => unreachable!("coherent-state modes return above"),
    })
}

fn stats(cfg: &RunConfig) -> String {
    let q = cfg.squeeze();
    let probs: Vec<f64> = (0..=cfg.n_max).map(|n| squeezed_pmf(n, &q, cfg.z)).collect();
    match cfg.format {
        Format::Csv => pmf_csv(&probs),
        Format::Json => json_text(&json!({
            "xi": pair(cfg.xi),
            "z": pair(cfg.z),
            "poisson": q.is_identity(),
            "probabilities": probs,
            "partial_total": probs.iter().sum::<f64>(),
        })),
    }
}

fn kernels(cfg: &RunConfig) -> String {
    let (p, z, w) = (&cfg.params, cfg.z, cfg.w);
    let closed = kernel_ks(p, z, w, KernelMode::Closed);
    let mut rows: Vec<(String, Complex64, Option<f64>)> = vec![("ks_closed".into(), closed, None)];
    for n in [10, 20, 40, 60] {
        let v = kernel_ks(p, z, w, KernelMode::Series(n));
        rows.push((format!("ks_series_{n}"), v, Some((v - closed).norm() / closed.norm())));
    }
    rows.push(("a_kernel".into(), kernel_a(p, z, w), None));
    rows.push(("bargmann_kernel".into(), bargmann_kernel(z, w), None));
    rows.push(("squeeze_kernel".into(), squeeze_kernel(&cfg.squeeze(), z, w), None));
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("quantity,re,im,residual\n");
            for (name, v, r) in &rows {
                let r = r.map(|r| format!("{r:.16e}")).unwrap_or_default();
                let _ = writeln!(out, "{name},{:.16e},{:.16e},{r}", v.re, v.im);
            }
            out
        }
        Format::Json => json_text(&json!({
            "s": p.s(),
            "xi": pair(cfg.xi),
            "z": pair(z),
            "w": pair(w),
            "kernels": rows.iter().map(|(name, v, r)| json!({
                "quantity": name,
                "value": pair(*v),
                "residual": r,
            })).collect::<Vec<_>>(),
        })),
    }
}

fn cs(cfg: &RunConfig, row: u8) -> cxhermite::Result<String> {
    let n = cfg.n.unwrap_or(40);
    let state = cs_coefficients(row, &cfg.params, cfg.z, n)?;
    Ok(match cfg.format {
        Format::Csv => pmf_csv(&state.coeffs.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>()),
        Format::Json => json_text(&json!({
            "state": state,
            "norm_sqr": state.norm_sqr(),
            "truncation_tail": truncation_tail(cfg.z, n),
        })),
    })
}
