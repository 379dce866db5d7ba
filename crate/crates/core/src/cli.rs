//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage, parse or
//! domain error, 3 evaluation failure (non-convergence, phase range).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::MeanError;
use crate::expr::MeanExpr;
use crate::grid::GridSpec;
use crate::invariant::{gauss_iterate, invariance_residual_seeded, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::order::{
    classify_with_estimate, estimate_orders, gini_order, known_order, order_at_infinity,
    sample_phi, DEFAULT_CONST_TOL, DEFAULT_GPG_TOL,
};
use crate::parse::parse_mean;
use crate::theory::{
    dl_leq, pales_leq, verify_invariance_order_seeded, Check, VerificationReport, DEFAULT_LAW_TOL,
};

const DEFAULT_TABLE_TOL: f64 = 0.01;
const GINI_GRID: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "meanlab",
    version,
    about = "Invariant means, Gauss iteration and asymptotic orders of bivariate means"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Shallow end of the log-abscissa grid (negative)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u_start: Option<f64>,
    /// Deep end of the log-abscissa grid (more negative than --u-start)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u_end: Option<f64>,
    /// Number of grid points
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Number of windows
    #[arg(long, global = true)]
    pub windows: Option<usize>,
    /// Phase-exact probes per sine extreme (0 disables)
    #[arg(long, global = true)]
    pub probes: Option<usize>,
    /// Tolerance: law tolerance for verify, table tolerance for gini-table,
    /// iteration tolerance for invariant
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for randomized diagnostic samples
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output to this file instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a mean at (x, y)
    Eval {
        expr: String,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
    },
    /// Estimate lower/upper orders and classify power growth
    Order { expr: String },
    /// Run Gauss iteration for the (M,N)-invariant mean at (x, y)
    Invariant {
        m: String,
        n: String,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
    },
    /// Check the order of invariant(M,N) against the invariance-order law
    Verify { m: String, n: String },
    /// Closed-form vs estimated orders of Gini means
    GiniTable {
        #[arg(long = "p", value_delimiter = ',', allow_hyphen_values = true)]
        p_list: Vec<f64>,
        #[arg(long = "q", value_delimiter = ',', allow_hyphen_values = true)]
        q_list: Vec<f64>,
    },
    /// Comparability of G_{p,q} and G_{r,s}
    Compare {
        #[arg(allow_negative_numbers = true)]
        p: f64,
        #[arg(allow_negative_numbers = true)]
        q: f64,
        #[arg(allow_negative_numbers = true)]
        r: f64,
        #[arg(allow_negative_numbers = true)]
        s: f64,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutcome {
    fn fail(code: i32, msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CliOutcome {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &MeanError) -> i32 {
    match err {
        MeanError::NonConvergence { .. }
        | MeanError::PhaseRange { .. }
        | MeanError::InsufficientSamples { .. } => 3,
        MeanError::ExcludedPair => 1,
        _ => 2,
    }
}

/// Shortest round-trip decimal; exponent form for very small or large values.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == 0.0 || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.exit_code() == 0 {
                CliOutcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                CliOutcome::fail(2, text)
            };
        }
    };
    let mut outcome = match execute(&config) {
        Ok(o) => o,
        Err(e) => CliOutcome::fail(exit_code(&e), format!("error: {e}")),
    };
    if let Some(path) = &config.output {
        if let Err(e) = std::fs::write(path, &outcome.stdout) {
            return CliOutcome::fail(2, format!("error: cannot write {}: {e}", path.display()));
        }
        outcome.stdout.clear();
    }
    outcome
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec, MeanError> {
        let mut grid = GridSpec::default();
        if let Some(v) = self.u_start {
            grid.u_start = v;
        }
        if let Some(v) = self.u_end {
            grid.u_end = v;
        }
        if let Some(v) = self.points {
            grid.points = v;
        }
        if let Some(v) = self.windows {
            grid.windows = v;
        }
        if let Some(v) = self.probes {
            grid.probes = v;
        }
        grid.validate()?;
        Ok(grid)
    }
}

fn ok(stdout: String) -> CliOutcome {
    CliOutcome {
        code: 0,
        stdout,
        stderr: String::new(),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn execute(cfg: &RunConfig) -> Result<CliOutcome, MeanError> {
    match &cfg.command {
        Command::Eval { expr, x, y } => cmd_eval(cfg, expr, *x, *y),
        Command::Order { expr } => cmd_order(cfg, expr),
        Command::Invariant { m, n, x, y } => cmd_invariant(cfg, m, n, *x, *y),
        Command::Verify { m, n } => cmd_verify(cfg, m, n),
        Command::GiniTable { p_list, q_list } => cmd_gini_table(cfg, p_list, q_list),
        Command::Compare { p, q, r, s } => Ok(cmd_compare(cfg, *p, *q, *r, *s)),
    }
}

fn cmd_eval(cfg: &RunConfig, text: &str, x: f64, y: f64) -> Result<CliOutcome, MeanError> {
    let expr = parse_mean(text)?;
    let value = crate::eval::eval(&expr, x, y)?;
    let out = match cfg.format {
        Format::Text => format!("{}\n", fmt_num(value)),
        Format::Csv => format!(
            "expr,x,y,value\n\"{}\",{},{},{}\n",
            expr,
            fmt_num(x),
            fmt_num(y),
            fmt_num(value)
        ),
        Format::Json => to_json(&json!({
            "expr": expr.to_string(), "x": x, "y": y, "value": value
        })),
    };
    Ok(ok(out))
}

fn cmd_order(cfg: &RunConfig, text: &str) -> Result<CliOutcome, MeanError> {
    let expr = parse_mean(text)?;
    let grid = cfg.grid()?.effective_for(&[&expr])?;
    if cfg.format == Format::Csv {
        let mut out = String::from("u,phi\n");
        for (u, phi) in sample_phi(&expr, &grid)? {
            let _ = writeln!(out, "{},{}", fmt_num(u), fmt_num(phi));
        }
        return Ok(ok(out));
    }
    let estimate = estimate_orders(&expr, &grid)?;
    let class = classify_with_estimate(&expr, &grid, &estimate, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)?;
    let infinity = order_at_infinity(&expr, &grid)?;
    let known = known_order(&expr);
    let out = match cfg.format {
        Format::Json => to_json(&json!({
            "expr": expr.to_string(),
            "grid": grid,
            "estimate": estimate,
            "classification": class,
            "at_infinity": { "lower": infinity.lower, "upper": infinity.upper },
            "known_order": known,
        })),
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "expr: {expr}");
            let _ = writeln!(s, "lower: {}", fmt_num(estimate.lower));
            let _ = writeln!(s, "upper: {}", fmt_num(estimate.upper));
            let _ = writeln!(
                s,
                "fit residuals: {} {}",
                fmt_num(estimate.fit_residual_lower),
                fmt_num(estimate.fit_residual_upper)
            );
            if estimate.clamped {
                let _ = writeln!(
                    s,
                    "clamped from: {} {}",
                    fmt_num(estimate.raw_lower),
                    fmt_num(estimate.raw_upper)
                );
            }
            let _ = writeln!(s, "gpg: {}", class.is_gpg);
            if let Some(o) = class.order {
                let _ = writeln!(s, "order: {}", fmt_num(o));
            }
            let _ = writeln!(s, "pg: {}", class.is_pg);
            if let Some(c) = class.constant {
                let _ = writeln!(s, "constant: {}", fmt_num(c));
            }
            let _ = writeln!(s, "gpg gap: {}", fmt_num(class.gpg_gap));
            let _ = writeln!(s, "constant spread: {}", fmt_num(class.constant_spread));
            let _ = writeln!(
                s,
                "at infinity: {} {}",
                fmt_num(infinity.lower),
                fmt_num(infinity.upper)
            );
            match known {
                Some(k) => {
                    let _ = writeln!(s, "known order: {}", fmt_num(k));
                }
                None => s.push_str("known order: none\n"),
            }
            s
        }
    };
    Ok(ok(out))
}

fn cmd_invariant(
    cfg: &RunConfig,
    m_text: &str,
    n_text: &str,
    x: f64,
    y: f64,
) -> Result<CliOutcome, MeanError> {
    let m = parse_mean(m_text)?;
    let n = parse_mean(n_text)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let result = gauss_iterate(&m, &n, x, y, tol, DEFAULT_MAX_ITER)?;
    let k = MeanExpr::invariant(m.clone(), n.clone());
    let residual = invariance_residual_seeded(&k, &m, &n, 64, cfg.seed)?;
    let out = match cfg.format {
        Format::Text => format!(
            "{}\niterations: {}\nfinal gap: {}\ninvariance residual: {}\n",
            fmt_num(result.value),
            result.iterations,
            fmt_num(result.final_gap),
            fmt_num(residual)
        ),
        Format::Csv => format!(
            "m,n,x,y,value,iterations,final_gap,residual\n\"{}\",\"{}\",{},{},{},{},{},{}\n",
            m,
            n,
            fmt_num(x),
            fmt_num(y),
            fmt_num(result.value),
            result.iterations,
            fmt_num(result.final_gap),
            fmt_num(residual)
        ),
        Format::Json => to_json(&json!({
            "m": m.to_string(), "n": n.to_string(), "x": x, "y": y,
            "result": result, "invariance_residual": residual,
        })),
    };
    Ok(ok(out))
}

fn verification_text(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "M: {}", r.m);
    let _ = writeln!(s, "N: {}", r.n);
    let _ = writeln!(s, "K: {}", r.k);
    for (name, e) in [("M", &r.estimate_m), ("N", &r.estimate_n), ("K", &r.estimate_k)] {
        let _ = writeln!(
            s,
            "orders {name}: {} {}",
            fmt_num(e.lower),
            fmt_num(e.upper)
        );
    }
    match &r.check {
        Check::Law { prediction, .. } => {
            let _ = writeln!(s, "check: law, predicted {}", fmt_num(*prediction));
        }
        Check::Bounds {
            lo_bound, uo_bound, ..
        } => {
            let ub = uo_bound.map_or("none".to_string(), fmt_num);
            let _ = writeln!(s, "check: bounds, lo >= {}, uo <= {}", fmt_num(*lo_bound), ub);
        }
        Check::Excluded { .. } => s.push_str("check: excluded order pair (1, 0)\n"),
    }
    let _ = writeln!(
        s,
        "contraction: {}",
        fmt_num(r.contraction.max_ratio)
    );
    let _ = writeln!(s, "log ratio bound: {}", fmt_num(r.log_ratio_bound));
    if let Some(w) = &r.witkowski {
        let _ = writeln!(
            s,
            "witkowski: product {}, relation {} vs {}",
            fmt_num(w.product),
            fmt_num(w.relation_lhs),
            fmt_num(w.ord_n)
        );
    }
    if let Some(m) = r.margin {
        let _ = writeln!(s, "margin: {}", fmt_num(m));
    }
    let _ = writeln!(s, "{}", if r.pass { "PASS" } else { "FAIL" });
    s
}

fn cmd_verify(cfg: &RunConfig, m_text: &str, n_text: &str) -> Result<CliOutcome, MeanError> {
    let m = parse_mean(m_text)?;
    let n = parse_mean(n_text)?;
    let grid = cfg.grid()?;
    let tol = cfg.tol.unwrap_or(DEFAULT_LAW_TOL);
    let report = verify_invariance_order_seeded(&m, &n, &grid, tol, cfg.seed)?;
    let out = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let (kind, pred) = match &report.check {
                Check::Law { prediction, .. } => ("law", fmt_num(*prediction)),
                Check::Bounds { lo_bound, .. } => ("bounds", fmt_num(*lo_bound)),
                Check::Excluded { .. } => ("excluded", String::new()),
            };
            format!(
                "m,n,check,prediction,k_lower,k_upper,pass,margin\n\"{}\",\"{}\",{},{},{},{},{},{}\n",
                report.m,
                report.n,
                kind,
                pred,
                fmt_num(report.estimate_k.lower),
                fmt_num(report.estimate_k.upper),
                report.pass,
                report.margin.map_or(String::new(), fmt_num)
            )
        }
        Format::Text => verification_text(&report),
    };
    Ok(CliOutcome {
        code: if report.pass { 0 } else { 1 },
        stdout: out,
        stderr: String::new(),
    })
}

#[derive(Debug, Serialize)]
struct GiniRow {
    p: f64,
    q: f64,
    closed_form: f64,
    estimated_lower: f64,
    estimated_upper: f64,
    abs_error: f64,
}

fn cmd_gini_table(cfg: &RunConfig, p_list: &[f64], q_list: &[f64]) -> Result<CliOutcome, MeanError> {
    let p_list = if p_list.is_empty() { &GINI_GRID[..] } else { p_list };
    let q_list = if q_list.is_empty() { &GINI_GRID[..] } else { q_list };
    if p_list.iter().chain(q_list).any(|v| !v.is_finite()) {
        return Err(MeanError::Domain("Gini parameters must be finite".into()));
    }
    let grid = cfg.grid()?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TABLE_TOL);
    let mut rows = Vec::new();
    for &p in p_list {
        for &q in q_list {
            let est = estimate_orders(&MeanExpr::gini(p, q), &grid)?;
            let closed_form = gini_order(p, q);
            rows.push(GiniRow {
                p,
                q,
                closed_form,
                estimated_lower: est.lower,
                estimated_upper: est.upper,
                abs_error: (est.lower - closed_form)
                    .abs()
                    .max((est.upper - closed_form).abs()),
            });
        }
    }
    let failed = rows.iter().any(|r| !(r.abs_error <= tol));
    let out = match cfg.format {
        Format::Json => to_json(&rows),
        _ => {
            let mut s = String::from("p,q,closed_form,estimated_lower,estimated_upper,abs_error\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    fmt_num(r.p),
                    fmt_num(r.q),
                    fmt_num(r.closed_form),
                    fmt_num(r.estimated_lower),
                    fmt_num(r.estimated_upper),
                    fmt_num(r.abs_error)
                );
            }
            s
        }
    };
    Ok(CliOutcome {
        code: if failed { 1 } else { 0 },
        stdout: out,
        stderr: String::new(),
    })
}

fn cmd_compare(cfg: &RunConfig, p: f64, q: f64, r: f64, s: f64) -> CliOutcome {
    let pales = pales_leq(p, q, r, s);
    let dl = dl_leq(p, q, r, s);
    let pales_rev = pales_leq(r, s, p, q);
    let dl_rev = dl_leq(r, s, p, q);
    let out = match cfg.format {
        Format::Json => to_json(&json!({
            "p": p, "q": q, "r": r, "s": s,
            "pales_leq": pales, "dl_leq": dl,
            "pales_geq": pales_rev, "dl_geq": dl_rev,
        })),
        Format::Csv => format!(
            "p,q,r,s,pales_leq,dl_leq,pales_geq,dl_geq\n{},{},{},{},{},{},{},{}\n",
            fmt_num(p),
            fmt_num(q),
            fmt_num(r),
            fmt_num(s),
            pales,
            dl,
            pales_rev,
            dl_rev
        ),
        Format::Text => format!(
            "pales G({p},{q}) <= G({r},{s}): {pales}\ndl G({p},{q}) <= G({r},{s}): {dl}\n\
             pales G({r},{s}) <= G({p},{q}): {pales_rev}\ndl G({r},{s}) <= G({p},{q}): {dl_rev}\n"
        ),
    };
    ok(out)
}
