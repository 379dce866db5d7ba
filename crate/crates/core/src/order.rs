//! Numerical lower and upper orders of means.
//!
//! The lower and upper orders are the liminf and limsup, as `u -> -inf`, of
//! the finite-scale exponent `phi(u) = ln M(e^u, 1) / u`. Samples of `phi`
//! are split into windows of equal width in `ln|u|`; the extremes of each of
//! the deepest windows are fitted by `alpha + c/u`, which is exact for a
//! cross-section `C x^alpha`, and the intercepts are the estimates.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::envelope::LogPoint;
use crate::error::{MeanError, Result};
use crate::eval::{eval_log, probe_points};
use crate::expr::MeanExpr;
use crate::grid::GridSpec;

pub const DEFAULT_GPG_TOL: f64 = 0.05;
pub const DEFAULT_CONST_TOL: f64 = 0.01;
/// Slack allowed when comparing two estimated orders.
pub const FIT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub lower: f64,
    pub upper: f64,
    /// RMS residual of the fit through the window minima.
    pub fit_residual_lower: f64,
    pub fit_residual_upper: f64,
    /// `(u, phi)` at which each populated window attains its minimum.
    pub window_minima: Vec<(f64, f64)>,
    pub window_maxima: Vec<(f64, f64)>,
    /// Intercepts before clamping to `0 <= lower <= upper <= 1`.
    pub raw_lower: f64,
    pub raw_upper: f64,
    pub clamped: bool,
    pub sample_count: usize,
}

impl Serialize for OrderEstimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Residuals {
            lower: f64,
            upper: f64,
        }
        #[derive(Serialize)]
        struct Window {
            u_min: f64,
            phi_min: f64,
            u_max: f64,
            phi_max: f64,
        }
        let windows: Vec<Window> = self
            .window_minima
            .iter()
            .zip(&self.window_maxima)
            .map(|(&(u_min, phi_min), &(u_max, phi_max))| Window {
                u_min,
                phi_min,
                u_max,
                phi_max,
            })
            .collect();
        let mut s = serializer.serialize_struct("OrderEstimate", 7)?;
        s.serialize_field("lower", &self.lower)?;
        s.serialize_field("upper", &self.upper)?;
        s.serialize_field(
            "residuals",
            &Residuals {
                lower: self.fit_residual_lower,
                upper: self.fit_residual_upper,
            },
        )?;
        s.serialize_field("raw", &Residuals {
            lower: self.raw_lower,
            upper: self.raw_upper,
        })?;
        s.serialize_field("clamped", &self.clamped)?;
        s.serialize_field("samples", &self.sample_count)?;
        s.serialize_field("windows", &windows)?;
        s.end()
    }
}

/// Power-growth classification of a mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerGrowthReport {
    pub is_gpg: bool,
    pub order: Option<f64>,
    pub is_pg: bool,
    /// `C` in `M(x,1) ~ C x^order`, present iff `is_pg`.
    pub constant: Option<f64>,
    pub gpg_gap: f64,
    /// `(max - min) / median` of `M(x,1) / x^order` over the deepest window.
    pub constant_spread: f64,
}

fn grid_points(expr: &MeanExpr, grid: &GridSpec) -> Result<Vec<LogPoint>> {
    grid.abscissas()
        .into_par_iter()
        .map(|u| Ok(LogPoint { u, logm: eval_log(expr, u)? }))
        .collect()
}

fn probe_samples(expr: &MeanExpr, grid: &GridSpec) -> Vec<LogPoint> {
    if grid.probes == 0 {
        return Vec::new();
    }
    probe_points(expr, grid.probes, grid.u_end)
        .into_iter()
        .filter(|p| p.u >= grid.u_end && p.u <= grid.u_start)
        .collect()
}

fn merged_points(expr: &MeanExpr, grid: &GridSpec) -> Result<Vec<LogPoint>> {
    let mut pts = grid_points(expr, grid)?;
    pts.extend(probe_samples(expr, grid));
    pts.sort_by(|a, b| b.u.total_cmp(&a.u));
    Ok(pts)
}

/// Samples `(u, phi(u))` over the grid merged with phase-exact probes,
/// ordered by increasing `|u|`.
pub fn sample_phi(expr: &MeanExpr, grid: &GridSpec) -> Result<Vec<(f64, f64)>> {
    let grid = grid.effective_for(&[expr])?;
    Ok(merged_points(expr, &grid)?
        .into_iter()
        .map(|p| (p.u, p.phi()))
        .collect())
}

/// Samples `(y, psi(y))`, `psi(y) = ln M(e^y, 1) / y`, on the mirrored grid
/// `y = -u > 0`. Pointwise `psi(y) = 1 - phi(-y)`.
pub fn sample_psi(expr: &MeanExpr, grid: &GridSpec) -> Result<Vec<(f64, f64)>> {
    let grid = grid.effective_for(&[expr])?;
    let mut out: Vec<(f64, f64)> = grid
        .abscissas()
        .into_par_iter()
        .map(|u| {
            let y = -u;
            Ok((y, eval_log(expr, y)? / y))
        })
        .collect::<Result<_>>()?;
    out.extend(probe_samples(expr, &grid).into_iter().map(|p| {
        let y = -p.u;
        (y, (y + p.logm) / y)
    }));
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Window-extreme fit over arbitrary samples `(u, value)`; windows are taken
/// by `|u|` from `grid`, and the deepest `max(2, windows/2)` of them are fitted.
pub fn estimate_from_samples(samples: &[(f64, f64)], grid: &GridSpec) -> Result<OrderEstimate> {
    grid.validate()?;
    let mut bins: Vec<Option<((f64, f64), (f64, f64))>> = vec![None; grid.windows];
    let mut sample_count = 0;
    for &(u, v) in samples {
        let Some(w) = grid.window_of(u) else { continue };
        if !v.is_finite() {
            continue;
        }
        sample_count += 1;
        bins[w] = Some(match bins[w] {
            None => ((u, v), (u, v)),
            Some((lo, hi)) => (
                if v < lo.1 { (u, v) } else { lo },
                if v > hi.1 { (u, v) } else { hi },
            ),
        });
    }
    let window_minima: Vec<(f64, f64)> = bins.iter().flatten().map(|b| b.0).collect();
    let window_maxima: Vec<(f64, f64)> = bins.iter().flatten().map(|b| b.1).collect();

    let tail = (grid.windows / 2).max(2);
    let tail_bins: Vec<_> = bins[grid.windows - tail..].iter().flatten().copied().collect();
    if tail_bins.len() < 2 {
        return Err(MeanError::InsufficientSamples {
            needed: 2,
            found: tail_bins.len(),
        });
    }
    let minima: Vec<(f64, f64)> = tail_bins.iter().map(|b| b.0).collect();
    let maxima: Vec<(f64, f64)> = tail_bins.iter().map(|b| b.1).collect();
    let (raw_lower, fit_residual_lower) = fit_intercept(&minima);
    let (raw_upper, fit_residual_upper) = fit_intercept(&maxima);

    let mut lower = raw_lower.clamp(0.0, 1.0);
    let mut upper = raw_upper.clamp(0.0, 1.0);
    let mut clamped = lower != raw_lower || upper != raw_upper;
    if lower > upper {
        let mid = 0.5 * (lower + upper);
        lower = mid;
        upper = mid;
        clamped = true;
    }
    Ok(OrderEstimate {
        lower,
        upper,
        fit_residual_lower,
        fit_residual_upper,
        window_minima,
        window_maxima,
        raw_lower,
        raw_upper,
        clamped,
        sample_count,
    })
}

/// Least-squares intercept of `value = a + c/u`, with the RMS residual.
fn fit_intercept(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| 1.0 / p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (1.0 / p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (1.0 / p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope / p.0).powi(2))
        .sum();
    (intercept, (rss / n).sqrt())
}

/// Estimates the lower and upper orders of `expr` at zero.
pub fn estimate_orders(expr: &MeanExpr, grid: &GridSpec) -> Result<OrderEstimate> {
    let grid = grid.effective_for(&[expr])?;
    let samples: Vec<(f64, f64)> = merged_points(expr, &grid)?
        .into_iter()
        .map(|p| (p.u, p.phi()))
        .collect();
    estimate_from_samples(&samples, &grid)
}

/// Exponent window of `M(y, 1) ~ y^beta` as `y -> inf`; equals
/// `(1 - upper, 1 - lower)` of [`estimate_orders`].
pub fn order_at_infinity(expr: &MeanExpr, grid: &GridSpec) -> Result<OrderEstimate> {
    let eff = grid.effective_for(&[expr])?;
    estimate_from_samples(&sample_psi(expr, &eff)?, &eff)
}

pub fn classify_power_growth(
    expr: &MeanExpr,
    grid: &GridSpec,
    gpg_tol: f64,
    const_tol: f64,
) -> Result<PowerGrowthReport> {
    let estimate = estimate_orders(expr, grid)?;
    classify_with_estimate(expr, grid, &estimate, gpg_tol, const_tol)
}

/// Classification reusing an estimate already computed on `grid`.
pub fn classify_with_estimate(
    expr: &MeanExpr,
    grid: &GridSpec,
    estimate: &OrderEstimate,
    gpg_tol: f64,
    const_tol: f64,
) -> Result<PowerGrowthReport> {
    let grid = grid.effective_for(&[expr])?;
    let gpg_gap = estimate.upper - estimate.lower;
    let is_gpg = gpg_gap <= gpg_tol;
    let order = 0.5 * (estimate.lower + estimate.upper);

    let last = grid.windows - 1;
    let tail_us: Vec<f64> = grid
        .abscissas()
        .into_iter()
        .filter(|&u| grid.window_of(u) == Some(last))
        .collect();
    let mut logc: Vec<f64> = tail_us
        .into_par_iter()
        .map(|u| Ok(eval_log(expr, u)? - order * u))
        .collect::<Result<_>>()?;
    logc.sort_by(f64::total_cmp);
    let median = logc[logc.len() / 2];
    let (lo, hi) = (logc[0], logc[logc.len() - 1]);
    let constant_spread = ((hi - median).exp() - (lo - median).exp()).abs();
    let is_pg = is_gpg && constant_spread <= const_tol;

    Ok(PowerGrowthReport {
        is_gpg,
        order: is_gpg.then_some(order),
        is_pg,
        constant: is_pg.then(|| median.exp()),
        gpg_gap,
        constant_spread,
    })
}

/// Closed-form order of the Gini mean `G_{p,q}`.
pub fn gini_order(p: f64, q: f64) -> f64 {
    let (lo, hi) = (p.min(q), p.max(q));
    if lo == 0.0 && hi == 0.0 {
        0.5
    } else if lo >= 0.0 {
        0.0
    } else if hi <= 0.0 {
        1.0
    } else {
        -lo / (hi - lo)
    }
}

/// Closed-form order where one is known; `None` otherwise.
pub fn known_order(expr: &MeanExpr) -> Option<f64> {
    match expr {
        MeanExpr::Gini { p, q } => Some(gini_order(*p, *q)),
        MeanExpr::Log => Some(0.0),
        MeanExpr::Min => Some(1.0),
        MeanExpr::Max => Some(0.0),
        MeanExpr::Envelope(_) => None,
        MeanExpr::Compose { left, right, .. } => {
            let (a, b) = (known_order(left)?, known_order(right)?);
            // K_{M,N} lies between min(M,N) and max(M,N)
            (a == b).then_some(a)
        }
        MeanExpr::Invariant { left, right } => {
            let (a, b) = (known_order(left)?, known_order(right)?);
            let (ord_m, ord_n) = if a >= b { (a, b) } else { (b, a) };
            crate::theory::invariant_order_formula(ord_m, ord_n).ok()
        }
    }
}

/// Result of checking that `M <= c N` implies larger orders for `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub premise_holds: bool,
    /// Largest sampled `ln M - ln N - ln c`; the premise holds when this is
    /// at most rounding noise.
    pub premise_excess: f64,
    pub estimate_m: OrderEstimate,
    pub estimate_n: OrderEstimate,
    /// Present only when the premise holds.
    pub lower_ok: Option<bool>,
    pub upper_ok: Option<bool>,
}

impl MonotonicityReport {
    /// `None` when the premise fails and nothing is asserted.
    pub fn holds(&self) -> Option<bool> {
        Some(self.lower_ok? && self.upper_ok?)
    }
}

pub fn monotonicity_check(
    m: &MeanExpr,
    n: &MeanExpr,
    c: f64,
    grid: &GridSpec,
) -> Result<MonotonicityReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(MeanError::Precondition(format!("c must be positive, got {c}")));
    }
    let eff = grid.effective_for(&[m, n])?;
    let log_c = c.ln();
    let near: Vec<f64> = (1..=32).map(|i| -(i as f64) / 32.0).collect();
    let mut excess = f64::NEG_INFINITY;
    for u in near.into_iter().chain(eff.abscissas()) {
        excess = excess.max(eval_log(m, u)? - eval_log(n, u)? - log_c);
    }
    let premise_holds = excess <= 1e-12;
    let estimate_m = estimate_orders(m, &eff)?;
    let estimate_n = estimate_orders(n, &eff)?;
    let (lower_ok, upper_ok) = if premise_holds {
        (
            Some(estimate_m.lower >= estimate_n.lower - FIT_TOLERANCE),
            Some(estimate_m.upper >= estimate_n.upper - FIT_TOLERANCE),
        )
    } else {
        (None, None)
    };
    Ok(MonotonicityReport {
        premise_holds,
        premise_excess: excess,
        estimate_m,
        estimate_n,
        lower_ok,
        upper_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_mean;

    fn m(s: &str) -> MeanExpr {
        parse_mean(s).unwrap()
    }

    #[test]
    fn gini_order_cases() {
        assert_eq!(gini_order(1.0, 0.0), 0.0);
        assert_eq!(gini_order(0.0, 0.0), 0.5);
        assert_eq!(gini_order(-1.0, 1.0), 0.5);
        assert_eq!(gini_order(-1.0, 0.0), 1.0);
        assert_eq!(gini_order(3.0, -1.0), 0.25);
        assert_eq!(gini_order(2.0, 2.0), 0.0);
        assert_eq!(gini_order(-2.0, -2.0), 1.0);
    }

    #[test]
    fn known_orders() {
        assert_eq!(known_order(&m("invariant(geom,arith)")), Some(0.0));
        assert_eq!(known_order(&m("invariant(harm,geom)")), Some(1.0));
        assert_eq!(known_order(&m("invariant(geom,harm)")), Some(1.0));
        assert_eq!(known_order(&m("env(e2)")), None);
        assert_eq!(known_order(&m("invariant(min,max)")), None);
        assert_eq!(known_order(&m("compose(env(e1),geom,gini(1,-1))")), Some(0.5));
        assert_eq!(known_order(&m("compose(log,geom,arith)")), None);
    }

    #[test]
    fn geometric_phi_is_flat() {
        let s = sample_phi(&m("gini(1,-1)"), &GridSpec::default()).unwrap();
        assert_eq!(s.len(), 4096);
        assert!(s.iter().all(|&(_, phi)| (phi - 0.5).abs() < 1e-15));
    }

    #[test]
    fn fit_is_exact_on_pure_powers() {
        let grid = GridSpec::default();
        for &(alpha, log_c) in &[(0.3, -0.7), (0.0, 2.0), (1.0, -5.0), (0.625, 0.0)] {
            let samples: Vec<(f64, f64)> = grid
                .abscissas()
                .into_iter()
                .map(|u| (u, alpha + log_c / u))
                .collect();
            let est = estimate_from_samples(&samples, &grid).unwrap();
            assert!((est.raw_lower - alpha).abs() <= 1e-9);
            assert!((est.raw_upper - alpha).abs() <= 1e-9);
            assert!(est.fit_residual_lower < 1e-12);
        }
    }

    #[test]
    fn estimates_clamp_and_order() {
        let grid = GridSpec::default();
        let samples: Vec<(f64, f64)> = grid
            .abscissas()
            .into_iter()
            .map(|u| (u, 1.2 + 1.0 / u))
            .collect();
        let est = estimate_from_samples(&samples, &grid).unwrap();
        assert_eq!(est.upper, 1.0);
        assert!(est.clamped);
    }

    #[test]
    fn insufficient_samples() {
        let grid = GridSpec::default();
        let err = estimate_from_samples(&[(-1.5, 0.2)], &grid).unwrap_err();
        assert!(matches!(err, MeanError::InsufficientSamples { .. }));
    }

    #[test]
    fn order_examples() {
        let grid = GridSpec::default();
        let g = estimate_orders(&m("gini(3,-1)"), &grid).unwrap();
        assert!((g.lower - 0.25).abs() < 0.01 && (g.upper - 0.25).abs() < 0.01);
        let l = estimate_orders(&MeanExpr::Log, &grid).unwrap();
        assert!(l.lower.abs() < 5e-3 && l.upper.abs() < 5e-3, "{l:?}");
    }

    #[test]
    fn classification_examples() {
        let grid = GridSpec::default();
        let g = classify_power_growth(&m("gini(3,-1)"), &grid, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)
            .unwrap();
        assert!(g.is_gpg && g.is_pg);
        assert!((g.order.unwrap() - 0.25).abs() < 1e-6);
        assert!((g.constant.unwrap() - 1.0).abs() < 1e-6);

        let geo = classify_power_growth(&m("geom"), &grid, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)
            .unwrap();
        assert!(geo.is_pg);
        assert_eq!(geo.order, Some(0.5));
        assert_eq!(geo.constant, Some(1.0));

        let log = classify_power_growth(&MeanExpr::Log, &grid, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)
            .unwrap();
        assert!(log.is_gpg && !log.is_pg);
        assert!(log.constant.is_none());
    }

    #[test]
    fn monotonicity_examples() {
        let grid = GridSpec::default();
        let hg = monotonicity_check(&m("harm"), &m("geom"), 1.0, &grid).unwrap();
        assert!(hg.premise_holds);
        assert_eq!(hg.holds(), Some(true));
        let same = monotonicity_check(&m("log"), &m("log"), 1.0, &grid).unwrap();
        assert_eq!(same.holds(), Some(true));
        let ag = monotonicity_check(&m("arith"), &m("geom"), 1.0, &grid).unwrap();
        assert!(!ag.premise_holds);
        assert_eq!(ag.holds(), None);
        assert!(monotonicity_check(&m("arith"), &m("geom"), 0.0, &grid).is_err());
    }
}
