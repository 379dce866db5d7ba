//! Gauss iteration `(x, y) <- (M(x,y), N(x,y))` and its diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::envelope::PHASE_LIMIT_U;
use crate::error::{MeanError, Result};
use crate::eval::{eval, eval_log, eval_log_pair};
use crate::expr::MeanExpr;
use crate::grid::GridSpec;

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Outcome of a converged Gauss iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationResult {
    /// Midpoint of the final pair.
    pub value: f64,
    pub iterations: usize,
    /// Relative gap `|x - y| / max(x, y)` of the final pair.
    pub final_gap: f64,
}

/// Iterates `(x, y) <- (M(x,y), N(x,y))` until the relative gap is at most
/// `tol`. Returns the midpoint of the final pair.
pub fn gauss_iterate(
    m: &MeanExpr,
    n: &MeanExpr,
    x: f64,
    y: f64,
    tol: f64,
    max_iter: usize,
) -> Result<IterationResult> {
    check_iteration_params(tol, max_iter)?;
    let (mut a, mut b) = (x, y);
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        let next_a = eval(m, a, b)?;
        let next_b = eval(n, a, b)?;
        a = next_a;
        b = next_b;
        gap = (a - b).abs() / a.max(b);
        if gap <= tol {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            return Ok(IterationResult {
                value: (lo + 0.5 * (hi - lo)).clamp(lo, hi),
                iterations: it,
                final_gap: gap,
            });
        }
    }
    Err(MeanError::NonConvergence {
        iterations: max_iter,
        last: (a, b),
        gap,
    })
}

/// Iteration budget for invariant nodes evaluated at log-ratio `u`. When one
/// operand has order 0 and the other order 1 the log gap only shrinks by a
/// constant per step, so the budget grows with `|u|`.
pub(crate) fn iteration_cap(u: f64) -> usize {
    DEFAULT_MAX_ITER + (2.0 * u.abs()).min(1e6).ceil() as usize
}

/// `ln K(e^u, 1)` for the `(M,N)`-invariant mean `K`, iterating entirely in
/// log coordinates so that `u` far below `-700` is reachable.
pub fn gauss_iterate_log(
    m: &MeanExpr,
    n: &MeanExpr,
    u: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    check_iteration_params(tol, max_iter)?;
    if !u.is_finite() {
        return Err(MeanError::Domain(format!("log-abscissa {u} is not finite")));
    }
    if u > 0.0 {
        return Ok(u + gauss_iterate_log(m, n, -u, tol, max_iter)?);
    }
    if u < PHASE_LIMIT_U && (m.contains_envelope() || n.contains_envelope()) {
        return Err(MeanError::PhaseRange {
            u,
            limit: PHASE_LIMIT_U,
        });
    }
    let (mut a, mut b) = (u, 0.0_f64);
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter {
        let next_a = eval_log_pair(m, a, b)?;
        let next_b = eval_log_pair(n, a, b)?;
        a = next_a;
        b = next_b;
        gap = (a - b).abs();
        // a few ulps of the coordinate is the resolution limit
        let floor = 4.0 * f64::EPSILON * a.abs().max(b.abs());
        if gap <= tol.max(floor) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // ln of the arithmetic midpoint of e^lo, e^hi
            return Ok((hi + (0.5 * (lo - hi).exp_m1()).ln_1p()).clamp(lo, hi));
        }
    }
    Err(MeanError::NonConvergence {
        iterations: max_iter,
        last: (a, b),
        gap,
    })
}

fn check_iteration_params(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol > 0.0) {
        return Err(MeanError::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(MeanError::Precondition("max_iter must be at least 1".into()));
    }
    Ok(())
}

/// Sampled supremum of `|M - N| / |x - y|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    pub max_ratio: f64,
    pub worst_point: (f64, f64),
    pub sample_count: usize,
}

/// Samples half of the points on the cross-section `(e^u, 1)` with `|u|`
/// log-uniform in `[1e-3, 30]` and half as random pairs; seed 0.
pub fn contraction_check(m: &MeanExpr, n: &MeanExpr, samples: usize) -> Result<ContractionReport> {
    contraction_check_seeded(m, n, samples, 0)
}

pub fn contraction_check_seeded(
    m: &MeanExpr,
    n: &MeanExpr,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if samples == 0 {
        return Err(MeanError::Precondition("samples must be at least 1".into()));
    }
    let mut report = ContractionReport {
        max_ratio: 0.0,
        worst_point: (f64::NAN, f64::NAN),
        sample_count: 0,
    };
    for (x, y) in sample_pairs(samples, seed) {
        let mv = eval(m, x, y)?;
        let nv = eval(n, x, y)?;
        let ratio = (mv - nv).abs() / (x - y).abs();
        if report.sample_count == 0 || ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_point = (x, y);
        }
        report.sample_count += 1;
    }
    Ok(report)
}

/// Deterministic sample of distinct positive pairs: a log-uniform sweep of the
/// cross-section followed by seeded random pairs with logs in `[-30, 30]`.
pub(crate) fn sample_pairs(samples: usize, seed: u64) -> Vec<(f64, f64)> {
    let sweep = samples.div_ceil(2);
    let mut out = Vec::with_capacity(samples);
    let (lo, hi) = (1e-3f64.ln(), 30f64.ln());
    for i in 0..sweep {
        let frac = if sweep == 1 {
            1.0
        } else {
            i as f64 / (sweep - 1) as f64
        };
        let u = -(lo + frac * (hi - lo)).exp();
        out.push((u.exp(), 1.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < samples {
        let x = rng.random_range(-30.0..30.0f64).exp();
        let y = rng.random_range(-30.0..30.0f64).exp();
        if x != y {
            out.push((x, y));
        }
    }
    out
}

/// Relative defect `|K(M(x,y), N(x,y)) - K(x,y)| / K(x,y)` at one pair.
pub fn invariance_defect(k: &MeanExpr, m: &MeanExpr, n: &MeanExpr, x: f64, y: f64) -> Result<f64> {
    let base = eval(k, x, y)?;
    let moved = eval(k, eval(m, x, y)?, eval(n, x, y)?)?;
    Ok((moved - base).abs() / base)
}

/// Largest invariance defect over the sample used by [`contraction_check`].
pub fn invariance_residual(k: &MeanExpr, m: &MeanExpr, n: &MeanExpr, samples: usize) -> Result<f64> {
    invariance_residual_seeded(k, m, n, samples, 0)
}

pub fn invariance_residual_seeded(
    k: &MeanExpr,
    m: &MeanExpr,
    n: &MeanExpr,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(MeanError::Precondition("samples must be at least 1".into()));
    }
    let mut worst = 0.0f64;
    for (x, y) in sample_pairs(samples, seed) {
        worst = worst.max(invariance_defect(k, m, n, x, y)?);
    }
    Ok(worst)
}

/// Sampled `sup M(x,1)/N(x,1)` over the grid; `+inf` once the ratio leaves
/// the double range.
pub fn ratio_bound(m: &MeanExpr, n: &MeanExpr, grid: &GridSpec) -> Result<f64> {
    Ok(log_ratio_bound(m, n, grid)?.exp())
}

/// `ln` of [`ratio_bound`].
pub fn log_ratio_bound(m: &MeanExpr, n: &MeanExpr, grid: &GridSpec) -> Result<f64> {
    let grid = grid.effective_for(&[m, n])?;
    let mut worst = f64::NEG_INFINITY;
    for u in grid.abscissas() {
        worst = worst.max(eval_log(m, u)? - eval_log(n, u)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_mean;

    fn m(s: &str) -> MeanExpr {
        parse_mean(s).unwrap()
    }

    #[test]
    fn arith_harm_preserves_product() {
        let r = gauss_iterate(&m("arith"), &m("harm"), 2.0, 8.0, DEFAULT_TOL, DEFAULT_MAX_ITER)
            .unwrap();
        assert!((r.value - 4.0).abs() < 1e-13);
        assert!(r.final_gap <= DEFAULT_TOL);
    }

    #[test]
    fn min_max_never_contracts() {
        let err = gauss_iterate(&MeanExpr::Min, &MeanExpr::Max, 1.0, 2.0, DEFAULT_TOL, DEFAULT_MAX_ITER)
            .unwrap_err();
        match err {
            MeanError::NonConvergence {
                last,
                gap,
                iterations,
            } => {
                assert_eq!(last, (1.0, 2.0));
                assert_eq!(gap, 0.5);
                assert_eq!(iterations, DEFAULT_MAX_ITER);
            }
            other => panic!("{other:?}"),
        }
        assert!(gauss_iterate_log(&MeanExpr::Min, &MeanExpr::Max, -1.0, DEFAULT_TOL, 50)
            .unwrap_err()
            .is_non_convergence());
    }

    #[test]
    fn equal_arguments_converge_in_one_step() {
        let r = gauss_iterate(&m("arith"), &m("geom"), 3.25, 3.25, DEFAULT_TOL, DEFAULT_MAX_ITER)
            .unwrap();
        assert_eq!(r.value, 3.25);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(gauss_iterate(&m("arith"), &m("geom"), 1.0, 2.0, 0.0, 10).is_err());
        assert!(gauss_iterate(&m("arith"), &m("geom"), 1.0, 2.0, 1e-14, 0).is_err());
        assert!(gauss_iterate(&m("arith"), &m("geom"), 0.0, 2.0, 1e-14, 10).is_err());
    }

    #[test]
    fn log_iteration_identities() {
        for &u in &[-0.5, -20.0, -1e3, -1e4, 7.0] {
            let v = gauss_iterate_log(&m("arith"), &m("harm"), u, DEFAULT_TOL, iteration_cap(u))
                .unwrap();
            assert!((v - u / 2.0).abs() <= 1e-12 * u.abs().max(1.0), "{u}: {v}");
        }
        let short = gauss_iterate_log(&m("arith"), &m("harm"), -1e3, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert!(matches!(short, Err(MeanError::NonConvergence { .. })));
        assert_eq!(
            gauss_iterate_log(&m("arith"), &m("geom"), 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap(),
            0.0
        );
    }

    #[test]
    fn log_iteration_rejects_deep_envelopes() {
        let err = gauss_iterate_log(&m("env(e2)"), &m("arith"), -700.0, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert!(matches!(err, Err(MeanError::PhaseRange { .. })));
    }

    #[test]
    fn contraction_reports() {
        let ag = contraction_check(&m("arith"), &m("geom"), 200).unwrap();
        assert!(ag.max_ratio < 1.0 && ag.max_ratio > 0.4);
        assert_eq!(ag.sample_count, 200);
        let mm = contraction_check(&MeanExpr::Min, &MeanExpr::Max, 50).unwrap();
        assert_eq!(mm.max_ratio, 1.0);
        let same = contraction_check(&m("log"), &m("log"), 50).unwrap();
        assert_eq!(same.max_ratio, 0.0);
        assert!(contraction_check(&m("log"), &m("log"), 0).is_err());
    }

    #[test]
    fn residual_examples() {
        let r = invariance_residual(&m("geom"), &m("arith"), &m("harm"), 300).unwrap();
        assert!(r <= 1e-13, "{r}");
        let d = invariance_defect(&m("arith"), &m("arith"), &m("geom"), 1.0, 100.0).unwrap();
        assert!(d > 0.01);
    }

    #[test]
    fn ratio_bounds() {
        let g = GridSpec::default();
        assert!(ratio_bound(&m("harm"), &m("geom"), &g).unwrap() <= 1.0);
        assert_eq!(ratio_bound(&m("log"), &m("log"), &g).unwrap(), 1.0);
        let shallow = GridSpec {
            u_end: -10.0,
            ..GridSpec::default()
        };
        let deep = GridSpec {
            u_end: -100.0,
            ..GridSpec::default()
        };
        let a = ratio_bound(&m("arith"), &m("geom"), &shallow).unwrap();
        let b = ratio_bound(&m("arith"), &m("geom"), &deep).unwrap();
        assert!(b > 1e10 * a);
    }
}
