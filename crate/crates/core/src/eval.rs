//! Evaluation of mean expressions, on positive pairs and on the log
//! cross-section `u -> ln M(e^u, 1)`.

use crate::envelope::LogPoint;
use crate::error::{MeanError, Result};
use crate::expr::MeanExpr;
use crate::invariant::{gauss_iterate, gauss_iterate_log, iteration_cap, DEFAULT_TOL};

/// Below this ratio `min/max` the natural-domain formulas lose the small
/// argument, so evaluation goes through the log cross-section instead.
const TINY_RATIO: f64 = 1e-290;

/// `ln(1 + e^t)` without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn gini_log(p: f64, q: f64, u: f64) -> f64 {
    if p == q {
        if p == 0.0 {
            0.5 * u
        } else {
            u * logistic(p * u)
        }
    } else {
        (softplus(p * u) - softplus(q * u)) / (p - q)
    }
}

fn log_mean_log(u: f64) -> f64 {
    (-u.exp_m1()).ln() - (-u).ln()
}

/// `ln M(e^u, 1)`.
///
/// Positive `u` is handled by homogeneity, `ln M(e^u,1) = u + ln M(e^-u,1)`.
/// For `u <= 0` the result lies in `[u, 0]`.
pub fn eval_log(expr: &MeanExpr, u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(MeanError::Domain(format!("log-abscissa {u} is not finite")));
    }
    if u > 0.0 {
        return Ok(u + eval_log(expr, -u)?);
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let v = match expr {
        MeanExpr::Gini { p, q } => gini_log(*p, *q, u),
        MeanExpr::Log => log_mean_log(u),
        MeanExpr::Min => u,
        MeanExpr::Max => 0.0,
        MeanExpr::Envelope(spec) => spec.log_value(u)?,
        MeanExpr::Compose { outer, left, right } => {
            let a = eval_log(left, u)?;
            let b = eval_log(right, u)?;
            eval_log_pair(outer, a, b)?
        }
        MeanExpr::Invariant { left, right } => {
            gauss_iterate_log(left, right, u, DEFAULT_TOL, iteration_cap(u))?
        }
    };
    Ok(v.clamp(u, 0.0))
}

/// `ln M(e^a, e^b)` for arbitrary finite log-coordinates.
pub fn eval_log_pair(expr: &MeanExpr, a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    Ok((hi + eval_log(expr, lo - hi)?).clamp(lo, hi))
}

fn check_arg(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MeanError::Domain(format!(
            "arguments must be positive and finite, got {v}"
        )))
    }
}

/// `M(x, y)` for positive finite `x`, `y`.
pub fn eval(expr: &MeanExpr, x: f64, y: f64) -> Result<f64> {
    check_arg(x)?;
    check_arg(y)?;
    if x == y {
        return Ok(x);
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    let t = lo / hi;
    let via_log = || -> Result<f64> { Ok(hi * eval_log(expr, lo.ln() - hi.ln())?.exp()) };

    let v = match expr {
        MeanExpr::Min => lo,
        MeanExpr::Max => hi,
        _ if t < TINY_RATIO => via_log()?,
        MeanExpr::Gini { p, q } => gini_natural(*p, *q, lo, hi).map_or_else(via_log, Ok)?,
        MeanExpr::Log if t < 0.5 => (hi - lo) / -t.ln(),
        MeanExpr::Log => {
            let d = (hi - lo) / hi;
            hi * d / -(-d).ln_1p()
        }
        MeanExpr::Envelope(spec) => hi * spec.value(t)?,
        MeanExpr::Compose { outer, left, right } => {
            eval(outer, eval(left, lo, hi)?, eval(right, lo, hi)?)?
        }
        MeanExpr::Invariant { left, right } => {
            gauss_iterate(left, right, lo, hi, DEFAULT_TOL, iteration_cap(t.ln()))?.value
        }
    };
    Ok(v.clamp(lo, hi))
}

/// Direct formula; `None` when an intermediate power over- or underflows.
fn gini_natural(p: f64, q: f64, lo: f64, hi: f64) -> Option<f64> {
    if p == q {
        if p != 0.0 {
            return None;
        }
        let g = (lo * hi).sqrt();
        return if g.is_finite() && g > 0.0 {
            Some(g)
        } else {
            Some(lo.sqrt() * hi.sqrt())
        };
    }
    let t = lo / hi;
    let ratio = (t.powf(p) + 1.0) / (t.powf(q) + 1.0);
    let r = ratio.powf(1.0 / (p - q));
    (r.is_finite() && r > 0.0).then_some(hi * r)
}

/// Phase-exact extreme points of an oscillating envelope mean; empty for
/// anything else.
pub fn probe_points(expr: &MeanExpr, count: usize, u_floor: f64) -> Vec<LogPoint> {
    match expr {
        MeanExpr::Envelope(spec) => spec.probe_points(count, u_floor),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::EnvelopeSpec;
    use crate::parse::parse_mean;

    fn m(s: &str) -> MeanExpr {
        parse_mean(s).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(eval(&m("gini(2,0)"), 3.0, 4.0).unwrap(), 3.5355339059327378);
        let l = eval(&MeanExpr::Log, 1.0, std::f64::consts::E).unwrap();
        assert!((l - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        let g = eval(&m("gini(1,-1)"), 4.0, 9.0).unwrap();
        assert!((g - 6.0).abs() < 1e-14);
        assert_eq!(eval(&MeanExpr::Log, 2.5, 2.5).unwrap(), 2.5);
        assert_eq!(eval(&m("gini(3,3)"), 7.0, 7.0).unwrap(), 7.0);
        assert_eq!(eval(&MeanExpr::Min, 7.0, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn invariant_of_arith_harm_is_geometric() {
        let v = eval(&m("invariant(arith,harm)"), 2.0, 8.0).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn log_mean_close_arguments() {
        let x = 1.0;
        let y = 1.0 + 1e-12;
        let v = eval(&MeanExpr::Log, x, y).unwrap();
        assert!((v - (1.0 + 0.5e-12)).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(eval(&MeanExpr::Log, 0.0, 1.0), Err(MeanError::Domain(_))));
        assert!(matches!(eval(&MeanExpr::Log, -1.0, 1.0), Err(MeanError::Domain(_))));
        assert!(matches!(eval(&MeanExpr::Log, f64::INFINITY, 1.0), Err(MeanError::Domain(_))));
        assert!(matches!(eval(&MeanExpr::Log, 1.0, f64::NAN), Err(MeanError::Domain(_))));
        assert!(eval_log(&MeanExpr::Log, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn log_domain_examples() {
        assert_eq!(eval_log(&m("gini(1,-1)"), -20.0).unwrap(), -10.0);
        let v = eval_log(&MeanExpr::Log, -1.0).unwrap();
        assert!((v - (1.0 - (-1f64).exp()).ln()).abs() < 1e-15);
        assert!((v + 0.45867514538708193).abs() < 1e-14);
        let a = eval_log(&m("arith"), -50.0).unwrap();
        assert!((a - (0.5 * (1.0 + (-50f64).exp())).ln()).abs() < 1e-15);
        assert_eq!(eval_log(&m("arith"), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn positive_u_uses_homogeneity() {
        for e in ["arith", "log", "gini(3,-1)", "harm", "invariant(arith,geom)"] {
            let e = m(e);
            for &u in &[0.5, 3.0, 40.0] {
                let pos = eval_log(&e, u).unwrap();
                let neg = eval_log(&e, -u).unwrap();
                assert!((pos - (u + neg)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deep_log_arguments_stay_finite() {
        let u = -1e4;
        for e in ["gini(-2,-2)", "gini(2,2)", "gini(-2,0.5)", "log", "harm", "gini(0.5,0.5)"] {
            let v = eval_log(&m(e), u).unwrap();
            assert!(v.is_finite() && v >= u && v <= 0.0, "{e}: {v}");
        }
        assert!(eval_log(&MeanExpr::Envelope(EnvelopeSpec::E1), -700.0).is_err());
    }

    #[test]
    fn tiny_ratio_routes_through_log() {
        let v = eval(&m("gini(0,-1)"), 1e-300, 1.0).unwrap();
        assert!((v / 2e-300 - 1.0).abs() < 1e-12);
        let a = eval(&m("arith"), 1e-300, 1e10).unwrap();
        assert!((a / 5e9 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn probes_only_for_oscillating_envelopes() {
        assert!(probe_points(&m("gini(2,0)"), 10, -100.0).is_empty());
        assert!(probe_points(&m("compose(log,env(e1),arith)"), 10, -100.0).is_empty());
        assert!(!probe_points(&m("env(e1)"), 10, -100.0).is_empty());
    }
}
