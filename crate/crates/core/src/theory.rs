//! Order laws for invariant means as checkable predicates, and comparability
//! of Gini means.

use serde::Serialize;

use crate::error::{MeanError, Result};
use crate::expr::MeanExpr;
use crate::grid::GridSpec;
use crate::invariant::{
    contraction_check_seeded, gauss_iterate, log_ratio_bound, ContractionReport,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::order::{
    classify_with_estimate, estimate_orders, OrderEstimate, PowerGrowthReport, DEFAULT_CONST_TOL,
    DEFAULT_GPG_TOL,
};

pub const DEFAULT_LAW_TOL: f64 = 0.02;
const CONTRACTION_SAMPLES: usize = 256;

/// Lower and upper orders of `M`, `N` and `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderTuple {
    pub lo_m: f64,
    pub uo_m: f64,
    pub lo_n: f64,
    pub uo_n: f64,
    pub lo_k: f64,
    pub uo_k: f64,
}

impl OrderTuple {
    pub fn new(lo_m: f64, uo_m: f64, lo_n: f64, uo_n: f64, lo_k: f64, uo_k: f64) -> Result<Self> {
        for (lo, uo) in [(lo_m, uo_m), (lo_n, uo_n), (lo_k, uo_k)] {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&uo) || lo > uo {
                return Err(MeanError::Precondition(format!(
                    "order pair ({lo}, {uo}) must satisfy 0 <= lo <= uo <= 1"
                )));
            }
        }
        Ok(OrderTuple {
            lo_m,
            uo_m,
            lo_n,
            uo_n,
            lo_k,
            uo_k,
        })
    }
}

/// Order of the `(M,N)`-invariant mean, `ord N / (1 - ord M + ord N)`, for
/// `0 <= ord N <= ord M <= 1` and `(ord M, ord N) != (1, 0)`.
pub fn invariant_order_formula(ord_m: f64, ord_n: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ord_m) || !(0.0..=1.0).contains(&ord_n) {
        return Err(MeanError::Precondition(format!(
            "orders must lie in [0, 1], got ({ord_m}, {ord_n})"
        )));
    }
    if ord_m < ord_n {
        return Err(MeanError::Precondition(format!(
            "need ord M >= ord N, got ({ord_m}, {ord_n})"
        )));
    }
    if ord_m == 1.0 && ord_n == 0.0 {
        return Err(MeanError::ExcludedPair);
    }
    Ok(ord_n / (1.0 - ord_m + ord_n))
}

/// Bounds on the orders of `K(M, N)`:
/// `((lo M - uo N) lo K + lo N, (uo M - lo N) uo K + uo N)`.
pub fn emain_bounds(t: &OrderTuple) -> (f64, f64) {
    (
        (t.lo_m - t.uo_n) * t.lo_k + t.lo_n,
        (t.uo_m - t.lo_n) * t.uo_k + t.uo_n,
    )
}

/// Bounds on the orders of the `(M,N)`-invariant mean when `M/N` is bounded:
/// a lower bound for `lo K`, and an upper bound for `uo K` unless
/// `lo N = 0` and `uo M = 1`.
pub fn cor28_bounds(lo_m: f64, uo_m: f64, lo_n: f64, uo_n: f64) -> (f64, Option<f64>) {
    let lower = lo_n / (1.0 + uo_n - lo_m);
    let upper = (!(lo_n == 0.0 && uo_m == 1.0)).then(|| uo_n / (1.0 + lo_n - uo_m));
    (lower, upper)
}

pub fn pales_m(p: f64, q: f64) -> f64 {
    if p >= 0.0 && q >= 0.0 {
        p.min(q)
    } else if p <= 0.0 && q <= 0.0 {
        p.max(q)
    } else {
        0.0
    }
}

pub fn pales_mu(p: f64, q: f64) -> f64 {
    if p != q {
        (p.abs() - q.abs()) / (p - q)
    } else if p > 0.0 {
        1.0
    } else if p < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Decides `G_{p,q} <= G_{r,s}` pointwise.
pub fn pales_leq(p: f64, q: f64, r: f64, s: f64) -> bool {
    p + q <= r + s && pales_m(p, q) <= pales_m(r, s) && pales_mu(p, q) <= pales_mu(r, s)
}

/// Sufficient condition for `G_{p,q} <= G_{r,s}`: both parameter extremes
/// are ordered.
pub fn dl_leq(p: f64, q: f64, r: f64, s: f64) -> bool {
    p.min(q) <= r.min(s) && p.max(q) <= r.max(s)
}

/// `C_M^ord K * C_N^(1 - ord K)`; the order law forces equal orders unless
/// this equals 1 and the orders satisfy the invariance-order relation.
pub fn witkowski_condition(c_m: f64, c_n: f64, ord_k: f64) -> f64 {
    c_m.powf(ord_k) * c_n.powf(1.0 - ord_k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Both operands of generalized power growth: the order of `K` is
    /// compared with the closed-form prediction.
    Law { ord_m: f64, ord_n: f64, prediction: f64 },
    /// Some operand is not of generalized power growth: the orders of `K`
    /// are compared with the two-sided bounds.
    Bounds {
        lo_bound: f64,
        uo_bound: Option<f64>,
        emain_lower: f64,
        emain_upper: f64,
    },
    /// Orders `(1, 0)`, where no prediction is made.
    Excluded { ord_m: f64, ord_n: f64 },
}

/// Constants test for means of power growth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitkowskiReport {
    pub c_m: f64,
    pub c_n: f64,
    pub product: f64,
    /// `ord K (1 - ord M + ord N)`, to be compared with `ord N`.
    pub relation_lhs: f64,
    pub ord_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Operands after orientation, so that `M` has the larger order.
    pub m: String,
    pub n: String,
    pub k: String,
    pub swapped: bool,
    pub estimate_m: OrderEstimate,
    pub estimate_n: OrderEstimate,
    pub estimate_k: OrderEstimate,
    pub class_m: PowerGrowthReport,
    pub class_n: PowerGrowthReport,
    pub class_k: PowerGrowthReport,
    pub check: Check,
    pub pass: bool,
    /// Distance to failure; negative when failing, absent when excluded.
    pub margin: Option<f64>,
    pub tol: f64,
    pub grid: GridSpec,
    pub contraction: ContractionReport,
    /// `ln sup M(x,1)/N(x,1)` over the grid.
    pub log_ratio_bound: f64,
    /// Present only when `M`, `N` and `K` all classify as power growth.
    pub witkowski: Option<WitkowskiReport>,
}

/// Builds `K = invariant(M, N)`, estimates all three orders and checks them
/// against the invariance-order law or, for operands that are not of
/// generalized power growth, against the two-sided order bounds.
pub fn verify_invariance_order(
    m: &MeanExpr,
    n: &MeanExpr,
    grid: &GridSpec,
    tol: f64,
) -> Result<VerificationReport> {
    verify_invariance_order_seeded(m, n, grid, tol, 0)
}

pub fn verify_invariance_order_seeded(
    m: &MeanExpr,
    n: &MeanExpr,
    grid: &GridSpec,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if !(tol > 0.0) {
        return Err(MeanError::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let grid = grid.effective_for(&[m, n])?;
    // fail fast on pairs whose iteration does not contract at all
    gauss_iterate(m, n, 1.0, 2.0, DEFAULT_TOL, DEFAULT_MAX_ITER)?;

    let est_a = estimate_orders(m, &grid)?;
    let est_b = estimate_orders(n, &grid)?;
    let class_a = classify_with_estimate(m, &grid, &est_a, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)?;
    let class_b = classify_with_estimate(n, &grid, &est_b, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)?;

    let both_gpg = class_a.is_gpg && class_b.is_gpg;
    let swapped = match (class_a.order, class_b.order) {
        (Some(a), Some(b)) if both_gpg => a < b,
        _ => est_a.lower < est_b.lower,
    };
    let (m, n, est_m, est_n, class_m, class_n) = if swapped {
        (n, m, est_b, est_a, class_b, class_a)
    } else {
        (m, n, est_a, est_b, class_a, class_b)
    };

    let k = MeanExpr::invariant(m.clone(), n.clone());
    let est_k = estimate_orders(&k, &grid)?;
    let class_k = classify_with_estimate(&k, &grid, &est_k, DEFAULT_GPG_TOL, DEFAULT_CONST_TOL)?;

    let (check, pass, margin) = match (class_m.order, class_n.order) {
        (Some(ord_m), Some(ord_n)) if both_gpg => {
            if ord_m >= 1.0 - tol && ord_n <= tol {
                (Check::Excluded { ord_m, ord_n }, false, None)
            } else {
                let prediction = invariant_order_formula(ord_m, ord_n.min(ord_m))?;
                let dev = (est_k.lower - prediction)
                    .abs()
                    .max((est_k.upper - prediction).abs());
                (
                    Check::Law {
                        ord_m,
                        ord_n,
                        prediction,
                    },
                    dev <= tol,
                    Some(tol - dev),
                )
            }
        }
        _ => {
            let (lo_bound, uo_bound) =
                cor28_bounds(est_m.lower, est_m.upper, est_n.lower, est_n.upper);
            let tuple = OrderTuple {
                lo_m: est_m.lower,
                uo_m: est_m.upper,
                lo_n: est_n.lower,
                uo_n: est_n.upper,
                lo_k: est_k.lower,
                uo_k: est_k.upper,
            };
            let (emain_lower, emain_upper) = emain_bounds(&tuple);
            let mut margin = est_k.lower - lo_bound + tol;
            if let Some(ub) = uo_bound {
                margin = margin.min(ub + tol - est_k.upper);
            }
            (
                Check::Bounds {
                    lo_bound,
                    uo_bound,
                    emain_lower,
                    emain_upper,
                },
                margin >= 0.0,
                Some(margin),
            )
        }
    };

    let witkowski = match (class_m.constant, class_n.constant, class_k.order) {
        (Some(c_m), Some(c_n), Some(ord_k)) if class_k.is_pg => {
            let ord_m = class_m.order.unwrap_or(f64::NAN);
            let ord_n = class_n.order.unwrap_or(f64::NAN);
            Some(WitkowskiReport {
                c_m,
                c_n,
                product: witkowski_condition(c_m, c_n, ord_k),
                relation_lhs: ord_k * (1.0 - ord_m + ord_n),
                ord_n,
            })
        }
        _ => None,
    };

    Ok(VerificationReport {
        m: m.to_string(),
        n: n.to_string(),
        k: k.to_string(),
        swapped,
        contraction: contraction_check_seeded(m, n, CONTRACTION_SAMPLES, seed)?,
        log_ratio_bound: log_ratio_bound(m, n, &grid)?,
        estimate_m: est_m,
        estimate_n: est_n,
        estimate_k: est_k,
        class_m,
        class_n,
        class_k,
        check,
        pass,
        margin,
        tol,
        grid,
        witkowski,
    })
}
