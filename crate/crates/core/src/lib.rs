//! Bivariate means in log coordinates: Gini means, the logarithmic mean,
//! oscillating envelopes, Gauss iteration for invariant means, and numerical
//! estimation of lower and upper orders near zero.
//!
//! A mean `M(x, y)` on positive reals is handled through its log form
//! `logm(u) = ln M(e^u, 1)` for `u <= 0`; homogeneity gives everything else.

pub mod cli;
pub mod envelope;
pub mod error;
pub mod eval;
pub mod expr;
pub mod grid;
pub mod invariant;
pub mod order;
pub mod parse;
pub mod theory;

pub use envelope::{EnvelopeSpec, EnvelopeTable, LogPoint, PHASE_LIMIT_U};
pub use error::{MeanError, Result};
pub use eval::{eval, eval_log, eval_log_pair, probe_points};
pub use expr::{format_mean, MeanExpr};
pub use grid::GridSpec;
pub use invariant::{
    contraction_check, gauss_iterate, gauss_iterate_log, invariance_defect, invariance_residual,
    log_ratio_bound, ratio_bound, ContractionReport, IterationResult,
};
pub use order::{
    classify_power_growth, estimate_from_samples, estimate_orders, gini_order, known_order,
    monotonicity_check, order_at_infinity, sample_phi, sample_psi, MonotonicityReport,
    OrderEstimate, PowerGrowthReport,
};
pub use parse::parse_mean;
pub use theory::{
    cor28_bounds, dl_leq, emain_bounds, invariant_order_formula, pales_leq, pales_m, pales_mu,
    verify_invariance_order, witkowski_condition, Check, OrderTuple, VerificationReport,
};
