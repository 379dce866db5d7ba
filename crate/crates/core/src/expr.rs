//! Mean-expression syntax tree and its canonical text form.

use std::fmt;

use crate::envelope::EnvelopeSpec;

/// A homogeneous symmetric bivariate mean, as a syntax tree.
///
/// Every node denotes a function on positive pairs that lies between
/// `min(x, y)` and `max(x, y)`. Aliases such as `arith` or `power(p)` are
/// expanded by the parser and never appear here.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanExpr {
    /// Gini mean `G_{p,q}`; `G_{p,0}` is the `p`-th power mean.
    Gini { p: f64, q: f64 },
    /// Logarithmic mean `(x - y) / (ln x - ln y)`.
    Log,
    Min,
    Max,
    /// `max(x,y) * e(min(x,y) / max(x,y))` for an envelope `e`.
    Envelope(EnvelopeSpec),
    /// `K(M(x,y), N(x,y))`.
    Compose {
        outer: Box<MeanExpr>,
        left: Box<MeanExpr>,
        right: Box<MeanExpr>,
    },
    /// The `(M,N)`-invariant mean, the common limit of Gauss iteration.
    Invariant {
        left: Box<MeanExpr>,
        right: Box<MeanExpr>,
    },
}

impl MeanExpr {
    pub fn gini(p: f64, q: f64) -> Self {
        MeanExpr::Gini { p, q }
    }

    pub fn power(p: f64) -> Self {
        MeanExpr::Gini { p, q: 0.0 }
    }

    pub fn arithmetic() -> Self {
        MeanExpr::gini(1.0, 0.0)
    }

    pub fn geometric() -> Self {
        MeanExpr::gini(0.0, 0.0)
    }

    pub fn harmonic() -> Self {
        MeanExpr::gini(0.0, -1.0)
    }

    pub fn quadratic() -> Self {
        MeanExpr::gini(2.0, 0.0)
    }

    pub fn compose(outer: MeanExpr, left: MeanExpr, right: MeanExpr) -> Self {
        MeanExpr::Compose {
            outer: Box::new(outer),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn invariant(left: MeanExpr, right: MeanExpr) -> Self {
        MeanExpr::Invariant {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// True if an envelope node occurs anywhere in the tree.
    pub fn contains_envelope(&self) -> bool {
        match self {
            MeanExpr::Envelope(_) => true,
            MeanExpr::Compose { outer, left, right } => {
                outer.contains_envelope() || left.contains_envelope() || right.contains_envelope()
            }
            MeanExpr::Invariant { left, right } => {
                left.contains_envelope() || right.contains_envelope()
            }
            _ => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            MeanExpr::Compose { outer, left, right } => 1 + outer.size() + left.size() + right.size(),
            MeanExpr::Invariant { left, right } => 1 + left.size() + right.size(),
            _ => 1,
        }
    }
}

/// Shortest round-trip decimal without exponent, so the text stays inside
/// the grammar's `num` production.
pub(crate) fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == 0.0 {
        // -0 would round-trip as 0 anyway
        return f.write_str("0");
    }
    write!(f, "{}", v)
}

impl fmt::Display for MeanExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanExpr::Gini { p, q } => {
                f.write_str("gini(")?;
                write_num(f, *p)?;
                f.write_str(",")?;
                write_num(f, *q)?;
                f.write_str(")")
            }
            MeanExpr::Log => f.write_str("log"),
            MeanExpr::Min => f.write_str("min"),
            MeanExpr::Max => f.write_str("max"),
            MeanExpr::Envelope(spec) => write!(f, "env({})", spec),
            MeanExpr::Compose { outer, left, right } => {
                write!(f, "compose({},{},{})", outer, left, right)
            }
            MeanExpr::Invariant { left, right } => write!(f, "invariant({},{})", left, right),
        }
    }
}

/// Canonical text of an expression; `parse_mean(&format_mean(e)) == e`.
pub fn format_mean(expr: &MeanExpr) -> String {
    expr.to_string()
}
