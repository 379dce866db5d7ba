//! Envelope functions `e` with `t <= e(t) <= 1` on `(0, 1)`, used by the
//! envelope mean `max(x,y) * e(min(x,y)/max(x,y))`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::error::{MeanError, Result};

/// Smallest log-abscissa at which the oscillating envelopes are evaluated.
/// Below it `1/t` exceeds the range where the sine phase is meaningful.
pub const PHASE_LIMIT_U: f64 = -650.0;

/// A sample `(u, log M(e^u, 1))` of a mean's cross-section in log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPoint {
    pub u: f64,
    pub logm: f64,
}

impl LogPoint {
    /// The finite-scale exponent `logm / u`.
    pub fn phi(&self) -> f64 {
        self.logm / self.u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeSpec {
    /// `e1(t) = t^(1/2 + sin(1/t)/2)`.
    E1,
    /// `e2(t) = (sqrt(t) - t)(1 + sin(pi/(2t)))/2 + t`.
    E2,
    Table(EnvelopeTable),
}

/// Tabulated envelope, interpolated linearly in `(ln t, ln e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTable {
    points: Vec<(f64, f64)>,
}

impl EnvelopeTable {
    /// Points are `(t, e(t))` with `0 < t < 1` and `t <= e(t) <= 1`; they are
    /// sorted by `t` and must have distinct abscissas.
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(MeanError::InvalidEnvelope("table is empty".into()));
        }
        for &(t, e) in &points {
            if !(t.is_finite() && e.is_finite()) || t <= 0.0 || t >= 1.0 {
                return Err(MeanError::InvalidEnvelope(format!(
                    "abscissa {t} outside (0, 1)"
                )));
            }
            if e < t || e > 1.0 {
                return Err(MeanError::InvalidEnvelope(format!(
                    "e({t}) = {e} violates t <= e(t) <= 1"
                )));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(MeanError::InvalidEnvelope("duplicate abscissa".into()));
        }
        Ok(EnvelopeTable { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn log_value(&self, u: f64) -> f64 {
        let (t0, e0) = self.points[0];
        let (lt0, le0) = (t0.ln(), e0.ln());
        let v = if u <= lt0 {
            // constant exponent below the first knot
            u * (le0 / lt0)
        } else {
            let knots = self
                .points
                .iter()
                .map(|&(t, e)| (t.ln(), e.ln()))
                .chain(std::iter::once((0.0, 0.0)));
            let mut prev = (lt0, le0);
            let mut out = 0.0;
            for (lt, le) in knots.skip(1) {
                if u <= lt {
                    let w = (u - prev.0) / (lt - prev.0);
                    out = prev.1 + w * (le - prev.1);
                    break;
                }
                prev = (lt, le);
            }
            out
        };
        v.clamp(u, 0.0)
    }
}

impl EnvelopeSpec {
    /// `ln e(e^u)` for `u <= 0`.
    pub fn log_value(&self, u: f64) -> Result<f64> {
        debug_assert!(u <= 0.0);
        if u == 0.0 {
            return Ok(0.0);
        }
        let v = match self {
            EnvelopeSpec::E1 => {
                check_phase(u)?;
                u * (0.5 + 0.5 * (-u).exp().sin())
            }
            EnvelopeSpec::E2 => {
                check_phase(u)?;
                let phase = FRAC_PI_2 * (-u).exp();
                u + (0.5 * (-0.5 * u).exp_m1() * (1.0 + phase.sin())).ln_1p()
            }
            EnvelopeSpec::Table(table) => table.log_value(u),
        };
        Ok(v.clamp(u, 0.0))
    }

    /// `e(t)` for `0 < t <= 1`.
    pub fn value(&self, t: f64) -> Result<f64> {
        if t >= 1.0 {
            return Ok(1.0);
        }
        let v = match self {
            EnvelopeSpec::E1 => {
                check_phase(t.ln())?;
                t.powf(0.5 + 0.5 * (1.0 / t).sin())
            }
            EnvelopeSpec::E2 => {
                check_phase(t.ln())?;
                0.5 * (t.sqrt() - t) * (1.0 + (PI / (2.0 * t)).sin()) + t
            }
            EnvelopeSpec::Table(table) => table.log_value(t.ln()).exp(),
        };
        Ok(v.clamp(t, 1.0))
    }

    pub fn is_oscillatory(&self) -> bool {
        matches!(self, EnvelopeSpec::E1 | EnvelopeSpec::E2)
    }

    /// Phase-exact sample points at the sine extremes, `count` per extreme,
    /// spread log-uniformly in `|u|` down to `u_floor`.
    pub fn probe_points(&self, count: usize, u_floor: f64) -> Vec<LogPoint> {
        // each family: abscissa 1/t = offset + step*k, and the exponent of t
        // reached there (logm = exponent * u)
        let families: &[(f64, f64, f64)] = match self {
            EnvelopeSpec::E1 => &[(FRAC_PI_2, 2.0 * PI, 1.0), (1.5 * PI, 2.0 * PI, 0.0)],
            EnvelopeSpec::E2 => &[(3.0, 4.0, 1.0), (1.0, 4.0, 0.5)],
            EnvelopeSpec::Table(_) => return Vec::new(),
        };
        let depth = (-u_floor).min(-PHASE_LIMIT_U);
        let mut out = Vec::new();
        for &(offset, step, exponent) in families {
            for k in probe_indices(offset, step, count, depth) {
                let u = -(offset + step * k).ln();
                out.push(LogPoint {
                    u,
                    logm: exponent * u,
                });
            }
        }
        out.sort_by(|a, b| b.u.total_cmp(&a.u));
        out
    }
}

fn probe_indices(offset: f64, step: f64, count: usize, depth: f64) -> Vec<f64> {
    let first = (offset + step).ln();
    if count == 0 || !(depth >= first) {
        return Vec::new();
    }
    let mut ks: Vec<f64> = Vec::with_capacity(count);
    for i in 0..count {
        let k = if i == 0 {
            1.0
        } else {
            let frac = i as f64 / (count - 1) as f64;
            let target = (first.ln() + frac * (depth.ln() - first.ln())).exp();
            let mut k = ((target.exp() - offset) / step).round().max(1.0);
            while k > 1.0 && (offset + step * k).ln() > depth {
                k = (k * 0.5).floor().max(1.0);
            }
            k
        };
        if ks.last().is_none_or(|&last| k > last) {
            ks.push(k);
        }
    }
    ks
}

fn check_phase(u: f64) -> Result<()> {
    if u < PHASE_LIMIT_U {
        Err(MeanError::PhaseRange {
            u,
            limit: PHASE_LIMIT_U,
        })
    } else {
        Ok(())
    }
}

impl fmt::Display for EnvelopeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeSpec::E1 => f.write_str("e1"),
            EnvelopeSpec::E2 => f.write_str("e2"),
            EnvelopeSpec::Table(table) => {
                f.write_str("table(")?;
                for (i, &(t, e)) in table.points.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    crate::expr::write_num(f, t)?;
                    f.write_str(",")?;
                    crate::expr::write_num(f, e)?;
                }
                f.write_str(")")
            }
        }
    }
}
