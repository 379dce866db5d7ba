use serde::Serialize;

use crate::envelope::PHASE_LIMIT_U;
use crate::error::{MeanError, Result};
use crate::expr::MeanExpr;

/// Sampling plan for the cross-section in log coordinates: `points`
/// abscissas `u` with `|u|` log-uniform between `|u_start|` and `|u_end|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub u_start: f64,
    pub u_end: f64,
    pub points: usize,
    pub windows: usize,
    /// Phase-exact probes per sine extreme; 0 disables them.
    pub probes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            u_start: -1.0,
            u_end: -1e4,
            points: 4096,
            windows: 8,
            probes: 64,
        }
    }
}

impl GridSpec {
    /// Default grid, shortened to the envelope phase limit when needed.
    pub fn for_expr(expr: &MeanExpr) -> Self {
        let mut grid = GridSpec::default();
        if expr.contains_envelope() {
            grid.u_end = PHASE_LIMIT_U;
        }
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_start.is_finite() && self.u_end.is_finite()) {
            return Err(MeanError::InvalidGrid("bounds must be finite".into()));
        }
        if !(self.u_end < self.u_start && self.u_start < 0.0) {
            return Err(MeanError::InvalidGrid(format!(
                "need u_end < u_start < 0, got u_start = {}, u_end = {}",
                self.u_start, self.u_end
            )));
        }
        if self.windows < 2 {
            return Err(MeanError::InvalidGrid("need at least 2 windows".into()));
        }
        if self.points < 2 * self.windows {
            return Err(MeanError::InvalidGrid(format!(
                "need points >= 2 * windows, got {} points for {} windows",
                self.points, self.windows
            )));
        }
        Ok(())
    }

    /// Validated grid with `u_end` raised to the phase limit if any of the
    /// expressions contains an envelope.
    pub fn effective_for(&self, exprs: &[&MeanExpr]) -> Result<GridSpec> {
        self.validate()?;
        let mut grid = *self;
        if exprs.iter().any(|e| e.contains_envelope()) && grid.u_end < PHASE_LIMIT_U {
            grid.u_end = PHASE_LIMIT_U;
            grid.validate()?;
        }
        Ok(grid)
    }

    /// The sampling abscissas, ordered by increasing `|u|`.
    pub fn abscissas(&self) -> Vec<f64> {
        let (a, b) = ((-self.u_start).ln(), (-self.u_end).ln());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    self.u_start
                } else if i == self.points - 1 {
                    self.u_end
                } else {
                    -(a + (b - a) * i as f64 / last).exp()
                }
            })
            .collect()
    }

    /// Window index of a log-abscissa; windows have equal width in `ln|u|`.
    pub(crate) fn window_of(&self, u: f64) -> Option<usize> {
        let (a, b) = ((-self.u_start).ln(), (-self.u_end).ln());
        let s = u.abs().ln();
        // small slack so the endpoints themselves are kept
        let slack = 1e-12 * (b - a);
        if s < a - slack || s > b + slack {
            return None;
        }
        let frac = ((s - a) / (b - a)).clamp(0.0, 1.0);
        Some(((frac * self.windows as f64) as usize).min(self.windows - 1))
    }
}
