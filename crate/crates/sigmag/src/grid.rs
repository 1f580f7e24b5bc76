//! Uniform time grids.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform discretization of `[0, T]` with `steps` intervals.
///
/// Grid point `i` sits at `i * dt` for `i = 0..=steps`; the right endpoint is
/// reported as exactly `horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps < 1 {
            return Err(Error::InvalidArgument(format!(
                "steps must be at least 1, got {steps}"
            )));
        }
        Ok(TimeGrid {
            horizon,
            steps,
            dt: horizon / steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sqrt_dt(&self) -> f64 {
        self.dt.sqrt()
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        if i >= self.steps {
            self.horizon
        } else {
            i as f64 * self.dt
        }
    }

    /// Snap a time to the nearest grid index. The time must lie within half a
    /// step of `[0, horizon]`.
    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite time {t}")));
        }
        let raw = t / self.dt;
        let idx = raw.round();
        if idx < 0.0 || idx > self.steps as f64 {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside grid [0, {}]",
                self.horizon
            )));
        }
        Ok(idx as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_is_horizon_over_steps() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        assert_eq!(g.dt(), 0.001);
        assert!((g.dt() * g.steps() as f64 - g.horizon()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_single_step_grid() {
        let g = TimeGrid::new(2.0, 1).unwrap();
        assert_eq!(g.dt(), 2.0);
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(1), 2.0);
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
    }

    #[test]
    fn time_snapping() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        assert_eq!(g.index_of_time(0.25).unwrap(), 250);
        assert_eq!(g.index_of_time(1.0).unwrap(), 1000);
        assert!(g.index_of_time(1.5).is_err());
    }
}
