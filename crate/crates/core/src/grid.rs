//! Uniform time grids in units of 1/Γ.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    dt: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(invalid("n_points", format!("need at least 2 points, got {n_points}")));
        }
        if !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(invalid("t_max", format!("empty interval [{t_min}, {t_max}]")));
        }
        Ok(Self {
            t_min,
            dt: (t_max - t_min) / (n_points - 1) as f64,
            n_points,
        })
    }

    pub fn with_step(t_min: f64, dt: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(invalid("n_points", format!("need at least 2 points, got {n_points}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", format!("step must be positive, got {dt}")));
        }
        Ok(Self { t_min, dt, n_points })
    }

    /// Grid ending exactly at t = 0 with `steps` intervals of width `dt`.
    pub fn ending_at_zero(dt: f64, steps: usize) -> Result<Self> {
        Self::with_step(-(steps as f64) * dt, dt, steps + 1)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_min + (self.n_points - 1) as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }

    /// The grid reflected through t = 0.
    pub fn mirrored(&self) -> Self {
        Self {
            t_min: -self.t_max(),
            dt: self.dt,
            n_points: self.n_points,
        }
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t_min - other.t_min).abs() <= 1e-9 * self.dt
    }
}

/// Symmetric grid over [−W·T, +W·T] for T = `gamma_t` (Γ = 1).
pub fn make_time_grid(gamma_t: f64, window_factor: f64, n_points: usize) -> Result<TimeGrid> {
    if !(gamma_t > 0.0) || !gamma_t.is_finite() {
        return Err(invalid("gamma_t", format!("must be positive, got {gamma_t}")));
    }
    if !(window_factor >= 15.0) {
        return Err(invalid(
            "window_factor",
            format!("must be at least 15, got {window_factor}"),
        ));
    }
    if n_points < 16 {
        return Err(invalid("n_points", format!("need at least 16 points, got {n_points}")));
    }
    let half = window_factor * gamma_t;
    TimeGrid::new(-half, half, n_points)
}
