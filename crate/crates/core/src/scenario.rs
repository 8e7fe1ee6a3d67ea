//! Dimensionless medium description: optical depth, pulse duration, line
//! shape, retrieval direction and numerical resolution.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::TimeGrid;
use crate::line::{sample_distribution, DetuningQuadrature, LineShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl std::str::FromStr for Direction {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(invalid("direction", format!("unknown direction `{other}`"))),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// Numerical resolution of a memory run.
///
/// The time step is T / `samples_per_t`, capped at `max_dt` (units of 1/Γ)
/// because the re-emitted field of a dense medium varies faster than the
/// input when T is long. Each half of the time axis spans
/// max(`window_factor`·T, `tail`) so that both the exponential input and the
/// free-induction tail, which decays on the dephasing time 1/Γ, fit inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Resolution {
    pub n_z: usize,
    pub n_delta: usize,
    pub samples_per_t: usize,
    pub max_dt: f64,
    pub window_factor: f64,
    pub tail: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self::for_line(LineShape::Lorentzian)
    }
}

impl Resolution {
    pub fn for_line(line: LineShape) -> Self {
        match line {
            // The Lorentzian wings need many classes: a coarse detuning
            // grid rephases on a time ~n/Δ² and re-emits spuriously.
            LineShape::Lorentzian => Self {
                n_z: 100,
                n_delta: 2048,
                samples_per_t: 16,
                max_dt: 0.02,
                window_factor: 15.0,
                tail: 5.0,
            },
            LineShape::Gaussian => Self {
                n_z: 100,
                n_delta: 64,
                samples_per_t: 16,
                max_dt: 0.02,
                window_factor: 15.0,
                tail: 4.5,
            },
        }
    }

    /// Every resolution doubled (the tail horizon is a physical time and
    /// stays fixed).
    pub fn refined(&self) -> Self {
        Self {
            n_z: 2 * self.n_z - 1,
            n_delta: 2 * self.n_delta,
            samples_per_t: 2 * self.samples_per_t,
            max_dt: self.max_dt / 2.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_z < 2 {
            return Err(invalid("n_z", format!("need at least 2 points, got {}", self.n_z)));
        }
        if self.n_delta < 2 {
            return Err(invalid("n_delta", format!("need at least 2 classes, got {}", self.n_delta)));
        }
        if self.samples_per_t < 4 {
            return Err(invalid(
                "samples_per_t",
                format!("need at least 4 samples per T, got {}", self.samples_per_t),
            ));
        }
        if !(self.max_dt > 0.0) {
            return Err(invalid("max_dt", format!("must be positive, got {}", self.max_dt)));
        }
        if !(self.window_factor >= 15.0) {
            return Err(invalid(
                "window_factor",
                format!("must be at least 15, got {}", self.window_factor),
            ));
        }
        if !(self.tail >= 0.0) || !self.tail.is_finite() {
            return Err(invalid("tail", format!("must be non-negative, got {}", self.tail)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumScenario {
    pub alpha_l: f64,
    pub gamma_t: f64,
    pub line: LineShape,
    pub direction: Direction,
    pub resolution: Resolution,
}

impl MediumScenario {
    pub fn new(alpha_l: f64, gamma_t: f64, line: LineShape, direction: Direction) -> Result<Self> {
        Self::with_resolution(alpha_l, gamma_t, line, direction, Resolution::for_line(line))
    }

    pub fn with_resolution(
        alpha_l: f64,
        gamma_t: f64,
        line: LineShape,
        direction: Direction,
        resolution: Resolution,
    ) -> Result<Self> {
        let s = Self {
            alpha_l,
            gamma_t,
            line,
            direction,
            resolution,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_l >= 0.0) || !self.alpha_l.is_finite() {
            return Err(invalid("alpha_l", format!("must be non-negative, got {}", self.alpha_l)));
        }
        if !(self.gamma_t > 0.0) || !self.gamma_t.is_finite() {
            return Err(invalid("gamma_t", format!("must be positive, got {}", self.gamma_t)));
        }
        self.resolution.validate()
    }

    pub fn with_gamma_t(&self, gamma_t: f64) -> Result<Self> {
        let s = Self { gamma_t, ..*self };
        s.validate()?;
        Ok(s)
    }

    pub fn with_alpha_l(&self, alpha_l: f64) -> Result<Self> {
        let s = Self { alpha_l, ..*self };
        s.validate()?;
        Ok(s)
    }

    pub fn refined(&self) -> Self {
        Self {
            resolution: self.resolution.refined(),
            ..*self
        }
    }

    pub fn dt(&self) -> f64 {
        (self.gamma_t / self.resolution.samples_per_t as f64).min(self.resolution.max_dt)
    }

    /// Length of each half of the time axis, in units of 1/Γ.
    pub fn horizon(&self) -> f64 {
        (self.resolution.window_factor * self.gamma_t).max(self.resolution.tail)
    }

    /// The input grid [−H, 0]; retrieval runs on its mirror image [0, H].
    pub fn input_grid(&self) -> TimeGrid {
        let steps = (self.horizon() / self.dt()).ceil() as usize;
        TimeGrid::ending_at_zero(self.dt(), steps.max(1))
            .expect("validated scenario yields a valid grid")
    }

    /// Detuning classes actually used: the configured count, raised when
    /// needed so that the discrete spectrum cannot rephase during the run.
    /// Node spacing δ near line centre revives the coherence after 2π/δ,
    /// which must exceed twice the 2H span of absorption plus retrieval.
    pub fn n_delta(&self) -> usize {
        let h = self.horizon();
        let floor = match self.line {
            // tangent nodes: δ = π/n
            LineShape::Lorentzian => 2.0 * h,
            // Gauss-Hermite nodes: δ ≈ πσ/√n
            LineShape::Gaussian => {
                let s = LineShape::gaussian_sigma();
                4.0 * s * s * h * h
            }
        };
        self.resolution.n_delta.max(floor.ceil() as usize)
    }

    pub fn quadrature(&self) -> DetuningQuadrature {
        sample_distribution(self.line, self.n_delta())
            .expect("validated scenario has n_delta >= 2")
    }
}
