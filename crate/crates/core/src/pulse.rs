//! Complex field envelopes sampled on a [`TimeGrid`].

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct PulseEnvelope {
    grid: TimeGrid,
    amplitude: Vec<Complex64>,
}

impl PulseEnvelope {
    pub fn new(grid: TimeGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}-point grid",
                amplitude.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitude })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            amplitude: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: TimeGrid, f: F) -> Self {
        Self {
            grid,
            amplitude: grid.times().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn into_amplitude(self) -> Vec<Complex64> {
        self.amplitude
    }

    /// Samples nearest to `t` by linear interpolation; zero outside the grid.
    pub fn sample(&self, t: f64) -> Complex64 {
        let x = (t - self.grid.t_min()) / self.grid.dt();
        if x < 0.0 || x > (self.grid.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(self.grid.len() - 2);
        let f = x - i as f64;
        self.amplitude[i] * (1.0 - f) + self.amplitude[i + 1] * f
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            amplitude: self.amplitude.iter().map(|&e| e * a).collect(),
        }
    }

    /// Copy rescaled to unit energy. A zero pulse is returned unchanged.
    pub fn normalized(&self) -> Self {
        let e = pulse_energy(self);
        if e > 0.0 {
            self.scaled(Complex64::new(1.0 / e.sqrt(), 0.0))
        } else {
            self.clone()
        }
    }

    /// ∫ conj(self)·other dt on a shared grid, trapezoidal.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("inner product of pulses on different grids".into()));
        }
        let n = self.amplitude.len();
        let dt = self.grid.dt();
        Ok(self
            .amplitude
            .iter()
            .zip(&other.amplitude)
            .enumerate()
            .map(|(i, (a, b))| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                a.conj() * b * (w * dt)
            })
            .sum())
    }

    /// |⟨a, b⟩|² / (‖a‖² ‖b‖²); zero if either pulse vanishes.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        let ab = self.inner(other)?;
        let (ea, eb) = (pulse_energy(self), pulse_energy(other));
        if ea == 0.0 || eb == 0.0 {
            return Ok(0.0);
        }
        Ok(ab.norm_sqr() / (ea * eb))
    }

    /// L2 distance between the unit-energy versions of two pulses.
    pub fn normalized_distance(&self, other: &Self) -> Result<f64> {
        let a = self.normalized();
        let b = other.normalized();
        let diff = PulseEnvelope {
            grid: a.grid,
            amplitude: a
                .amplitude
                .iter()
                .zip(&b.amplitude)
                .map(|(x, y)| x - y)
                .collect(),
        };
        if !a.grid.same_as(&b.grid) {
            return Err(Error::GridMismatch("distance between pulses on different grids".into()));
        }
        Ok(pulse_energy(&diff).sqrt())
    }
}

/// Trapezoidal Σ|E|²·dt over the pulse grid.
pub fn pulse_energy(p: &PulseEnvelope) -> f64 {
    let n = p.amplitude.len();
    if n == 0 {
        return 0.0;
    }
    let interior: f64 = p.amplitude[1..n - 1].iter().map(|e| e.norm_sqr()).sum();
    let ends = 0.5 * (p.amplitude[0].norm_sqr() + p.amplitude[n - 1].norm_sqr());
    (interior + ends) * p.grid.dt()
}

/// E(t) = √(2/T) e^{t/T} for t ≤ 0 and zero afterwards, rescaled to unit
/// discrete energy on `grid`.
pub fn exponential_input(gamma_t: f64, grid: TimeGrid) -> Result<PulseEnvelope> {
    if !(gamma_t > 0.0) || !gamma_t.is_finite() {
        return Err(invalid("gamma_t", format!("must be positive, got {gamma_t}")));
    }
    let tol = 1e-9 * grid.dt();
    let amp = (2.0 / gamma_t).sqrt();
    let p = PulseEnvelope::from_fn(grid, |t| {
        if t <= tol {
            Complex64::new(amp * (t.min(0.0) / gamma_t).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    if pulse_energy(&p) == 0.0 {
        return Err(invalid("grid", "grid holds no t <= 0 samples"));
    }
    Ok(p.normalized())
}

/// amplitude(t) → conj(amplitude(−t)) on the mirrored grid.
pub fn time_reverse(p: &PulseEnvelope) -> PulseEnvelope {
    PulseEnvelope {
        grid: p.grid.mirrored(),
        amplitude: p.amplitude.iter().rev().map(|e| e.conj()).collect(),
    }
}
