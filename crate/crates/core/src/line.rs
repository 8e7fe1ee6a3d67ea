//! Inhomogeneous line shapes and their discrete detuning quadratures.
//!
//! Frequencies are measured in units of the inhomogeneous half-width Γ, so
//! both line shapes have a full width at half maximum of exactly 2.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Spectral distribution n(Δ) of the atomic transition frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineShape {
    /// n(Δ) = 1 / (π (1 + Δ²)).
    Lorentzian,
    /// Normal density with FWHM 2.
    Gaussian,
}

impl LineShape {
    /// Standard deviation of the Gaussian line with FWHM 2.
    pub fn gaussian_sigma() -> f64 {
        1.0 / (2.0 * LN_2).sqrt()
    }

    pub fn density(self, delta: f64) -> f64 {
        match self {
            LineShape::Lorentzian => 1.0 / (PI * (1.0 + delta * delta)),
            LineShape::Gaussian => {
                let s = Self::gaussian_sigma();
                (-(delta * delta) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())
            }
        }
    }

    /// Exact dephasing kernel ∫ n(Δ) e^{-iΔt} dΔ (real for both symmetric lines).
    pub fn dephasing_kernel(self, t: f64) -> f64 {
        match self {
            LineShape::Lorentzian => (-t.abs()).exp(),
            LineShape::Gaussian => {
                let s = Self::gaussian_sigma();
                (-0.5 * s * s * t * t).exp()
            }
        }
    }

    /// Field coupling per unit optical depth, fixed so that a spectrally
    /// narrow resonant probe has intensity transmission e^{-αL}.
    ///
    /// On resonance the medium response is iπ n(0), so the amplitude decays at
    /// κ π n(0) per unit depth and must equal 1/2.
    pub fn coupling(self) -> f64 {
        1.0 / (2.0 * PI * self.density(0.0))
    }

    pub fn name(self) -> &'static str {
        match self {
            LineShape::Lorentzian => "lorentzian",
            LineShape::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for LineShape {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorentzian" | "lorentz" => Ok(LineShape::Lorentzian),
            "gaussian" | "gauss" => Ok(LineShape::Gaussian),
            other => Err(invalid("line", format!("unknown line shape `{other}`"))),
        }
    }
}

impl std::fmt::Display for LineShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Nodes and weights discretizing ∫ n(Δ) f(Δ) dΔ.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningQuadrature {
    line: LineShape,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DetuningQuadrature {
    pub fn line(&self) -> LineShape {
        self.line
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w * f(d))
            .sum()
    }

    /// Σ wᵢ e^{-iΔᵢt}.
    pub fn kernel(&self, t: f64) -> Complex64 {
        self.integrate(|d| Complex64::from_polar(1.0, -d * t))
    }

    pub fn moment(&self, power: i32) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w * d.powi(power))
            .sum()
    }
}

/// Discretizes the line shape into `n_delta` detuning classes.
///
/// The Lorentzian uses Δ = tan θ with midpoint nodes on (−π/2, π/2), where
/// every node carries weight 1/n. The Gaussian uses Gauss–Hermite nodes
/// rescaled to FWHM 2.
pub fn sample_distribution(line: LineShape, n_delta: usize) -> Result<DetuningQuadrature> {
    if n_delta < 2 {
        return Err(invalid("n_delta", format!("need at least 2 classes, got {n_delta}")));
    }
    let (nodes, weights) = match line {
        LineShape::Lorentzian => {
            let h = PI / n_delta as f64;
            let nodes = (0..n_delta)
                .map(|k| (-FRAC_PI_2 + (k as f64 + 0.5) * h).tan())
                .collect();
            (nodes, vec![1.0 / n_delta as f64; n_delta])
        }
        LineShape::Gaussian => {
            let (x, w) = gauss_hermite(n_delta);
            let scale = std::f64::consts::SQRT_2 * LineShape::gaussian_sigma();
            let norm = PI.sqrt();
            (
                x.iter().map(|&x| x * scale).collect(),
                w.iter().map(|&w| w / norm).collect(),
            )
        }
    };
    Ok(DetuningQuadrature {
        line,
        nodes,
        weights,
    })
}

/// Gauss–Hermite rule for weight e^{-x²}, nodes ascending.
///
/// Each non-negative root is isolated by bisection on the Sturm count of the
/// Jacobi matrix (robust at any order), then polished by Newton steps on the
/// orthonormal recursion, which also yields the weight.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let bound = (2.0 * n as f64 + 1.0).sqrt();
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n / 2;
    let mut lo = 0.0;
    for k in half..n {
        // k-th smallest eigenvalue: count(< z) ≤ k below it, > k above it.
        let (mut a, mut b) = (lo, bound);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(mid, n) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        let mut z = 0.5 * (a + b);
        let mut eval = hermite_eval(z, n);
        for _ in 0..3 {
            let step = eval.0 / eval.1;
            if !step.is_finite() || (z - step) <= a - (b - a) || (z - step) >= b + (b - a) {
                break;
            }
            z -= step;
            eval = hermite_eval(z, n);
        }
        if n % 2 == 1 && k == half {
            z = 0.0;
            eval = hermite_eval(0.0, n);
        }
        let (_, pp, log_scale) = eval;
        x[k] = z;
        w[k] = 2.0 / (pp * pp) * (-2.0 * log_scale).exp();
        x[n - 1 - k] = -z;
        w[n - 1 - k] = w[k];
        lo = z;
    }
    (x, w)
}

/// Eigenvalues of the Hermite Jacobi matrix (zero diagonal, off-diagonal
/// √(j/2)) lying below `z`.
fn sturm_count(z: f64, n: usize) -> usize {
    let mut count = 0;
    let mut q = -z;
    if q < 0.0 {
        count += 1;
    }
    for j in 1..n {
        let q_prev = if q == 0.0 { f64::EPSILON } else { q };
        q = -z - (j as f64 / 2.0) / q_prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Orthonormal Hermite value p_n(z) and derivative, both divided by
/// e^{log_scale} to stay finite.
fn hermite_eval(z: f64, n: usize) -> (f64, f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    let mut log_scale = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p2 *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, log_scale)
}
