//! Closed-form and quadrature efficiencies for a Lorentzian line driven by
//! the exponentially rising input E(t) = √(2/T) e^{t/T}, t ≤ 0.
//!
//! Spectra use the unitary transform E(ω) = (2π)^{-1/2} ∫ dt e^{iωt} E(t), for
//! which the input transform is √(T/π) / (1 + iωT) and has unit energy. With
//! this convention the backward efficiency tends to 1/(1 + 2ΓT) as αL → ∞
//! without any extra prefactor.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
    Asymptote,
    Taylor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint {
    pub alpha_l: f64,
    pub gamma_t: f64,
    pub value: f64,
    pub method: Method,
}

/// Absolute tolerance of the frequency quadratures.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Reported as non-convergence when the error estimate exceeds this.
pub const QUADRATURE_LIMIT: f64 = 1e-4;

fn check(alpha_l: f64, gamma_t: f64) -> Result<()> {
    if !(alpha_l >= 0.0) || !alpha_l.is_finite() {
        return Err(invalid("alpha_l", format!("must be non-negative, got {alpha_l}")));
    }
    if !(gamma_t > 0.0) || !gamma_t.is_finite() {
        return Err(invalid("gamma_t", format!("must be positive, got {gamma_t}")));
    }
    Ok(())
}

/// Energy not transmitted by the medium: 1 − exp(−αL ΓT / (1 + ΓT)).
pub fn absorption_efficiency(alpha_l: f64, gamma_t: f64) -> Result<f64> {
    check(alpha_l, gamma_t)?;
    Ok(-(-alpha_l * gamma_t / (1.0 + gamma_t)).exp_m1())
}

/// Absorption weighted by the dephasing factor 1 / (1 + ΓT).
pub fn coherent_absorption_efficiency(alpha_l: f64, gamma_t: f64) -> Result<f64> {
    Ok(absorption_efficiency(alpha_l, gamma_t)? / (1.0 + gamma_t))
}

/// Unitary transform of the exponential input.
pub fn input_spectrum(gamma_t: f64, omega: f64) -> Complex64 {
    (gamma_t / PI).sqrt() / Complex64::new(1.0, omega * gamma_t)
}

/// exp(αL / (2(iω − 1))), split into real and imaginary exponent parts.
fn medium_factor(alpha_l: f64, omega: f64) -> Complex64 {
    let d = 1.0 + omega * omega;
    let re = -alpha_l / (2.0 * d);
    let im = -alpha_l * omega / (2.0 * d);
    Complex64::from_polar(re.exp(), im)
}

fn storage_factor(alpha_l: f64, gamma_t: f64) -> f64 {
    (-alpha_l * gamma_t / (2.0 * (1.0 + gamma_t))).exp()
}

/// Field leaving z = 0 after backward read-out, at frequency ω.
pub fn backward_output_spectrum(alpha_l: f64, gamma_t: f64, omega: f64) -> Complex64 {
    let s = 1.0 + 2.0 * gamma_t;
    let bracket = 1.0 - medium_factor(alpha_l, omega) * storage_factor(alpha_l, gamma_t);
    -input_spectrum(gamma_t, -omega / s) * bracket / s
}

/// Field leaving z = αL after forward read-out, at frequency ω.
///
/// Written as E_in(ω)·(e^{B} − e^{−a}), the same expression as
/// e^{B} E_in(ω) (1 − e^{−B} e^{−a}) without the overflowing e^{−B}.
pub fn forward_output_spectrum(alpha_l: f64, gamma_t: f64, omega: f64) -> Complex64 {
    input_spectrum(gamma_t, omega) * (medium_factor(alpha_l, omega) - storage_factor(alpha_l, gamma_t))
}

/// Output / input energy for backward read-out, by quadrature over ω.
///
/// The substitution ω = ((1 + 2ΓT)/T) tan θ absorbs the input spectrum, so
/// the integrand on (−π/2, π/2) is bounded and smooth and the infinite
/// frequency range is covered without truncation.
pub fn backward_efficiency(alpha_l: f64, gamma_t: f64) -> Result<f64> {
    check(alpha_l, gamma_t)?;
    if alpha_l == 0.0 {
        return Ok(0.0);
    }
    let s = 1.0 + 2.0 * gamma_t;
    let c = storage_factor(alpha_l, gamma_t);
    let integrand = |theta: f64| {
        let omega = s / gamma_t * theta.tan();
        (1.0 - medium_factor(alpha_l, omega) * c).norm_sqr()
    };
    let r = integrate(integrand, -FRAC_PI_2, FRAC_PI_2, QUADRATURE_TOLERANCE, 20_000)?;
    Ok(r.value / (PI * s))
}

/// Output / input energy for forward read-out, by quadrature over ω.
pub fn forward_efficiency(alpha_l: f64, gamma_t: f64) -> Result<f64> {
    check(alpha_l, gamma_t)?;
    if alpha_l == 0.0 {
        return Ok(0.0);
    }
    let c = storage_factor(alpha_l, gamma_t);
    let integrand = |theta: f64| {
        let omega = theta.tan() / gamma_t;
        (medium_factor(alpha_l, omega) - c).norm_sqr()
    };
    let r = integrate(integrand, -FRAC_PI_2, FRAC_PI_2, QUADRATURE_TOLERANCE, 20_000)?;
    Ok(r.value / PI)
}

/// Large-depth limit of the backward efficiency.
pub fn backward_efficiency_asymptote(gamma_t: f64) -> Result<f64> {
    check(0.0, gamma_t)?;
    Ok(1.0 / (1.0 + 2.0 * gamma_t))
}

/// First-order expansion for αL ΓT ≪ 1.
pub fn backward_efficiency_lowdepth(alpha_l: f64, gamma_t: f64) -> Result<f64> {
    check(alpha_l, gamma_t)?;
    let x = alpha_l / (2.0 * (1.0 + gamma_t));
    Ok(gamma_t * x * x)
}

/// Duration maximizing the squared coherent absorption: 1 / (1 + αL/4).
pub fn optimal_gamma_t(alpha_l: f64) -> Result<f64> {
    check(alpha_l, 1.0)?;
    Ok(1.0 / (1.0 + alpha_l / 4.0))
}

/// Backward efficiency at the heuristic optimal duration.
pub fn optimized_backward_efficiency(alpha_l: f64) -> Result<f64> {
    check(alpha_l, 1.0)?;
    let q = alpha_l / 4.0;
    let ratio = (1.0 + q) / (2.0 + q);
    let absorbed = -(-alpha_l / (2.0 + q)).exp_m1();
    Ok(ratio * ratio * absorbed * absorbed)
}

pub fn evaluate(alpha_l: f64, gamma_t: f64, method: Method) -> Result<EfficiencyPoint> {
    let value = match method {
        Method::ClosedForm => optimized_backward_efficiency(alpha_l)?,
        Method::Quadrature => backward_efficiency(alpha_l, gamma_t)?,
        Method::Asymptote => backward_efficiency_asymptote(gamma_t)?,
        Method::Taylor => backward_efficiency_lowdepth(alpha_l, gamma_t)?,
    };
    Ok(EfficiencyPoint {
        alpha_l,
        gamma_t,
        value,
        method,
    })
}
