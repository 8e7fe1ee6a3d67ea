//! Physical-unit estimates for a crystal implementation: Zeeman splittings,
//! optimal input durations in seconds, and the energy of the control π-pulses.
//!
//! Crystal records are read from a versioned TOML file whose dimensional
//! fields carry explicit units. The reference Nd:YVO₄ record is compiled in.
//! Its dipole moment is not an independent literature value: it was
//! back-solved once from a quoted 600 μJ π-pulse energy at τ = 470 fs and a
//! 50 μm beam, so the π-pulse energy at that operating point is reproduced by
//! construction.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::error::{invalid, Error, Result};
use crate::line::LineShape;
use crate::optimize::{optimize_duration, DURATION_TOLERANCE};
use crate::scenario::{Direction, MediumScenario};

/// Bohr magneton in frequency units, Hz per tesla.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 13.996e9;
const HBAR: f64 = 1.054_571_817e-34;
const EPSILON_0: f64 = 8.854_187_812_8e-12;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const DEBYE: f64 = 3.335_640_952e-30;

/// Default ΓT bracket for duration searches.
pub const DEFAULT_BRACKET: (f64, f64) = (0.01, 1.0);

pub const REFERENCE_DATA: &str = include_str!("../data/crystals.toml");
pub const SUPPORTED_SCHEMA: u32 = 1;

pub const DIPOLE_NOTE: &str = "dipole moment back-solved from the 600 uJ / 470 fs / 50 um \
     operating point; the pi-pulse energy there is reproduced by construction";

/// A crystal in SI units. `inhom_fwhm` is an angular frequency equal to 2Γ.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    pub name: String,
    pub wavelength: f64,
    pub alpha: f64,
    pub length: f64,
    pub inhom_fwhm: f64,
    pub g_factors: Vec<f64>,
    pub dipole_moment: f64,
    pub beam_diameter: f64,
    pub rayleigh_range: Option<f64>,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wavelength", self.wavelength),
            ("alpha", self.alpha),
            ("length", self.length),
            ("inhom_fwhm", self.inhom_fwhm),
            ("dipole_moment", self.dipole_moment),
            ("beam_diameter", self.beam_diameter),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if let Some(z) = self.rayleigh_range {
            if !(z > 0.0) || !z.is_finite() {
                return Err(invalid("rayleigh_range", format!("must be positive, got {z}")));
            }
        }
        if self.g_factors.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(invalid("g_factors", "all g factors must be positive"));
        }
        Ok(())
    }

    pub fn alpha_l(&self) -> f64 {
        self.alpha * self.length
    }

    /// Inhomogeneous half-width Γ in rad/s.
    pub fn gamma(&self) -> f64 {
        self.inhom_fwhm / 2.0
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrystalFile {
    schema_version: u32,
    #[serde(default)]
    crystal: Vec<CrystalRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrystalRecord {
    name: String,
    wavelength: Quantity,
    alpha: Quantity,
    length: Quantity,
    inhom_fwhm: Quantity,
    g_factors: Vec<f64>,
    dipole_moment: Quantity,
    beam_diameter: Quantity,
    rayleigh_range: Option<Quantity>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Quantity {
    value: f64,
    unit: String,
}

#[derive(Clone, Copy)]
enum Dimension {
    Length,
    InverseLength,
    AngularFrequency,
    DipoleMoment,
}

impl Quantity {
    fn to_si(&self, field: &str, dim: Dimension) -> Result<f64> {
        let unit = self.unit.trim();
        let scale = match dim {
            Dimension::Length => match unit {
                "m" => Some(1.0),
                "cm" => Some(1e-2),
                "mm" => Some(1e-3),
                "um" | "μm" => Some(1e-6),
                "nm" => Some(1e-9),
                _ => None,
            },
            Dimension::InverseLength => match unit {
                "1/m" => Some(1.0),
                "1/cm" => Some(1e2),
                "1/mm" => Some(1e3),
                _ => None,
            },
            Dimension::AngularFrequency => match unit {
                "rad/s" => Some(1.0),
                "Hz" => Some(2.0 * PI),
                "kHz" => Some(2.0 * PI * 1e3),
                "MHz" => Some(2.0 * PI * 1e6),
                "GHz" => Some(2.0 * PI * 1e9),
                _ => None,
            },
            Dimension::DipoleMoment => match unit {
                "C m" | "C*m" | "C·m" => Some(1.0),
                "D" => Some(DEBYE),
                _ => None,
            },
        };
        scale
            .map(|s| self.value * s)
            .ok_or_else(|| Error::CrystalData(format!("unsupported unit `{unit}` for `{field}`")))
    }
}

impl CrystalRecord {
    fn into_spec(self) -> Result<CrystalSpec> {
        use Dimension::*;
        let spec = CrystalSpec {
            wavelength: self.wavelength.to_si("wavelength", Length)?,
            alpha: self.alpha.to_si("alpha", InverseLength)?,
            length: self.length.to_si("length", Length)?,
            inhom_fwhm: self.inhom_fwhm.to_si("inhom_fwhm", AngularFrequency)?,
            dipole_moment: self.dipole_moment.to_si("dipole_moment", DipoleMoment)?,
            beam_diameter: self.beam_diameter.to_si("beam_diameter", Length)?,
            rayleigh_range: self
                .rayleigh_range
                .map(|q| q.to_si("rayleigh_range", Length))
                .transpose()?,
            g_factors: self.g_factors,
            name: self.name,
        };
        spec.validate().map_err(|e| Error::CrystalData(format!("{}: {e}", spec.name)))?;
        Ok(spec)
    }
}

/// Parses a crystal data file; records keep their file order.
pub fn parse_crystals(text: &str) -> Result<Vec<CrystalSpec>> {
    let file: CrystalFile = toml::from_str(text).map_err(|e| Error::CrystalData(e.to_string()))?;
    if file.schema_version != SUPPORTED_SCHEMA {
        return Err(Error::CrystalData(format!(
            "schema_version {} is not supported (expected {SUPPORTED_SCHEMA})",
            file.schema_version
        )));
    }
    let specs = file
        .crystal
        .into_iter()
        .map(CrystalRecord::into_spec)
        .collect::<Result<Vec<_>>>()?;
    let mut seen = BTreeMap::new();
    for s in &specs {
        if seen.insert(s.name.as_str(), ()).is_some() {
            return Err(Error::CrystalData(format!("duplicate crystal `{}`", s.name)));
        }
    }
    Ok(specs)
}

pub fn load_crystals(path: &Path) -> Result<Vec<CrystalSpec>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::CrystalData(format!("{}: {e}", path.display())))?;
    parse_crystals(&text)
}

/// Looks up a crystal by name in the compiled-in reference data.
pub fn reference_crystal(name: &str) -> Result<CrystalSpec> {
    parse_crystals(REFERENCE_DATA)?
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::CrystalData(format!("no reference record named `{name}`")))
}

/// The Nd:YVO₄ reference record.
pub fn nd_yvo4() -> CrystalSpec {
    reference_crystal("Nd:YVO4").expect("reference data is valid")
}

/// Zeeman splitting g·μ_B·B in Hz.
pub fn zeeman_splitting(g_factor: f64, b_tesla: f64) -> Result<f64> {
    if !(b_tesla >= 0.0) || !b_tesla.is_finite() {
        return Err(invalid("B", format!("must be non-negative, got {b_tesla}")));
    }
    Ok(g_factor * BOHR_MAGNETON_HZ_PER_T * b_tesla)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDuration {
    pub alpha_l: f64,
    pub gamma_t_opt: f64,
    /// Intensity rise time T/2, in seconds.
    pub t_half: f64,
    pub eta_opt: f64,
}

/// Backward-retrieval duration optimum for the crystal, converted to seconds.
pub fn optimal_input_duration(spec: &CrystalSpec, line: LineShape, bracket: (f64, f64)) -> Result<InputDuration> {
    spec.validate()?;
    let scenario = MediumScenario::new(spec.alpha_l(), bracket.0, line, Direction::Backward)?;
    let opt = optimize_duration(&scenario, bracket, DURATION_TOLERANCE)?;
    Ok(InputDuration {
        alpha_l: spec.alpha_l(),
        gamma_t_opt: opt.gamma_t_opt,
        t_half: opt.gamma_t_opt / spec.gamma() / 2.0,
        eta_opt: opt.eta_opt,
    })
}

/// Energy in joules of a resonant square π-pulse of duration `tau` seconds
/// over a flat-top disc of the crystal's beam diameter.
///
/// The area condition ℘E₀τ/ħ = π fixes the peak field E₀, the intensity is
/// ε₀cE₀²/2, and the energy is intensity × πd²/4 × τ, so it scales as
/// d²/(℘²τ).
pub fn pi_pulse_energy(spec: &CrystalSpec, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    spec.validate()?;
    let field = PI * HBAR / (spec.dipole_moment * tau);
    let intensity = 0.5 * EPSILON_0 * SPEED_OF_LIGHT * field * field;
    let area = PI * spec.beam_diameter * spec.beam_diameter / 4.0;
    Ok(intensity * area * tau)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub crystal: String,
    pub line: LineShape,
    pub alpha_l: f64,
    pub gamma_t_opt: f64,
    pub t_half: f64,
    pub pi_pulse_duration: f64,
    pub pi_pulse_energy: f64,
    /// τ/(T/2): share of the stored light re-emitted during a π-pulse.
    pub control_loss_estimate: f64,
    /// Duration-optimized memory efficiency before the control loss.
    pub eta_memory: f64,
    pub predicted_eta: f64,
    pub rayleigh_range: Option<f64>,
    pub note: &'static str,
}

/// Full estimate with the π-pulse `tau_ratio` times the intensity rise time
/// T/2 of the optimal input.
pub fn feasibility_report(spec: &CrystalSpec, line: LineShape, tau_ratio: f64) -> Result<FeasibilityReport> {
    feasibility_report_in(spec, line, tau_ratio, DEFAULT_BRACKET)
}

pub fn feasibility_report_in(
    spec: &CrystalSpec,
    line: LineShape,
    tau_ratio: f64,
    bracket: (f64, f64),
) -> Result<FeasibilityReport> {
    if !(tau_ratio > 0.0 && tau_ratio <= 0.5) {
        return Err(invalid("tau_ratio", format!("must lie in (0, 0.5], got {tau_ratio}")));
    }
    let d = optimal_input_duration(spec, line, bracket)?;
    let tau = tau_ratio * d.t_half;
    let loss = tau / d.t_half;
    Ok(FeasibilityReport {
        crystal: spec.name.clone(),
        line,
        alpha_l: d.alpha_l,
        gamma_t_opt: d.gamma_t_opt,
        t_half: d.t_half,
        pi_pulse_duration: tau,
        pi_pulse_energy: pi_pulse_energy(spec, tau)?,
        control_loss_estimate: loss,
        eta_memory: d.eta_opt,
        predicted_eta: d.eta_opt * (1.0 - loss),
        rayleigh_range: spec.rayleigh_range,
        note: DIPOLE_NOTE,
    })
}

/// A redesigned crystal: new length and absorption coefficient, with the beam
/// refocused so that the confocal parameter keeps its ratio to the crystal
/// length. For a Gaussian beam z_R = πw₀²/λ, so d² scales with the length.
pub fn refocused(spec: &CrystalSpec, length: f64, alpha_l: f64) -> Result<CrystalSpec> {
    if !(length > 0.0) || !(alpha_l > 0.0) {
        return Err(invalid("length", "length and optical depth must be positive"));
    }
    let ratio = length / spec.length;
    let out = CrystalSpec {
        name: format!("{} (L = {:.3} mm, aL = {alpha_l})", spec.name, length * 1e3),
        alpha: alpha_l / length,
        length,
        beam_diameter: spec.beam_diameter * ratio.sqrt(),
        rayleigh_range: spec.rayleigh_range.map(|z| z * ratio),
        ..spec.clone()
    };
    out.validate()?;
    Ok(out)
}

/// π-pulse energy of `baseline` over that of `variant`, each at `tau_ratio`
/// times its own optimal T/2: how many times less energy the variant needs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyComparison {
    pub baseline: FeasibilityReport,
    pub variant: FeasibilityReport,
    pub reduction: f64,
}

pub fn compare_designs(
    baseline: &CrystalSpec,
    variant: &CrystalSpec,
    line: LineShape,
    tau_ratio: f64,
) -> Result<EnergyComparison> {
    let b = feasibility_report(baseline, line, tau_ratio)?;
    let v = feasibility_report(variant, line, tau_ratio)?;
    Ok(EnergyComparison {
        reduction: b.pi_pulse_energy / v.pi_pulse_energy,
        baseline: b,
        variant: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_record_loads() {
        let s = nd_yvo4();
        assert!((s.alpha_l() - 41.0).abs() < 1e-9);
        assert!((s.wavelength - 879.705e-9).abs() < 1e-15);
        assert!((s.gamma() - PI * 2.1e9).abs() < 1e-3);
        assert_eq!(s.g_factors, vec![2.36, 0.915]);
    }

    #[test]
    fn units_round_trip() {
        let text = REFERENCE_DATA
            .replace("{ value = 41.0, unit = \"1/cm\" }", "{ value = 4100.0, unit = \"1/m\" }")
            .replace("{ value = 1.0, unit = \"cm\" }", "{ value = 10.0, unit = \"mm\" }");
        assert_ne!(text, REFERENCE_DATA);
        let s = &parse_crystals(&text).unwrap()[0];
        assert!((s.alpha_l() - nd_yvo4().alpha_l()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_data() {
        let unknown_unit = REFERENCE_DATA.replace("unit = \"nm\"", "unit = \"furlong\"");
        assert!(parse_crystals(&unknown_unit).is_err());
        let unknown_key = REFERENCE_DATA.replace("g_factors", "colour = 1\ng_factors");
        assert!(parse_crystals(&unknown_key).is_err());
        let zero_length = REFERENCE_DATA.replace("{ value = 1.0, unit = \"cm\" }", "{ value = 0.0, unit = \"cm\" }");
        assert!(parse_crystals(&zero_length).is_err());
        let version = REFERENCE_DATA.replace("schema_version = 1", "schema_version = 2");
        assert!(parse_crystals(&version).is_err());
    }

    #[test]
    fn pi_pulse_energy_at_operating_point() {
        let e = pi_pulse_energy(&nd_yvo4(), 470e-15).unwrap();
        assert!((e - 600e-6).abs() < 1e-9, "{e}");
        assert!(pi_pulse_energy(&nd_yvo4(), 0.0).is_err());
    }

    #[test]
    fn zeeman() {
        assert!((zeeman_splitting(2.36, 1.0).unwrap() - 33.03e9).abs() < 0.01e9);
        assert_eq!(zeeman_splitting(3.0, 0.0).unwrap(), 0.0);
        assert!(zeeman_splitting(1.0, -1.0).is_err());
    }

    #[test]
    fn refocusing_scales_diameter() {
        let s = nd_yvo4();
        let v = refocused(&s, 2.1e-3, 17.0).unwrap();
        assert!((v.alpha_l() - 17.0).abs() < 1e-12);
        let r = v.beam_diameter / s.beam_diameter;
        assert!((r * r - 0.21).abs() < 1e-12);
    }
}
