//! Run configuration: a strict TOML file merged with command-line flags.
//!
//! Every key is optional and unknown keys are rejected. Flags override the
//! file. The merged [`RunConfig`] is fully validated before any work starts.

use std::path::{Path, PathBuf};

use fidmem::{Direction, LineShape, MediumScenario, Resolution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Analytic,
    Simulate,
    OptimizeDuration,
    OptimizeShape,
    Feasibility,
    Figure,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Simulate => "simulate",
            Mode::OptimizeDuration => "optimize-duration",
            Mode::OptimizeShape => "optimize-shape",
            Mode::Feasibility => "feasibility",
            Mode::Figure => "figure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let f = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * f,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * f).exp(),
                }
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        if self.count == 0 {
            return Err(CliError::config(format!("sweep.{name}.count must be at least 1")));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config(format!("sweep.{name} bounds must be finite")));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::config(format!("sweep.{name}: log scale needs positive bounds")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub dense: Option<bool>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
    pub refine: Option<bool>,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub resolution: ResolutionOverrides,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub feasibility: FeasibilitySection,
    #[serde(default)]
    pub figure: FigureSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub alpha_l: f64,
    pub gamma_t: f64,
    pub line: LineShape,
    pub direction: Direction,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            alpha_l: 40.0,
            gamma_t: 0.1,
            line: LineShape::Lorentzian,
            direction: Direction::Backward,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alpha_l: Option<Sweep>,
    pub gamma_t: Option<Sweep>,
}

/// Partial resolution; unset fields keep the line-shape defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionOverrides {
    pub n_z: Option<usize>,
    pub n_delta: Option<usize>,
    pub samples_per_t: Option<usize>,
    pub max_dt: Option<f64>,
    pub window_factor: Option<f64>,
    pub tail: Option<f64>,
}

impl ResolutionOverrides {
    pub fn apply(&self, line: LineShape) -> Resolution {
        let d = Resolution::for_line(line);
        Resolution {
            n_z: self.n_z.unwrap_or(d.n_z),
            n_delta: self.n_delta.unwrap_or(d.n_delta),
            samples_per_t: self.samples_per_t.unwrap_or(d.samples_per_t),
            max_dt: self.max_dt.unwrap_or(d.max_dt),
            window_factor: self.window_factor.unwrap_or(d.window_factor),
            tail: self.tail.unwrap_or(d.tail),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    /// ΓT search bracket for duration optimization.
    pub bracket: [f64; 2],
    /// Largest number of time-reversal steps in shape optimization.
    pub max_iter: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            bracket: [0.01, 1.0],
            max_iter: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeasibilitySection {
    pub crystal: String,
    /// Crystal data file; the compiled-in reference data when absent.
    pub data: Option<PathBuf>,
    pub tau_ratio: f64,
    pub lines: Vec<LineShape>,
    /// π-pulse duration at which the energy is also reported, in fs.
    pub reference_tau_fs: f64,
    pub field_tesla: f64,
    /// Optional redesigned crystal: length in mm and optical depth.
    pub variant_length_mm: Option<f64>,
    pub variant_alpha_l: Option<f64>,
}

impl Default for FeasibilitySection {
    fn default() -> Self {
        Self {
            crystal: "Nd:YVO4".into(),
            data: None,
            tau_ratio: 0.1,
            lines: vec![LineShape::Gaussian],
            reference_tau_fs: 470.0,
            field_tesla: 1.0,
            variant_length_mm: None,
            variant_alpha_l: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSection {
    pub id: Option<u8>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub dense: bool,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
    pub refine: bool,
    pub figure_id: Option<u8>,
}

/// Fully merged and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
    pub dense: bool,
    pub tol: f64,
    pub refine: bool,
    pub scenario: ScenarioSection,
    pub sweep: SweepSection,
    pub resolution: ResolutionOverrides,
    pub optimize: OptimizeSection,
    pub feasibility: FeasibilitySection,
    pub figure: FigureSection,
}

pub const DEFAULT_TOL: f64 = 1e-3;

impl RunConfig {
    pub fn from_file(mode: Mode, path: Option<&Path>, flags: Overrides) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => ConfigFile::default(),
        };
        Self::merge(mode, file, flags)
    }

    pub fn merge(mode: Mode, file: ConfigFile, flags: Overrides) -> Result<Self, CliError> {
        let cfg = RunConfig {
            mode,
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            workers: flags
                .workers
                .or(file.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            dense: flags.dense || file.dense.unwrap_or(false),
            tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            refine: flags.refine || file.refine.unwrap_or(false),
            scenario: file.scenario,
            sweep: file.sweep,
            resolution: file.resolution,
            optimize: file.optimize,
            feasibility: file.feasibility,
            figure: FigureSection {
                id: flags.figure_id.or(file.figure.id),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.workers == 0 {
            return Err(CliError::config("workers must be at least 1"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::config(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(s) = &self.sweep.alpha_l {
            s.validate("alpha_l")?;
        }
        if let Some(s) = &self.sweep.gamma_t {
            s.validate("gamma_t")?;
        }
        let [lo, hi] = self.optimize.bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(CliError::config(format!("optimize.bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
        }
        // Every scenario the run will touch must be valid up front.
        for line in [LineShape::Lorentzian, LineShape::Gaussian] {
            self.resolution
                .apply(line)
                .validate()
                .map_err(|e| CliError::config(format!("resolution: {e}")))?;
        }
        for &a in &self.alpha_values() {
            for &g in &self.gamma_values() {
                self.scenario_at(a, g, self.scenario.line, self.scenario.direction)?;
            }
        }
        match self.mode {
            Mode::Analytic if self.scenario.line != LineShape::Lorentzian => {
                return Err(CliError::config("the closed-form efficiencies assume a Lorentzian line"));
            }
            Mode::Feasibility => self.validate_feasibility()?,
            Mode::Figure => match self.figure.id {
                Some(2..=6) => {}
                Some(id) => return Err(CliError::config(format!("figure id must be 2-6, got {id}"))),
                None => return Err(CliError::config("figure mode needs --id")),
            },
            _ => {}
        }
        Ok(())
    }

    fn validate_feasibility(&self) -> Result<(), CliError> {
        let f = &self.feasibility;
        if let Some(p) = &f.data {
            if !p.is_file() {
                return Err(CliError::config(format!("crystal data file {} does not exist", p.display())));
            }
        }
        self.crystal()?;
        if !(f.tau_ratio > 0.0 && f.tau_ratio <= 0.5) {
            return Err(CliError::config(format!("feasibility.tau_ratio must lie in (0, 0.5], got {}", f.tau_ratio)));
        }
        if f.lines.is_empty() {
            return Err(CliError::config("feasibility.lines must name at least one line shape"));
        }
        if !(f.reference_tau_fs > 0.0) || !(f.field_tesla >= 0.0) {
            return Err(CliError::config("feasibility.reference_tau_fs must be positive and field_tesla non-negative"));
        }
        match (f.variant_length_mm, f.variant_alpha_l) {
            (None, None) => {}
            (Some(l), Some(a)) if l > 0.0 && a > 0.0 => {}
            _ => {
                return Err(CliError::config(
                    "feasibility.variant_length_mm and variant_alpha_l must be given together and be positive",
                ))
            }
        }
        Ok(())
    }

    pub fn crystal(&self) -> Result<fidmem::feasibility::CrystalSpec, CliError> {
        use fidmem::feasibility::{load_crystals, parse_crystals, REFERENCE_DATA};
        let f = &self.feasibility;
        let specs = match &f.data {
            Some(p) => load_crystals(p),
            None => parse_crystals(REFERENCE_DATA),
        }
        .map_err(|e| CliError::config(e.to_string()))?;
        specs
            .into_iter()
            .find(|s| s.name == f.crystal)
            .ok_or_else(|| CliError::config(format!("no crystal named `{}`", f.crystal)))
    }

    pub fn alpha_values(&self) -> Vec<f64> {
        self.sweep.alpha_l.map_or_else(|| vec![self.scenario.alpha_l], |s| s.values())
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        self.sweep.gamma_t.map_or_else(|| vec![self.scenario.gamma_t], |s| s.values())
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.optimize.bracket[0], self.optimize.bracket[1])
    }

    pub fn scenario_at(
        &self,
        alpha_l: f64,
        gamma_t: f64,
        line: LineShape,
        direction: Direction,
    ) -> Result<MediumScenario, CliError> {
        MediumScenario::with_resolution(alpha_l, gamma_t, line, direction, self.resolution.apply(line))
            .map_err(|e| CliError::config(format!("scenario (alphaL {alpha_l}, gammaT {gamma_t}): {e}")))
    }

    /// SHA-256 of the canonical TOML form. The output directory and worker
    /// count do not affect results and are left out.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::config(format!("config: {}", e.message())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values() {
        let s = Sweep { start: 1.0, stop: 100.0, count: 3, scale: Scale::Log };
        let v = s.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        let s = Sweep { start: 0.0, stop: 1.0, count: 1, scale: Scale::Linear };
        assert_eq!(s.values(), vec![0.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config("colour = 3").is_err());
        assert!(parse_config("[scenario]\nalphaL = 3").is_err());
        assert!(parse_config("[scenario]\nalpha_l = 3").is_ok());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("tol = 0.01\nworkers = 3\n[figure]\nid = 2").unwrap();
        let flags = Overrides { tol: Some(0.5), figure_id: Some(4), ..Default::default() };
        let cfg = RunConfig::merge(Mode::Figure, file, flags).unwrap();
        assert_eq!(cfg.tol, 0.5);
        assert_eq!(cfg.workers, 3);
        assert_eq!(cfg.figure.id, Some(4));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::merge(Mode::Simulate, ConfigFile::default(), Overrides::default()).unwrap();
        let b = RunConfig::merge(
            Mode::Simulate,
            ConfigFile::default(),
            Overrides { out: Some("elsewhere".into()), workers: Some(7), ..Default::default() },
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::merge(Mode::Simulate, ConfigFile::default(), Overrides { tol: Some(0.1), ..Default::default() })
            .unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
