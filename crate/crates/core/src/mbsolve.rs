//! Time-domain solver for the coupled field / coherence equations
//!
//! ```text
//! ∂z E(z,t)   = ± i κ Σ_k w_k σ_k(z,t)
//! ∂t σ_k(z,t) = −i Δ_k σ_k + i E(z,t)
//! ```
//!
//! in units where Γ = 1 and z is measured in optical depths (α = 1). The sign
//! is + for the forward mode and − for the backward mode, which is marched
//! from z = αL towards z = 0.
//!
//! Each time step advances every coherence with the exact integrating factor
//! e^{−iΔh} and integrates the drive exactly for a field that is linear over
//! the step. That update is implicit in the new field, so the spatial march
//! solves one scalar equation per grid point while applying the trapezoidal
//! rule along z.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::line::DetuningQuadrature;
use crate::pulse::{pulse_energy, time_reverse, PulseEnvelope};
use crate::scenario::{Direction, MediumScenario};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Atomic coherences σ(z, Δ) on the space × detuning grid, row-major in z.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceField {
    values: Vec<Complex64>,
    n_z: usize,
    alpha_l: f64,
    coupling: f64,
    quadrature: DetuningQuadrature,
}

impl CoherenceField {
    pub fn zeros(scenario: &MediumScenario) -> Self {
        let quadrature = scenario.quadrature();
        let n_z = scenario.resolution.n_z;
        Self {
            values: vec![ZERO; n_z * quadrature.len()],
            n_z,
            alpha_l: scenario.alpha_l,
            coupling: scenario.line.coupling(),
            quadrature,
        }
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_delta(&self) -> usize {
        self.quadrature.len()
    }

    pub fn alpha_l(&self) -> f64 {
        self.alpha_l
    }

    pub fn quadrature(&self) -> &DetuningQuadrature {
        &self.quadrature
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn z(&self, j: usize) -> f64 {
        self.alpha_l * j as f64 / (self.n_z - 1) as f64
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let n = self.n_delta();
        &self.values[j * n..(j + 1) * n]
    }

    /// Polarization Σ_k w_k σ_k at every z.
    pub fn polarization(&self) -> Vec<Complex64> {
        let w = self.quadrature.weights();
        (0..self.n_z)
            .map(|j| self.row(j).iter().zip(w).map(|(s, &w)| s * w).sum())
            .collect()
    }

    /// κ ∫ dz Σ_k w_k |σ_k|²: the energy taken from the field by the atoms.
    pub fn stored_energy(&self) -> f64 {
        if self.n_z < 2 || self.alpha_l == 0.0 {
            return 0.0;
        }
        let w = self.quadrature.weights();
        let dz = self.alpha_l / (self.n_z - 1) as f64;
        let per_z: Vec<f64> = (0..self.n_z)
            .map(|j| self.row(j).iter().zip(w).map(|(s, &w)| w * s.norm_sqr()).sum())
            .collect();
        let inner: f64 = per_z[1..self.n_z - 1].iter().sum();
        self.coupling * dz * (inner + 0.5 * (per_z[0] + per_z[self.n_z - 1]))
    }

    fn check_scenario(&self, scenario: &MediumScenario) -> Result<()> {
        if self.n_z != scenario.resolution.n_z
            || self.n_delta() != scenario.n_delta()
            || self.quadrature.line() != scenario.line
            || self.alpha_l != scenario.alpha_l
        {
            return Err(Error::GridMismatch(
                "coherence field was built for a different medium".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryResult {
    /// Field leaving z = αL during t ≤ 0.
    pub transmitted: PulseEnvelope,
    /// Re-emitted field at the output face for t ≥ 0.
    pub retrieved: PulseEnvelope,
    pub eta_abs: f64,
    pub eta_total: f64,
    /// 1 − overlap between the retrieved pulse and the time-reversed input.
    pub distortion: f64,
    /// Fraction of the retrieved energy emitted in the last tenth of the
    /// window; a proxy for energy lost past the end of the grid.
    pub tail_fraction: f64,
}

impl MemoryResult {
    pub fn transmitted_energy(&self) -> f64 {
        pulse_energy(&self.transmitted)
    }

    pub fn retrieved_energy(&self) -> f64 {
        pulse_energy(&self.retrieved)
    }
}

/// Per-step update coefficients for one detuning class, stored as separate
/// real and imaginary arrays so the inner loop vectorizes.
struct StepCoefficients {
    w: Vec<f64>,
    rot_re: Vec<f64>,
    rot_im: Vec<f64>,
    // drive from the field at the start of the step
    first_re: Vec<f64>,
    first_im: Vec<f64>,
    // same, with the end-of-step drive of the previous step folded in
    fold_re: Vec<f64>,
    fold_im: Vec<f64>,
    // drive from the field at the end of the step
    last: Vec<Complex64>,
    last_sum: Complex64,
}

/// (e^z − 1)/z and (e^z − 1 − z)/z² for z = −iΔh.
fn phi_functions(x: f64) -> (Complex64, Complex64) {
    let z = Complex64::new(0.0, -x);
    if x.abs() < 0.05 {
        let z2 = z * z;
        let z3 = z2 * z;
        let z4 = z3 * z;
        let z5 = z4 * z;
        let phi1 = 1.0 + z / 2.0 + z2 / 6.0 + z3 / 24.0 + z4 / 120.0 + z5 / 720.0;
        let phi2 = 0.5 + z / 6.0 + z2 / 24.0 + z3 / 120.0 + z4 / 720.0 + z5 / 5040.0;
        (phi1, phi2)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez - 1.0 - z) / (z * z))
    }
}

impl StepCoefficients {
    fn new(q: &DetuningQuadrature, h: f64) -> Self {
        let n = q.len();
        let mut c = Self {
            w: q.weights().to_vec(),
            rot_re: Vec::with_capacity(n),
            rot_im: Vec::with_capacity(n),
            first_re: Vec::with_capacity(n),
            first_im: Vec::with_capacity(n),
            fold_re: Vec::with_capacity(n),
            fold_im: Vec::with_capacity(n),
            last: Vec::with_capacity(n),
            last_sum: ZERO,
        };
        for (&delta, &w) in q.nodes().iter().zip(q.weights()) {
            let x = delta * h;
            let rot = Complex64::from_polar(1.0, -x);
            let (phi1, phi2) = phi_functions(x);
            let first = I * h * (phi1 - phi2);
            let last = I * h * phi2;
            let fold = rot * last + first;
            c.rot_re.push(rot.re);
            c.rot_im.push(rot.im);
            c.first_re.push(first.re);
            c.first_im.push(first.im);
            c.fold_re.push(fold.re);
            c.fold_im.push(fold.im);
            c.last.push(last);
            c.last_sum += w * last;
        }
        c
    }
}

/// Propagation state. Stored coherences omit the end-of-step drive term
/// `last_k · E(z)` while `pending` is set; it is folded into the next step.
struct Propagator {
    n_z: usize,
    n_d: usize,
    dz: f64,
    coupling: f64,
    re: Vec<f64>,
    im: Vec<f64>,
    field: Vec<Complex64>,
    pending: bool,
    order: Direction,
}

const LANES: usize = 4;

/// σ ← rot·σ + drive·E, returning Σ w σ. Fixed lane-wise reduction order
/// keeps results bitwise reproducible.
#[inline]
fn advance_row(
    re: &mut [f64],
    im: &mut [f64],
    c: &StepCoefficients,
    drive_re: &[f64],
    drive_im: &[f64],
    e: Complex64,
) -> Complex64 {
    let n = re.len();
    let mut acc_re = [0.0f64; LANES];
    let mut acc_im = [0.0f64; LANES];
    let chunks = n / LANES;
    for ch in 0..chunks {
        for l in 0..LANES {
            let k = ch * LANES + l;
            let (sr, si) = (re[k], im[k]);
            let nr = c.rot_re[k] * sr - c.rot_im[k] * si + drive_re[k] * e.re - drive_im[k] * e.im;
            let ni = c.rot_re[k] * si + c.rot_im[k] * sr + drive_re[k] * e.im + drive_im[k] * e.re;
            re[k] = nr;
            im[k] = ni;
            acc_re[l] += c.w[k] * nr;
            acc_im[l] += c.w[k] * ni;
        }
    }
    for k in chunks * LANES..n {
        let (sr, si) = (re[k], im[k]);
        let nr = c.rot_re[k] * sr - c.rot_im[k] * si + drive_re[k] * e.re - drive_im[k] * e.im;
        let ni = c.rot_re[k] * si + c.rot_im[k] * sr + drive_re[k] * e.im + drive_im[k] * e.re;
        re[k] = nr;
        im[k] = ni;
        acc_re[0] += c.w[k] * nr;
        acc_im[0] += c.w[k] * ni;
    }
    Complex64::new(
        (acc_re[0] + acc_re[1]) + (acc_re[2] + acc_re[3]),
        (acc_im[0] + acc_im[1]) + (acc_im[2] + acc_im[3]),
    )
}

impl Propagator {
    fn new(coherence: &CoherenceField, order: Direction) -> Self {
        let n_d = coherence.n_delta();
        Self {
            n_z: coherence.n_z,
            n_d,
            dz: coherence.alpha_l / (coherence.n_z - 1) as f64,
            coupling: coherence.coupling,
            re: coherence.values.iter().map(|s| s.re).collect(),
            im: coherence.values.iter().map(|s| s.im).collect(),
            field: vec![ZERO; coherence.n_z],
            pending: false,
            order,
        }
    }

    fn z_index(&self, step: usize) -> usize {
        match self.order {
            Direction::Forward => step,
            Direction::Backward => self.n_z - 1 - step,
        }
    }

    fn entry(&self) -> usize {
        self.z_index(0)
    }

    fn exit(&self) -> usize {
        self.z_index(self.n_z - 1)
    }

    /// Field profile generated instantaneously by the current coherences with
    /// `boundary` imposed at the entry face.
    fn settle_field(&mut self, w: &[f64], boundary: Complex64) {
        let g = I * (0.5 * self.coupling * self.dz);
        let pol = |s: &Self, j: usize| -> Complex64 {
            let row = j * s.n_d;
            (0..s.n_d)
                .map(|k| w[k] * Complex64::new(s.re[row + k], s.im[row + k]))
                .sum()
        };
        let mut e = boundary;
        let mut p_prev = pol(self, self.entry());
        let entry = self.entry();
        self.field[entry] = e;
        for step in 1..self.n_z {
            let j = self.z_index(step);
            let p = pol(self, j);
            e += g * (p_prev + p);
            self.field[j] = e;
            p_prev = p;
        }
    }

    fn step(&mut self, c: &StepCoefficients, boundary: Complex64) {
        let g = I * (0.5 * self.coupling * self.dz);
        let denom = Complex64::new(1.0, 0.0) - g * c.last_sum;
        let (drive_re, drive_im) = if self.pending {
            (&c.fold_re, &c.fold_im)
        } else {
            (&c.first_re, &c.first_im)
        };
        let mut e_prev = ZERO;
        let mut p_prev = ZERO;
        for step in 0..self.n_z {
            let j = self.z_index(step);
            let row = j * self.n_d..(j + 1) * self.n_d;
            let e_old = self.field[j];
            let partial = advance_row(
                &mut self.re[row.clone()],
                &mut self.im[row],
                c,
                drive_re,
                drive_im,
                e_old,
            );
            let e_new = if step == 0 {
                boundary
            } else {
                (e_prev + g * (p_prev + partial)) / denom
            };
            p_prev = partial + c.last_sum * e_new;
            e_prev = e_new;
            self.field[j] = e_new;
        }
        self.pending = true;
    }

    fn into_coherence(self, c: Option<&StepCoefficients>, template: &CoherenceField) -> CoherenceField {
        let mut values: Vec<Complex64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        if let (true, Some(c)) = (self.pending, c) {
            for j in 0..self.n_z {
                let e = self.field[j];
                for (k, s) in values[j * self.n_d..(j + 1) * self.n_d].iter_mut().enumerate() {
                    *s += c.last[k] * e;
                }
            }
        }
        CoherenceField {
            values,
            ..template.clone()
        }
    }
}

fn check_input(input: &PulseEnvelope) -> Result<()> {
    let g = input.grid();
    if g.t_max().abs() > 1e-9 * g.dt() {
        return Err(Error::GridMismatch(format!(
            "input grid must end at t = 0, ends at {}",
            g.t_max()
        )));
    }
    Ok(())
}

/// Propagates `input` (defined for t ≤ 0) through the medium in the forward
/// mode. Returns the field transmitted at z = αL and the coherences at t = 0⁻.
pub fn absorb(input: &PulseEnvelope, scenario: &MediumScenario) -> Result<(PulseEnvelope, CoherenceField)> {
    scenario.validate()?;
    check_input(input)?;
    let template = CoherenceField::zeros(scenario);
    let grid = *input.grid();
    let amp = input.amplitude();
    if scenario.alpha_l == 0.0 {
        return Ok((input.clone(), template));
    }

    // Leading samples carrying a negligible share of the peak are skipped:
    // the medium is unexcited before the pulse arrives.
    let peak = amp.iter().map(|e| e.norm_sqr()).fold(0.0, f64::max);
    let start = amp
        .iter()
        .position(|e| e.norm_sqr() > 1e-40 * peak)
        .unwrap_or(amp.len() - 1);

    let coeffs = StepCoefficients::new(&template.quadrature, grid.dt());
    let mut prop = Propagator::new(&template, Direction::Forward);
    prop.field.iter_mut().for_each(|e| *e = amp[start]);
    let mut transmitted = vec![ZERO; amp.len()];
    transmitted[start] = amp[start];
    for i in start + 1..amp.len() {
        prop.step(&coeffs, amp[i]);
        transmitted[i] = prop.field[prop.exit()];
    }
    let coherence = prop.into_coherence(Some(&coeffs), &template);
    Ok((PulseEnvelope::new(grid, transmitted)?, coherence))
}

/// Instantaneous, lossless π-pulse pair at t = 0. In the envelope picture the
/// transfer is the identity for both read-out directions; the direction only
/// selects which field mode the coherences radiate into.
pub fn apply_pi_pulses(coherence: &CoherenceField, _direction: Direction) -> CoherenceField {
    coherence.clone()
}

/// Re-emission for t ∈ [0, t_max] on `grid`, which must start at t = 0.
/// Backward read-out enters at z = αL with zero field and exits at z = 0;
/// forward read-out exits at z = αL.
pub fn retrieve(coherence: &CoherenceField, scenario: &MediumScenario, grid: TimeGrid) -> Result<PulseEnvelope> {
    scenario.validate()?;
    coherence.check_scenario(scenario)?;
    if grid.t_min().abs() > 1e-9 * grid.dt() {
        return Err(Error::GridMismatch(format!(
            "retrieval grid must start at t = 0, starts at {}",
            grid.t_min()
        )));
    }
    if scenario.alpha_l == 0.0 {
        return Ok(PulseEnvelope::zeros(grid));
    }
    let coeffs = StepCoefficients::new(&coherence.quadrature, grid.dt());
    let mut prop = Propagator::new(coherence, scenario.direction);
    prop.settle_field(coherence.quadrature.weights(), ZERO);
    let exit = prop.exit();
    let mut out = Vec::with_capacity(grid.len());
    out.push(prop.field[exit]);
    for _ in 1..grid.len() {
        prop.step(&coeffs, ZERO);
        out.push(prop.field[exit]);
    }
    PulseEnvelope::new(grid, out)
}

/// Absorption, π-pulse transfer and re-emission in sequence.
pub fn run_memory(input: &PulseEnvelope, scenario: &MediumScenario) -> Result<MemoryResult> {
    let e_in = pulse_energy(input);
    if !(e_in > 0.0) {
        return Err(crate::error::invalid("input", "input pulse carries no energy"));
    }
    let (transmitted, coherence) = absorb(input, scenario)?;
    let stored = apply_pi_pulses(&coherence, scenario.direction);
    let retrieved = retrieve(&stored, scenario, input.grid().mirrored())?;

    let e_trans = pulse_energy(&transmitted);
    let e_ret = pulse_energy(&retrieved);
    let reference = time_reverse(input);
    let distortion = if e_ret > 0.0 {
        1.0 - retrieved.overlap(&reference)?
    } else {
        1.0
    };
    let n = retrieved.amplitude().len();
    let tail_start = n - n / 10;
    let tail: f64 = retrieved.amplitude()[tail_start..].iter().map(|e| e.norm_sqr()).sum::<f64>()
        * retrieved.grid().dt();
    Ok(MemoryResult {
        eta_abs: 1.0 - e_trans / e_in,
        eta_total: e_ret / e_in,
        distortion,
        tail_fraction: if e_ret > 0.0 { tail / e_ret } else { 0.0 },
        transmitted,
        retrieved,
    })
}

/// Runs an exponential input of the scenario's duration.
pub fn run_exponential(scenario: &MediumScenario) -> Result<MemoryResult> {
    let input = crate::pulse::exponential_input(scenario.gamma_t, scenario.input_grid())?;
    run_memory(&input, scenario)
}

/// Efficiencies of a run and of the same run with every resolution doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementCheck {
    pub eta_abs: f64,
    pub eta_total: f64,
    pub refined_eta_abs: f64,
    pub refined_eta_total: f64,
    /// Largest allowed change, as an absolute efficiency.
    pub tolerance: f64,
}

impl RefinementCheck {
    pub fn max_change(&self) -> f64 {
        (self.eta_abs - self.refined_eta_abs)
            .abs()
            .max((self.eta_total - self.refined_eta_total).abs())
    }

    pub fn converged(&self) -> bool {
        self.max_change() <= self.tolerance
    }

    pub fn into_result(self) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: "grid refinement",
                detail: format!(
                    "efficiency moved by {:.3e} (> {:.1e}) when doubling the resolution",
                    self.max_change(),
                    self.tolerance
                ),
            })
        }
    }
}

/// Default refinement tolerance: 0.2 percentage points.
pub const REFINEMENT_TOLERANCE: f64 = 2e-3;

pub fn refinement_check(scenario: &MediumScenario) -> Result<RefinementCheck> {
    let base = run_exponential(scenario)?;
    let fine = run_exponential(&scenario.refined())?;
    Ok(RefinementCheck {
        eta_abs: base.eta_abs,
        eta_total: base.eta_total,
        refined_eta_abs: fine.eta_abs,
        refined_eta_total: fine.eta_total,
        tolerance: REFINEMENT_TOLERANCE,
    })
}
