//! Input-pulse optimization: duration of the exponential input by
//! golden-section search, and shape by time-reversal iteration.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;
use crate::mbsolve::{run_exponential, run_memory, MemoryResult};
use crate::pulse::{time_reverse, PulseEnvelope};
use crate::scenario::MediumScenario;

/// Points in the logarithmic pre-scan of a duration search.
pub const PRESCAN_POINTS: usize = 16;
/// Points in the fallback scan used when the pre-scan is not unimodal.
pub const DENSE_SCAN_POINTS: usize = 64;
/// Default relative bracket width at which the search stops.
pub const DURATION_TOLERANCE: f64 = 1e-3;
/// Largest retrieved-energy share allowed in the last tenth of the window.
pub const TAIL_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationOptimum {
    pub gamma_t_opt: f64,
    pub eta_opt: f64,
    pub n_evaluations: usize,
    /// False when the pre-scan was not unimodal and a dense scan was used.
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOptimum {
    pub pulse: PulseEnvelope,
    pub eta_opt: f64,
    /// Reversal steps taken; the initial pass does not count.
    pub n_iterations: usize,
    pub converged: bool,
    /// Total efficiency of each input tried, starting with `initial`.
    pub history: Vec<f64>,
    /// The scenario actually used; its tail horizon may have been enlarged.
    pub scenario: MediumScenario,
}

/// Maximizes `f` over [lo, hi] in ln x: a pre-scan of [`PRESCAN_POINTS`]
/// locates the peak, then golden-section search narrows the bracket around
/// it until its width is below `rel_tol`·x.
pub fn maximize_log<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<DurationOptimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(invalid("bracket", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if !(rel_tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {rel_tol}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut evals = 0;
    let mut g = |u: f64| -> Result<f64> {
        evals += 1;
        let v = f(u.exp())?;
        if !v.is_finite() {
            return Err(Error::NonConvergence {
                what: "duration search",
                detail: format!("objective is {v} at gammaT = {}", u.exp()),
            });
        }
        Ok(v)
    };

    let scan = |g: &mut dyn FnMut(f64) -> Result<f64>, n: usize| -> Result<Vec<(f64, f64)>> {
        (0..n)
            .map(|i| {
                let u = a + (b - a) * i as f64 / (n - 1) as f64;
                g(u).map(|v| (u, v))
            })
            .collect()
    };
    let mut pts = scan(&mut g, PRESCAN_POINTS)?;
    let unimodal = is_unimodal(&pts);
    if !unimodal {
        pts = scan(&mut g, DENSE_SCAN_POINTS)?;
    }
    let best = argmax(&pts);
    let mut left = pts[best.saturating_sub(1)].0;
    let mut right = pts[(best + 1).min(pts.len() - 1)].0;
    let mut best_point = pts[best];

    // Golden-section search on [left, right] in ln x.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = right - inv_phi * (right - left);
    let mut x2 = left + inv_phi * (right - left);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    while right - left > rel_tol {
        if f1 >= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - inv_phi * (right - left);
            f1 = g(x1)?;
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + inv_phi * (right - left);
            f2 = g(x2)?;
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 > best_point.1 {
            best_point = cand;
        }
    }
    Ok(DurationOptimum {
        gamma_t_opt: best_point.0.exp(),
        eta_opt: best_point.1,
        n_evaluations: evals,
        unimodal,
    })
}

fn argmax(pts: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, p) in pts.iter().enumerate() {
        if p.1 > pts[best].1 {
            best = i;
        }
    }
    best
}

/// Rises then falls (either part may be empty), ignoring changes below a
/// relative slack of 1e-9.
fn is_unimodal(pts: &[(f64, f64)]) -> bool {
    let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let slack = 1e-9 * scale.max(1e-300);
    let mut falling = false;
    for w in pts.windows(2) {
        let d = w[1].1 - w[0].1;
        if d < -slack {
            falling = true;
        } else if d > slack && falling {
            return false;
        }
    }
    true
}

/// Duration of the exponential input that maximizes the total efficiency of
/// `scenario` (its own ΓT is ignored) over `bracket` = [ΓT_lo, ΓT_hi].
pub fn optimize_duration(scenario: &MediumScenario, bracket: (f64, f64), rel_tol: f64) -> Result<DurationOptimum> {
    scenario.validate()?;
    maximize_log(
        |gt| Ok(run_exponential(&scenario.with_gamma_t(gt)?)?.eta_total),
        bracket.0,
        bracket.1,
        rel_tol,
    )
}

/// Time-reversal iteration on the full store-and-retrieve map: the retrieved
/// pulse is reversed, renormalized and sent in again until successive shapes
/// differ by less than `tol` in normalized L2 distance or the efficiency
/// changes by less than `tol`. At most `max_iter` reversals are made.
///
/// If the retrieved pulse still carries more than [`TAIL_LIMIT`] of its
/// energy at the end of the window, the window is doubled and the iteration
/// step repeated.
pub fn optimize_shape(
    scenario: &MediumScenario,
    initial: &PulseEnvelope,
    tol: f64,
    max_iter: usize,
) -> Result<ShapeOptimum> {
    scenario.validate()?;
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    let mut scenario = *scenario;
    let mut input = initial.normalized();
    let mut history = Vec::with_capacity(max_iter);
    let mut converged = false;
    let mut result: MemoryResult;
    let mut enlargements = 0;

    loop {
        result = run_memory(&input, &scenario)?;
        if result.tail_fraction > TAIL_LIMIT && result.eta_total > 0.0 {
            if enlargements == 3 {
                return Err(Error::NonConvergence {
                    what: "shape iteration",
                    detail: format!(
                        "retrieved pulse still has {:.1e} of its energy at the window edge",
                        result.tail_fraction
                    ),
                });
            }
            enlargements += 1;
            scenario.resolution.tail = 2.0 * scenario.horizon();
            input = pad_to(&input, scenario.input_grid())?;
            continue;
        }
        history.push(result.eta_total);
        let next = time_reverse(&result.retrieved).normalized();
        let distance = next.normalized_distance(&input)?;
        let n = history.len();
        let eta_step = if n > 1 { (history[n - 1] - history[n - 2]).abs() } else { f64::INFINITY };
        if distance < tol || eta_step < tol {
            converged = true;
            break;
        }
        if n > max_iter {
            break;
        }
        input = next;
    }
    Ok(ShapeOptimum {
        eta_opt: result.eta_total,
        n_iterations: history.len() - 1,
        converged,
        history,
        pulse: input,
        scenario,
    })
}

/// Re-samples `p` onto a longer grid with the same step, padding with zeros.
fn pad_to(p: &PulseEnvelope, grid: TimeGrid) -> Result<PulseEnvelope> {
    let shift = grid.len().checked_sub(p.grid().len()).ok_or_else(|| {
        Error::GridMismatch("target grid is shorter than the pulse".into())
    })?;
    let mut amp = vec![Complex64::new(0.0, 0.0); shift];
    amp.extend_from_slice(p.amplitude());
    PulseEnvelope::new(grid, amp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_smooth_peak() {
        let f = |x: f64| Ok(-(x.ln() - 0.3f64.ln()).powi(2));
        let opt = maximize_log(f, 0.01, 10.0, 1e-4).unwrap();
        assert!((opt.gamma_t_opt / 0.3 - 1.0).abs() < 1e-4);
        assert!(opt.unimodal);
        assert!(opt.n_evaluations < 60);
    }

    #[test]
    fn optimum_at_bracket_edge() {
        let opt = maximize_log(|x| Ok(-x), 0.1, 1.0, 1e-3).unwrap();
        assert!((opt.gamma_t_opt - 0.1).abs() < 2e-3 * 0.1);
    }

    #[test]
    fn bimodal_prescan_falls_back() {
        let f = |x: f64| {
            let u = x.ln();
            Ok((-(u + 2.0).powi(2) * 8.0).exp() + 1.2 * (-(u - 1.0).powi(2) * 8.0).exp())
        };
        let opt = maximize_log(f, 0.01, 20.0, 1e-4).unwrap();
        assert!(!opt.unimodal);
        assert!((opt.gamma_t_opt.ln() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(maximize_log(|_| Ok(0.0), 1.0, 0.5, 1e-3).is_err());
        assert!(maximize_log(|_| Ok(0.0), 0.0, 0.5, 1e-3).is_err());
    }

    #[test]
    fn unimodal_detection() {
        let p = |v: &[f64]| v.iter().map(|&y| (0.0, y)).collect::<Vec<_>>();
        assert!(is_unimodal(&p(&[0.0, 1.0, 2.0, 1.0])));
        assert!(is_unimodal(&p(&[3.0, 2.0, 1.0])));
        assert!(is_unimodal(&p(&[0.0, 0.0, 0.0])));
        assert!(!is_unimodal(&p(&[0.0, 2.0, 1.0, 3.0])));
    }
}
