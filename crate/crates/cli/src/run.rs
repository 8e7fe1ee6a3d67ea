//! Mode dispatch. Sweep points are evaluated on a worker pool and gathered
//! in sweep order, so the output does not depend on the worker count.

use fidmem::analytic;
use fidmem::feasibility::{self, feasibility_report_in, pi_pulse_energy, refocused, zeeman_splitting};
use fidmem::mbsolve::{refinement_check, run_exponential};
use fidmem::optimize::{optimize_duration, optimize_shape};
use fidmem::{exponential_input, Direction, Error, LineShape};
use rayon::prelude::*;

use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::output::{col, Cell, RunOutput, Table};

/// Result of one sweep point: a row, or a non-convergence report.
enum Point {
    Row(Vec<Cell>),
    Rows(Vec<Vec<Cell>>, Vec<Vec<Cell>>),
    /// A complete row whose point failed a convergence check.
    Flagged(Vec<Cell>, String),
    Failed(String),
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    pool.install(|| match cfg.mode {
        Mode::Analytic => analytic_mode(cfg),
        Mode::Simulate => simulate_mode(cfg),
        Mode::OptimizeDuration => optimize_duration_mode(cfg),
        Mode::OptimizeShape => optimize_shape_mode(cfg),
        Mode::Feasibility => feasibility_mode(cfg),
        Mode::Figure => figure_mode(cfg),
    })
}

/// Evaluates `f` over `points` in parallel, keeping their order. Solver
/// non-convergence is recorded; any other error aborts the run.
fn gather<T, F>(points: &[T], out: &mut RunOutput, table: &mut Table, f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    T: Sync,
    F: Fn(&T) -> Result<Point, CliError> + Sync,
{
    let results: Vec<Result<Point, CliError>> = points.par_iter().map(&f).collect();
    let mut extra = Vec::new();
    for r in results {
        match r? {
            Point::Row(row) => table.push(row),
            Point::Rows(rows, more) => {
                rows.into_iter().for_each(|row| table.push(row));
                extra.extend(more);
            }
            Point::Flagged(row, msg) => {
                table.push(row);
                out.issues.push(msg);
            }
            Point::Failed(msg) => out.issues.push(msg),
        }
    }
    Ok(extra)
}

fn non_convergence<T>(r: fidmem::Result<T>, label: impl FnOnce() -> String) -> Result<Result<T, String>, CliError> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ Error::NonConvergence { .. }) => Ok(Err(format!("{}: {e}", label()))),
        Err(e) => Err(e.into()),
    }
}

fn grid_points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let gammas = cfg.gamma_values();
    cfg.alpha_values()
        .into_iter()
        .flat_map(|a| gammas.iter().map(move |&g| (a, g)))
        .collect()
}

fn analytic_mode(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    let mut table = Table::new(
        "analytic",
        vec![
            col("alpha_l", "1"),
            col("gamma_t", "1"),
            col("eta_abs", "1"),
            col("eta_coherent_abs", "1"),
            col("eta_backward", "1"),
            col("eta_forward", "1"),
            col("eta_asymptote", "1"),
            col("eta_lowdepth", "1"),
        ],
    );
    gather(&grid_points(cfg), &mut out, &mut table, |&(a, g)| {
        Ok(Point::Row(vec![
            a.into(),
            g.into(),
            analytic::absorption_efficiency(a, g)?.into(),
            analytic::coherent_absorption_efficiency(a, g)?.into(),
            analytic::backward_efficiency(a, g)?.into(),
            analytic::forward_efficiency(a, g)?.into(),
            analytic::backward_efficiency_asymptote(g)?.into(),
            lowdepth(a, g)?,
        ]))
    })?;
    out.tables.push(table);
    let mut heuristic = Table::new(
        "heuristic_optimum",
        vec![col("alpha_l", "1"), col("gamma_t_opt", "1"), col("eta_opt", "1")],
    );
    for a in cfg.alpha_values() {
        if a > 0.0 {
            heuristic.push(vec![
                a.into(),
                analytic::optimal_gamma_t(a)?.into(),
                analytic::optimized_backward_efficiency(a)?.into(),
            ]);
        }
    }
    out.tables.push(heuristic);
    out.notes.push("closed-form efficiencies for a Lorentzian line and exponential input".into());
    out.notes.push(format!("eta_lowdepth is left empty where alphaL*gammaT > {LOWDEPTH_RANGE}"));
    Ok(out)
}

/// The first-order expansion where it applies (αLΓT ≤ 0.1 and a value that
/// is still an efficiency); an empty cell elsewhere.
fn lowdepth(a: f64, g: f64) -> Result<Cell, CliError> {
    let v = analytic::backward_efficiency_lowdepth(a, g)?;
    Ok(if a * g <= LOWDEPTH_RANGE && v <= 1.0 {
        v.into()
    } else {
        Cell::Text(String::new())
    })
}

const LOWDEPTH_RANGE: f64 = 0.1;

fn simulate_mode(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let sc = cfg.scenario;
    let mut out = RunOutput {
        lines: vec![sc.line],
        ..Default::default()
    };
    let mut columns = vec![
        col("alpha_l", "1"),
        col("gamma_t", "1"),
        col("line", "-"),
        col("direction", "-"),
        col("eta_abs", "1"),
        col("eta_total", "1"),
        col("distortion", "1"),
        col("tail_fraction", "1"),
    ];
    if cfg.refine {
        columns.extend([col("refined_eta_abs", "1"), col("refined_eta_total", "1"), col("refinement_ok", "-")]);
    }
    let mut table = Table::new("simulate", columns);
    gather(&grid_points(cfg), &mut out, &mut table, |&(a, g)| {
        let s = cfg.scenario_at(a, g, sc.line, sc.direction)?;
        let r = run_exponential(&s)?;
        let mut row: Vec<Cell> = vec![
            a.into(),
            g.into(),
            sc.line.name().into(),
            sc.direction.to_string().into(),
            r.eta_abs.into(),
            r.eta_total.into(),
            r.distortion.into(),
            r.tail_fraction.into(),
        ];
        if cfg.refine {
            let check = refinement_check(&s)?;
            row.extend([check.refined_eta_abs.into(), check.refined_eta_total.into(), check.converged().into()]);
            if !check.converged() {
                let msg = format!(
                    "alphaL {a}, gammaT {g}: refinement moved the efficiency by {:.2e}",
                    check.max_change()
                );
                return Ok(Point::Flagged(row, msg));
            }
        }
        Ok(Point::Row(row))
    })?;
    out.tables.push(table);
    Ok(out)
}

/// ΓT_opt, η_opt, evaluations, unimodal pre-scan.
type DurationRow = (f64, f64, usize, bool);

fn duration_point(cfg: &RunConfig, a: f64, line: LineShape, direction: Direction) -> Result<Result<DurationRow, String>, CliError> {
    let (lo, _) = cfg.bracket();
    let s = cfg.scenario_at(a, lo, line, direction)?;
    let r = non_convergence(optimize_duration(&s, cfg.bracket(), cfg.tol), || format!("alphaL {a}"))?;
    Ok(r.map(|o| (o.gamma_t_opt, o.eta_opt, o.n_evaluations, o.unimodal)))
}

fn optimize_duration_mode(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let sc = cfg.scenario;
    let mut out = RunOutput {
        lines: vec![sc.line],
        ..Default::default()
    };
    let mut table = Table::new(
        "optimize_duration",
        vec![
            col("alpha_l", "1"),
            col("gamma_t_opt", "1"),
            col("eta_opt", "1"),
            col("n_evaluations", "1"),
            col("unimodal", "-"),
        ],
    );
    gather(&cfg.alpha_values(), &mut out, &mut table, |&a| {
        Ok(match duration_point(cfg, a, sc.line, sc.direction)? {
            Ok((g, eta, n, uni)) => Point::Row(vec![a.into(), g.into(), eta.into(), n.into(), uni.into()]),
            Err(msg) => Point::Failed(msg),
        })
    })?;
    if let Some(col) = table.column("unimodal") {
        if col.iter().any(|c| **c == Cell::Bool(false)) {
            out.notes.push("some pre-scans were not unimodal; a dense scan was used there".into());
        }
    }
    out.tables.push(table);
    Ok(out)
}

/// Duration optimum followed by time-reversal shape iteration from the
/// optimal exponential pulse.
fn shape_point(cfg: &RunConfig, a: f64, line: LineShape, direction: Direction) -> Result<Point, CliError> {
    let (g, eta_d) = match duration_point(cfg, a, line, direction)? {
        Ok((g, eta, _, _)) => (g, eta),
        Err(msg) => return Ok(Point::Failed(msg)),
    };
    let s = cfg.scenario_at(a, g, line, direction)?;
    if a == 0.0 {
        return Ok(Point::Rows(
            vec![vec![a.into(), g.into(), eta_d.into(), 0.0.into(), 0.0.into(), 0usize.into(), true.into()]],
            vec![],
        ));
    }
    let input = exponential_input(g, s.input_grid())?;
    let r = match non_convergence(optimize_shape(&s, &input, cfg.tol, cfg.optimize.max_iter), || {
        format!("alphaL {a}")
    })? {
        Ok(r) => r,
        Err(msg) => return Ok(Point::Failed(msg)),
    };
    let row = vec![
        a.into(),
        g.into(),
        eta_d.into(),
        r.eta_opt.into(),
        (r.eta_opt - eta_d).into(),
        r.n_iterations.into(),
        r.converged.into(),
    ];
    if !r.converged {
        let msg = format!("alphaL {a}: shape iteration did not converge in {} steps", r.n_iterations);
        return Ok(Point::Flagged(row, msg));
    }
    let pulse = r
        .pulse
        .grid()
        .times()
        .zip(r.pulse.amplitude())
        .map(|(t, e)| vec![a.into(), t.into(), e.re.into(), e.im.into()])
        .collect();
    Ok(Point::Rows(vec![row], pulse))
}

fn optimize_shape_mode(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let sc = cfg.scenario;
    let mut out = RunOutput {
        lines: vec![sc.line],
        ..Default::default()
    };
    if sc.direction == Direction::Forward {
        out.notes.push("forward-direction shape optimization is experimental".into());
    }
    let mut table = Table::new(
        "optimize_shape",
        vec![
            col("alpha_l", "1"),
            col("gamma_t", "1"),
            col("eta_duration", "1"),
            col("eta_shape", "1"),
            col("gain", "1"),
            col("n_iterations", "1"),
            col("converged", "-"),
        ],
    );
    let pulses = gather(&cfg.alpha_values(), &mut out, &mut table, |&a| {
        shape_point(cfg, a, sc.line, sc.direction)
    })?;
    out.tables.push(table);
    let mut pt = Table::new(
        "optimal_pulses",
        vec![col("alpha_l", "1"), col("t", "1/Gamma"), col("re", "Gamma^1/2"), col("im", "Gamma^1/2")],
    );
    pulses.into_iter().for_each(|r| pt.push(r));
    out.tables.push(pt);
    Ok(out)
}

fn feasibility_mode(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let f = &cfg.feasibility;
    let spec = cfg.crystal()?;
    let mut out = RunOutput {
        lines: f.lines.clone(),
        ..Default::default()
    };
    out.notes.push(feasibility::DIPOLE_NOTE.into());
    let mut t = Table::new(
        "feasibility",
        vec![col("crystal", "-"), col("line", "-"), col("quantity", "-"), col("value", "see unit"), col("unit", "-")],
    );
    let mut row = |crystal: &str, line: &str, q: &str, v: f64, unit: &str| {
        t.push(vec![crystal.into(), line.into(), q.into(), v.into(), unit.into()]);
    };
    let name = spec.name.clone();
    row(&name, "-", "alpha_l", spec.alpha_l(), "1");
    for (i, g) in spec.g_factors.iter().enumerate() {
        let q = format!("zeeman_splitting_g{i}");
        row(&name, "-", &q, zeeman_splitting(*g, f.field_tesla)?, "Hz");
    }
    row(&name, "-", "field", f.field_tesla, "T");
    let tau_ref = f.reference_tau_fs * 1e-15;
    row(&name, "-", "reference_pi_pulse_duration", tau_ref, "s");
    row(&name, "-", "reference_pi_pulse_energy", pi_pulse_energy(&spec, tau_ref)?, "J");
    row(&name, "-", "dipole_moment_backsolved", spec.dipole_moment, "C m");
    if let Some(z) = spec.rayleigh_range {
        row(&name, "-", "rayleigh_range", z, "m");
    }

    let mut designs = vec![spec.clone()];
    if let (Some(l), Some(a)) = (f.variant_length_mm, f.variant_alpha_l) {
        designs.push(refocused(&spec, l * 1e-3, a)?);
    }
    let jobs: Vec<(usize, LineShape)> = (0..designs.len())
        .flat_map(|d| f.lines.iter().map(move |&l| (d, l)))
        .collect();
    let reports: Vec<Result<Result<_, String>, CliError>> = jobs
        .par_iter()
        .map(|&(d, line)| {
            non_convergence(feasibility_report_in(&designs[d], line, f.tau_ratio, cfg.bracket()), || {
                format!("{} ({line})", designs[d].name)
            })
        })
        .collect();
    let mut energies = Vec::new();
    for (r, &(d, line)) in reports.into_iter().zip(&jobs) {
        let rep = match r? {
            Ok(rep) => rep,
            Err(msg) => {
                out.issues.push(msg);
                continue;
            }
        };
        let (c, l) = (designs[d].name.as_str(), line.name());
        row(c, l, "alpha_l", rep.alpha_l, "1");
        row(c, l, "length", designs[d].length, "m");
        row(c, l, "beam_diameter", designs[d].beam_diameter, "m");
        row(c, l, "gamma_t_opt", rep.gamma_t_opt, "1");
        row(c, l, "t_half", rep.t_half, "s");
        row(c, l, "pi_pulse_duration", rep.pi_pulse_duration, "s");
        row(c, l, "pi_pulse_energy", rep.pi_pulse_energy, "J");
        row(c, l, "control_loss_estimate", rep.control_loss_estimate, "1");
        row(c, l, "eta_memory", rep.eta_memory, "1");
        row(c, l, "predicted_eta", rep.predicted_eta, "1");
        energies.push((d, line, rep.pi_pulse_energy));
    }
    for &(d, line, e) in energies.iter().filter(|x| x.0 > 0) {
        if let Some(&(_, _, base)) = energies.iter().find(|x| x.0 == 0 && x.1 == line) {
            row(&designs[d].name, line.name(), "energy_reduction_vs_baseline", base / e, "1");
        }
    }
    if designs.len() > 1 {
        out.notes.push(
            "redesigned crystal refocused so that the beam area scales with the crystal length (fixed confocal ratio)"
                .into(),
        );
    }
    out.tables.push(t);
    Ok(out)
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()
}

fn figure_mode(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let id = cfg.figure.id.expect("validated");
    match id {
        2 | 3 => efficiency_curves(cfg, id),
        4 => duration_curves(cfg),
        5 => heuristic_comparison(cfg),
        _ => shape_curves(cfg),
    }
}

/// Figures 2 and 3: total efficiency against optical depth at three pulse
/// durations, backward (2) or forward (3).
fn efficiency_curves(cfg: &RunConfig, id: u8) -> Result<RunOutput, CliError> {
    let direction = if id == 2 { Direction::Backward } else { Direction::Forward };
    let n = if cfg.dense { 40 } else { 11 };
    let mut out = RunOutput {
        lines: vec![LineShape::Lorentzian],
        ..Default::default()
    };
    let mut table = Table::new(
        format!("fig{id}"),
        vec![col("gamma_t", "1"), col("alpha_l", "1"), col("eta_mb", "1"), col("eta_analytic", "1")],
    );
    let points: Vec<(f64, f64)> = [0.1, 0.05, 0.01]
        .iter()
        .flat_map(|&g| linspace(0.0, 200.0, n).into_iter().map(move |a| (g, a)))
        .collect();
    gather(&points, &mut out, &mut table, |&(g, a)| {
        let s = cfg.scenario_at(a, g, LineShape::Lorentzian, direction)?;
        let mb = run_exponential(&s)?.eta_total;
        let an = match direction {
            Direction::Backward => analytic::backward_efficiency(a, g)?,
            Direction::Forward => analytic::forward_efficiency(a, g)?,
        };
        Ok(Point::Row(vec![g.into(), a.into(), mb.into(), an.into()]))
    })?;
    out.tables.push(table);
    Ok(out)
}

/// Figure 4: duration-optimized efficiency for both directions and both
/// line shapes.
fn duration_curves(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let n = if cfg.dense { 31 } else { 7 };
    let mut out = RunOutput {
        lines: vec![LineShape::Lorentzian, LineShape::Gaussian],
        ..Default::default()
    };
    let mut table = Table::new(
        "fig4",
        vec![col("line", "-"), col("direction", "-"), col("alpha_l", "1"), col("gamma_t_opt", "1"), col("eta_opt", "1")],
    );
    let mut points = Vec::new();
    for line in [LineShape::Lorentzian, LineShape::Gaussian] {
        for dir in [Direction::Backward, Direction::Forward] {
            points.extend(linspace(0.0, 60.0, n).into_iter().map(|a| (line, dir, a)));
        }
    }
    gather(&points, &mut out, &mut table, |&(line, dir, a)| {
        Ok(match duration_point(cfg, a, line, dir)? {
            Ok((g, eta, _, _)) => {
                Point::Row(vec![line.name().into(), dir.to_string().into(), a.into(), g.into(), eta.into()])
            }
            Err(msg) => Point::Failed(msg),
        })
    })?;
    out.tables.push(table);
    Ok(out)
}

/// Figure 5: numerical duration optimum against the heuristic formula.
fn heuristic_comparison(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let n = if cfg.dense { 31 } else { 7 };
    let mut out = RunOutput {
        lines: vec![LineShape::Lorentzian],
        ..Default::default()
    };
    let mut table = Table::new(
        "fig5",
        vec![
            col("alpha_l", "1"),
            col("gamma_t_numeric", "1"),
            col("eta_numeric", "1"),
            col("gamma_t_formula", "1"),
            col("eta_formula", "1"),
        ],
    );
    let points: Vec<f64> = linspace(0.0, 60.0, n).into_iter().filter(|&a| a > 0.0).collect();
    gather(&points, &mut out, &mut table, |&a| {
        Ok(match duration_point(cfg, a, LineShape::Lorentzian, Direction::Backward)? {
            Ok((g, eta, _, _)) => Point::Row(vec![
                a.into(),
                g.into(),
                eta.into(),
                analytic::optimal_gamma_t(a)?.into(),
                analytic::optimized_backward_efficiency(a)?.into(),
            ]),
            Err(msg) => Point::Failed(msg),
        })
    })?;
    out.tables.push(table);
    Ok(out)
}

/// Figure 6: Gaussian line, backward, duration-only against shape
/// optimization.
fn shape_curves(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let n = if cfg.dense { 31 } else { 7 };
    let mut out = RunOutput {
        lines: vec![LineShape::Gaussian],
        ..Default::default()
    };
    let mut table = Table::new(
        "fig6",
        vec![
            col("alpha_l", "1"),
            col("gamma_t", "1"),
            col("eta_duration", "1"),
            col("eta_shape", "1"),
            col("gain", "1"),
            col("n_iterations", "1"),
            col("converged", "-"),
        ],
    );
    let points = linspace(0.0, 60.0, n);
    gather(&points, &mut out, &mut table, |&a| {
        Ok(match shape_point(cfg, a, LineShape::Gaussian, Direction::Backward)? {
            Point::Rows(rows, _) => Point::Rows(rows, vec![]),
            other => other,
        })
    })?;
    out.tables.push(table);
    Ok(out)
}
