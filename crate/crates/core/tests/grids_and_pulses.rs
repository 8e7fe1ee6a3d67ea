use fidmem::{exponential_input, make_time_grid, pulse_energy, time_reverse, PulseEnvelope, TimeGrid};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn symmetric_window_spans_w_times_t() {
    let g = make_time_grid(0.1, 15.0, 4096).unwrap();
    assert!((g.t_min() + 1.5).abs() < 1e-12);
    assert!((g.t_max() - 1.5).abs() < 1e-12);
    assert!((g.dt() - 3.0 / 4095.0).abs() < 1e-15);

    let g = make_time_grid(0.01, 20.0, 1024).unwrap();
    assert!((g.t_min() + 0.2).abs() < 1e-12);
    assert!((g.t_max() - 0.2).abs() < 1e-12);
}

#[test]
fn degenerate_grids_are_rejected() {
    assert!(make_time_grid(0.1, 15.0, 1).is_err());
    assert!(make_time_grid(0.0, 15.0, 4096).is_err());
    assert!(make_time_grid(-0.1, 15.0, 4096).is_err());
    assert!(make_time_grid(0.1, 10.0, 4096).is_err());
}

#[test]
fn exponential_input_matches_its_closed_form() {
    let gt = 0.1;
    let grid = make_time_grid(gt, 15.0, 48_001).unwrap();
    let p = exponential_input(gt, grid).unwrap();
    assert!((pulse_energy(&p) - 1.0).abs() < 1e-6);

    let peak = (2.0 / gt).sqrt();
    assert!((p.sample(0.0).re - peak).abs() < 1e-3 * peak);
    assert!((p.sample(-gt).re - peak * (-1.0f64).exp()).abs() < 1e-3 * peak);
    for (t, e) in grid.times().zip(p.amplitude()) {
        if t > 1e-12 {
            assert_eq!(*e, Complex64::new(0.0, 0.0));
        }
    }

    // Share of the energy before −5T: e^{−10}.
    let early: f64 = grid
        .times()
        .zip(p.amplitude())
        .filter(|(t, _)| *t < -5.0 * gt)
        .map(|(_, e)| e.norm_sqr() * grid.dt())
        .sum();
    let expected = (-10.0f64).exp();
    assert!((early - expected).abs() < 0.01 * expected, "{early} vs {expected}");
}

#[test]
fn reversal_turns_a_rise_into_a_decay() {
    let grid = TimeGrid::ending_at_zero(0.01, 400).unwrap();
    let p = exponential_input(0.2, grid).unwrap();
    let r = time_reverse(&p);
    assert!((r.grid().t_min()).abs() < 1e-12);
    let a = r.amplitude();
    assert!(a.windows(2).all(|w| w[1].re <= w[0].re));
    assert!(a[0].re > 0.0);
}

#[test]
fn energy_basics() {
    let grid = TimeGrid::new(-1.0, 1.0, 101).unwrap();
    assert_eq!(pulse_energy(&PulseEnvelope::zeros(grid)), 0.0);
    let p = exponential_input(0.1, grid).unwrap();
    let doubled = p.scaled(Complex64::new(2.0, 0.0));
    assert!((pulse_energy(&doubled) - 4.0 * pulse_energy(&p)).abs() < 1e-12);
}

#[test]
fn constructors_are_pure() {
    let a = make_time_grid(0.05, 15.0, 999).unwrap();
    let b = make_time_grid(0.05, 15.0, 999).unwrap();
    assert_eq!(a, b);
    assert_eq!(exponential_input(0.05, a).unwrap(), exponential_input(0.05, b).unwrap());
}

fn arbitrary_pulse() -> impl Strategy<Value = PulseEnvelope> {
    (2usize..200, -5.0f64..0.0, 1e-3f64..0.1).prop_flat_map(|(n, t0, dt)| {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n).prop_map(move |v| {
            let grid = TimeGrid::with_step(t0, dt, v.len()).unwrap();
            PulseEnvelope::new(grid, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn double_reversal_is_identity(p in arbitrary_pulse()) {
        let rr = time_reverse(&time_reverse(&p));
        prop_assert_eq!(rr.amplitude(), p.amplitude());
        prop_assert!(rr.grid().same_as(p.grid()));
    }

    #[test]
    fn reversal_preserves_energy(p in arbitrary_pulse()) {
        let e = pulse_energy(&p);
        prop_assert!((pulse_energy(&time_reverse(&p)) - e).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn energy_is_quadratic_in_amplitude(p in arbitrary_pulse(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let a = Complex64::new(re, im);
        let e = pulse_energy(&p);
        prop_assert!((pulse_energy(&p.scaled(a)) - a.norm_sqr() * e).abs() <= 1e-9 * e.max(1.0));
    }

    #[test]
    fn exponential_inputs_have_unit_energy(gt in 1e-3f64..2.0, n in 64usize..4096) {
        let grid = make_time_grid(gt, 15.0, n).unwrap();
        let p = exponential_input(gt, grid).unwrap();
        prop_assert!((pulse_energy(&p) - 1.0).abs() < 1e-6);
        prop_assert!(p.amplitude().iter().zip(grid.times()).all(|(e, t)| t <= 1e-9 * grid.dt() || e.norm() == 0.0));
    }
}
