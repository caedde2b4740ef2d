//! Wave-equation checks against the reduced model and against itself.

use floquet_well::pde::run_experiment;
use floquet_well::twolevel::{classify_resonance_in, propagate};
use floquet_well::well::{reduce_to_drive, GridSpec, WellSpec};
use floquet_well::ShakingPath;
use num_complex::Complex64 as C64;

#[test]
fn weak_shaking_follows_the_two_level_model() {
    let w = WellSpec::reference();
    let g = GridSpec::reference();
    let drive = reduce_to_drive(&w, &ShakingPath::sinusoidal(0.1, 1.0).unwrap()).unwrap();
    let res = classify_resonance_in(&drive, 1, 0.9, 1.1).unwrap();
    let path = ShakingPath::sinusoidal(0.1, res.eps_star).unwrap();
    let drive = drive.with_eps(res.eps_star);
    // Whole numbers of time steps, so both models sample at the same instants.
    let every = (path.period() / g.dt).round() * g.dt;
    let half_cycle = (0.5 * res.rabi_period().unwrap() / every).round() * every;
    let pde = run_experiment(&w, &path, &g, half_cycle, every).unwrap();
    let two = propagate(&drive, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], half_cycle, every).unwrap();
    assert!(pde.pop2.iter().copied().fold(0.0, f64::max) > 0.8);
    for k in 0..pde.len().min(two.len()) {
        assert!((pde.times[k] - two.times[k]).abs() < 1e-6);
        let d1 = (pde.pop1[k] - two.a1_sq[k]).abs();
        let d2 = (pde.pop2[k] - two.a2_sq[k]).abs();
        assert!(d1 < 0.05 && d2 < 0.05, "t = {}: {d1}, {d2}", pde.times[k]);
    }
}

#[test]
fn hermitian_runs_conserve_the_discrete_norm() {
    // 10⁶ steps of the A = 1 configuration.
    let w = WellSpec::reference();
    let g = GridSpec::reference();
    let path = ShakingPath::sinusoidal(1.0, 1.0 / 3.0).unwrap();
    let run = run_experiment(&w, &path, &g, 1e6 * g.dt, 1e4 * g.dt).unwrap();
    let drift = run.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-6, "{drift:e}");
}

#[test]
fn splitting_is_second_order() {
    let w = WellSpec::reference();
    let path = ShakingPath::sinusoidal(1.0, 0.3).unwrap();
    let pop2 = |dt: f64| {
        let g = GridSpec::new(-8.0, 8.0, 256, dt).unwrap();
        *run_experiment(&w, &path, &g, 20.0, 20.0).unwrap().pop2.last().unwrap()
    };
    let (p1, p2, p4) = (pop2(0.02), pop2(0.01), pop2(0.005));
    let ratio = (p1 - p2).abs() / (p2 - p4).abs();
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn doubling_resolution_leaves_projections_unchanged() {
    let w = WellSpec::reference();
    let path = ShakingPath::sinusoidal(1.0, 1.0 / 3.0).unwrap();
    let coarse = run_experiment(&w, &path, &GridSpec::reference(), 200.0, 10.0).unwrap();
    let fine = run_experiment(&w, &path, &GridSpec::new(-8.0, 8.0, 512, 0.01).unwrap(), 200.0, 10.0).unwrap();
    for k in 0..coarse.len() {
        let d = (coarse.a1[k] - fine.a1[k]).norm().max((coarse.a2[k] - fine.a2[k]).norm());
        assert!(d < 1e-4, "t = {}: {d:e}", coarse.times[k]);
    }
}

#[test]
fn off_resonant_shaking_stays_in_the_ground_state() {
    let w = WellSpec::reference();
    let path = ShakingPath::sinusoidal(1.0, 0.29).unwrap();
    let run = run_experiment(&w, &path, &GridSpec::reference(), 500.0, path.period()).unwrap();
    let min_pop1 = run.pop1.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min_pop1 > 0.9, "{min_pop1}");
}
