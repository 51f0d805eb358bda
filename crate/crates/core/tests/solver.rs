use std::f64::consts::PI;

use mhd25_core::diagnostics::DiagnosticsConfig;
use mhd25_core::grid::{cosine_mode, Grid, SpectralField};
use mhd25_core::initial::{generate_initial, InitialKind, InitialSpec};
use mhd25_core::solver::*;
use mhd25_core::state::{MhdState, Params, ReformulatedState};
use mhd25_core::symbol::{semigroup_evolve, ModeAmplitudes};
use mhd25_core::Error;

fn smooth_state(g: &Grid, amp: f64, seed: u64) -> MhdState {
    let spec = InitialSpec {
        kind: InitialKind::RandomSpectrum {
            spectral_slope: 0.0,
            band_lo: 0.0,
            band_hi: 3.0 * g.k_min(),
        },
        amplitude: amp,
        seed,
    };
    generate_initial(&spec, g).unwrap()
}

fn distance(a: &MhdState, b: &MhdState) -> f64 {
    a.fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| x.axpby(1.0, y, -1.0).unwrap().l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn run(initial: &MhdState, config: &SolverConfig) -> Trajectory {
    simulate(initial, &Params::default(), config, &DiagnosticsConfig::default()).unwrap()
}

#[test]
fn zero_state_stays_zero() {
    let g = Grid::new(32, 64.0).unwrap();
    let cfg = SolverConfig { dt: 1e-2, ..Default::default() };
    for s in [
        SolverState::Reformulated(ReformulatedState::from_primitive(&MhdState::equilibrium(&g)).unwrap()),
        SolverState::Primitive(MhdState::equilibrium(&g)),
    ] {
        let mut cfg = cfg.clone();
        if let SolverState::Primitive(_) = s {
            cfg.formulation = Formulation::Primitive;
        }
        let next = step(&s, &Params::default(), &cfg).unwrap();
        let fields = match &next {
            SolverState::Primitive(m) => m.fields().map(|f| f.max_abs()),
            SolverState::Reformulated(r) => r.fields().map(|f| f.max_abs()),
        };
        assert!(fields.iter().all(|v| *v == 0.0));
        assert!((next.time() - 1e-2).abs() < 1e-15);
    }
}

#[test]
fn linear_step_matches_semigroup() {
    let g = Grid::new(32, 4.0 * PI).unwrap();
    let (m1, m2) = (2i64, -1i64);
    let phi = cosine_mode(&g, m1, m2, 1e-3, 0.3);
    let u = [cosine_mode(&g, m1, m2, 2e-3, 1.1), cosine_mode(&g, m1, m2, -1e-3, -0.4)];
    let theta = cosine_mode(&g, m1, m2, 5e-4, 2.0);
    let delta = SpectralField::zeros(&g);
    let s = ReformulatedState::new(phi, u, theta, delta, 0.0).unwrap();
    let dt = 0.05;
    let cfg = SolverConfig { dt, linear_only: true, ..Default::default() };
    let next = match step(&SolverState::Reformulated(s.clone()), &Params::default(), &cfg).unwrap() {
        SolverState::Reformulated(r) => r,
        _ => unreachable!(),
    };
    for idx in 0..g.len() {
        let Some(xi) = g.wavevector(idx) else { continue };
        let amp = ModeAmplitudes {
            phi: s.phi.coefficients()[idx],
            u: [s.u[0].coefficients()[idx], s.u[1].coefficients()[idx]],
            theta: s.theta.coefficients()[idx],
        };
        let want = semigroup_evolve(amp, xi, dt).unwrap();
        let got = [next.phi.coefficients()[idx], next.u[0].coefficients()[idx], next.u[1].coefficients()[idx], next.theta.coefficients()[idx]];
        for (a, b) in got.iter().zip([want.phi, want.u[0], want.u[1], want.theta]) {
            assert!((a - b).norm() <= 1e-12 * 1e-3, "{a} vs {b}");
        }
    }
}

#[test]
fn linear_run_matches_semigroup_per_mode() {
    let g = Grid::new(32, 8.0 * PI).unwrap();
    let init = smooth_state(&g, 1e-3, 5);
    let cfg = SolverConfig { dt: 0.1, t_end: 1.0, linear_only: true, keep_snapshots: true, ..Default::default() };
    let tr = run(&init, &cfg);
    let r0 = ReformulatedState::from_primitive(&init).unwrap();
    let end = tr.snapshots.last().unwrap();
    let (u1, theta1) = (&end.state.u, &end.state.theta);
    let floor = 1e-15 * r0.fields().iter().map(|f| f.coefficients().iter().map(|c| c.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
    for idx in 0..g.len() {
        let Some(xi) = g.wavevector(idx) else { continue };
        if !g.dealias_keeps(idx) {
            continue;
        }
        let amp = ModeAmplitudes {
            phi: r0.phi.coefficients()[idx],
            u: [r0.u[0].coefficients()[idx], r0.u[1].coefficients()[idx]],
            theta: r0.theta.coefficients()[idx],
        };
        let want = semigroup_evolve(amp, xi, 1.0).unwrap();
        let scale = want.phi.norm() + want.u[0].norm() + want.u[1].norm() + want.theta.norm();
        let err = (end.phi.coefficients()[idx] - want.phi).norm()
            + (u1[0].coefficients()[idx] - want.u[0]).norm()
            + (u1[1].coefficients()[idx] - want.u[1]).norm()
            + (theta1.coefficients()[idx] - want.theta).norm();
        assert!(err <= 1e-10 * scale + floor, "mode {idx}: {err} vs {scale}");
    }
}

fn self_convergence_slope(formulation: Formulation) -> f64 {
    let g = Grid::new(32, 8.0 * PI).unwrap();
    let init = smooth_state(&g, 0.05, 9);
    let finals: Vec<MhdState> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let cfg = SolverConfig { dt, t_end: 1.0, formulation, snapshot_stride: 1000, ..Default::default() };
            let tr = run(&init, &cfg);
            assert_eq!(tr.termination, Termination::Completed);
            tr.final_state
        })
        .collect();
    let e1 = distance(&finals[0], &finals[1]);
    let e2 = distance(&finals[1], &finals[2]);
    (e1 / e2).log2()
}

#[test]
fn second_order_reformulated() {
    let slope = self_convergence_slope(Formulation::Reformulated);
    assert!((slope - 2.0).abs() <= 0.1, "{slope}");
}

#[test]
fn second_order_primitive() {
    let slope = self_convergence_slope(Formulation::Primitive);
    assert!((slope - 2.0).abs() <= 0.1, "{slope}");
}

#[test]
fn runs_are_deterministic() {
    let g = Grid::new(32, 8.0 * PI).unwrap();
    let init = smooth_state(&g, 1e-2, 3);
    let cfg = SolverConfig { dt: 0.05, t_end: 0.5, keep_snapshots: true, ..Default::default() };
    let a = run(&init, &cfg);
    let b = run(&init, &cfg);
    assert_eq!(a.diagnostics, b.diagnostics);
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        for (f, h) in x.state.fields().iter().zip(y.state.fields()) {
            assert_eq!(f.values(), h.values());
        }
    }
}

#[test]
fn equilibrium_trajectory_is_constant() {
    let g = Grid::new(32, 8.0).unwrap();
    let cfg = SolverConfig { dt: 1e-2, t_end: 0.1, ..Default::default() };
    let tr = run(&MhdState::equilibrium(&g), &cfg);
    assert_eq!(tr.termination, Termination::Completed);
    for r in &tr.diagnostics.records {
        assert_eq!((r.e, r.d, r.x, r.y, r.lyapunov, r.max_abs_a), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(r.lam_gamma.iter().all(|v| *v == 0.0));
    }
    assert_eq!(tr.diagnostics.x0, 0.0);
}

#[test]
fn small_single_mode_keeps_density_small() {
    let g = Grid::new(32, 16.0 * PI).unwrap();
    let spec = InitialSpec { kind: InitialKind::SingleMode { mode: [1, 2] }, amplitude: 1e-3, seed: 4 };
    let init = generate_initial(&spec, &g).unwrap();
    let cfg = SolverConfig { dt: 0.05, t_end: 5.0, smallness: SmallnessPolicy::Abort, ..Default::default() };
    let tr = run(&init, &cfg);
    assert_eq!(tr.termination, Termination::Completed);
    assert!(tr.max_abs_a <= 0.5);
    assert!(tr.first_smallness_violation.is_none());
}

#[test]
fn snapshot_times_increase() {
    let g = Grid::new(32, 8.0).unwrap();
    let init = smooth_state(&g, 1e-3, 1);
    let cfg = SolverConfig { dt: 1e-2, t_end: 0.1, snapshot_stride: 3, keep_snapshots: true, ..Default::default() };
    let tr = run(&init, &cfg);
    let t = tr.diagnostics.times();
    assert_eq!(t.len(), 5);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!((t[4] - 0.1).abs() < 1e-12);
    assert_eq!(tr.snapshots.len(), t.len());
}

#[test]
fn vacuum_guard_aborts() {
    let g = Grid::new(32, 2.0 * PI).unwrap();
    let a = cosine_mode(&g, 1, 0, 0.85, 0.0);
    let z = SpectralField::zeros(&g);
    let init = MhdState::new(a, [z.clone(), z.clone()], z.clone(), z, 0.0).unwrap();
    let cfg = SolverConfig { dt: 1e-3, t_end: 0.01, formulation: Formulation::Primitive, vacuum_threshold: 0.2, ..Default::default() };
    let tr = run(&init, &cfg);
    assert!(matches!(tr.termination, Termination::VacuumAbort { .. }), "{:?}", tr.termination);
    assert!(tr.termination.is_guard_abort());
    assert_eq!(tr.termination.label(), "vacuum_abort");
}

#[test]
fn smallness_policy_abort() {
    let g = Grid::new(32, 2.0 * PI).unwrap();
    let a = cosine_mode(&g, 1, 0, 0.6, 0.0);
    let z = SpectralField::zeros(&g);
    let init = MhdState::new(a, [z.clone(), z.clone()], z.clone(), z, 0.0).unwrap();
    let mut cfg = SolverConfig { dt: 1e-3, t_end: 0.01, formulation: Formulation::Primitive, ..Default::default() };
    let tr = run(&init, &cfg);
    assert_eq!(tr.termination, Termination::Completed);
    assert_eq!(tr.first_smallness_violation, Some(0.0));
    cfg.smallness = SmallnessPolicy::Abort;
    let tr = run(&init, &cfg);
    assert!(matches!(tr.termination, Termination::SmallnessViolation { .. }));
    assert_eq!(tr.steps_taken, 0);
}

#[test]
fn non_finite_state_is_reported() {
    let g = Grid::new(16, 2.0 * PI).unwrap();
    let mut v = vec![0.0; g.len()];
    v[5] = f64::NAN;
    let a = SpectralField::from_values(&g, v).unwrap();
    let z = SpectralField::zeros(&g);
    let init = MhdState::new(z.clone(), [a, z.clone()], z.clone(), z, 0.0).unwrap();
    let cfg = SolverConfig { dt: 1e-3, t_end: 0.01, formulation: Formulation::Primitive, ..Default::default() };
    let tr = run(&init, &cfg);
    assert!(matches!(tr.termination, Termination::NonFinite { .. }), "{:?}", tr.termination);
}

#[test]
fn config_validation() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let bound = SolverConfig::explicit_bound(&g);
    assert!((bound - 0.5 / (32.0 * 32.0)).abs() < 1e-15);
    let prim = SolverConfig { dt: 2.0 * bound, formulation: Formulation::Primitive, ..Default::default() };
    assert!(matches!(prim.validate(&g), Err(Error::TimeStepTooLarge { .. })));
    let both = SolverConfig { formulation: Formulation::Both, ..prim.clone() };
    assert!(both.validate(&g).is_err());
    let refo = SolverConfig { formulation: Formulation::Reformulated, ..prim };
    assert!(refo.validate(&g).is_ok());
    assert!(SolverConfig { dt: 0.0, ..Default::default() }.validate(&g).is_err());
    assert!(SolverConfig { snapshot_stride: 0, ..Default::default() }.validate(&g).is_err());
    assert_eq!(SolverConfig { dt: 0.1, t_end: 1.0, ..Default::default() }.steps(), 10);
    assert_eq!(SolverConfig { dt: 0.3, t_end: 1.0, ..Default::default() }.steps(), 4);
}

#[test]
fn stepper_rejects_mismatched_state() {
    let g = Grid::new(32, 8.0).unwrap();
    let cfg = SolverConfig { dt: 1e-3, ..Default::default() };
    let st = Stepper::new(&g, &Params::default(), Formulation::Reformulated, &cfg).unwrap();
    assert!(st.step(&SolverState::Primitive(MhdState::equilibrium(&g))).is_err());
    assert!(Stepper::new(&g, &Params::default(), Formulation::Both, &cfg).is_err());
    let general = Params { mu: 2.0, ..Params::default() };
    assert!(Stepper::new(&g, &general, Formulation::Reformulated, &cfg).is_err());
    assert!(Stepper::new(&g, &general, Formulation::Primitive, &cfg).is_ok());
}

#[test]
fn masses_are_conserved_on_primitive_runs() {
    let g = Grid::new(32, 8.0 * PI).unwrap();
    let init = smooth_state(&g, 1e-2, 2);
    for dealias in [true, false] {
        let cfg = SolverConfig { dt: 0.02, t_end: 1.0, formulation: Formulation::Primitive, dealias, ..Default::default() };
        let tr = run(&init, &cfg);
        let rep = conservation_report(&tr).unwrap();
        assert!(rep.mass_a_drift <= 1e-10 * rep.duration);
        assert!(rep.mass_b_drift <= 1e-10 * rep.duration);
    }
    let cfg = SolverConfig { dt: 0.02, t_end: 0.1, ..Default::default() };
    assert!(conservation_report(&run(&init, &cfg)).is_err());
}

#[test]
fn general_parameters_run_on_primitive() {
    let g = Grid::new(32, 8.0 * PI).unwrap();
    let init = smooth_state(&g, 1e-2, 6);
    let params = Params { mu: 0.5, lambda: 0.3, c_v: 2.0, kappa: 0.7, gas_constant: 1.5, ..Params::default() };
    let cfg = SolverConfig { dt: 0.02, t_end: 0.5, formulation: Formulation::Primitive, ..Default::default() };
    let tr = simulate(&init, &params, &cfg, &DiagnosticsConfig::default()).unwrap();
    assert_eq!(tr.termination, Termination::Completed);
    let rep = conservation_report(&tr).unwrap();
    assert!(rep.mass_a_drift <= 1e-10 * rep.duration);
}
