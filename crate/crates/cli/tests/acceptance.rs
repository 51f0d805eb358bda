//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails. `cargo test --release --test acceptance -- 2 6` runs a subset.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use mhd25_core::diagnostics::{
    fit_decay, localized_lyapunov, lyapunov_monitor, trim_saturation, DiagnosticsConfig, FitWindow, Regime,
};
use mhd25_core::grid::{cosine_mode, Grid, SpectralField};
use mhd25_core::initial::{generate_initial_with, random_band_field, rng_from_seed, InitialSpec};
use mhd25_core::littlewood_paley::checks::{run_checks, LpCheckConfig};
use mhd25_core::littlewood_paley::LittlewoodPaley;
use mhd25_core::solver::{conservation_report, simulate_with, step, Formulation, SolverConfig, SolverState, Termination, Trajectory};
use mhd25_core::state::{chain_rule_residual, MhdState, Params, ReformulatedState};
use mhd25_core::symbol::{
    characteristic_coefficients, decay_envelope, semigroup_evolve, sweep, EnvelopeComponents, ModeAmplitudes,
    SpectrumProfile,
};
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn decay_grid() -> Grid {
    Grid::new(512, 128.0 * PI).unwrap()
}

fn c1_symbol() -> Outcome {
    let spectra = sweep(1e-3, 1e3, 200).unwrap();
    let mut failures = Vec::new();
    let mut worst_abscissa = f64::NEG_INFINITY;
    let mut worst_residual: f64 = 0.0;
    for s in &spectra {
        let (r, r2) = (s.r, s.r * s.r);
        worst_abscissa = worst_abscissa.max(s.abscissa() / r2);
        if s.abscissa() >= 0.0 {
            failures.push(format!("abscissa >= 0 at r = {r}"));
        }
        let c = characteristic_coefficients(r);
        for l in s.eigenvalues {
            let p = ((l + c[0]) * l + c[1]) * l + c[2];
            let scale = (l.norm().powi(3) + c[0].abs() * l.norm_sqr() + c[1].abs() * l.norm() + c[2].abs()).max(f64::MIN_POSITIVE);
            worst_residual = worst_residual.max(p.norm() / scale);
        }
        if r >= 30.0 && (s.damped_branch().re + 2.0 + 2.0 / r2).abs() > 1e-3 {
            failures.push(format!("damped branch off at r = {r}"));
        }
        if r >= 10.0 && s.parabolic_branches().iter().any(|b| b.re > -0.4 * r2) {
            failures.push(format!("parabolic branch too slow at r = {r}"));
        }
        if r <= 0.05 && s.eigenvalues.iter().any(|l| (l.re + 2.0 / 3.0 * r2).abs() > 0.1 * 2.0 / 3.0 * r2) {
            failures.push(format!("low-frequency real part off at r = {r}"));
        }
    }
    if worst_residual > 1e-12 {
        failures.push(format!("root residual {worst_residual:e}"));
    }
    outcome(
        failures.is_empty() && spectra.len() == 200,
        format!(
            "200 radii, max abscissa/r^2 {worst_abscissa:.3e}, relative root residual {worst_residual:.1e}{}",
            failures.first().map(|f| format!(", first failure: {f}")).unwrap_or_default()
        ),
    )
}

fn c2_linear_decay() -> Outcome {
    let g = decay_grid();
    let times: Vec<f64> = (0..=60).map(|i| 10.0 * 20f64.powf(i as f64 / 60.0)).collect();
    let window = FitWindow { t_min: 10.0, t_max: 200.0 };
    let mut pass = true;
    let mut parts = Vec::new();
    for components in [EnvelopeComponents::Solenoidal, EnvelopeComponents::Full] {
        let profile = SpectrumProfile { slope: 0.0, band_hi: 1.0, components };
        for (gamma, want) in [(0.0, -0.5), (-0.5, -0.25)] {
            let env = decay_envelope(&g, 1.0, gamma, profile, &times, window).unwrap();
            let got = env.fit.map(|f| f.exponent).unwrap_or(f64::NAN);
            pass &= (got - want).abs() <= 0.05;
            parts.push(format!("{components:?} gamma {gamma}: {got:.4} (want {want} +- 0.05)"));
        }
    }
    outcome(pass, parts.join("; "))
}

/// Shared nonlinear run for criteria 3 and 5.
fn nonlinear_run() -> (Trajectory, Duration) {
    let start = Instant::now();
    let g = decay_grid();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let initial = generate_initial_with(&InitialSpec::flat_negative_besov(1.0, 1e-3, 1.0, 7), &lp).unwrap();
    let config = SolverConfig { dt: 0.25, t_end: 200.0, ..SolverConfig::default() };
    let diag = DiagnosticsConfig { sigma: 1.0, gammas: vec![0.0] };
    let tr = simulate_with(&lp, &initial, &Params::default(), &config, &diag).unwrap();
    (tr, start.elapsed())
}

fn c3_nonlinear_decay(tr: &Trajectory) -> Outcome {
    let d = &tr.diagnostics;
    let t = d.times();
    let window = trim_saturation(
        FitWindow { t_min: 10.0, t_max: 200.0 },
        &t,
        &d.column("lowest_shell_fraction").unwrap(),
    );
    let fit = fit_decay(&t, &d.column("lam_gamma_norm[0]").unwrap(), window);
    let ly = lyapunov_monitor(&t, &d.column("lyapunov_value").unwrap(), d.sigma, 1.0, 1e-6).unwrap();
    let exponent = fit.as_ref().map(|f| f.exponent).unwrap_or(f64::NAN);
    let pass = tr.termination == Termination::Completed && (exponent + 0.5).abs() <= 0.15 && ly.violations.is_empty();
    outcome(
        pass,
        format!(
            "n = 512, eps = 1e-3: L2 exponent {exponent:.4} over [{}, {}] (want -0.5 +- 0.15); Lyapunov max step increase {:.2e}, {} violations above 1e-6",
            window.t_min,
            window.t_max,
            ly.max_increase,
            ly.violations.len()
        ),
    )
}

fn c4_consistency() -> Outcome {
    let g = Grid::new(64, 16.0 * PI).unwrap();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let initial = generate_initial_with(&InitialSpec::flat_negative_besov(1.0, 1e-3, 1.0, 11), &lp).unwrap();
    let config = SolverConfig {
        dt: 1e-3,
        t_end: 5.0,
        formulation: Formulation::Both,
        snapshot_stride: 1000,
        ..SolverConfig::default()
    };
    let tr = simulate_with(&lp, &initial, &Params::default(), &config, &DiagnosticsConfig::default()).unwrap();
    let phi_err = tr.max_consistency_error();
    let cons = conservation_report(&tr).unwrap();
    // band below k_max/2 keeps phi(a, theta, b) resolved on the grid
    let mut chain: f64 = 0.0;
    for seed in 0..100 {
        let s = generate_initial_with(&InitialSpec::flat_negative_besov(1.0, 1e-2, 0.45 * g.k_max(), seed), &lp).unwrap();
        chain = chain.max(chain_rule_residual(&s).unwrap());
    }
    let pass = tr.termination == Termination::Completed
        && phi_err <= 1e-6
        && chain <= 1e-9
        && cons.mass_a_drift <= 1e-10 * cons.duration
        && cons.mass_b_drift <= 1e-10 * cons.duration;
    outcome(
        pass,
        format!("dual run to T = 5: sup ||phi_evolved - phi(a, theta, b)|| = {phi_err:.2e}; chain-rule residual over 100 states {chain:.2e}"),
    )
}

fn c5_smallness(tr: &Trajectory) -> Outcome {
    let pass = tr.max_abs_a <= 0.5 && tr.first_smallness_violation.is_none();
    outcome(pass, format!("eps = 1e-3 to T = {}: observed sup |a| = {:.3e} (bound 0.5)", tr.steps_taken as f64 * 0.25, tr.max_abs_a))
}

fn c6_littlewood_paley() -> Outcome {
    let g = Grid::new(128, 16.0 * PI).unwrap();
    let r = run_checks(&LittlewoodPaley::with_default_cutoffs(&g), &LpCheckConfig::default()).unwrap();
    let worst_spread = r.constants.iter().map(|c| c.spread()).fold(0.0, f64::max);
    outcome(
        r.passes(),
        format!(
            "partition {:.1e}, orthogonality [{:.3}, {:.3}], Bernstein [{:.3}, {:.3}], reconstruction {:.1e}, embedding violations {}, {} constants with max/min spread <= {:.2}",
            r.partition_defect,
            r.orthogonality.0,
            r.orthogonality.1,
            r.bernstein.0,
            r.bernstein.1,
            r.reconstruction_error,
            r.embedding_violations,
            r.constants.len(),
            worst_spread
        ),
    )
}

fn c7_conservation() -> Outcome {
    let g = Grid::new(64, 16.0 * PI).unwrap();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let initial = generate_initial_with(&InitialSpec::flat_negative_besov(1.0, 1e-3, 2.0, 3), &lp).unwrap();
    let mut worst_mass: f64 = 0.0;
    let mut energy = f64::NAN;
    for dealias in [true, false] {
        let config = SolverConfig {
            dt: 1e-2,
            t_end: 1.0,
            formulation: Formulation::Primitive,
            dealias,
            ..SolverConfig::default()
        };
        let tr = simulate_with(&lp, &initial, &Params::default(), &config, &DiagnosticsConfig::default()).unwrap();
        let c = conservation_report(&tr).unwrap();
        worst_mass = worst_mass.max(c.mass_a_drift.max(c.mass_b_drift) / c.duration);
        if !dealias {
            energy = c.energy_relative_drift;
        }
    }
    outcome(
        worst_mass <= 1e-10 && energy <= 1e-6,
        format!("mass drift per unit time {worst_mass:.2e} (<= 1e-10); total-energy relative drift, dealias off, {energy:.2e} (<= 1e-6)"),
    )
}

fn distance(a: &MhdState, b: &MhdState) -> f64 {
    a.fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| x.axpby(1.0, y, -1.0).unwrap().l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn c8_order() -> Outcome {
    let g = Grid::new(32, 8.0 * PI).unwrap();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let spec = InitialSpec::flat_negative_besov(1.0, 5e-2, 3.0 * g.k_min(), 9);
    let initial = generate_initial_with(&spec, &lp).unwrap();
    let finals: Vec<MhdState> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let config = SolverConfig { dt, t_end: 1.0, snapshot_stride: 1000, ..SolverConfig::default() };
            simulate_with(&lp, &initial, &Params::default(), &config, &DiagnosticsConfig::default())
                .unwrap()
                .final_state
        })
        .collect();
    let slope = (distance(&finals[0], &finals[1]) / distance(&finals[1], &finals[2])).log2();

    let (m1, m2) = (3, -2);
    let phi = cosine_mode(&g, m1, m2, 1e-3, 0.4);
    let u = [cosine_mode(&g, m1, m2, 1e-3, 1.0), cosine_mode(&g, m1, m2, -2e-3, 2.0)];
    let theta = cosine_mode(&g, m1, m2, 5e-4, -1.0);
    let s0 = ReformulatedState::new(phi, u, theta, SpectralField::zeros(&g), 0.0).unwrap();
    let config = SolverConfig { dt: 0.1, linear_only: true, ..SolverConfig::default() };
    let mut s = SolverState::Reformulated(s0.clone());
    for _ in 0..10 {
        s = step(&s, &Params::default(), &config).unwrap();
    }
    let SolverState::Reformulated(end) = s else { unreachable!() };
    let mut err: f64 = 0.0;
    let mut size: f64 = 0.0;
    for idx in 0..g.len() {
        let Some(xi) = g.wavevector(idx) else { continue };
        let at = |f: &SpectralField| f.coefficients()[idx];
        let exact = semigroup_evolve(
            ModeAmplitudes { phi: at(&s0.phi), u: [at(&s0.u[0]), at(&s0.u[1])], theta: at(&s0.theta) },
            xi,
            1.0,
        )
        .unwrap();
        let got = [at(&end.phi), at(&end.u[0]), at(&end.u[1]), at(&end.theta)];
        let want: [Complex64; 4] = [exact.phi, exact.u[0], exact.u[1], exact.theta];
        for (a, b) in got.iter().zip(want) {
            err = err.max((a - b).norm());
            size = size.max(b.norm());
        }
    }
    let rel = err / size;
    outcome(
        (slope - 2.0).abs() <= 0.1 && rel <= 1e-10,
        format!("self-convergence slope {slope:.3} (want 2 +- 0.1); linear single mode at t = 1 relative error {rel:.1e}"),
    )
}

fn c9_lyapunov_equivalence() -> Outcome {
    let g = Grid::new(128, 16.0 * PI).unwrap();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let (j_min, _) = lp.j_range();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..100 {
        let mut rng = rng_from_seed(seed);
        let mut f = || random_band_field(&g, &mut rng, 0.0, 1.5, -1.0);
        let (phi, u, theta) = (f(), [f(), f()], f());
        for j in (j_min..=0).filter(|&j| lp.is_resolvable(j)) {
            let (l, _) = localized_lyapunov(&lp, &phi, &u, &theta, j, 0.1, Regime::Low).unwrap();
            let e = lp.block_norms(&phi).get(j).powi(2)
                + lp.vector_block_norms(&u).get(j).powi(2)
                + lp.block_norms(&theta).get(j).powi(2);
            if e > 0.0 {
                lo = lo.min(l / e);
                hi = hi.max(l / e);
            }
        }
    }
    outcome(lo >= 0.11 && hi <= 0.9, format!("100 states, j in [{j_min}, 0]: ratio range [{lo:.4}, {hi:.4}] within [0.11, 0.9]"))
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |c: u32| selected.is_empty() || selected.contains(&c);
    let budgets = [5.0, 120.0, 1800.0, f64::INFINITY, f64::INFINITY, 60.0, f64::INFINITY, f64::INFINITY, f64::INFINITY];
    let names = [
        "symbol dichotomy",
        "heat-optimal linear decay",
        "nonlinear decay and Lyapunov monotonicity",
        "reformulation consistency",
        "smallness preservation",
        "Littlewood-Paley suite",
        "conservation",
        "solver order",
        "localized Lyapunov equivalence",
    ];
    let mut shared: Option<(Trajectory, Duration)> = None;
    let mut failed = 0;
    for c in 1..=9u32 {
        if !wanted(c) {
            continue;
        }
        let start = Instant::now();
        let mut run_shared = || -> (Trajectory, Duration) {
            shared.get_or_insert_with(nonlinear_run).clone()
        };
        let (result, elapsed) = match c {
            1 => (c1_symbol(), start.elapsed()),
            2 => (c2_linear_decay(), start.elapsed()),
            3 => {
                let (tr, t) = run_shared();
                (c3_nonlinear_decay(&tr), t + start.elapsed())
            }
            4 => (c4_consistency(), start.elapsed()),
            5 => {
                let (tr, _) = run_shared();
                (c5_smallness(&tr), start.elapsed())
            }
            6 => (c6_littlewood_paley(), start.elapsed()),
            7 => (c7_conservation(), start.elapsed()),
            8 => (c8_order(), start.elapsed()),
            _ => (c9_lyapunov_equivalence(), start.elapsed()),
        };
        let in_budget = elapsed.as_secs_f64() <= budgets[c as usize - 1];
        let pass = result.pass && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {c} [{}] {}: {} ({:.1} s{})",
            if pass { "PASS" } else { "FAIL" },
            names[c as usize - 1],
            result.detail,
            elapsed.as_secs_f64(),
            if in_budget { "" } else { ", over the runtime budget" }
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
