//! Exponential-integrator time stepping for both formulations.
//!
//! One step is Heun's rule in integrating-factor form:
//! `U* = E(U + dt N(U))`, `U' = E(U + dt/2 N(U)) + dt/2 N(U*)`, where `E` is
//! the exact propagator of the linear part. For the reformulated system `E`
//! is the full 3x3 symbol exponential per shell plus heat decay of the
//! solenoidal velocity; for the primitive system it is the diagonal heat
//! multiplier of `u` and `theta`, everything else is explicit. `E` is the
//! identity on the zero mode, which therefore follows plain Heun.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::diagnostics::{DiagnosticSeries, DiagnosticsConfig, FieldBlocks};
use crate::error::{Error, Result};
use crate::grid::{Grid, SpectralField};
use crate::kernel::{self, Coeffs, SampleStats};
use crate::littlewood_paley::LittlewoodPaley;
use crate::math::{exp, sqrt};
use crate::state::{MhdState, Params, ReformulatedState};
use crate::symbol::{apply_propagator, compressible_propagator, Mat3, ModeAmplitudes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Formulation {
    Primitive,
    Reformulated,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SmallnessPolicy {
    /// Record violations and keep going.
    Monitor,
    /// Stop at the first violation.
    Abort,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub formulation: Formulation,
    pub dealias: bool,
    pub snapshot_stride: usize,
    pub seed: u64,
    pub linear_only: bool,
    pub smallness: SmallnessPolicy,
    /// Keep full states at every stride, not only diagnostics.
    pub keep_snapshots: bool,
    /// Abort when `min(1 + a)` drops below this.
    pub vacuum_threshold: f64,
    /// Bound on `sup |a|` watched by the smallness policy.
    pub smallness_bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            t_end: 1.0,
            formulation: Formulation::Reformulated,
            dealias: true,
            snapshot_stride: 1,
            seed: 0,
            linear_only: false,
            smallness: SmallnessPolicy::Monitor,
            keep_snapshots: false,
            vacuum_threshold: 0.1,
            smallness_bound: 0.5,
        }
    }
}

impl SolverConfig {
    /// Largest step allowed when an explicit linear remainder is integrated.
    pub fn explicit_bound(grid: &Grid) -> f64 {
        0.5 / (grid.k_max() * grid.k_max())
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig("t_end must be nonnegative"));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidConfig("snapshot_stride must be at least 1"));
        }
        if !(self.vacuum_threshold >= 0.0 && self.vacuum_threshold < 1.0) {
            return Err(Error::InvalidConfig("vacuum_threshold must lie in [0, 1)"));
        }
        if self.formulation != Formulation::Reformulated {
            let bound = Self::explicit_bound(grid);
            if self.dt > bound {
                return Err(Error::TimeStepTooLarge { dt: self.dt, bound });
            }
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn steps(&self) -> usize {
        let n = self.t_end / self.dt;
        let r = libm::round(n);
        if (n - r).abs() < 1e-9 * n.max(1.0) {
            r as usize
        } else {
            libm::ceil(n) as usize
        }
    }
}

/// Raw spectral unknowns: `(a, u1, u2, theta, b)` or `(phi, u1, u2, theta, delta)`.
type Raw = [Coeffs; 5];

enum Propagator {
    Primitive { heat_u: Vec<f64>, heat_t: Vec<f64> },
    Reformulated { shell_of: Vec<u32>, mats: Vec<Mat3>, heat: Vec<f64> },
}

/// Single-formulation stepper with precomputed propagators.
pub struct Stepper {
    grid: Grid,
    params: Params,
    dt: f64,
    dealias: bool,
    linear_only: bool,
    vacuum_threshold: f64,
    formulation: Formulation,
    prop: Propagator,
}

impl Stepper {
    pub fn new(grid: &Grid, params: &Params, formulation: Formulation, config: &SolverConfig) -> Result<Self> {
        params.validate()?;
        config.validate(grid)?;
        let dt = config.dt;
        let kmag = grid.wavenumber_magnitudes();
        let prop = match formulation {
            Formulation::Primitive => Propagator::Primitive {
                heat_u: kmag.iter().map(|&k| exp(-params.mu * k.max(0.0) * k.max(0.0) * dt)).collect(),
                heat_t: kmag
                    .iter()
                    .map(|&k| exp(-params.kappa / params.c_v * k.max(0.0) * k.max(0.0) * dt))
                    .collect(),
            },
            Formulation::Reformulated => {
                params.require_reference()?;
                let mut index = vec![u32::MAX; grid.n() * grid.n() / 2 + 1];
                let mut shell_of = vec![u32::MAX; grid.len()];
                let mut mats = Vec::new();
                for idx in 0..grid.len() {
                    let Some([m1, m2]) = grid.integer_mode(idx) else {
                        continue;
                    };
                    let s = (m1 * m1 + m2 * m2) as usize;
                    if s == 0 {
                        continue;
                    }
                    if index[s] == u32::MAX {
                        index[s] = mats.len() as u32;
                        mats.push(compressible_propagator(kmag[idx], dt)?);
                    }
                    shell_of[idx] = index[s];
                }
                Propagator::Reformulated {
                    shell_of,
                    mats,
                    heat: kmag.iter().map(|&k| exp(-k.max(0.0) * k.max(0.0) * dt)).collect(),
                }
            }
            Formulation::Both => return Err(Error::InvalidConfig("a stepper advances one formulation")),
        };
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            dt,
            dealias: config.dealias,
            linear_only: config.linear_only,
            vacuum_threshold: config.vacuum_threshold,
            formulation,
            prop,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Drops Nyquist content and, with dealiasing, everything outside the band.
    fn project(&self, raw: &mut Raw) {
        for c in raw.iter_mut() {
            for (idx, v) in c.iter_mut().enumerate() {
                let keep = if self.dealias {
                    self.grid.dealias_keeps(idx)
                } else {
                    self.grid.wavevector(idx).is_some()
                };
                if !keep {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    fn propagate(&self, raw: &mut Raw) {
        match &self.prop {
            Propagator::Primitive { heat_u, heat_t } => {
                for idx in 0..self.grid.len() {
                    raw[1][idx] *= heat_u[idx];
                    raw[2][idx] *= heat_u[idx];
                    raw[3][idx] *= heat_t[idx];
                }
            }
            Propagator::Reformulated { shell_of, mats, heat } => {
                for idx in 0..self.grid.len() {
                    let sh = shell_of[idx];
                    if sh == u32::MAX {
                        continue;
                    }
                    let xi = self.grid.wavevector(idx).expect("lattice mode");
                    let out = apply_propagator(
                        &mats[sh as usize],
                        heat[idx],
                        ModeAmplitudes {
                            phi: raw[0][idx],
                            u: [raw[1][idx], raw[2][idx]],
                            theta: raw[3][idx],
                        },
                        xi,
                    );
                    raw[0][idx] = out.phi;
                    raw[1][idx] = out.u[0];
                    raw[2][idx] = out.u[1];
                    raw[3][idx] = out.theta;
                }
            }
        }
    }

    /// Explicit part `N(U)` plus pointwise statistics of `U`.
    fn explicit(&self, raw: &Raw) -> Result<(Raw, SampleStats)> {
        let refs = [&raw[0][..], &raw[1][..], &raw[2][..], &raw[3][..], &raw[4][..]];
        let (mut n, stats) = match self.formulation {
            Formulation::Primitive => {
                let (mut t, stats) =
                    kernel::primitive_tendency(&self.grid, &self.params, refs, !self.linear_only, self.dealias)?;
                let lu1 = kernel::lap(&self.grid, &raw[1]);
                let lu2 = kernel::lap(&self.grid, &raw[2]);
                let lt = kernel::lap(&self.grid, &raw[3]);
                let (mu, diff) = (self.params.mu, self.params.kappa / self.params.c_v);
                for idx in 0..self.grid.len() {
                    t[1][idx] -= lu1[idx] * mu;
                    t[2][idx] -= lu2[idx] * mu;
                    t[3][idx] -= lt[idx] * diff;
                }
                (t, stats)
            }
            _ => {
                if self.linear_only {
                    let a: Vec<f64> = {
                        let d: Vec<Complex64> = (0..self.grid.len()).map(|i| (raw[0][i] - raw[4][i]) * 0.5).collect();
                        self.grid.inverse(&d)?
                    };
                    if a.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite("state"));
                    }
                    let stats = SampleStats {
                        min_density: a.iter().fold(f64::INFINITY, |m, v| m.min(1.0 + v)),
                        max_abs_a: a.iter().fold(0.0, |m, v| m.max(v.abs())),
                    };
                    let z = vec![Complex64::new(0.0, 0.0); self.grid.len()];
                    ([z.clone(), z.clone(), z.clone(), z.clone(), z], stats)
                } else {
                    let t = kernel::reformulated_terms(&self.grid, refs)?;
                    let [f21, f22] = t.f2;
                    let f = self.grid.forward_many(&[&t.f1, &f21, &f22, &t.f3, &t.fdelta])?;
                    let f: Raw = f.try_into().expect("five fields");
                    (f, t.stats)
                }
            }
        };
        if stats.min_density < self.vacuum_threshold {
            return Err(Error::Vacuum {
                min_density: stats.min_density,
                threshold: self.vacuum_threshold,
            });
        }
        self.project(&mut n);
        if n.iter().any(|c| c.iter().any(|v| !(v.re.is_finite() && v.im.is_finite()))) {
            return Err(Error::NonFinite("tendency"));
        }
        Ok((n, stats))
    }

    /// One step; returns the statistics of both stage inputs.
    fn advance(&self, raw: &Raw) -> Result<(Raw, [SampleStats; 2])> {
        let dt = self.dt;
        let (n0, s0) = self.explicit(raw)?;
        let mut star: Raw = core::array::from_fn(|f| raw[f].iter().zip(&n0[f]).map(|(u, n)| u + n * dt).collect());
        self.propagate(&mut star);
        let (n1, s1) = self.explicit(&star)?;
        drop(star);
        let mut next: Raw =
            core::array::from_fn(|f| raw[f].iter().zip(&n0[f]).map(|(u, n)| u + n * (0.5 * dt)).collect());
        self.propagate(&mut next);
        for f in 0..5 {
            for (v, n) in next[f].iter_mut().zip(&n1[f]) {
                *v += n * (0.5 * dt);
            }
        }
        Ok((next, [s0, s1]))
    }
}

/// State in either formulation.
#[derive(Debug, Clone)]
pub enum SolverState {
    Primitive(MhdState),
    Reformulated(ReformulatedState),
}

impl SolverState {
    pub fn time(&self) -> f64 {
        match self {
            SolverState::Primitive(s) => s.time,
            SolverState::Reformulated(s) => s.time,
        }
    }

    fn raw(&self) -> Raw {
        let f = match self {
            SolverState::Primitive(s) => s.fields(),
            SolverState::Reformulated(s) => s.fields(),
        };
        f.map(|x| x.coefficients().to_vec())
    }

    fn formulation(&self) -> Formulation {
        match self {
            SolverState::Primitive(_) => Formulation::Primitive,
            SolverState::Reformulated(_) => Formulation::Reformulated,
        }
    }
}

fn fields_from_raw(grid: &Grid, raw: Raw) -> Result<[SpectralField; 5]> {
    let v = SpectralField::from_coefficients_many(grid, raw.into())?;
    Ok(v.try_into().expect("five fields"))
}

fn to_state(grid: &Grid, formulation: Formulation, raw: &Raw, time: f64) -> Result<SolverState> {
    let [p, u1, u2, t, x] = fields_from_raw(grid, raw.clone())?;
    Ok(match formulation {
        Formulation::Primitive => SolverState::Primitive(MhdState::new(p, [u1, u2], t, x, time)?),
        _ => SolverState::Reformulated(ReformulatedState::new(p, [u1, u2], t, x, time)?),
    })
}

impl Stepper {
    /// Advances `state` by one step of the configured formulation.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        if state.formulation() != self.formulation {
            return Err(Error::InvalidConfig("state does not match the stepper formulation"));
        }
        let mut raw = state.raw();
        self.project(&mut raw);
        let (next, _) = self.advance(&raw)?;
        to_state(&self.grid, self.formulation, &next, state.time() + self.dt)
    }
}

/// One step with a freshly built stepper.
pub fn step(state: &SolverState, params: &Params, config: &SolverConfig) -> Result<SolverState> {
    let grid = match state {
        SolverState::Primitive(s) => s.grid().clone(),
        SolverState::Reformulated(s) => s.grid().clone(),
    };
    Stepper::new(&grid, params, state.formulation(), config)?.step(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "reason", rename_all = "snake_case"))]
pub enum Termination {
    Completed,
    VacuumAbort { time: f64, min_density: f64 },
    SmallnessViolation { time: f64, max_abs_a: f64 },
    NonFinite { time: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::VacuumAbort { .. } => "vacuum_abort",
            Termination::SmallnessViolation { .. } => "smallness_violation",
            Termination::NonFinite { .. } => "non_finite",
        }
    }

    pub fn is_guard_abort(&self) -> bool {
        !matches!(self, Termination::Completed)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: MhdState,
    /// Evolved `phi` for reformulated runs, `phi(a, theta, b)` otherwise.
    pub phi: SpectralField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub formulation: Formulation,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: DiagnosticSeries,
    pub termination: Termination,
    /// `(t, ||phi_evolved - phi(a, theta, b)||)` after every step of a dual run.
    pub consistency: Vec<(f64, f64)>,
    /// Largest `|a|` seen at any stage of any step.
    pub max_abs_a: f64,
    /// First time `sup |a|` exceeded the smallness bound, if ever.
    pub first_smallness_violation: Option<f64>,
    pub steps_taken: usize,
    pub final_state: MhdState,
}

impl Trajectory {
    pub fn max_consistency_error(&self) -> f64 {
        self.consistency.iter().map(|c| c.1).fold(0.0, f64::max)
    }
}

struct Run {
    stepper: Stepper,
    raw: Raw,
}

fn primitive_of(grid: &Grid, formulation: Formulation, raw: &Raw, time: f64) -> Result<(MhdState, SpectralField)> {
    match to_state(grid, formulation, raw, time)? {
        SolverState::Primitive(s) => {
            let phi = s.phi()?;
            Ok((s, phi))
        }
        SolverState::Reformulated(r) => {
            let s = r.to_primitive()?;
            Ok((s, r.phi))
        }
    }
}

/// `||phi_raw - phi(a, theta, b)||` with the right side computed from `prim`.
fn consistency_error(grid: &Grid, phi: &[Complex64], prim: &Raw) -> Result<f64> {
    let p = grid.inverse_many(&[&prim[0], &prim[3], &prim[4]])?;
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (a, t, b) = (p[0][i], p[1][i], p[2][i]);
            a + a * t + 0.5 * b * b + b
        })
        .collect();
    let c = grid.forward(&values)?;
    Ok(sqrt(c.iter().zip(phi).map(|(x, y)| (x - y).norm_sqr()).sum()))
}

/// Integrates `initial` to `config.t_end`, sampling diagnostics every
/// `snapshot_stride` steps. Guard violations end the run with a labeled
/// termination instead of an error.
pub fn simulate(
    initial: &MhdState,
    params: &Params,
    config: &SolverConfig,
    diagnostics: &DiagnosticsConfig,
) -> Result<Trajectory> {
    let lp = LittlewoodPaley::with_default_cutoffs(initial.grid());
    simulate_with(&lp, initial, params, config, diagnostics)
}

pub fn simulate_with(
    lp: &LittlewoodPaley,
    initial: &MhdState,
    params: &Params,
    config: &SolverConfig,
    diagnostics: &DiagnosticsConfig,
) -> Result<Trajectory> {
    let grid = initial.grid().clone();
    if lp.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    diagnostics.validate()?;
    config.validate(&grid)?;
    let formulations: Vec<Formulation> = match config.formulation {
        Formulation::Both => vec![Formulation::Primitive, Formulation::Reformulated],
        f => vec![f],
    };
    let mut runs = Vec::new();
    for &f in &formulations {
        let stepper = Stepper::new(&grid, params, f, config)?;
        let mut raw = match f {
            Formulation::Primitive => SolverState::Primitive(initial.clone()).raw(),
            _ => SolverState::Reformulated(ReformulatedState::from_primitive(initial)?).raw(),
        };
        stepper.project(&mut raw);
        runs.push(Run { stepper, raw });
    }
    let primary = formulations[0];
    let (state0, phi0) = primitive_of(&grid, primary, &runs[0].raw, initial.time)?;
    let x0 = FieldBlocks::new(lp, &state0)?.smallness();
    let mut series = DiagnosticSeries::new(diagnostics, x0);
    let mut snapshots = Vec::new();
    let mut consistency = Vec::new();
    let mut max_abs_a = state0.a.max_abs();
    let mut first_violation = None;
    let mut termination = Termination::Completed;
    series.push(lp, &state0, &phi0, params)?;
    if config.keep_snapshots {
        snapshots.push(Snapshot {
            state: state0.clone(),
            phi: phi0,
        });
    }
    let mut final_state = state0;
    if runs.len() == 2 {
        consistency.push((initial.time, consistency_error(&grid, &runs[1].raw[0], &runs[0].raw)?));
    }
    if max_abs_a > config.smallness_bound {
        first_violation = Some(initial.time);
        if config.smallness == SmallnessPolicy::Abort {
            termination = Termination::SmallnessViolation {
                time: initial.time,
                max_abs_a,
            };
        }
    }
    let total = config.steps();
    let mut steps_taken = 0;
    'outer: for n in 1..=total {
        if termination != Termination::Completed {
            break;
        }
        let t_prev = initial.time + (n - 1) as f64 * config.dt;
        for run in runs.iter_mut() {
            match run.stepper.advance(&run.raw) {
                Ok((next, stats)) => {
                    run.raw = next;
                    for s in stats {
                        max_abs_a = max_abs_a.max(s.max_abs_a);
                        if s.max_abs_a > config.smallness_bound && first_violation.is_none() {
                            first_violation = Some(t_prev);
                            if config.smallness == SmallnessPolicy::Abort {
                                termination = Termination::SmallnessViolation {
                                    time: t_prev,
                                    max_abs_a: s.max_abs_a,
                                };
                            }
                        }
                    }
                }
                Err(Error::Vacuum { min_density, .. }) => {
                    termination = Termination::VacuumAbort {
                        time: t_prev,
                        min_density,
                    };
                    break 'outer;
                }
                Err(Error::NonFinite(_)) => {
                    termination = Termination::NonFinite { time: t_prev };
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
        }
        steps_taken = n;
        let t = initial.time + n as f64 * config.dt;
        if runs.len() == 2 {
            consistency.push((t, consistency_error(&grid, &runs[1].raw[0], &runs[0].raw)?));
        }
        if n % config.snapshot_stride == 0 || n == total {
            let (state, phi) = match primitive_of(&grid, primary, &runs[0].raw, t) {
                Ok(v) => v,
                Err(Error::NonFinite(_)) => {
                    termination = Termination::NonFinite { time: t };
                    break;
                }
                Err(e) => return Err(e),
            };
            if !state.is_finite() {
                termination = Termination::NonFinite { time: t };
                break;
            }
            max_abs_a = max_abs_a.max(state.a.max_abs());
            series.push(lp, &state, &phi, params)?;
            if config.keep_snapshots {
                snapshots.push(Snapshot {
                    state: state.clone(),
                    phi,
                });
            }
            final_state = state;
        }
    }
    Ok(Trajectory {
        formulation: config.formulation,
        snapshots,
        diagnostics: series,
        termination,
        consistency,
        max_abs_a,
        first_smallness_violation: first_violation,
        steps_taken,
        final_state,
    })
}

/// Drift of the conserved integrals along a primitive run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConservationReport {
    pub mass_a_drift: f64,
    pub mass_b_drift: f64,
    pub energy_relative_drift: f64,
    pub duration: f64,
}

pub fn conservation_report(trajectory: &Trajectory) -> Result<ConservationReport> {
    if trajectory.formulation == Formulation::Reformulated {
        return Err(Error::InvalidConfig("conservation is tracked for primitive runs"));
    }
    let r = &trajectory.diagnostics.records;
    let first = r.first().ok_or(Error::TimeSamples("empty trajectory"))?;
    let drift = |f: fn(&crate::diagnostics::DiagnosticRecord) -> f64| {
        r.iter().map(|x| (f(x) - f(first)).abs()).fold(0.0, f64::max)
    };
    Ok(ConservationReport {
        mass_a_drift: drift(|x| x.mass_a),
        mass_b_drift: drift(|x| x.mass_b),
        energy_relative_drift: drift(|x| x.total_energy) / first.total_energy.abs(),
        duration: r.last().map(|x| x.t - first.t).unwrap_or(0.0),
    })
}
