//! Energy-type functionals, decay fits and the Lyapunov monitor.
//!
//! Tuple norms are sums of the per-field norms; the velocity enters through
//! its Euclidean block norms. `Lambda^gamma` norms act on mean-free parts.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::littlewood_paley::{BesovParams, BlockNorms, LittlewoodPaley, SumExponent};
use crate::math::{ln, powf, sqrt};
use crate::state::{total_energy, MhdState, Params};

pub const DEFAULT_ETA: f64 = 0.1;

/// Block norms of `(phi, u, theta, a, b)` at one instant.
#[derive(Debug, Clone)]
pub struct FieldBlocks {
    pub phi: BlockNorms,
    pub u: BlockNorms,
    pub theta: BlockNorms,
    pub a: BlockNorms,
    pub b: BlockNorms,
}

fn low(s: f64) -> BesovParams {
    BesovParams::low(s, SumExponent::One)
}

fn high(s: f64) -> BesovParams {
    BesovParams::high(s, SumExponent::One)
}

fn norm(blocks: &BlockNorms, p: BesovParams) -> f64 {
    blocks.besov(&p).expect("p = 2")
}

impl FieldBlocks {
    pub fn new(lp: &LittlewoodPaley, state: &MhdState) -> Result<Self> {
        let phi = state.phi()?;
        Self::with_phi(lp, state, &phi)
    }

    /// Uses a supplied `phi`, e.g. the one evolved by the reformulated system.
    pub fn with_phi(lp: &LittlewoodPaley, state: &MhdState, phi: &SpectralField) -> Result<Self> {
        if state.grid() != lp.grid() || phi.grid() != lp.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            phi: lp.block_norms(phi),
            u: lp.vector_block_norms(&state.u),
            theta: lp.block_norms(&state.theta),
            a: lp.block_norms(&state.a),
            b: lp.block_norms(&state.b),
        })
    }

    pub fn energy(&self) -> f64 {
        let l = low(0.0);
        let h = high(3.0);
        [&self.phi, &self.u, &self.theta, &self.a, &self.b]
            .iter()
            .map(|f| norm(f, l))
            .sum::<f64>()
            + [&self.phi, &self.theta, &self.a, &self.b]
                .iter()
                .map(|f| norm(f, h))
                .sum::<f64>()
            + norm(&self.u, high(2.0))
    }

    pub fn dissipation(&self) -> f64 {
        let l = low(2.0);
        [&self.phi, &self.u, &self.theta].iter().map(|f| norm(f, l)).sum::<f64>()
            + norm(&self.phi, high(3.0))
            + norm(&self.u, high(4.0))
            + norm(&self.theta, high(5.0))
    }

    pub fn smallness(&self) -> f64 {
        let l = low(0.0);
        let h = high(3.0);
        [&self.a, &self.u, &self.theta, &self.b].iter().map(|f| norm(f, l)).sum::<f64>()
            + [&self.a, &self.theta, &self.b].iter().map(|f| norm(f, h)).sum::<f64>()
            + norm(&self.u, high(2.0))
    }

    pub fn negative_besov(&self, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        let p = BesovParams::low(-sigma, SumExponent::Infinity);
        Ok([&self.a, &self.phi, &self.u, &self.theta].iter().map(|f| norm(f, p)).sum())
    }

    /// The functional differentiated in the Lyapunov inequality.
    pub fn lyapunov(&self) -> f64 {
        let l = low(0.0);
        [&self.phi, &self.u, &self.theta].iter().map(|f| norm(f, l)).sum::<f64>()
            + norm(&self.phi, high(3.0))
            + norm(&self.theta, high(3.0))
            + norm(&self.u, high(2.0))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::SigmaOutOfRange(sigma));
    }
    Ok(())
}

pub fn energy_e(lp: &LittlewoodPaley, state: &MhdState) -> Result<f64> {
    Ok(FieldBlocks::new(lp, state)?.energy())
}

pub fn dissipation_d(lp: &LittlewoodPaley, state: &MhdState) -> Result<f64> {
    Ok(FieldBlocks::new(lp, state)?.dissipation())
}

/// Smallness functional of `(a, u, theta, b)`; homogeneous of degree one.
pub fn smallness_x0(lp: &LittlewoodPaley, state: &MhdState) -> Result<f64> {
    if state.grid() != lp.grid() {
        return Err(Error::GridMismatch);
    }
    let c = |f: &SpectralField| lp.block_norms(f);
    let z = c(&SpectralField::zeros(lp.grid()));
    let blocks = FieldBlocks {
        phi: z,
        u: lp.vector_block_norms(&state.u),
        theta: c(&state.theta),
        a: c(&state.a),
        b: c(&state.b),
    };
    Ok(blocks.smallness())
}

pub fn negative_besov_y(lp: &LittlewoodPaley, state: &MhdState, sigma: f64) -> Result<f64> {
    FieldBlocks::new(lp, state)?.negative_besov(sigma)
}

/// `||Lambda^gamma f||` over the nonzero lattice modes.
pub fn lambda_norm(f: &SpectralField, gamma: f64) -> Result<f64> {
    if !(gamma > -1.0 && gamma <= 1.0) {
        return Err(Error::FractionalPowerOutOfRange(gamma));
    }
    let kmag = f.grid().wavenumber_magnitudes();
    let s: f64 = f
        .coefficients()
        .iter()
        .zip(kmag)
        .filter(|(_, &k)| k > 0.0)
        .map(|(c, &k)| powf(k, 2.0 * gamma) * c.norm_sqr())
        .sum();
    Ok(sqrt(s))
}

/// `||Lambda^gamma phi|| + ||Lambda^gamma u|| + ||Lambda^gamma theta||`.
pub fn lambda_gamma_norm(phi: &SpectralField, state: &MhdState, gamma: f64) -> Result<f64> {
    let u = sqrt(powf(lambda_norm(&state.u[0], gamma)?, 2.0) + powf(lambda_norm(&state.u[1], gamma)?, 2.0));
    Ok(lambda_norm(phi, gamma)? + u + lambda_norm(&state.theta, gamma)?)
}

/// Share of the mean-free energy of `(phi, u, theta)` on the shell `|k| = k_min`.
pub fn lowest_shell_fraction(phi: &SpectralField, state: &MhdState) -> f64 {
    let grid = phi.grid();
    let kmag = grid.wavenumber_magnitudes();
    let kmin = grid.k_min();
    let mut lowest = 0.0;
    let mut total = 0.0;
    for f in [phi, &state.u[0], &state.u[1], &state.theta] {
        for (c, &k) in f.coefficients().iter().zip(kmag) {
            if k > 0.0 {
                let e = c.norm_sqr();
                total += e;
                if k < 1.5 * kmin {
                    lowest += e;
                }
            }
        }
    }
    if total > 0.0 {
        lowest / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    Low,
    High,
}

/// Block functional `L_j^2` and its dissipation counterpart for the
/// reformulated fields.
pub fn localized_lyapunov(
    lp: &LittlewoodPaley,
    phi: &SpectralField,
    u: &crate::grid::VectorField,
    theta: &SpectralField,
    j: i32,
    eta: f64,
    regime: Regime,
) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta <= 0.2) {
        return Err(Error::InvalidConfig("eta must lie in (0, 0.2]"));
    }
    let grid = lp.grid();
    let coeffs = |f: &SpectralField| lp.block_coefficients(f.coefficients(), j);
    let p = coeffs(phi);
    let u1 = coeffs(&u[0]);
    let u2 = coeffs(&u[1]);
    let t = coeffs(theta);
    if [phi, &u[0], &u[1], theta].iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    // all integrals are domain averages, evaluated by Parseval
    let mut sq = [0.0f64; 3];
    let mut cross = 0.0;
    let mut grad_sq = [0.0f64; 3];
    let mut div_sq = 0.0;
    let mut theta_phi = 0.0;
    let mut lapu_phi = 0.0;
    for idx in 0..grid.len() {
        let Some([k1, k2]) = grid.wavevector(idx) else {
            continue;
        };
        let r2 = k1 * k1 + k2 * k2;
        let (pc, a1, a2, tc) = (p[idx], u1[idx], u2[idx], t[idx]);
        sq[0] += pc.norm_sqr();
        sq[1] += a1.norm_sqr() + a2.norm_sqr();
        sq[2] += tc.norm_sqr();
        // u . grad phi: sum u_hat conj(i k phi_hat)
        let ik_phi = [num_complex::Complex64::new(0.0, k1) * pc, num_complex::Complex64::new(0.0, k2) * pc];
        cross += (a1 * ik_phi[0].conj() + a2 * ik_phi[1].conj()).re;
        grad_sq[0] += r2 * pc.norm_sqr();
        grad_sq[1] += r2 * (a1.norm_sqr() + a2.norm_sqr());
        grad_sq[2] += r2 * tc.norm_sqr();
        let d = num_complex::Complex64::new(0.0, k1) * a1 + num_complex::Complex64::new(0.0, k2) * a2;
        div_sq += d.norm_sqr();
        theta_phi += r2 * (tc * pc.conj()).re;
        // (-Lap u) . grad phi = r^2 u . grad phi
        lapu_phi += r2 * (a1 * ik_phi[0].conj() + a2 * ik_phi[1].conj()).re;
    }
    let base = 0.25 * sq[0] + 0.5 * sq[1] + 0.5 * sq[2] + eta * cross;
    Ok(match regime {
        Regime::Low => (
            base,
            grad_sq[1] + grad_sq[2] + eta * (grad_sq[0] - 2.0 * div_sq + theta_phi + lapu_phi),
        ),
        Regime::High => (
            base + 0.25 * eta * grad_sq[0],
            grad_sq[1] + grad_sq[2] + eta * (grad_sq[0] - 2.0 * div_sq + theta_phi),
        ),
    })
}

/// Which diagnostics a run records.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsConfig {
    pub sigma: f64,
    pub gammas: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            gammas: vec![0.0, -0.5],
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        for &g in &self.gammas {
            if !(g > -self.sigma && g <= 0.0) {
                return Err(Error::GammaOutOfRange { gamma: g, sigma: self.sigma });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticRecord {
    pub t: f64,
    pub e: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub lam_gamma: Vec<f64>,
    pub mass_a: f64,
    pub mass_b: f64,
    pub total_energy: f64,
    pub lyapunov: f64,
    pub max_abs_a: f64,
    pub lowest_shell_fraction: f64,
}

/// Time series of all functionals along a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticSeries {
    pub sigma: f64,
    pub gammas: Vec<f64>,
    pub x0: f64,
    pub records: Vec<DiagnosticRecord>,
    #[cfg_attr(feature = "serde", serde(skip))]
    x_state: Option<XAccumulator>,
}

/// Running pieces of the time-integrated functional: block-wise suprema
/// for the energy part, trapezoid integral of the dissipation.
#[derive(Debug, Clone, PartialEq)]
struct XAccumulator {
    sup: [Vec<f64>; 5],
    integral: f64,
    last: (f64, f64),
}

impl DiagnosticSeries {
    pub fn new(config: &DiagnosticsConfig, x0: f64) -> Self {
        Self {
            sigma: config.sigma,
            gammas: config.gammas.clone(),
            x0,
            records: Vec::new(),
            x_state: None,
        }
    }

    /// Appends the functionals of `state`, with `phi` as the combined field.
    pub fn push(&mut self, lp: &LittlewoodPaley, state: &MhdState, phi: &SpectralField, params: &Params) -> Result<()> {
        let blocks = FieldBlocks::with_phi(lp, state, phi)?;
        let e = blocks.energy();
        let d = blocks.dissipation();
        let x = self.accumulate_x(&blocks, state.time, d);
        let lam_gamma = self
            .gammas
            .iter()
            .map(|&g| lambda_gamma_norm(phi, state, g))
            .collect::<Result<Vec<_>>>()?;
        self.records.push(DiagnosticRecord {
            t: state.time,
            e,
            d,
            x,
            y: blocks.negative_besov(self.sigma)?,
            lam_gamma,
            mass_a: state.a.mean(),
            mass_b: state.b.mean(),
            total_energy: total_energy(state, params),
            lyapunov: blocks.lyapunov(),
            max_abs_a: state.a.max_abs(),
            lowest_shell_fraction: lowest_shell_fraction(phi, state),
        });
        Ok(())
    }

    fn accumulate_x(&mut self, b: &FieldBlocks, t: f64, d: f64) -> f64 {
        let fields = [&b.phi, &b.u, &b.theta, &b.a, &b.b];
        let acc = self.x_state.get_or_insert_with(|| XAccumulator {
            sup: core::array::from_fn(|i| vec![0.0; fields[i].norms.len()]),
            integral: 0.0,
            last: (t, d),
        });
        for (sup, f) in acc.sup.iter_mut().zip(fields) {
            for (s, &v) in sup.iter_mut().zip(&f.norms) {
                *s = s.max(v);
            }
        }
        acc.integral += 0.5 * (t - acc.last.0) * (d + acc.last.1);
        acc.last = (t, d);
        let blocks = |i: usize| BlockNorms {
            j_min: b.phi.j_min,
            norms: acc.sup[i].clone(),
        };
        let sup_blocks = FieldBlocks {
            phi: blocks(0),
            u: blocks(1),
            theta: blocks(2),
            a: blocks(3),
            b: blocks(4),
        };
        sup_blocks.energy() + acc.integral
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Column by its CSV name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let pick = |f: fn(&DiagnosticRecord) -> f64| Some(self.records.iter().map(f).collect());
        match name {
            "t" => pick(|r| r.t),
            "E" => pick(|r| r.e),
            "D" => pick(|r| r.d),
            "X" => pick(|r| r.x),
            "X0_ref" => Some(vec![self.x0; self.records.len()]),
            "Y_sigma" => pick(|r| r.y),
            "mass_a" => pick(|r| r.mass_a),
            "mass_b" => pick(|r| r.mass_b),
            "total_energy" => pick(|r| r.total_energy),
            "lyapunov_value" => pick(|r| r.lyapunov),
            "max_abs_a" => pick(|r| r.max_abs_a),
            "lowest_shell_fraction" => pick(|r| r.lowest_shell_fraction),
            _ => {
                let i: usize = name.strip_prefix("lam_gamma_norm[")?.strip_suffix(']')?.parse().ok()?;
                if i >= self.gammas.len() {
                    return None;
                }
                Some(self.records.iter().map(|r| r.lam_gamma[i]).collect())
            }
        }
    }
}

/// Fitting window in time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            t_min: 10.0,
            t_max: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub exponent: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
    pub t_first: f64,
    pub t_last: f64,
}

/// Least-squares slope of `ln value` against `ln(1 + t)` inside the window.
pub fn fit_decay(times: &[f64], values: &[f64], window: FitWindow) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.t_min && **t <= window.t_max)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit("fewer than three samples in the window"));
    }
    if pts.iter().any(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Fit("nonpositive value in the window"));
    }
    let (t_first, t_last) = (pts[0].0, pts[pts.len() - 1].0);
    if (1.0 + t_last) < 10.0 * (1.0 + t_first) * (1.0 - 1e-12) {
        return Err(Error::Fit("window spans less than a decade in 1 + t"));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| ln(1.0 + t)).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| ln(*v)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = if pts.len() > 2 { sqrt(ssr / (n - 2.0) / sxx) } else { 0.0 };
    Ok(DecayFit {
        exponent: slope,
        stderr,
        intercept,
        points: pts.len(),
        t_first,
        t_last,
    })
}

/// Drops the final tenth of the window once the lowest torus shell holds
/// more than half of the energy there.
pub fn trim_saturation(window: FitWindow, times: &[f64], lowest_fraction: &[f64]) -> FitWindow {
    let t_end = times
        .iter()
        .copied()
        .filter(|t| *t <= window.t_max)
        .fold(f64::NEG_INFINITY, f64::max);
    if !t_end.is_finite() {
        return window;
    }
    let cut = t_end - 0.1 * (t_end - window.t_min);
    let saturated = times
        .iter()
        .zip(lowest_fraction)
        .any(|(t, f)| *t >= cut && *t <= t_end && *f > 0.5);
    if saturated {
        FitWindow {
            t_min: window.t_min,
            t_max: cut,
        }
    } else {
        window
    }
}

/// Output of [`lyapunov_monitor`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LyapunovReport {
    /// Largest one-step increase of the functional after `t_min`.
    pub max_increase: f64,
    /// Intervals `(t0, t1, increase)` exceeding the tolerance.
    pub violations: Vec<(f64, f64, f64)>,
    /// Largest `c` with `dN/dt + c N^{1 + sigma/2} <= 0` at every sample after `t_min`.
    pub c_tilde: f64,
    pub derivative: Vec<f64>,
}

/// Checks that the functional does not grow after `t_min` by more than
/// `tolerance` per sample interval; the derivative uses centered
/// differences inside and one-sided ones at the ends.
pub fn lyapunov_monitor(times: &[f64], values: &[f64], sigma: f64, t_min: f64, tolerance: f64) -> Result<LyapunovReport> {
    check_sigma(sigma)?;
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    if times.len() < 2 {
        return Err(Error::TimeSamples("monitor needs two samples"));
    }
    let dt0 = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt0).abs() > 1e-9 * dt0.abs().max(1e-300)) {
        return Err(Error::TimeSamples("samples must be uniformly spaced"));
    }
    let n = times.len();
    let derivative: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                (values[1] - values[0]) / dt0
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / dt0
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * dt0)
            }
        })
        .collect();
    let mut max_increase = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for i in 1..n {
        if times[i - 1] < t_min {
            continue;
        }
        let inc = values[i] - values[i - 1];
        max_increase = max_increase.max(inc);
        if inc > tolerance {
            violations.push((times[i - 1], times[i], inc));
        }
    }
    let mut c_tilde = f64::INFINITY;
    for i in 0..n {
        if times[i] < t_min || values[i] <= 0.0 {
            continue;
        }
        c_tilde = c_tilde.min(-derivative[i] / powf(values[i], 1.0 + 0.5 * sigma));
    }
    if max_increase == f64::NEG_INFINITY {
        max_increase = 0.0;
    }
    if c_tilde == f64::INFINITY {
        c_tilde = 0.0;
    }
    Ok(LyapunovReport {
        max_increase,
        violations,
        c_tilde,
        derivative,
    })
}
