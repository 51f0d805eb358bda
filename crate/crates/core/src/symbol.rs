//! Fourier symbol of the linearized reformulated system.
//!
//! On the coordinates `(phi_hat, d_hat, theta_hat)` with `d_hat = i xi . u_hat`
//! the compressible part reads `[[0, -2, 0], [r^2, -r^2, r^2], [0, -1, -r^2]]`;
//! the solenoidal velocity decays like `exp(-r^2 t)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math::{exp, powf, sqrt};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix {
    pub r: f64,
    pub compressible: Mat3,
    pub incompressible: f64,
}

pub fn build_symbol(r: f64) -> Result<SymbolMatrix> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::NegativeWavenumber(r));
    }
    let r2 = r * r;
    Ok(SymbolMatrix {
        r,
        compressible: [[0.0, -2.0, 0.0], [r2, -r2, r2], [0.0, -1.0, -r2]],
        incompressible: -r2,
    })
}

impl SymbolMatrix {
    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.compressible[i][i]).sum()
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.compressible;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Coefficients `[c2, c1, c0]` of `l^3 + c2 l^2 + c1 l + c0`.
pub fn characteristic_coefficients(r: f64) -> [f64; 3] {
    let r2 = r * r;
    [2.0 * r2, r2 * r2 + 3.0 * r2, 2.0 * r2 * r2]
}

pub fn incompressible_eigenvalue(r: f64) -> f64 {
    -r * r
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymbolSpectrum {
    pub r: f64,
    /// Sorted by real part, descending.
    pub eigenvalues: [Complex64; 3],
    /// Index of the real branch that tends to `-2` as `r` grows.
    pub damped: usize,
}

impl SymbolSpectrum {
    pub fn damped_branch(&self) -> Complex64 {
        self.eigenvalues[self.damped]
    }

    /// The two branches other than the damped one.
    pub fn parabolic_branches(&self) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        let mut k = 0;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            if i != self.damped {
                out[k] = *l;
                k += 1;
            }
        }
        out
    }

    pub fn abscissa(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn eval(c: &[f64; 3], l: Complex64) -> (Complex64, Complex64) {
    let p = ((l + c[0]) * l + c[1]) * l + c[2];
    let dp = (l * 3.0 + 2.0 * c[0]) * l + c[1];
    (p, dp)
}

/// Residual of a root relative to the size of the terms it cancels.
fn relative_residual(c: &[f64; 3], l: Complex64) -> f64 {
    let m = l.norm();
    let scale = m * m * m + c[0] * m * m + c[1] * m + c[2];
    if scale == 0.0 {
        return 0.0;
    }
    eval(c, l).0.norm() / scale
}

fn real_root(c: &[f64; 3]) -> f64 {
    // p(0) = c0 >= 0 and p(-M) < 0 beyond the Cauchy bound
    let p = |x: f64| ((x + c[0]) * x + c[1]) * x + c[2];
    let mut lo = -(1.0 + c[0].max(c[1]).max(c[2]));
    let mut hi = 0.0f64;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polish(c: &[f64; 3], mut l: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = eval(c, l);
        if dp.norm() == 0.0 {
            break;
        }
        let next = l - p / dp;
        if relative_residual(c, next) > relative_residual(c, l) {
            break;
        }
        l = next;
    }
    l
}

/// Roots of the characteristic cubic, polished to relative residual `<= 1e-12`.
pub fn eigenvalues(r: f64) -> Result<SymbolSpectrum> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::NegativeWavenumber(r));
    }
    let c = characteristic_coefficients(r);
    if r == 0.0 {
        return Ok(SymbolSpectrum {
            r,
            eigenvalues: [Complex64::new(0.0, 0.0); 3],
            damped: 0,
        });
    }
    let rho = polish(&c, Complex64::new(real_root(&c), 0.0)).re;
    // deflate: (l - rho)(l^2 + p l + q)
    let p = c[0] + rho;
    let q = c[1] + rho * p;
    let disc = p * p - 4.0 * q;
    let (l1, l2) = if disc >= 0.0 {
        let s = sqrt(disc);
        let big = -0.5 * (p + if p >= 0.0 { s } else { -s });
        let other = if big != 0.0 { q / big } else { 0.0 };
        (Complex64::new(big, 0.0), Complex64::new(other, 0.0))
    } else {
        let s = sqrt(-disc);
        (Complex64::new(-0.5 * p, 0.5 * s), Complex64::new(-0.5 * p, -0.5 * s))
    };
    let mut roots = [
        (Complex64::new(rho, 0.0), true),
        (polish(&c, l1), false),
        (polish(&c, l2), false),
    ];
    for (l, _) in roots.iter() {
        let res = relative_residual(&c, *l);
        if !(res <= 1e-12) {
            return Err(Error::RootFinder(res));
        }
    }
    roots.sort_by(|a, b| b.0.re.total_cmp(&a.0.re).then(b.0.im.total_cmp(&a.0.im)));
    let damped = roots.iter().position(|(_, d)| *d).expect("real root present");
    Ok(SymbolSpectrum {
        r,
        eigenvalues: roots.map(|(l, _)| l),
        damped,
    })
}

/// Log-spaced sweep over `[r_min, r_max]`.
pub fn sweep(r_min: f64, r_max: f64, points: usize) -> Result<Vec<SymbolSpectrum>> {
    if !(r_min > 0.0 && r_max >= r_min) || points == 0 {
        return Err(Error::InvalidConfig("sweep needs 0 < r_min <= r_max and at least one point"));
    }
    (0..points)
        .map(|i| {
            let f = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            eigenvalues(r_min * powf(r_max / r_min, f))
        })
        .collect()
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// `exp(tA)` by scaling and squaring a Taylor polynomial.
pub fn expm_taylor(a: &Mat3, t: f64) -> Mat3 {
    let norm = (0..3)
        .map(|j| (0..3).map(|i| (a[i][j] * t).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = t;
    while norm * (scale / t).abs() > 0.25 && squarings < 200 {
        scale *= 0.5;
        squarings += 1;
    }
    let b: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| a[i][j] * scale));
    let mut sum = IDENTITY;
    let mut term = IDENTITY;
    for k in 1..=24 {
        term = mat_mul(&term, &b);
        term.iter_mut().flatten().for_each(|v| *v /= k as f64);
        sum.iter_mut().flatten().zip(term.iter().flatten()).for_each(|(s, v)| *s += v);
    }
    for _ in 0..squarings {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

/// Minimum separation below which the spectral formula gives way to the
/// series fallback, relative to the matrix scale.
const SEPARATION: f64 = 1e-3;

/// `exp(t M(r))` for the compressible block.
pub fn compressible_propagator(r: f64, t: f64) -> Result<Mat3> {
    let s = build_symbol(r)?;
    if t == 0.0 {
        return Ok(IDENTITY);
    }
    let spec = eigenvalues(r)?;
    let l = spec.eigenvalues;
    let scale = 1.0 + r * r;
    let sep = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| (l[i] - l[j]).norm())
        .fold(f64::INFINITY, f64::min);
    if sep <= SEPARATION * scale {
        return Ok(expm_taylor(&s.compressible, t));
    }
    // Lagrange-Sylvester: sum_i e^{t l_i} prod_{j != i} (M - l_j)/(l_i - l_j)
    let m: [[Complex64; 3]; 3] = s.compressible.map(|row| row.map(|v| Complex64::new(v, 0.0)));
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let w = (l[i] * t).exp() / ((l[i] - l[j]) * (l[i] - l[k]));
        let shifted = |lam: Complex64| -> [[Complex64; 3]; 3] {
            core::array::from_fn(|p| core::array::from_fn(|q| m[p][q] - if p == q { lam } else { Complex64::new(0.0, 0.0) }))
        };
        let (x, y) = (shifted(l[j]), shifted(l[k]));
        for p in 0..3 {
            for q in 0..3 {
                let prod: Complex64 = (0..3).map(|z| x[p][z] * y[z][q]).sum();
                out[p][q] += w * prod;
            }
        }
    }
    Ok(out.map(|row| row.map(|v| v.re)))
}

/// Fourier amplitudes of `(phi, u, theta)` at one wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAmplitudes {
    pub phi: Complex64,
    pub u: [Complex64; 2],
    pub theta: Complex64,
}

/// Exact linear evolution of one Fourier mode.
pub fn semigroup_evolve(amp: ModeAmplitudes, xi: [f64; 2], t: f64) -> Result<ModeAmplitudes> {
    if !(t >= 0.0) {
        return Err(Error::InvalidConfig("evolution time must be nonnegative"));
    }
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 == 0.0 {
        return Ok(amp);
    }
    let e = compressible_propagator(sqrt(r2), t)?;
    Ok(apply_propagator(&e, exp(-r2 * t), amp, xi))
}

/// Applies a precomputed compressible propagator and solenoidal factor.
pub fn apply_propagator(e: &Mat3, heat: f64, amp: ModeAmplitudes, xi: [f64; 2]) -> ModeAmplitudes {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    let i = Complex64::new(0.0, 1.0);
    let k_dot_u = amp.u[0] * xi[0] + amp.u[1] * xi[1];
    let d = i * k_dot_u;
    let sol = [amp.u[0] - k_dot_u * xi[0] / r2, amp.u[1] - k_dot_u * xi[1] / r2];
    let x = [amp.phi, d, amp.theta];
    let y: [Complex64; 3] = core::array::from_fn(|p| (0..3).map(|q| x[q] * e[p][q]).sum());
    // longitudinal velocity from d = i k . u: u_L = -i d k / r^2
    let kd = -i * y[1] / r2;
    ModeAmplitudes {
        phi: y[0],
        u: [sol[0] * heat + kd * xi[0], sol[1] * heat + kd * xi[1]],
        theta: y[2],
    }
}

/// Which unknowns carry the initial low-frequency spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnvelopeComponents {
    /// Solenoidal velocity only: the heat semigroup.
    Solenoidal,
    /// `phi`, both velocity components and `theta`.
    Full,
}

/// Deterministic initial spectrum: each lattice mode with `0 < |k| <= band_hi`
/// carries amplitude `|k|^slope` in the selected components.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumProfile {
    pub slope: f64,
    pub band_hi: f64,
    pub components: EnvelopeComponents,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayEnvelope {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: Option<crate::diagnostics::DecayFit>,
}

/// Linear evolution of a spectrum normalized to unit low-frequency
/// `B^{-sigma}_{2,inf}` size; returns `||Lambda^gamma (phi, u, theta)||` at each
/// time and the exponent fitted over `window` when it is usable.
pub fn decay_envelope(
    grid: &Grid,
    sigma: f64,
    gamma: f64,
    profile: SpectrumProfile,
    times: &[f64],
    window: crate::diagnostics::FitWindow,
) -> Result<DecayEnvelope> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::SigmaOutOfRange(sigma));
    }
    if !(gamma > -sigma && gamma <= 0.0) {
        return Err(Error::GammaOutOfRange { gamma, sigma });
    }
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::TimeSamples("times must be nonnegative"));
    }
    let lp = crate::littlewood_paley::LittlewoodPaley::with_default_cutoffs(grid);
    // modes grouped by shell so each propagator is computed once per time
    let mut modes: Vec<(u64, [f64; 2], f64)> = Vec::new();
    let kmag = grid.wavenumber_magnitudes();
    let mut coeff = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 0..grid.len() {
        let (Some(xi), Some([m1, m2])) = (grid.wavevector(idx), grid.integer_mode(idx)) else {
            continue;
        };
        let k = kmag[idx];
        if k == 0.0 || k > profile.band_hi {
            continue;
        }
        let amp = powf(k, profile.slope);
        coeff[idx] = Complex64::new(amp, 0.0);
        modes.push(((m1 * m1 + m2 * m2) as u64, xi, amp));
    }
    if modes.is_empty() {
        return Err(Error::InitialData("profile band contains no lattice modes"));
    }
    modes.sort_by_key(|m| m.0);
    let carriers = match profile.components {
        EnvelopeComponents::Solenoidal => 1.0,
        EnvelopeComponents::Full => 2.0 + core::f64::consts::SQRT_2,
    };
    // every carrying field has the same block norms as `coeff`
    let base = lp
        .block_norms_of_coefficients(&coeff)
        .besov(&crate::littlewood_paley::BesovParams::low(
            -sigma,
            crate::littlewood_paley::SumExponent::Infinity,
        ))?;
    let norm0 = carriers * base;
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let mut acc = [0.0f64; 3];
        let mut shell = u64::MAX;
        let mut e = IDENTITY;
        let mut heat = 1.0;
        for &(s, xi, amp) in &modes {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if s != shell {
                shell = s;
                heat = exp(-r2 * t);
                if profile.components == EnvelopeComponents::Full {
                    e = compressible_propagator(sqrt(r2), t)?;
                }
            }
            let w = powf(r2, gamma) / (norm0 * norm0);
            match profile.components {
                EnvelopeComponents::Solenoidal => {
                    // unit solenoidal direction perpendicular to xi
                    acc[1] += w * (amp * heat) * (amp * heat);
                }
                EnvelopeComponents::Full => {
                    let a = Complex64::new(amp, 0.0);
                    let out = apply_propagator(&e, heat, ModeAmplitudes { phi: a, u: [a, a], theta: a }, xi);
                    acc[0] += w * out.phi.norm_sqr();
                    acc[1] += w * (out.u[0].norm_sqr() + out.u[1].norm_sqr());
                    acc[2] += w * out.theta.norm_sqr();
                }
            }
        }
        norms.push(acc.iter().map(|v| sqrt(*v)).sum());
    }
    let fit = crate::diagnostics::fit_decay(times, &norms, window).ok();
    Ok(DecayEnvelope { times: times.to_vec(), norms, fit })
}
