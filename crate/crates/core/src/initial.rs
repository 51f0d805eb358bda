//! Initial-data generation with prescribed spectral shape and smallness.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::smallness_x0;
use crate::littlewood_paley::LittlewoodPaley;
use crate::error::{Error, Result};
use crate::grid::{cosine_mode, Grid, SpectralField};
use crate::math::{cos, powf, sin};
use crate::state::MhdState;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum InitialKind {
    /// `amplitude * cos(k.x + phase_f)` in every field, one conjugate pair each.
    SingleMode { mode: [i64; 2] },
    /// Random phases, `|c_k| ~ U[0.5, 1.5] |k|^slope` on `band_lo <= |k| <= band_hi`,
    /// rescaled so that the smallness functional equals `amplitude`.
    RandomSpectrum {
        spectral_slope: f64,
        band_lo: f64,
        band_hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitialSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: InitialKind,
    pub amplitude: f64,
    pub seed: u64,
}

impl InitialSpec {
    /// Random spectrum whose weighted blocks `2^{-j sigma} ||block_j||` are flat.
    pub fn flat_negative_besov(sigma: f64, epsilon: f64, band_hi: f64, seed: u64) -> Self {
        Self {
            kind: InitialKind::RandomSpectrum {
                spectral_slope: sigma - 1.0,
                band_lo: 0.0,
                band_hi,
            },
            amplitude: epsilon,
            seed,
        }
    }
}

/// Random real field with the given spectral envelope; zero mean.
pub fn random_band_field(grid: &Grid, rng: &mut impl Rng, band_lo: f64, band_hi: f64, slope: f64) -> SpectralField {
    let kmag = grid.wavenumber_magnitudes();
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 1..grid.len() {
        let j = grid.conjugate_index(idx);
        if j < idx {
            continue;
        }
        let k = kmag[idx];
        if k <= 0.0 || k < band_lo || k > band_hi {
            continue;
        }
        let amp = rng.gen_range(0.5..1.5) * powf(k, slope);
        let ph = rng.gen_range(0.0..2.0 * PI);
        let z = Complex64::new(amp * cos(ph), amp * sin(ph));
        if j == idx {
            c[idx] = Complex64::new(z.re, 0.0);
        } else {
            c[idx] = z;
            c[j] = z.conj();
        }
    }
    SpectralField::from_coefficients(grid, c).expect("length matches grid")
}

/// Uniform white noise in physical space, including Nyquist content.
pub fn white_noise(grid: &Grid, rng: &mut impl Rng) -> SpectralField {
    let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralField::from_values(grid, values).expect("length matches grid")
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds the perturbation state described by `spec`.
pub fn generate_initial(spec: &InitialSpec, grid: &Grid) -> Result<MhdState> {
    generate_initial_with(spec, &LittlewoodPaley::with_default_cutoffs(grid))
}

/// As [`generate_initial`], reusing a prepared decomposition for the calibration.
pub fn generate_initial_with(spec: &InitialSpec, lp: &LittlewoodPaley) -> Result<MhdState> {
    let grid = lp.grid();
    if !(spec.amplitude.is_finite() && spec.amplitude >= 0.0) {
        return Err(Error::InitialData("amplitude must be finite and nonnegative"));
    }
    if spec.amplitude == 0.0 {
        return Ok(MhdState::equilibrium(grid));
    }
    let mut rng = rng_from_seed(spec.seed);
    match &spec.kind {
        InitialKind::SingleMode { mode } => {
            let [m1, m2] = *mode;
            if grid.index_of_mode(m1).is_none() || grid.index_of_mode(m2).is_none() || (m1 == 0 && m2 == 0) {
                return Err(Error::InitialData("single mode is not a nonzero lattice mode"));
            }
            let mut fields: Vec<SpectralField> = (0..5)
                .map(|_| {
                    let phase = rng.gen_range(0.0..2.0 * PI);
                    cosine_mode(grid, m1, m2, spec.amplitude, phase)
                })
                .collect();
            let b = fields.pop().expect("five fields");
            let theta = fields.pop().expect("five fields");
            let u2 = fields.pop().expect("five fields");
            let u1 = fields.pop().expect("five fields");
            let a = fields.pop().expect("five fields");
            MhdState::new(a, [u1, u2], theta, b, 0.0)
        }
        InitialKind::RandomSpectrum {
            spectral_slope,
            band_lo,
            band_hi,
        } => {
            let hi = band_hi.min(grid.dealias_cutoff());
            let mut draw = || random_band_field(grid, &mut rng, *band_lo, hi, *spectral_slope);
            let unit = MhdState::new(draw(), [draw(), draw()], draw(), draw(), 0.0)?;
            let x0 = smallness_x0(lp, &unit)?;
            if !(x0 > 0.0 && x0.is_finite()) {
                return Err(Error::InitialData("band contains no lattice modes"));
            }
            let state = unit.scaled(spec.amplitude / x0);
            if state.a.max_abs() > 0.5 || state.b.max_abs() >= 1.0 {
                return Err(Error::InitialData("requested smallness is unreachable within sup|a| <= 1/2"));
            }
            Ok(state)
        }
    }
}
