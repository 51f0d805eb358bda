//! Periodic grid, normalized Fourier transforms and spectral operators.
//!
//! Normalization: coefficients are field averages against `e^{-ik.x}`, so a
//! constant `c` has zero-mode coefficient `c` and Parseval reads
//! `mean(|f|^2) = sum_k |c_k|^2`. All `L^2` norms in this crate are the
//! corresponding root-mean-square values.
//!
//! Layout: sample `(i1, i2)` sits at `x = (i1 h, i2 h)` and is stored at
//! `i2 * n + i1`; coefficients use the same layout in frequency indices.
//! The Nyquist row and column (index `n/2`) are kept by the transforms so
//! round trips are exact, but they are not lattice points: every spectral
//! operator annihilates them, which keeps the lattice symmetric under
//! negation.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Direction, Fft2d};
use crate::math::{cos, powf, sqrt};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier multipliers used by the right-hand-side kernels. Derivatives
/// vanish on Nyquist bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SpectralOp {
    Id,
    D1,
    D2,
    Lap,
}

impl SpectralOp {
    #[inline(always)]
    fn apply(self, wv: Option<[f64; 2]>, c: Complex64) -> Complex64 {
        match (self, wv) {
            (SpectralOp::Id, _) => c,
            (_, None) => ZERO,
            (SpectralOp::D1, Some([k1, _])) => Complex64::new(-k1 * c.im, k1 * c.re),
            (SpectralOp::D2, Some([_, k2])) => Complex64::new(-k2 * c.im, k2 * c.re),
            (SpectralOp::Lap, Some([k1, k2])) => c * -(k1 * k1 + k2 * k2),
        }
    }
}

struct GridInner {
    n: usize,
    box_length: f64,
    fft: Fft2d,
    /// Signed integer wavenumber per axis index; `None` at Nyquist.
    index_to_mode: Vec<Option<i64>>,
    /// |k| per mode, negative for Nyquist bins.
    kmag: Vec<f64>,
    wavevectors: Vec<Option<[f64; 2]>>,
    conjugates: Vec<u32>,
    dealias_mask: Vec<bool>,
}

/// Square periodic grid with `n` points per axis and period `box_length`.
/// Cloning is cheap; clones share transform tables.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n())
            .field("box_length", &self.box_length())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.n() == other.n() && self.box_length() == other.box_length())
    }
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidBoxLength(box_length));
        }
        let half = n / 2;
        let index_to_mode: Vec<Option<i64>> = (0..n)
            .map(|i| match i.cmp(&half) {
                core::cmp::Ordering::Less => Some(i as i64),
                core::cmp::Ordering::Equal => None,
                core::cmp::Ordering::Greater => Some(i as i64 - n as i64),
            })
            .collect();
        let k0 = 2.0 * PI / box_length;
        let mut kmag = vec![-1.0; n * n];
        for i2 in 0..n {
            for i1 in 0..n {
                if let (Some(m1), Some(m2)) = (index_to_mode[i1], index_to_mode[i2]) {
                    kmag[i2 * n + i1] = k0 * sqrt((m1 * m1 + m2 * m2) as f64);
                }
            }
        }
        let cut = 2.0 / 3.0 * half as f64;
        let mut wavevectors = Vec::with_capacity(n * n);
        let mut conjugates = Vec::with_capacity(n * n);
        let mut dealias_mask = Vec::with_capacity(n * n);
        for i2 in 0..n {
            for i1 in 0..n {
                let modes = index_to_mode[i1].zip(index_to_mode[i2]);
                wavevectors.push(modes.map(|(m1, m2)| [k0 * m1 as f64, k0 * m2 as f64]));
                dealias_mask.push(modes.is_some_and(|(m1, m2)| (m1.abs().max(m2.abs()) as f64) <= cut));
                conjugates.push((((n - i2) % n) * n + (n - i1) % n) as u32);
            }
        }
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                box_length,
                fft: Fft2d::new(n),
                index_to_mode,
                kmag,
                wavevectors,
                conjugates,
                dealias_mask,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_length(&self) -> f64 {
        self.inner.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.box_length / self.inner.n as f64
    }

    /// Fundamental wavenumber `2 pi / L`.
    pub fn k_min(&self) -> f64 {
        2.0 * PI / self.inner.box_length
    }

    /// Nyquist wavenumber `pi n / L`.
    pub fn k_max(&self) -> f64 {
        PI * self.inner.n as f64 / self.inner.box_length
    }

    /// Largest per-axis wavenumber that survives the 2/3 rule.
    pub fn dealias_cutoff(&self) -> f64 {
        2.0 / 3.0 * self.k_max()
    }

    /// Signed integer mode of an axis index, `None` for the Nyquist bin.
    pub fn mode_of_index(&self, i: usize) -> Option<i64> {
        self.inner.index_to_mode[i]
    }

    /// Axis index holding integer mode `m`, if it is on the lattice.
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let n = self.inner.n as i64;
        if m.abs() >= n / 2 {
            return None;
        }
        Some(m.rem_euclid(n) as usize)
    }

    /// Wavevector of a flat coefficient index; `None` for Nyquist bins.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> Option<[f64; 2]> {
        self.inner.wavevectors[idx]
    }

    /// Integer wavevector of a flat coefficient index; `None` for Nyquist bins.
    pub fn integer_mode(&self, idx: usize) -> Option<[i64; 2]> {
        let n = self.inner.n;
        Some([
            self.inner.index_to_mode[idx % n]?,
            self.inner.index_to_mode[idx / n]?,
        ])
    }

    /// |k| per flat index; negative entries mark Nyquist bins.
    pub fn wavenumber_magnitudes(&self) -> &[f64] {
        &self.inner.kmag
    }

    /// Flat index of the mode `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        self.inner.conjugates[idx] as usize
    }

    /// Physical coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let n = self.inner.n;
        let h = self.spacing();
        [(idx % n) as f64 * h, (idx / n) as f64 * h]
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Normalized forward transform of real samples.
    pub fn forward(&self, values: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.fft.process(&mut buf, Direction::Forward);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(buf)
    }

    /// Inverse of [`Grid::forward`]; keeps the real part.
    pub fn inverse(&self, coefficients: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len(coefficients.len())?;
        let mut buf = coefficients.to_vec();
        self.inner.fft.process(&mut buf, Direction::Inverse);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Forward transforms of several real arrays, two per complex FFT.
    pub fn forward_many(&self, fields: &[&[f64]]) -> Result<Vec<Vec<Complex64>>> {
        for f in fields {
            self.check_len(f.len())?;
        }
        let scale = 1.0 / self.len() as f64;
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            if pair.len() == 1 {
                out.push(self.forward(pair[0])?);
                continue;
            }
            let mut z: Vec<Complex64> = pair[0]
                .iter()
                .zip(pair[1])
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect();
            self.inner.fft.process(&mut z, Direction::Forward);
            let mut fa = vec![ZERO; self.len()];
            let mut fb = vec![ZERO; self.len()];
            for idx in 0..self.len() {
                let zc = z[self.conjugate_index(idx)].conj();
                fa[idx] = (z[idx] + zc) * (0.5 * scale);
                let d = (z[idx] - zc) * (0.5 * scale);
                fb[idx] = Complex64::new(d.im, -d.re);
            }
            out.push(fa);
            out.push(fb);
        }
        Ok(out)
    }

    /// Inverse transforms of several conjugate-symmetric arrays, two per FFT.
    pub fn inverse_many(&self, spectra: &[&[Complex64]]) -> Result<Vec<Vec<f64>>> {
        for s in spectra {
            self.check_len(s.len())?;
        }
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            if pair.len() == 1 {
                out.push(self.inverse(pair[0])?);
                continue;
            }
            let mut z: Vec<Complex64> = pair[0]
                .iter()
                .zip(pair[1])
                .map(|(&a, &b)| a + Complex64::new(-b.im, b.re))
                .collect();
            self.inner.fft.process(&mut z, Direction::Inverse);
            out.push(z.iter().map(|c| c.re).collect());
            out.push(z.iter().map(|c| c.im).collect());
        }
        Ok(out)
    }

    /// Inverse transforms of spectral operators applied to coefficient
    /// arrays, without materializing the differentiated spectra.
    pub(crate) fn inverse_ops(&self, items: &[(&[Complex64], SpectralOp)]) -> Result<Vec<Vec<f64>>> {
        for (s, _) in items {
            self.check_len(s.len())?;
        }
        let n = self.len();
        let mut z = vec![ZERO; n];
        let mut out = Vec::with_capacity(items.len());
        for pair in items.chunks(2) {
            let (sa, oa) = pair[0];
            match pair.get(1) {
                Some(&(sb, ob)) => {
                    for idx in 0..n {
                        let wv = self.inner.wavevectors[idx];
                        let a = oa.apply(wv, sa[idx]);
                        let b = ob.apply(wv, sb[idx]);
                        z[idx] = Complex64::new(a.re - b.im, a.im + b.re);
                    }
                }
                None => {
                    for idx in 0..n {
                        z[idx] = oa.apply(self.inner.wavevectors[idx], sa[idx]);
                    }
                }
            }
            self.inner.fft.process(&mut z, Direction::Inverse);
            out.push(z.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(z.iter().map(|c| c.im).collect());
            }
        }
        Ok(out)
    }

    /// Mask of modes kept by the 2/3 rule: lattice modes with
    /// `max(|k1|, |k2|) <= (2/3) k_max`.
    #[inline]
    pub fn dealias_keeps(&self, idx: usize) -> bool {
        self.inner.dealias_mask[idx]
    }
}

/// Real scalar field with both its samples and its Fourier coefficients.
#[derive(Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coefficients: Vec<Complex64>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("mean", &self.mean())
            .finish()
    }
}

pub type VectorField = [SpectralField; 2];

impl SpectralField {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        let coefficients = grid.forward(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coefficients,
        })
    }

    /// Builds a field from coefficients, projecting onto conjugate-symmetric
    /// spectra so the samples are real.
    pub fn from_coefficients(grid: &Grid, mut coefficients: Vec<Complex64>) -> Result<Self> {
        grid.check_len(coefficients.len())?;
        symmetrize(grid, &mut coefficients);
        let values = grid.inverse(&coefficients)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coefficients,
        })
    }

    pub fn from_values_many(grid: &Grid, values: Vec<Vec<f64>>) -> Result<Vec<Self>> {
        let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
        let coeffs = grid.forward_many(&refs)?;
        Ok(values
            .into_iter()
            .zip(coeffs)
            .map(|(values, coefficients)| Self {
                grid: grid.clone(),
                values,
                coefficients,
            })
            .collect())
    }

    pub fn from_coefficients_many(grid: &Grid, mut coeffs: Vec<Vec<Complex64>>) -> Result<Vec<Self>> {
        for c in coeffs.iter_mut() {
            grid.check_len(c.len())?;
            symmetrize(grid, c);
        }
        let refs: Vec<&[Complex64]> = coeffs.iter().map(|v| v.as_slice()).collect();
        let values = grid.inverse_many(&refs)?;
        Ok(coeffs
            .into_iter()
            .zip(values)
            .map(|(coefficients, values)| Self {
                grid: grid.clone(),
                values,
                coefficients,
            })
            .collect())
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            coefficients: vec![ZERO; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        let mut coefficients = vec![ZERO; grid.len()];
        coefficients[0] = Complex64::new(c, 0.0);
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
            coefficients,
        }
    }

    /// Samples `f(x1, x2)` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let [x1, x2] = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        Self::from_values(grid, values).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<Complex64>) {
        (self.values, self.coefficients)
    }

    /// Zero-mode coefficient, i.e. the spatial average.
    pub fn mean(&self) -> f64 {
        self.coefficients[0].re
    }

    /// Recomputes the coefficients from the samples.
    pub fn transform(mut self) -> Result<Self> {
        self.coefficients = self.grid.forward(&self.values)?;
        Ok(self)
    }

    /// Recomputes the samples from the coefficients.
    pub fn inverse_transform(mut self) -> Result<Self> {
        self.values = self.grid.inverse(&self.coefficients)?;
        Ok(self)
    }

    /// Root-mean-square norm computed from the coefficients.
    pub fn l2_norm(&self) -> f64 {
        sqrt(self.coefficients.iter().map(|c| c.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Multiplies every lattice mode by `m(k1, k2)`; Nyquist bins become zero.
    pub fn apply_multiplier(&self, m: impl Fn(f64, f64) -> Complex64) -> Self {
        let coeffs = multiplied(&self.grid, &self.coefficients, m);
        Self::from_coefficients(&self.grid, coeffs).expect("length matches grid")
    }

    /// Pointwise map in physical space.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_values(&self.grid, values).expect("length matches grid")
    }

    /// Pointwise combination of two fields in physical space.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(&self.grid, values)
    }

    /// Linear combination `alpha * self + beta * other`, done spectrally.
    pub fn axpby(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| alpha * a + beta * b)
            .collect();
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(&a, &b)| a * alpha + b * beta)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
            coefficients,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            coefficients: self.coefficients.iter().map(|z| z * c).collect(),
        }
    }

    /// Pointwise product followed by a fresh transform (no truncation).
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Field with the zero mode removed.
    pub fn without_mean(&self) -> Self {
        let mut coefficients = self.coefficients.clone();
        coefficients[0] = ZERO;
        let m = self.mean();
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v - m).collect(),
            coefficients,
        }
    }

    /// Field with the Nyquist bins removed.
    pub fn without_nyquist(&self) -> Self {
        self.apply_multiplier(|_, _| Complex64::new(1.0, 0.0))
    }

    /// Cyclic shift by whole cells: output sample `(i1, i2)` is input sample
    /// `(i1 - s1, i2 - s2)`.
    pub fn shifted(&self, s1: usize, s2: usize) -> Self {
        let n = self.grid.n();
        let mut values = vec![0.0; self.grid.len()];
        for i2 in 0..n {
            for i1 in 0..n {
                values[((i2 + s2) % n) * n + (i1 + s1) % n] = self.values[i2 * n + i1];
            }
        }
        Self::from_values(&self.grid, values).expect("length matches grid")
    }

    /// Largest deviation from conjugate symmetry of the stored coefficients.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.coefficients[i] - self.coefficients[self.grid.conjugate_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }
}

fn symmetrize(grid: &Grid, c: &mut [Complex64]) {
    for idx in 0..c.len() {
        let j = grid.conjugate_index(idx);
        if j < idx {
            continue;
        }
        if j == idx {
            c[idx] = Complex64::new(c[idx].re, 0.0);
        } else {
            let avg = (c[idx] + c[j].conj()) * 0.5;
            c[idx] = avg;
            c[j] = avg.conj();
        }
    }
}

/// Copies `coeffs` with lattice mode `k` scaled by `m(k1, k2)` and Nyquist
/// bins zeroed. The zero mode is passed `(0, 0)`.
pub fn multiplied(grid: &Grid, coeffs: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
    let mut out = vec![ZERO; coeffs.len()];
    for (idx, (o, c)) in out.iter_mut().zip(coeffs).enumerate() {
        if let Some([k1, k2]) = grid.wavevector(idx) {
            *o = c * m(k1, k2);
        }
    }
    out
}

/// Spectral gradient: `e^{ik.x} -> i k e^{ik.x}`.
pub fn gradient(f: &SpectralField) -> VectorField {
    let grid = f.grid();
    let d1 = multiplied(grid, f.coefficients(), |k1, _| Complex64::new(0.0, k1));
    let d2 = multiplied(grid, f.coefficients(), |_, k2| Complex64::new(0.0, k2));
    let mut v = SpectralField::from_coefficients_many(grid, vec![d1, d2]).expect("grid lengths");
    let g2 = v.pop().expect("two components");
    let g1 = v.pop().expect("two components");
    [g1, g2]
}

pub fn divergence(v: &VectorField) -> Result<SpectralField> {
    v[0].same_grid(&v[1])?;
    let grid = v[0].grid();
    let c: Vec<Complex64> = multiplied(grid, v[0].coefficients(), |k1, _| Complex64::new(0.0, k1))
        .into_iter()
        .zip(multiplied(grid, v[1].coefficients(), |_, k2| Complex64::new(0.0, k2)))
        .map(|(a, b)| a + b)
        .collect();
    SpectralField::from_coefficients(grid, c)
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.apply_multiplier(|k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
}

/// `Lambda^gamma = (-Delta)^{gamma/2}`: mode `k` is multiplied by `|k|^gamma`.
///
/// The zero mode is kept for `gamma = 0` and dropped for `gamma > 0`; for
/// `gamma < 0` it must already vanish.
pub fn fractional_lambda(f: &SpectralField, gamma: f64) -> Result<SpectralField> {
    if !(gamma > -1.0 && gamma <= 1.0) {
        return Err(Error::FractionalPowerOutOfRange(gamma));
    }
    let mean = f.mean();
    if gamma < 0.0 && mean.abs() > 1e-14 * (1.0 + f.l2_norm()) {
        return Err(Error::NonzeroMeanNegativePower { gamma, mean });
    }
    if gamma == 0.0 {
        return Ok(f.apply_multiplier(|_, _| Complex64::new(1.0, 0.0)));
    }
    Ok(f.apply_multiplier(|k1, k2| {
        let r2 = k1 * k1 + k2 * k2;
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(powf(r2, 0.5 * gamma), 0.0)
        }
    }))
}

/// 2/3-rule truncation. Idempotent.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let c: Vec<Complex64> = f
        .coefficients()
        .iter()
        .enumerate()
        .map(|(idx, &c)| if grid.dealias_keeps(idx) { c } else { ZERO })
        .collect();
    SpectralField::from_coefficients(grid, c).expect("length matches grid")
}

/// `u . grad f` evaluated pointwise.
pub fn advect(u: &VectorField, f: &SpectralField) -> Result<SpectralField> {
    u[0].same_grid(f)?;
    u[1].same_grid(f)?;
    let [g1, g2] = gradient(f);
    let values = (0..f.grid().len())
        .map(|i| u[0].values[i] * g1.values[i] + u[1].values[i] * g2.values[i])
        .collect();
    SpectralField::from_values(f.grid(), values)
}

/// A single Fourier mode `amp * cos(k . x + phase)` on integer mode `(m1, m2)`.
pub fn cosine_mode(grid: &Grid, m1: i64, m2: i64, amp: f64, phase: f64) -> SpectralField {
    let k0 = grid.k_min();
    SpectralField::from_fn(grid, |x1, x2| {
        amp * cos(k0 * (m1 as f64 * x1 + m2 as f64 * x2) + phase)
    })
}
