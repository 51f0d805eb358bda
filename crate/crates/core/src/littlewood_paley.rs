//! Homogeneous Littlewood-Paley analysis on the periodic grid.
//!
//! The radial cutoff `chi` equals 1 on `|xi| <= 3/4`, vanishes for
//! `|xi| >= 4/3` and interpolates with an `exp(-s/x)` smooth step of
//! sharpness `s`. The dyadic bump is `psi(xi) = chi(xi/2) - chi(xi)` and the
//! block `j` multiplies mode `k` by `psi(2^{-j} |k|)`. The zero mode belongs
//! to no block.
//!
//! Norm conventions: block norms are root-mean-square `L^2` norms; a vector
//! field's block norm is the Euclidean combination of its components;
//! `low` norms sum blocks `j <= 0`, `high` norms blocks `j >= -1`, while the
//! field split uses `j <= -1` / `j >= 0`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dealias, Grid, SpectralField, VectorField};
use crate::math::{ceil, exp, exp2i, floor, log2, powf, sqrt};

pub mod checks;

pub const DEFAULT_SHARPNESS: f64 = 1.0;
const INNER_RADIUS: f64 = 0.75;
const OUTER_RADIUS: f64 = 4.0 / 3.0;

/// Smooth radial cutoff and its dyadic bump.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicCutoffFamily {
    sharpness: f64,
}

impl Default for DyadicCutoffFamily {
    fn default() -> Self {
        Self {
            sharpness: DEFAULT_SHARPNESS,
        }
    }
}

impl DyadicCutoffFamily {
    /// Builds the family and verifies the partition of unity on a radial sample.
    pub fn build(sharpness: f64) -> Result<Self> {
        if !(sharpness > 0.0 && sharpness <= 50.0) {
            return Err(Error::InvalidSharpness(sharpness));
        }
        let family = Self { sharpness };
        let mut worst = 0.0f64;
        for i in 0..=2000 {
            let r = exp2i(-8) * powf(2.0, 16.0 * i as f64 / 2000.0);
            let total: f64 = (-20..=20).map(|j| family.psi(r * exp2i(-j))).sum();
            worst = worst.max((total - 1.0).abs());
        }
        if worst > 1e-12 {
            return Err(Error::PartitionOfUnity(worst));
        }
        Ok(family)
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    fn bump(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            exp(-self.sharpness / x)
        }
    }

    /// Radial cutoff, non-increasing in `r`.
    pub fn chi(&self, r: f64) -> f64 {
        if r <= INNER_RADIUS {
            return 1.0;
        }
        if r >= OUTER_RADIUS {
            return 0.0;
        }
        let t = (r - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS);
        let up = self.bump(1.0 - t);
        up / (up + self.bump(t))
    }

    /// Dyadic bump, supported in `3/4 <= r <= 8/3`.
    pub fn psi(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }

    /// `psi(2^{-j} r)`.
    pub fn psi_j(&self, j: i32, r: f64) -> f64 {
        self.psi(r * exp2i(-j))
    }
}

/// Summation exponent of the block sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SumExponent {
    One,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FrequencyRange {
    All,
    /// `j <= 0`
    Low,
    /// `j >= -1`
    High,
}

impl FrequencyRange {
    pub fn contains(self, j: i32) -> bool {
        match self {
            FrequencyRange::All => true,
            FrequencyRange::Low => j <= 0,
            FrequencyRange::High => j >= -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: SumExponent,
    pub range: FrequencyRange,
}

impl BesovParams {
    pub fn new(s: f64, r: SumExponent, range: FrequencyRange) -> Self {
        Self { s, p: 2.0, r, range }
    }

    pub fn low(s: f64, r: SumExponent) -> Self {
        Self::new(s, r, FrequencyRange::Low)
    }

    pub fn high(s: f64, r: SumExponent) -> Self {
        Self::new(s, r, FrequencyRange::High)
    }

    pub fn all(s: f64, r: SumExponent) -> Self {
        Self::new(s, r, FrequencyRange::All)
    }

    fn validate(&self) -> Result<()> {
        if self.p != 2.0 {
            return Err(Error::UnsupportedIntegrability(self.p));
        }
        Ok(())
    }
}

/// `L^2` norms of the dyadic blocks `j_min..=j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorms {
    pub j_min: i32,
    pub norms: Vec<f64>,
}

impl BlockNorms {
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.norms
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.j_min + i as i32, v))
    }

    pub fn get(&self, j: i32) -> f64 {
        let i = j - self.j_min;
        if i < 0 {
            return 0.0;
        }
        self.norms.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Weighted contributions `2^{js} ||block_j||` inside the range.
    pub fn contributions(&self, s: f64, range: FrequencyRange) -> Vec<(i32, f64)> {
        self.iter()
            .filter(|(j, _)| range.contains(*j))
            .map(|(j, v)| (j, powf(2.0, j as f64 * s) * v))
            .collect()
    }

    pub fn besov(&self, params: &BesovParams) -> Result<f64> {
        params.validate()?;
        Ok(reduce(
            self.contributions(params.s, params.range).into_iter().map(|(_, v)| v),
            params.r,
        ))
    }
}

fn reduce(values: impl Iterator<Item = f64>, r: SumExponent) -> f64 {
    match r {
        SumExponent::One => values.sum(),
        SumExponent::Infinity => values.fold(0.0, f64::max),
    }
}

/// Machine-readable norm evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormReport {
    pub norm_kind: String,
    pub s: f64,
    pub r: SumExponent,
    pub range: FrequencyRange,
    pub value: f64,
    pub j_contributions: Vec<(i32, f64)>,
}

/// Output of [`LittlewoodPaley::block`].
#[derive(Debug, Clone)]
pub struct DyadicBlock {
    pub field: SpectralField,
    /// False when the bump annulus misses the lattice entirely.
    pub resolvable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeExponent {
    One,
    Infinity,
}

/// Dyadic decomposition bound to one grid.
#[derive(Debug, Clone)]
pub struct LittlewoodPaley {
    grid: Grid,
    family: DyadicCutoffFamily,
    j_min: i32,
    j_max: i32,
    // each lattice mode touches blocks first_block[idx] and first_block[idx] + 1
    first_block: Vec<i32>,
    weights: Vec<[f64; 2]>,
}

const NO_BLOCK: i32 = i32::MIN;

impl LittlewoodPaley {
    pub fn new(grid: &Grid, family: DyadicCutoffFamily) -> Self {
        let mut j_min = ceil(log2(grid.k_min())) as i32 - 1;
        // every nonzero lattice mode must be covered by the retained blocks
        while family.chi(grid.k_min() * exp2i(-j_min)) > 0.0 {
            j_min -= 1;
        }
        let j_max = floor(log2(grid.k_max())) as i32 + 1;
        let kmag = grid.wavenumber_magnitudes();
        let mut first_block = vec![NO_BLOCK; grid.len()];
        let mut weights = vec![[0.0; 2]; grid.len()];
        for idx in 0..grid.len() {
            let k = kmag[idx];
            if k <= 0.0 {
                continue;
            }
            // smallest j whose annulus reaches |k|
            let j0 = ceil(log2(3.0 * k / 8.0)) as i32;
            let w = [family.psi_j(j0, k), family.psi_j(j0 + 1, k)];
            first_block[idx] = j0;
            weights[idx] = w;
            debug_assert!(
                (w[0] == 0.0 || (j_min..=j_max).contains(&j0))
                    && (w[1] == 0.0 || (j_min..=j_max).contains(&(j0 + 1)))
            );
        }
        Self {
            grid: grid.clone(),
            family,
            j_min,
            j_max,
            first_block,
            weights,
        }
    }

    pub fn with_default_cutoffs(grid: &Grid) -> Self {
        Self::new(grid, DyadicCutoffFamily::default())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn family(&self) -> &DyadicCutoffFamily {
        &self.family
    }

    /// Resolvable block range `(j_min, j_max)`.
    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn is_resolvable(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// Multiplier of block `j` at flat index `idx`.
    pub fn weight(&self, idx: usize, j: i32) -> f64 {
        let j0 = self.first_block[idx];
        if j0 == NO_BLOCK {
            return 0.0;
        }
        match j - j0 {
            0 => self.weights[idx][0],
            1 => self.weights[idx][1],
            _ => 0.0,
        }
    }

    /// Block coefficients `psi(2^{-j} k) c_k`.
    pub fn block_coefficients(&self, coeffs: &[Complex64], j: i32) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| c * self.weight(idx, j))
            .collect()
    }

    /// Homogeneous dyadic block `Delta_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<DyadicBlock> {
        self.same_grid(f)?;
        if !self.is_resolvable(j) {
            return Ok(DyadicBlock {
                field: SpectralField::zeros(&self.grid),
                resolvable: false,
            });
        }
        let field = SpectralField::from_coefficients(&self.grid, self.block_coefficients(f.coefficients(), j))?;
        Ok(DyadicBlock {
            field,
            resolvable: true,
        })
    }

    fn same_grid(&self, f: &SpectralField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Squared block norms accumulated from raw coefficients.
    fn accumulate(&self, coeffs: &[Complex64], acc: &mut [f64]) {
        for (idx, c) in coeffs.iter().enumerate() {
            let j0 = self.first_block[idx];
            if j0 == NO_BLOCK {
                continue;
            }
            let e = c.norm_sqr();
            let [w0, w1] = self.weights[idx];
            let i0 = (j0 - self.j_min) as usize;
            if w0 != 0.0 {
                acc[i0] += w0 * w0 * e;
            }
            if w1 != 0.0 {
                acc[i0 + 1] += w1 * w1 * e;
            }
        }
    }

    fn finish(&self, acc: Vec<f64>) -> BlockNorms {
        BlockNorms {
            j_min: self.j_min,
            norms: acc.into_iter().map(sqrt).collect(),
        }
    }

    pub fn block_norms_of_coefficients(&self, coeffs: &[Complex64]) -> BlockNorms {
        let mut acc = vec![0.0; (self.j_max - self.j_min + 1) as usize];
        self.accumulate(coeffs, &mut acc);
        self.finish(acc)
    }

    pub fn block_norms(&self, f: &SpectralField) -> BlockNorms {
        self.block_norms_of_coefficients(f.coefficients())
    }

    /// Euclidean block norms of a vector field.
    pub fn vector_block_norms(&self, v: &VectorField) -> BlockNorms {
        let mut acc = vec![0.0; (self.j_max - self.j_min + 1) as usize];
        self.accumulate(v[0].coefficients(), &mut acc);
        self.accumulate(v[1].coefficients(), &mut acc);
        self.finish(acc)
    }

    pub fn besov_norm(&self, f: &SpectralField, params: &BesovParams) -> Result<f64> {
        self.same_grid(f)?;
        self.block_norms(f).besov(params)
    }

    pub fn vector_besov_norm(&self, v: &VectorField, params: &BesovParams) -> Result<f64> {
        self.same_grid(&v[0])?;
        self.same_grid(&v[1])?;
        self.vector_block_norms(v).besov(params)
    }

    pub fn besov_report(&self, f: &SpectralField, params: &BesovParams) -> Result<NormReport> {
        self.same_grid(f)?;
        params.validate()?;
        let blocks = self.block_norms(f);
        let j_contributions = blocks.contributions(params.s, params.range);
        let value = reduce(j_contributions.iter().map(|(_, v)| *v), params.r);
        Ok(NormReport {
            norm_kind: String::from("besov"),
            s: params.s,
            r: params.r,
            range: params.range,
            value,
            j_contributions,
        })
    }

    /// Field split `(sum_{j <= -1} Delta_j f, sum_{j >= 0} Delta_j f)`.
    pub fn low_high_split(&self, f: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        self.same_grid(f)?;
        let mut low = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let mut high = low.clone();
        for (idx, &c) in f.coefficients().iter().enumerate() {
            let j0 = self.first_block[idx];
            if j0 == NO_BLOCK {
                continue;
            }
            let [w0, w1] = self.weights[idx];
            for (j, w) in [(j0, w0), (j0 + 1, w1)] {
                if j <= -1 {
                    low[idx] += c * w;
                } else {
                    high[idx] += c * w;
                }
            }
        }
        let mut parts = SpectralField::from_coefficients_many(&self.grid, vec![low, high])?;
        let high = parts.pop().expect("two parts");
        let low = parts.pop().expect("two parts");
        Ok((low, high))
    }

    /// Chemin-Lerner norm over uniformly spaced samples: the time norm is
    /// taken per block (trapezoid rule for `q = 1`, maximum for `q = inf`)
    /// before the weighted `l^r` sum.
    pub fn chemin_lerner_norm(
        &self,
        samples: &[(f64, &SpectralField)],
        q: TimeExponent,
        params: &BesovParams,
    ) -> Result<f64> {
        Ok(self.chemin_lerner_report(samples, q, params)?.value)
    }

    pub fn chemin_lerner_report(
        &self,
        samples: &[(f64, &SpectralField)],
        q: TimeExponent,
        params: &BesovParams,
    ) -> Result<NormReport> {
        params.validate()?;
        if samples.is_empty() {
            return Err(Error::TimeSamples("no samples"));
        }
        if q == TimeExponent::One && samples.len() < 2 {
            return Err(Error::TimeSamples("q = 1 needs at least two samples"));
        }
        if samples.len() >= 2 {
            let dt0 = samples[1].0 - samples[0].0;
            if dt0 <= 0.0 {
                return Err(Error::TimeSamples("sample times must increase"));
            }
            for w in samples.windows(2) {
                if ((w[1].0 - w[0].0) - dt0).abs() > 1e-9 * dt0 {
                    return Err(Error::TimeSamples("samples must be uniformly spaced"));
                }
            }
        }
        for (_, f) in samples {
            self.same_grid(f)?;
        }
        let per_time: Vec<BlockNorms> = samples.iter().map(|(_, f)| self.block_norms(f)).collect();
        let nblocks = per_time[0].norms.len();
        let mut time_norm = vec![0.0; nblocks];
        for (i, slot) in time_norm.iter_mut().enumerate() {
            *slot = match q {
                TimeExponent::Infinity => per_time.iter().map(|b| b.norms[i]).fold(0.0, f64::max),
                TimeExponent::One => {
                    let dt = samples[1].0 - samples[0].0;
                    let m = per_time.len();
                    let inner: f64 = per_time[1..m - 1].iter().map(|b| b.norms[i]).sum();
                    dt * (0.5 * (per_time[0].norms[i] + per_time[m - 1].norms[i]) + inner)
                }
            };
        }
        let blocks = BlockNorms {
            j_min: self.j_min,
            norms: time_norm,
        };
        let j_contributions = blocks.contributions(params.s, params.range);
        let value = reduce(j_contributions.iter().map(|(_, v)| *v), params.r);
        Ok(NormReport {
            norm_kind: String::from("chemin_lerner"),
            s: params.s,
            r: params.r,
            range: params.range,
            value,
            j_contributions,
        })
    }

    /// `[Delta_j, u.grad] f = Delta_j(u.grad f) - u.grad(Delta_j f)`, products dealiased.
    pub fn block_commutator(&self, u: &VectorField, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.same_grid(f)?;
        self.same_grid(&u[0])?;
        self.same_grid(&u[1])?;
        let transported = dealias(&crate::grid::advect(u, f)?);
        let outer = self.block(&transported, j)?.field;
        let inner_block = self.block(f, j)?.field;
        let inner = dealias(&crate::grid::advect(u, &inner_block)?);
        outer.axpby(1.0, &inner, -1.0)
    }
}
