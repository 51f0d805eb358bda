//! Empirical property checks.
//!
//! Exact properties (partition of unity, reconstruction, almost
//! orthogonality, Bernstein, embedding) are asserted against fixed bounds.
//! Estimates with unknown constants are sampled over seeds and pass when the
//! observed constant is finite and its spread `max/min` stays below
//! [`LpCheckConfig::stability_ratio`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{dealias, gradient, SpectralField};
use crate::initial::{random_band_field, rng_from_seed};
use crate::math::{exp2i, sqrt};
use crate::state::rational_i;

use super::{BesovParams, LittlewoodPaley, SumExponent};

/// Bernstein margin.
pub const BERNSTEIN_C: f64 = 8.0 / 3.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LpCheckConfig {
    pub seeds: u64,
    pub first_seed: u64,
    pub tolerance: f64,
    pub stability_ratio: f64,
}

impl Default for LpCheckConfig {
    fn default() -> Self {
        Self {
            seeds: 100,
            first_seed: 0,
            tolerance: 1e-10,
            stability_ratio: 4.0,
        }
    }
}

/// One empirical constant sampled across seeds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantRecord {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

impl ConstantRecord {
    fn from_samples(name: &str, values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        Self {
            name: String::from(name),
            min,
            max,
            mean,
            samples: values.len(),
        }
    }

    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    pub fn is_stable(&self, ratio: f64) -> bool {
        self.samples > 0 && self.min > 0.0 && self.max.is_finite() && self.spread() <= ratio
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LpCheckReport {
    pub config: LpCheckConfig,
    pub j_range: (i32, i32),
    /// `max |sum_j psi(2^{-j} k) - 1|` over nonzero lattice modes.
    pub partition_defect: f64,
    /// Largest `psi(r) psi(2^{-j} r)` with `|j| >= 2` over a radial sample.
    pub support_overlap: f64,
    /// Range of `sum_j ||Delta_j f||^2 / ||f - mean f||^2`.
    pub orthogonality: (f64, f64),
    /// Range of `||grad Delta_j f|| / (2^j ||Delta_j f||)`.
    pub bernstein: (f64, f64),
    /// Largest error of `sum_j Delta_j f = f - mean f` and of the low/high split.
    pub reconstruction_error: f64,
    pub embedding_violations: usize,
    pub constants: Vec<ConstantRecord>,
}

impl LpCheckReport {
    pub fn partition_ok(&self) -> bool {
        self.partition_defect <= self.config.tolerance && self.support_overlap == 0.0
    }

    pub fn orthogonality_ok(&self) -> bool {
        self.orthogonality.0 >= 0.5 - 1e-12 && self.orthogonality.1 <= 1.0 + 1e-12
    }

    pub fn bernstein_ok(&self) -> bool {
        self.bernstein.0 >= 1.0 / BERNSTEIN_C && self.bernstein.1 <= BERNSTEIN_C
    }

    pub fn reconstruction_ok(&self) -> bool {
        self.reconstruction_error <= self.config.tolerance
    }

    pub fn constants_ok(&self) -> bool {
        self.constants
            .iter()
            .all(|c| c.is_stable(self.config.stability_ratio))
    }

    pub fn passes(&self) -> bool {
        self.partition_ok()
            && self.orthogonality_ok()
            && self.bernstein_ok()
            && self.reconstruction_ok()
            && self.embedding_violations == 0
            && self.constants_ok()
    }
}

fn b21(s: f64) -> BesovParams {
    BesovParams::all(s, SumExponent::One)
}

fn b2inf(s: f64) -> BesovParams {
    BesovParams::all(s, SumExponent::Infinity)
}

fn max_abs_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn gradient_norm(f: &SpectralField) -> f64 {
    let [g1, g2] = gradient(f);
    sqrt(g1.l2_norm() * g1.l2_norm() + g2.l2_norm() * g2.l2_norm())
}

pub fn partition_defect(lp: &LittlewoodPaley) -> f64 {
    let (j_min, j_max) = lp.j_range();
    let grid = lp.grid();
    let mut defect = 0.0f64;
    for idx in 0..grid.len() {
        match grid.wavevector(idx) {
            Some([k1, k2]) if k1 != 0.0 || k2 != 0.0 => {
                let s: f64 = (j_min..=j_max).map(|j| lp.weight(idx, j)).sum();
                defect = defect.max((s - 1.0).abs());
            }
            _ => {}
        }
    }
    defect
}

pub fn support_overlap(lp: &LittlewoodPaley) -> f64 {
    let fam = lp.family();
    let mut worst = 0.0f64;
    for i in 0..2000 {
        let r = 0.5 + 2.5 * i as f64 / 2000.0;
        for j in [-4, -3, -2, 2, 3, 4] {
            worst = worst.max((fam.psi(r) * fam.psi_j(j, r)).abs());
        }
    }
    worst
}

/// Runs the full suite on the analyzer's grid.
pub fn run_checks(lp: &LittlewoodPaley, config: &LpCheckConfig) -> Result<LpCheckReport> {
    if config.seeds == 0 || !(config.stability_ratio >= 1.0) {
        return Err(Error::InvalidConfig("lp checks need seeds and a stability ratio >= 1"));
    }
    let grid = lp.grid();
    let (j_min, j_max) = lp.j_range();
    let k_max = grid.k_max();
    let low_band = 1.0f64.min(k_max);

    let mut orth = (f64::INFINITY, f64::NEG_INFINITY);
    let mut bern = (f64::INFINITY, f64::NEG_INFINITY);
    let mut recon = 0.0f64;
    let mut embedding_violations = 0;
    let mut interp = Vec::new();
    let mut product = Vec::new();
    let mut commutator = Vec::new();
    let mut composition = [Vec::new(), Vec::new(), Vec::new()];

    for seed in config.first_seed..config.first_seed + config.seeds {
        let mut rng = rng_from_seed(seed);
        let f = random_band_field(grid, &mut rng, 0.0, k_max, -1.0).map(|v| v + 1.0);
        let centered = f.without_mean();
        let total = centered.l2_norm() * centered.l2_norm();

        // blocks: orthogonality, Bernstein, reconstruction
        let mut sum_sq = 0.0;
        let mut rebuilt = SpectralField::zeros(grid);
        for j in j_min..=j_max {
            let b = lp.block(&f, j)?.field;
            let nb = b.l2_norm();
            sum_sq += nb * nb;
            if nb > 1e-12 * sqrt(total) {
                let ratio = gradient_norm(&b) / (exp2i(j) * nb);
                bern = (bern.0.min(ratio), bern.1.max(ratio));
            }
            rebuilt = rebuilt.axpby(1.0, &b, 1.0)?;
        }
        let q = sum_sq / total;
        orth = (orth.0.min(q), orth.1.max(q));
        recon = recon.max(max_abs_diff(&rebuilt, &centered));
        let (lo, hi) = lp.low_high_split(&f)?;
        recon = recon.max(max_abs_diff(&lo.axpby(1.0, &hi, 1.0)?, &centered));

        // embedding on low-frequency data
        let g = random_band_field(grid, &mut rng, 0.0, low_band, -1.0);
        for s in [0.0, 1.0] {
            for sp in [0.5, 1.0] {
                let hi_s = lp.besov_norm(&g, &BesovParams::low(s, SumExponent::One))?;
                let lo_s = lp.besov_norm(&g, &BesovParams::low(s - sp, SumExponent::One))?;
                if hi_s > lo_s * (1.0 + 1e-12) {
                    embedding_violations += 1;
                }
            }
        }

        // interpolation with theta = 1/2 between s = 0 and s = 2
        let mid = lp.besov_norm(&f, &b21(1.0))?;
        let ends = sqrt(lp.besov_norm(&f, &b2inf(0.0))? * lp.besov_norm(&f, &b2inf(2.0))?);
        interp.push(mid / ends);

        // product of band-limited pairs; no aliasing below k_max / 3
        let band = k_max / 3.0;
        let p = random_band_field(grid, &mut rng, 0.0, band, -1.0);
        let r = random_band_field(grid, &mut rng, 0.0, band, -1.0);
        let pr = dealias(&p.product(&r)?);
        product.push(lp.besov_norm(&pr, &b21(0.0))? / (lp.besov_norm(&p, &b21(1.0))? * lp.besov_norm(&r, &b21(0.0))?));

        // commutator
        let u = [
            random_band_field(grid, &mut rng, 0.0, band, -1.0),
            random_band_field(grid, &mut rng, 0.0, band, -1.0),
        ];
        let mut sup = 0.0f64;
        for j in j_min..=j_max {
            let c = lp.block_commutator(&u, &p, j)?;
            sup = sup.max(exp2i(j) * c.l2_norm());
        }
        let unorm = lp.vector_besov_norm(&u, &b21(2.0))?;
        commutator.push(sup / (unorm * lp.besov_norm(&p, &b2inf(1.0))?));

        // composition with I(a) = a / (1 + a), |a| <= 1/2
        let a0 = random_band_field(grid, &mut rng, 0.0, band, -1.0);
        let level = 0.1 + 0.4 * rng_unit(seed);
        let a = a0.scale(level / a0.max_abs());
        let ia = rational_i(&a)?;
        for (slot, s) in composition.iter_mut().zip([1.0, 2.0, 3.0]) {
            slot.push(lp.besov_norm(&ia, &b21(s))? / lp.besov_norm(&a, &b21(s))?);
        }
    }

    let mut constants = vec![
        ConstantRecord::from_samples("interpolation", &interp),
        ConstantRecord::from_samples("product", &product),
        ConstantRecord::from_samples("commutator", &commutator),
    ];
    for (s, values) in [1, 2, 3].iter().zip(&composition) {
        let name = match s {
            1 => "composition_s1",
            2 => "composition_s2",
            _ => "composition_s3",
        };
        constants.push(ConstantRecord::from_samples(name, values));
    }

    Ok(LpCheckReport {
        config: config.clone(),
        j_range: (j_min, j_max),
        partition_defect: partition_defect(lp),
        support_overlap: support_overlap(lp),
        orthogonality: orth,
        bernstein: bern,
        reconstruction_error: recon,
        embedding_violations,
        constants,
    })
}

/// Deterministic number in `[0, 1)` from a seed.
fn rng_unit(seed: u64) -> f64 {
    use rand::Rng;
    rng_from_seed(seed ^ 0x005e_ed0f_1e7e).gen_range(0.0..1.0)
}
