use std::f64::consts::PI;

use mhd25_core::grid::{cosine_mode, Grid, SpectralField};
use mhd25_core::initial::{random_band_field, rng_from_seed};
use mhd25_core::littlewood_paley::checks::{run_checks, LpCheckConfig};
use mhd25_core::littlewood_paley::*;
use proptest::prelude::*;

fn small_box() -> Grid {
    Grid::new(128, 16.0 * PI).unwrap()
}

fn unit_box() -> Grid {
    Grid::new(32, 2.0 * PI).unwrap()
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn profile_values() {
    let fam = DyadicCutoffFamily::build(DEFAULT_SHARPNESS).unwrap();
    assert_eq!(fam.psi(0.5), 0.0);
    assert_eq!(fam.chi(0.75), 1.0);
    assert_eq!(fam.chi(1.5), 0.0);
    assert_eq!(fam.psi(1.5), 1.0);
    let s: f64 = (-10..=10).map(|j| fam.psi_j(j, 1.0)).sum();
    assert!((s - 1.0).abs() <= 1e-10);
}

#[test]
fn chi_is_monotone_and_supported() {
    let fam = DyadicCutoffFamily::build(DEFAULT_SHARPNESS).unwrap();
    let mut prev = 1.0;
    for i in 0..=400 {
        let r = 2.0 * i as f64 / 400.0;
        let c = fam.chi(r);
        assert!(c <= prev + 1e-15);
        if r >= 4.0 / 3.0 {
            assert_eq!(c, 0.0);
        }
        prev = c;
    }
}

#[test]
fn rejects_bad_sharpness() {
    assert!(DyadicCutoffFamily::build(0.0).is_err());
    assert!(DyadicCutoffFamily::build(-1.0).is_err());
    assert!(DyadicCutoffFamily::build(f64::NAN).is_err());
}

#[test]
fn block_of_mode_on_plateau_is_identity() {
    let g = unit_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    // |k| = 3 = 1.5 * 2^1
    let f = cosine_mode(&g, 3, 0, 1.0, 0.3);
    let b = lp.block(&f, 1).unwrap();
    assert!(b.resolvable);
    assert!(max_diff(&b.field, &f) < 1e-13);
}

#[test]
fn blocks_of_constant_vanish() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = SpectralField::constant(&g, 2.5);
    let (j0, j1) = lp.j_range();
    for j in j0..=j1 {
        assert_eq!(lp.block(&f, j).unwrap().field.max_abs(), 0.0);
    }
}

#[test]
fn unresolvable_block_is_flagged_zero() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = random_band_field(&g, &mut rng_from_seed(1), 0.0, 4.0, 0.0);
    let (j0, j1) = lp.j_range();
    for j in [j0 - 1, j1 + 1] {
        let b = lp.block(&f, j).unwrap();
        assert!(!b.resolvable);
        assert_eq!(b.field.max_abs(), 0.0);
    }
}

#[test]
fn blocks_reconstruct_mean_free_part() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = random_band_field(&g, &mut rng_from_seed(4), 0.0, 4.0, -1.0).map(|v| v + 0.7);
    let (j0, j1) = lp.j_range();
    let mut sum = SpectralField::zeros(&g);
    for j in j0..=j1 {
        sum = sum.axpby(1.0, &lp.block(&f, j).unwrap().field, 1.0).unwrap();
    }
    assert!(max_diff(&sum, &f.without_mean()) <= 1e-10);
}

#[test]
fn besov_of_single_cosine() {
    let g = unit_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = cosine_mode(&g, 1, 0, 1.0, 0.0);
    let l2 = 1.0 / 2f64.sqrt();
    assert!((f.l2_norm() - l2).abs() < 1e-14);
    let fam = lp.family();
    let want: f64 = (-3..=3).map(|j| fam.psi_j(j, 1.0) * l2).sum();
    let got = lp.besov_norm(&f, &BesovParams::all(0.0, SumExponent::One)).unwrap();
    assert!((got - want).abs() < 1e-13, "{got} vs {want}");
    assert!(got <= l2 + 1e-13);
}

#[test]
fn besov_zero_and_homogeneity() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let z = SpectralField::zeros(&g);
    let f = random_band_field(&g, &mut rng_from_seed(9), 0.0, 4.0, -0.5);
    for s in [-1.0, 0.0, 2.0] {
        for r in [SumExponent::One, SumExponent::Infinity] {
            for range in [FrequencyRange::All, FrequencyRange::Low, FrequencyRange::High] {
                let p = BesovParams::new(s, r, range);
                assert_eq!(lp.besov_norm(&z, &p).unwrap(), 0.0);
                let n1 = lp.besov_norm(&f, &p).unwrap();
                let n3 = lp.besov_norm(&f.scale(-3.0), &p).unwrap();
                assert!((n3 - 3.0 * n1).abs() <= 1e-12 * n3.max(1e-300));
            }
        }
    }
}

#[test]
fn only_p_two_is_supported() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let mut p = BesovParams::all(0.0, SumExponent::One);
    p.p = 1.0;
    assert!(lp.besov_norm(&SpectralField::zeros(&g), &p).is_err());
}

#[test]
fn threshold_convention() {
    assert!(FrequencyRange::Low.contains(0) && !FrequencyRange::Low.contains(1));
    assert!(FrequencyRange::High.contains(-1) && !FrequencyRange::High.contains(-2));
}

#[test]
fn split_of_band_limited_fields() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let low = random_band_field(&g, &mut rng_from_seed(2), 0.0, 0.25, 0.0);
    let (_, h) = lp.low_high_split(&low).unwrap();
    assert!(h.max_abs() <= 1e-10);
    let high = random_band_field(&g, &mut rng_from_seed(3), 4.0, 6.0, 0.0);
    assert!(high.max_abs() > 0.0);
    let (l, _) = lp.low_high_split(&high).unwrap();
    assert!(l.max_abs() <= 1e-10);
    let f = random_band_field(&g, &mut rng_from_seed(5), 0.0, 4.0, -1.0).map(|v| v - 0.2);
    let (l, h) = lp.low_high_split(&f).unwrap();
    assert!(max_diff(&l.axpby(1.0, &h, 1.0).unwrap(), &f.without_mean()) <= 1e-10);
}

#[test]
fn chemin_lerner_on_constant_sequences() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = random_band_field(&g, &mut rng_from_seed(6), 0.0, 4.0, -1.0);
    let p = BesovParams::all(1.0, SumExponent::One);
    let samples: Vec<(f64, &SpectralField)> = (0..11).map(|i| (0.3 * i as f64, &f)).collect();
    let b = lp.besov_norm(&f, &p).unwrap();
    let inf = lp.chemin_lerner_norm(&samples, TimeExponent::Infinity, &p).unwrap();
    assert!((inf - b).abs() <= 1e-12 * b);
    let one = lp.chemin_lerner_norm(&samples, TimeExponent::One, &p).unwrap();
    assert!((one - 3.0 * b).abs() <= 1e-12 * b);
    assert!(lp.chemin_lerner_norm(&samples[..1], TimeExponent::One, &p).is_err());
    let uneven = [(0.0, &f), (1.0, &f), (3.0, &f)];
    assert!(lp.chemin_lerner_norm(&uneven, TimeExponent::Infinity, &p).is_err());
}

#[test]
fn chemin_lerner_minkowski() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let p = BesovParams::all(0.5, SumExponent::One);
    for seed in 0..10 {
        let mut rng = rng_from_seed(100 + seed);
        let fields: Vec<SpectralField> = (0..6).map(|_| random_band_field(&g, &mut rng, 0.0, 4.0, -1.0)).collect();
        let dt = 0.5;
        let samples: Vec<(f64, &SpectralField)> = fields.iter().enumerate().map(|(i, f)| (dt * i as f64, f)).collect();
        let cl = lp.chemin_lerner_norm(&samples, TimeExponent::One, &p).unwrap();
        let per: Vec<f64> = fields.iter().map(|f| lp.besov_norm(f, &p).unwrap()).collect();
        let trap: f64 = per.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
        assert!(cl <= trap * (1.0 + 1e-12), "{cl} > {trap}");
    }
}

#[test]
fn commutator_trivial_cases() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = random_band_field(&g, &mut rng_from_seed(7), 0.0, 2.0, -1.0);
    let u = [SpectralField::constant(&g, 0.4), SpectralField::constant(&g, -1.3)];
    let (j0, j1) = lp.j_range();
    for j in j0..=j1 {
        assert!(lp.block_commutator(&u, &f, j).unwrap().max_abs() <= 1e-11);
    }
    let w = [
        random_band_field(&g, &mut rng_from_seed(8), 0.0, 2.0, -1.0),
        random_band_field(&g, &mut rng_from_seed(9), 0.0, 2.0, -1.0),
    ];
    assert_eq!(lp.block_commutator(&w, &SpectralField::zeros(&g), 0).unwrap().max_abs(), 0.0);
}

#[test]
fn norm_report_lists_contributions() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let f = random_band_field(&g, &mut rng_from_seed(10), 0.0, 4.0, -1.0);
    let p = BesovParams::low(-1.0, SumExponent::Infinity);
    let rep = lp.besov_report(&f, &p).unwrap();
    assert!(rep.j_contributions.iter().all(|(j, _)| *j <= 0));
    let sup = rep.j_contributions.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    assert_eq!(rep.value, sup);
    assert_eq!(rep.value, lp.besov_norm(&f, &p).unwrap());
}

#[test]
fn property_suite_on_small_box() {
    let g = small_box();
    let lp = LittlewoodPaley::with_default_cutoffs(&g);
    let rep = run_checks(&lp, &LpCheckConfig::default()).unwrap();
    assert!(rep.partition_ok(), "{rep:?}");
    assert!(rep.orthogonality_ok(), "{:?}", rep.orthogonality);
    assert!(rep.bernstein_ok(), "{:?}", rep.bernstein);
    assert!(rep.reconstruction_ok(), "{}", rep.reconstruction_error);
    assert_eq!(rep.embedding_violations, 0);
    for c in &rep.constants {
        assert!(c.is_stable(rep.config.stability_ratio), "{c:?}");
    }
    assert!(rep.passes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_of_unity_on_radii(r in 1e-3f64..1e3, s in 0.2f64..5.0) {
        let fam = DyadicCutoffFamily::build(s).unwrap();
        let sum: f64 = (-20..=20).map(|j| fam.psi_j(j, r)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-10);
        for j in [-3, -2, 2, 3] {
            prop_assert_eq!(fam.psi(r) * fam.psi_j(j, r), 0.0);
        }
        let sq: f64 = (-20..=20).map(|j| fam.psi_j(j, r).powi(2)).sum();
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&sq));
    }

    #[test]
    fn block_norms_bounded_by_field(seed in 0u64..1000) {
        let g = Grid::new(64, 16.0 * PI).unwrap();
        let lp = LittlewoodPaley::with_default_cutoffs(&g);
        let f = random_band_field(&g, &mut rng_from_seed(seed), 0.0, 2.0, -1.0);
        let norms = lp.block_norms(&f);
        for (_, v) in norms.iter() {
            prop_assert!(v <= f.l2_norm() * (1.0 + 1e-12));
        }
    }
}
