use std::f64::consts::PI;

use mhd25_core::grid::*;
use mhd25_core::initial::{random_band_field, rng_from_seed, white_noise};
use mhd25_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn unit() -> Grid {
    Grid::new(128, 2.0 * PI).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn grid_validation() {
    assert!(matches!(Grid::new(8, 1.0), Err(Error::InvalidGridSize(8))));
    assert!(Grid::new(48, 1.0).is_err());
    assert!(Grid::new(16, 0.0).is_err());
    assert!(Grid::new(16, f64::INFINITY).is_err());
    let g = Grid::new(64, 16.0 * PI).unwrap();
    assert!((g.k_min() - 0.125).abs() < 1e-15);
    assert!((g.k_max() - 4.0).abs() < 1e-15);
}

#[test]
fn lattice_is_symmetric() {
    let g = Grid::new(32, 3.0).unwrap();
    for idx in 0..g.len() {
        let j = g.conjugate_index(idx);
        assert_eq!(g.conjugate_index(j), idx);
        match (g.wavevector(idx), g.wavevector(j)) {
            (Some([a, b]), Some([c, d])) => assert!(a == -c && b == -d),
            (None, None) => {}
            _ => panic!("nyquist bins must pair up"),
        }
    }
}

#[test]
fn constant_has_only_zero_mode() {
    let g = unit();
    let f = SpectralField::from_values(&g, vec![2.75; g.len()]).unwrap();
    assert!((f.coefficients()[0] - Complex64::new(2.75, 0.0)).norm() < 1e-14);
    assert!(f.coefficients()[1..].iter().all(|c| c.norm() < 1e-14));
    assert_eq!(f.mean(), 2.75);
}

#[test]
fn cosine_has_two_half_amplitude_modes() {
    let g = unit();
    let f = cosine_mode(&g, 1, 0, 1.0, 0.0);
    for (idx, c) in f.coefficients().iter().enumerate() {
        match g.integer_mode(idx) {
            Some([1, 0]) | Some([-1, 0]) => assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-14),
            _ => assert!(c.norm() < 1e-14),
        }
    }
}

#[test]
fn round_trip_and_parseval_over_seeds() {
    let g = unit();
    for seed in 0..100 {
        let f = white_noise(&g, &mut rng_from_seed(seed));
        let back = g.inverse(&g.forward(f.values()).unwrap()).unwrap();
        assert!(max_diff(&back, f.values()) <= 1e-12);
        let phys: f64 = f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
        let spec: f64 = f.coefficients().iter().map(|c| c.norm_sqr()).sum();
        assert!((phys - spec).abs() <= 1e-12 * phys);
        assert!((f.l2_norm() - phys.sqrt()).abs() <= 1e-12 * phys.sqrt());
    }
}

#[test]
fn batched_transforms_match_single() {
    let g = Grid::new(32, 5.0).unwrap();
    let fields: Vec<SpectralField> = (0..5).map(|s| white_noise(&g, &mut rng_from_seed(s))).collect();
    let values: Vec<&[f64]> = fields.iter().map(|f| f.values()).collect();
    let spectra = g.forward_many(&values).unwrap();
    for (f, c) in fields.iter().zip(&spectra) {
        let single = g.forward(f.values()).unwrap();
        assert!(single.iter().zip(c).all(|(a, b)| (a - b).norm() < 1e-14));
    }
    let refs: Vec<&[Complex64]> = spectra.iter().map(|c| c.as_slice()).collect();
    let back = g.inverse_many(&refs).unwrap();
    for (f, v) in fields.iter().zip(&back) {
        assert!(max_diff(f.values(), v) < 1e-12);
    }
}

#[test]
fn transform_dimension_mismatch() {
    let g = Grid::new(16, 1.0).unwrap();
    assert!(matches!(g.forward(&[0.0; 10]), Err(Error::DimensionMismatch { .. })));
    assert!(SpectralField::from_values(&g, vec![0.0; 17]).is_err());
    let h = Grid::new(32, 1.0).unwrap();
    assert!(SpectralField::zeros(&g).axpby(1.0, &SpectralField::zeros(&h), 1.0).is_err());
}

#[test]
fn derivative_of_sine() {
    let g = unit();
    let k = g.k_min();
    let f = SpectralField::from_fn(&g, |x, _| (k * x).sin());
    let [d1, d2] = gradient(&f);
    let want = SpectralField::from_fn(&g, |x, _| k * (k * x).cos());
    assert!(max_diff(d1.values(), want.values()) <= 1e-12);
    assert!(d2.max_abs() <= 1e-12);
}

#[test]
fn laplacian_of_constant_is_zero() {
    let g = unit();
    assert_eq!(laplacian(&SpectralField::constant(&g, 3.0)).max_abs(), 0.0);
}

#[test]
fn lambda_of_cosine() {
    let g = Grid::new(64, 10.0).unwrap();
    let f = cosine_mode(&g, 1, 0, 1.0, 0.0);
    let l = fractional_lambda(&f, 1.0).unwrap();
    assert!(max_diff(l.values(), f.scale(g.k_min()).values()) <= 1e-12);
    let h = fractional_lambda(&f, -0.5).unwrap();
    assert!(max_diff(h.values(), f.scale(g.k_min().powf(-0.5)).values()) <= 1e-12);
}

#[test]
fn lambda_errors() {
    let g = unit();
    let f = cosine_mode(&g, 1, 2, 1.0, 0.0);
    assert!(matches!(fractional_lambda(&f, -1.0), Err(Error::FractionalPowerOutOfRange(_))));
    assert!(fractional_lambda(&f, 1.5).is_err());
    let shifted = f.map(|v| v + 1.0);
    assert!(matches!(fractional_lambda(&shifted, -0.5), Err(Error::NonzeroMeanNegativePower { .. })));
    assert!(fractional_lambda(&shifted, 0.5).is_ok());
}

#[test]
fn div_grad_is_laplacian() {
    let g = unit();
    for seed in 0..10 {
        let f = random_band_field(&g, &mut rng_from_seed(seed), 0.0, 40.0, 0.0);
        let a = divergence(&gradient(&f)).unwrap();
        let b = laplacian(&f);
        let scale = b.max_abs();
        assert!(max_diff(a.values(), b.values()) <= 1e-12 * scale);
    }
}

#[test]
fn dealias_examples() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let low = cosine_mode(&g, 3, -5, 1.0, 0.2);
    assert!(max_diff(dealias(&low).values(), low.values()) < 1e-14);
    let high = cosine_mode(&g, 25, 0, 1.0, 0.2);
    assert!(dealias(&high).max_abs() < 1e-12);
    let f = white_noise(&g, &mut rng_from_seed(3));
    let once = dealias(&f);
    assert_eq!(dealias(&once).coefficients(), once.coefficients());
    for (idx, c) in once.coefficients().iter().enumerate() {
        if let Some([m1, m2]) = g.integer_mode(idx) {
            let keep = (m1.abs().max(m2.abs()) as f64) <= 2.0 / 3.0 * 32.0;
            assert_eq!(keep, g.dealias_keeps(idx));
            if !keep {
                assert_eq!(*c, Complex64::new(0.0, 0.0));
            }
        }
    }
}

#[test]
fn coefficients_stay_conjugate_symmetric() {
    let g = Grid::new(32, 7.0).unwrap();
    let f = white_noise(&g, &mut rng_from_seed(11));
    assert!(f.conjugate_symmetry_defect() < 1e-15);
    let c: Vec<Complex64> = (0..g.len()).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
    let h = SpectralField::from_coefficients(&g, c).unwrap();
    assert!(h.conjugate_symmetry_defect() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operators_commute_with_cell_shifts(seed in 0u64..10_000, s1 in 0usize..32, s2 in 0usize..32) {
        let g = Grid::new(32, 6.0).unwrap();
        let f = white_noise(&g, &mut rng_from_seed(seed));
        let sf = f.shifted(s1, s2);
        let checks: [(SpectralField, SpectralField); 4] = [
            (gradient(&sf)[0].clone(), gradient(&f)[0].shifted(s1, s2)),
            (laplacian(&sf), laplacian(&f).shifted(s1, s2)),
            (dealias(&sf), dealias(&f).shifted(s1, s2)),
            (fractional_lambda(&sf, 0.5).unwrap(), fractional_lambda(&f, 0.5).unwrap().shifted(s1, s2)),
        ];
        for (a, b) in &checks {
            prop_assert!(max_diff(a.values(), b.values()) <= 1e-11 * (1.0 + b.max_abs()));
        }
    }

    #[test]
    fn round_trip_any_length(e in 4u32..8, l in 0.5f64..500.0, seed in 0u64..1000) {
        let g = Grid::new(1 << e, l).unwrap();
        let f = white_noise(&g, &mut rng_from_seed(seed));
        let back = g.inverse(&g.forward(f.values()).unwrap()).unwrap();
        prop_assert!(max_diff(&back, f.values()) <= 1e-12);
    }
}
