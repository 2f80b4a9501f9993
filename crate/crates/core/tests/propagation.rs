use ndarray::Array2;
use num_complex::Complex;
use oamsim_core::optics::{apply_phase_layer, asm_propagate, band_limit, inner_product, Fft2, Field, GridSpec, PhaseLayer};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WAVELENGTH: f64 = 1550e-9;

fn gaussian(grid: GridSpec<f64>, w0: f64) -> Field<f64> {
    Field::from_fn(grid, |x, y| Complex::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0))
}

/// 1/e² intensity radius from the second moment: w = 2·√⟨x²⟩.
fn second_moment_width(f: &Field<f64>) -> f64 {
    let g = f.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for ((r, _), a) in f.amplitudes().indexed_iter() {
        let x = g.coordinate(r);
        num += x * x * a.norm_sqr();
        den += a.norm_sqr();
    }
    2.0 * (num / den).sqrt()
}

#[test]
fn gaussian_beam_width_follows_analytic_law() {
    let grid = GridSpec::new(512, 20e-6, WAVELENGTH).unwrap();
    let w0 = 0.5e-3;
    let zr = std::f64::consts::PI * w0 * w0 / WAVELENGTH;
    let input = gaussian(grid, w0);
    assert!((second_moment_width(&input) / w0 - 1.0).abs() < 1e-3);
    for factor in [0.5, 1.0, 2.0] {
        let z = factor * zr;
        let out = asm_propagate(&input, z).unwrap();
        let expected = w0 * (1.0 + factor * factor).sqrt();
        let got = second_moment_width(&out);
        assert!((got / expected - 1.0).abs() < 5e-3, "z = {factor} zR: width {got:e}, expected {expected:e}");
        assert!((out.power() / input.power() - 1.0).abs() < 1e-9);
    }
}

fn band_limited(grid: GridSpec<f64>, dz: f64, seed: u64) -> Field<f64> {
    let n = grid.n();
    let limit = 0.9 * band_limit(&grid, dz);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            if grid.frequency(r).abs() < limit && grid.frequency(c).abs() < limit {
                spec[r * n + c] = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
    Fft2::new(n).inverse(&mut spec);
    Field::from_array(grid, Array2::from_shape_vec((n, n), spec).unwrap()).unwrap()
}

#[test]
fn phase_layer_examples() {
    let grid = GridSpec::new(32, 10e-6, WAVELENGTH).unwrap();
    let f = band_limited(grid, 0.01, 1);
    assert_eq!(apply_phase_layer(&f, &PhaseLayer::zeros(grid)).unwrap(), f);
    let neg = apply_phase_layer(&f, &PhaseLayer::uniform(grid, std::f64::consts::PI)).unwrap();
    assert!(neg.max_abs_diff(&f.scaled(Complex::new(-1.0, 0.0))).unwrap() <= 1e-12 * f.max_abs());
    let other = GridSpec::new(32, 11e-6, WAVELENGTH).unwrap();
    let err = apply_phase_layer(&f, &PhaseLayer::zeros(other)).unwrap_err().to_string();
    assert!(err.contains("pitch 1.0000e-5") && err.contains("pitch 1.1000e-5"), "{err}");
}

#[test]
fn inner_product_examples() {
    let grid = GridSpec::new(32, 10e-6, WAVELENGTH).unwrap();
    let f = band_limited(grid, 0.01, 2);
    let self_ip = inner_product(&f, &f).unwrap();
    assert!(self_ip.im.abs() < 1e-15 * self_ip.re && (self_ip.re - f.power()).abs() < 1e-12 * f.power());
    assert_eq!(inner_product(&Field::zeros(grid), &f).unwrap(), Complex::new(0.0, 0.0));
    let other = GridSpec::new(64, 10e-6, WAVELENGTH).unwrap();
    assert!(inner_product(&Field::zeros(other), &f).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_is_conserved(seed in 0u64..1000, dz in 1e-3f64..0.1) {
        let grid = GridSpec::new(64, 12.5e-6, WAVELENGTH).unwrap();
        let f = band_limited(grid, dz, seed);
        let out = asm_propagate(&f, dz).unwrap();
        prop_assert!((out.power() / f.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn propagation_is_linear(seed in 0u64..1000, dz in 0.0f64..0.1, ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
        let grid = GridSpec::new(32, 12.5e-6, WAVELENGTH).unwrap();
        let f = band_limited(grid, 0.05, seed);
        let g = band_limited(grid, 0.05, seed + 1);
        let alpha = Complex::new(ar, ai);
        let beta = Complex::new(0.5, -1.0);
        let lhs = asm_propagate(&Field::superpose(&[(alpha, &f), (beta, &g)]).unwrap(), dz).unwrap();
        let rhs = Field::superpose(&[
            (alpha, &asm_propagate(&f, dz).unwrap()),
            (beta, &asm_propagate(&g, dz).unwrap()),
        ]).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * rhs.max_abs().max(1e-300));
    }

    #[test]
    fn propagation_composes(seed in 0u64..1000, z1 in 1e-3f64..0.04, z2 in 1e-3f64..0.04) {
        let grid = GridSpec::new(32, 12.5e-6, WAVELENGTH).unwrap();
        let f = band_limited(grid, z1 + z2, seed);
        let two = asm_propagate(&asm_propagate(&f, z1).unwrap(), z2).unwrap();
        let one = asm_propagate(&f, z1 + z2).unwrap();
        prop_assert!(two.max_abs_diff(&one).unwrap() <= 1e-9 * one.max_abs());
    }

    #[test]
    fn random_phase_layer_conserves_power(seed in 0u64..1000) {
        let grid = GridSpec::new(32, 12.5e-6, WAVELENGTH).unwrap();
        let f = band_limited(grid, 0.01, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = PhaseLayer::random(grid, 10.0, &mut rng);
        let out = apply_phase_layer(&f, &layer).unwrap();
        prop_assert!((out.power() - f.power()).abs() <= 1e-12 * f.power());
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(seed in 0u64..1000) {
        let grid = GridSpec::new(32, 12.5e-6, WAVELENGTH).unwrap();
        let f = band_limited(grid, 0.01, seed);
        let g = band_limited(grid, 0.02, seed + 7);
        let ab = inner_product(&f, &g).unwrap();
        let ba = inner_product(&g, &f).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-14 * ab.norm().max(1e-300));
    }
}
