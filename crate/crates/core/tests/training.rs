use ndarray::Array2;
use num_complex::Complex;
use oamsim_core::dnn::{adjoint_gradient, forward, loss, train, LossKind, PhaseStack, TrainConfig, TrainingPair, TrainingSet};
use oamsim_core::modes::ModeBasis;
use oamsim_core::optics::{Field, GridSpec, PhaseLayer};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid16() -> GridSpec<f64> {
    GridSpec::new(16, 10e-6, 1550e-9).unwrap()
}

fn random_field(grid: GridSpec<f64>, rng: &mut ChaCha8Rng) -> Field<f64> {
    let n = grid.n();
    let data = Array2::from_shape_fn((n, n), |_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    Field::from_array(grid, data).unwrap().normalized().unwrap()
}

fn random_set(grid: GridSpec<f64>, pairs: usize, rng: &mut ChaCha8Rng) -> TrainingSet<f64> {
    let pairs = (0..pairs)
        .map(|_| TrainingPair { input: random_field(grid, rng), target: random_field(grid, rng), weight: rng.random_range(0.5..2.0) })
        .collect();
    TrainingSet::new(pairs).unwrap()
}

fn with_phase(stack: &PhaseStack<f64>, layer: usize, r: usize, c: usize, delta: f64) -> PhaseStack<f64> {
    let mut layers: Vec<PhaseLayer<f64>> = stack.layers().to_vec();
    let mut phases = layers[layer].phases().clone();
    phases[(r, c)] += delta;
    layers[layer] = PhaseLayer::from_array(*stack.grid(), phases).unwrap();
    PhaseStack::new(*stack.grid(), stack.spacing(), layers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn adjoint_matches_finite_differences(seed in 0u64..10_000, spacing in 2e-4f64..5e-3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stack = PhaseStack::random(grid16(), 2, spacing, seed).unwrap();
        let set = random_set(grid16(), 2, &mut rng);
        let grads = adjoint_gradient(&stack, &set, LossKind::Mse).unwrap();
        let h = 1e-5;
        for _ in 0..6 {
            let (l, r, c) = (rng.random_range(0..2), rng.random_range(0..16), rng.random_range(0..16));
            let up = loss(&with_phase(&stack, l, r, c, h), &set, LossKind::Mse).unwrap();
            let down = loss(&with_phase(&stack, l, r, c, -h), &set, LossKind::Mse).unwrap();
            let fd = (up - down) / (2.0 * h);
            let ad = grads[l][(r, c)];
            prop_assert!((fd - ad).abs() <= 1e-5 * fd.abs().max(ad.abs()), "fd {:e} vs adjoint {:e}", fd, ad);
        }
    }
}

#[test]
fn training_descends_for_ten_seeds() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let set = random_set(grid16(), 3, &mut rng);
        let stack = PhaseStack::random(grid16(), 2, 1e-3, seed).unwrap();
        let out = train(&stack, &set, &TrainConfig { iterations: 20, ..TrainConfig::default() }).unwrap();
        assert!(out.history.last().unwrap() < &out.history[0], "seed {seed}: {:?}", out.history);
    }
}

#[test]
fn training_is_bit_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = random_set(grid16(), 2, &mut rng);
    let config = TrainConfig { iterations: 25, ..TrainConfig::default() };
    let a = train(&PhaseStack::random(grid16(), 3, 1e-3, 42).unwrap(), &set, &config).unwrap();
    let b = train(&PhaseStack::random(grid16(), 3, 1e-3, 42).unwrap(), &set, &config).unwrap();
    assert_eq!(a.history.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.history.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.stack, b.stack);
    let c = train(&PhaseStack::random(grid16(), 3, 1e-3, 43).unwrap(), &set, &config).unwrap();
    assert_ne!(a.history, c.history);
}

#[test]
fn mode_power_is_kept_through_training() {
    let grid = GridSpec::new(64, 12.5e-6, 1550e-9).unwrap();
    let basis = ModeBasis::input(grid, 0.06e-3).unwrap();
    let target_basis = oamsim_core::modes::make_reference_basis(&basis, 0.012).unwrap();
    let pairs = (0..4)
        .map(|j| TrainingPair { input: basis.mode(j).clone(), target: target_basis.mode(3 - j).clone(), weight: 1.0 })
        .collect();
    let set = TrainingSet::new(pairs).unwrap();
    let stack = PhaseStack::random(grid, 2, 0.004, 1).unwrap();
    let mut current = stack;
    for _ in 0..3 {
        current = train(&current, &set, &TrainConfig { iterations: 10, ..TrainConfig::default() }).unwrap().stack;
        for m in basis.modes() {
            let p: f64 = forward(&current, m).unwrap().power();
            assert!((p - 1.0).abs() < 1e-9, "power {p}");
        }
    }
}
