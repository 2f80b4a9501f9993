use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::stack::{PhaseStack, StackModel};
use super::target::OamGateTarget;
use crate::error::{Error, Result};
use crate::modes::{ModeBasis, Provenance};
use crate::optics::{Field, GridSpec};
use crate::Real;

/// Per-pixel discrepancy measure between output and target fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// mean of |g − ĝ|²
    #[default]
    Mse,
    /// mean of |g − ĝ|
    Mae,
}

#[derive(Clone, Debug)]
pub struct TrainingPair<T> {
    pub input: Field<T>,
    pub target: Field<T>,
    pub weight: T,
}

#[derive(Clone, Debug)]
pub struct TrainingSet<T> {
    pairs: Vec<TrainingPair<T>>,
}

impl<T: Real> TrainingSet<T> {
    /// Every field must have unit power and all grids must agree.
    pub fn new(pairs: Vec<TrainingPair<T>>) -> Result<Self> {
        let tol = T::tol(1e-6);
        if let Some(first) = pairs.first() {
            let grid = *first.input.grid();
            for (i, p) in pairs.iter().enumerate() {
                grid.ensure_same(p.input.grid())?;
                grid.ensure_same(p.target.grid())?;
                if !(p.weight > T::zero() && p.weight.is_finite()) {
                    return Err(Error::InvalidTrainingSet(format!("pair {i} has weight {}", p.weight)));
                }
                for (what, f) in [("input", &p.input), ("target", &p.target)] {
                    if (f.power() - T::one()).abs() > tol {
                        return Err(Error::InvalidTrainingSet(format!(
                            "pair {i} {what} has power {}, expected 1",
                            f.power()
                        )));
                    }
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[TrainingPair<T>] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn check_against(&self, grid: &GridSpec<T>) -> Result<()> {
        let first = self.pairs.first().ok_or(Error::EmptyTrainingSet)?;
        grid.ensure_same(first.input.grid())
    }
}

/// Which input states enter a gate training set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelection {
    /// The four basis modes only.
    BasisOnly,
    /// Basis modes plus `(m_j + m_k)/√2` and `(m_j + i·m_k)/√2` for every
    /// unordered pair, which fixes the relative phases between channels.
    #[default]
    WithSuperpositions,
}

/// Maps each input mode `m_j` to `Σ_k U[k,j]·ref_k` and, optionally, the
/// pairwise superpositions to the matching superposed targets.
pub fn build_gate_training_set<T: Real>(
    target: &OamGateTarget<T>,
    input_basis: &ModeBasis<T>,
    reference_basis: &ModeBasis<T>,
    selection: PairSelection,
) -> Result<TrainingSet<T>> {
    if input_basis.provenance() != Provenance::InputPlane {
        return Err(Error::InvalidTrainingSet("input basis must be an input-plane basis".into()));
    }
    if reference_basis.provenance() != Provenance::PropagatedReference {
        return Err(Error::InvalidTrainingSet("reference basis must be a propagated reference".into()));
    }
    input_basis.grid().ensure_same(reference_basis.grid())?;
    // re-validate in case a caller hands in a matrix that bypassed construction checks
    let target = OamGateTarget::custom(target.name(), target.unitary().clone())?;
    let u = target.unitary();

    let targets: Vec<Field<T>> = (0..4)
        .map(|j| {
            let terms: Vec<_> = (0..4).map(|k| (u[(k, j)], reference_basis.mode(k))).collect();
            Field::superpose(&terms)
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    let mut push = |input: Field<T>, target: Field<T>| -> Result<()> {
        pairs.push(TrainingPair { input: input.normalized()?, target: target.normalized()?, weight: T::one() });
        Ok(())
    };
    for j in 0..4 {
        push(input_basis.mode(j).clone(), targets[j].clone())?;
    }
    if selection == PairSelection::WithSuperpositions {
        let h = T::FRAC_1_SQRT_2();
        let real = Complex::new(h, T::zero());
        let imag = Complex::new(T::zero(), h);
        for j in 0..4 {
            for k in (j + 1)..4 {
                for second in [real, imag] {
                    let input = Field::superpose(&[(real, input_basis.mode(j)), (second, input_basis.mode(k))])?;
                    let out = Field::superpose(&[(real, &targets[j]), (second, &targets[k])])?;
                    push(input, out)?;
                }
            }
        }
    }
    TrainingSet::new(pairs)
}

struct PairEvaluation<T> {
    loss: T,
    grads: Vec<Vec<T>>,
}

fn evaluate_pair<T: Real>(
    model: &StackModel<T>,
    pair: &TrainingPair<T>,
    kind: LossKind,
    scale: T,
    with_gradient: bool,
) -> PairEvaluation<T> {
    let trace = model.forward_trace(&pair.input);
    let residual: Vec<Complex<T>> =
        trace.output.iter().zip(pair.target.as_slice()).map(|(g, t)| g - t).collect();
    let c = scale * pair.weight;
    let (loss, seed) = match kind {
        LossKind::Mse => {
            let loss = c * residual.iter().map(|r| r.norm_sqr()).sum::<T>();
            let two_c = c + c;
            (loss, residual.iter().map(|r| r * two_c).collect::<Vec<_>>())
        }
        LossKind::Mae => {
            let loss = c * residual.iter().map(|r| r.norm()).sum::<T>();
            let seed = residual
                .iter()
                .map(|r| {
                    let m = r.norm();
                    if m > T::zero() {
                        r * (c / m)
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                })
                .collect();
            (loss, seed)
        }
    };
    let grads = if with_gradient { model.backward(&trace, seed) } else { Vec::new() };
    PairEvaluation { loss, grads }
}

fn evaluate<T: Real>(
    model: &StackModel<T>,
    set: &TrainingSet<T>,
    kind: LossKind,
    with_gradient: bool,
) -> (T, Vec<Vec<T>>) {
    let n = model.grid().n();
    let scale = T::one() / T::lit((set.len() * n * n) as f64);
    let per_pair: Vec<PairEvaluation<T>> =
        set.pairs.par_iter().map(|p| evaluate_pair(model, p, kind, scale, with_gradient)).collect();
    // summed in pair order so results do not depend on thread scheduling
    let mut loss = T::zero();
    let mut total: Vec<Vec<T>> = Vec::new();
    for ev in per_pair {
        loss += ev.loss;
        if total.is_empty() {
            total = ev.grads;
        } else {
            for (acc, g) in total.iter_mut().zip(&ev.grads) {
                acc.iter_mut().zip(g).for_each(|(a, b)| *a += *b);
            }
        }
    }
    (loss, total)
}

/// `(1/P) Σ_p w_p · (1/n²) Σ_xy D(g_p − ĝ_p)` with `D = |·|²` or `|·|`.
pub fn loss<T: Real>(stack: &PhaseStack<T>, set: &TrainingSet<T>, kind: LossKind) -> Result<T> {
    set.check_against(stack.grid())?;
    Ok(evaluate(&stack.model()?, set, kind, false).0)
}

/// Exact `∂loss/∂θ` for every layer, one `n×n` array per layer.
pub fn adjoint_gradient<T: Real>(
    stack: &PhaseStack<T>,
    set: &TrainingSet<T>,
    kind: LossKind,
) -> Result<Vec<Array2<T>>> {
    set.check_against(stack.grid())?;
    let n = stack.grid().n();
    let (_, grads) = evaluate(&stack.model()?, set, kind, true);
    let grads = if grads.is_empty() { vec![vec![T::zero(); n * n]; stack.num_layers()] } else { grads };
    grads
        .into_iter()
        .map(|g| Array2::from_shape_vec((n, n), g).map_err(|e| Error::InvalidState(e.to_string())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub adam: AdamConfig,
    pub loss: LossKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { iterations: 1000, adam: AdamConfig::default(), loss: LossKind::Mse }
    }
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome<T> {
    pub stack: PhaseStack<T>,
    /// Loss before every update, followed by the loss of the returned stack.
    pub history: Vec<T>,
}

/// Adam over all layer phases jointly. Deterministic for a given starting
/// stack and configuration.
pub fn train<T: Real>(
    stack: &PhaseStack<T>,
    set: &TrainingSet<T>,
    config: &TrainConfig,
) -> Result<TrainingOutcome<T>> {
    if config.iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be >= 1".into()));
    }
    set.check_against(stack.grid())?;
    let n2 = stack.grid().n() * stack.grid().n();
    let mut stack = stack.clone();
    let mut model = stack.model()?;
    let mut adam = Adam::new(stack.num_layers() * n2, config.adam);
    let mut params: Vec<T> = stack.layers().iter().flat_map(|l| l.phases_slice().iter().copied()).collect();
    let mut history = Vec::with_capacity(config.iterations + 1);

    for iteration in 0..config.iterations {
        let (loss, grads) = evaluate(&model, set, config.loss, true);
        if !loss.is_finite() {
            return Err(Error::Diverged { iteration });
        }
        history.push(loss);
        let flat: Vec<T> = grads.into_iter().flatten().collect();
        adam.step(&mut params, &flat);
        for (layer, chunk) in stack.layers_mut().iter_mut().zip(params.chunks(n2)) {
            layer.phases_mut_slice().copy_from_slice(chunk);
        }
        model.refresh(&stack);
    }
    let (final_loss, _) = evaluate(&model, set, config.loss, false);
    if !final_loss.is_finite() {
        return Err(Error::Diverged { iteration: config.iterations });
    }
    history.push(final_loss);
    Ok(TrainingOutcome { stack, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::forward;
    use crate::dnn::GateKind;
    use crate::modes::make_reference_basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> GridSpec<f64> {
        GridSpec::new(16, 10e-6, 1550e-9).unwrap()
    }

    fn random_field(grid: GridSpec<f64>, rng: &mut ChaCha8Rng) -> Field<f64> {
        let n = grid.n();
        let data = Array2::from_shape_fn((n, n), |_| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        Field::from_array(grid, data).unwrap().normalized().unwrap()
    }

    fn random_set(grid: GridSpec<f64>, pairs: usize, seed: u64) -> TrainingSet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..pairs)
            .map(|_| TrainingPair {
                input: random_field(grid, &mut rng),
                target: random_field(grid, &mut rng),
                weight: rng.random_range(0.5..2.0),
            })
            .collect();
        TrainingSet::new(pairs).unwrap()
    }

    fn perturbed(stack: &PhaseStack<f64>, layer: usize, idx: usize, delta: f64) -> PhaseStack<f64> {
        let mut s = stack.clone();
        s.layers_mut()[layer].phases_mut_slice()[idx] += delta;
        s
    }

    #[test]
    fn gradient_matches_central_differences() {
        let grid = small_grid();
        let stack = PhaseStack::random(grid, 2, 1e-3, 3).unwrap();
        let set = random_set(grid, 3, 4);
        let grads = adjoint_gradient(&stack, &set, LossKind::Mse).unwrap();
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let layer = rng.random_range(0..2);
            let idx = rng.random_range(0..256);
            let up = loss(&perturbed(&stack, layer, idx, h), &set, LossKind::Mse).unwrap();
            let down = loss(&perturbed(&stack, layer, idx, -h), &set, LossKind::Mse).unwrap();
            let fd = (up - down) / (2.0 * h);
            let ad = grads[layer].as_slice().unwrap()[idx];
            assert!((fd - ad).abs() <= 1e-5 * fd.abs().max(ad.abs()), "layer {layer} px {idx}: fd {fd:e} vs adjoint {ad:e}");
        }
    }

    #[test]
    fn consistent_targets_give_zero_loss_and_gradient() {
        let grid = small_grid();
        let stack = PhaseStack::random(grid, 2, 1e-3, 1).unwrap();
        let noise = random_set(grid, 2, 2);
        let pairs = noise
            .pairs()
            .iter()
            .map(|p| TrainingPair { input: p.input.clone(), target: forward(&stack, &p.input).unwrap(), weight: 1.0 })
            .collect();
        let set = TrainingSet::new(pairs).unwrap();
        assert!(loss(&stack, &set, LossKind::Mse).unwrap() <= 1e-24);
        for g in adjoint_gradient(&stack, &set, LossKind::Mse).unwrap() {
            assert!(g.iter().all(|v| v.abs() <= 1e-12));
        }
        let config = TrainConfig { iterations: 5, ..TrainConfig::default() };
        let out = train(&stack, &set, &config).unwrap();
        assert_eq!(out.history.len(), 6);
        assert!(out.history.iter().all(|&l| l <= 1e-24));
        for (a, b) in out.stack.layers().iter().zip(stack.layers()) {
            assert!(a.phases().iter().zip(b.phases()).all(|(x, y)| x == y));
        }
    }

    #[test]
    fn negated_target_loss() {
        let grid = small_grid();
        let stack = PhaseStack::random(grid, 2, 1e-3, 1).unwrap();
        let input = random_set(grid, 1, 5).pairs()[0].input.clone();
        let out = forward(&stack, &input).unwrap();
        let neg = out.scaled(Complex::new(-1.0, 0.0));
        let set = TrainingSet::new(vec![TrainingPair { input, target: neg, weight: 1.0 }]).unwrap();
        let sum: f64 = out.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        let expected = 4.0 / 256.0 * sum;
        let got = loss(&stack, &set, LossKind::Mse).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn loss_ignores_pair_order() {
        let grid = small_grid();
        let stack = PhaseStack::random(grid, 2, 1e-3, 1).unwrap();
        let set = random_set(grid, 4, 6);
        let mut rev = set.pairs().to_vec();
        rev.reverse();
        let rev = TrainingSet::new(rev).unwrap();
        for kind in [LossKind::Mse, LossKind::Mae] {
            let a = loss(&stack, &set, kind).unwrap();
            let b = loss(&stack, &rev, kind).unwrap();
            assert!((a - b).abs() <= 1e-14 * a);
        }
    }

    #[test]
    fn gradient_is_linear_in_weight() {
        let grid = small_grid();
        let stack = PhaseStack::random(grid, 2, 1e-3, 8).unwrap();
        let base = random_set(grid, 1, 7).pairs()[0].clone();
        let one = TrainingSet::new(vec![TrainingPair { weight: 1.0, ..base.clone() }]).unwrap();
        let two = TrainingSet::new(vec![TrainingPair { weight: 2.0, ..base }]).unwrap();
        let g1 = adjoint_gradient(&stack, &one, LossKind::Mse).unwrap();
        let g2 = adjoint_gradient(&stack, &two, LossKind::Mse).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            for (x, y) in a.iter().zip(b) {
                assert!((2.0 * x - y).abs() <= 1e-14 * y.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn mae_gradient_matches_differences() {
        let grid = small_grid();
        let stack = PhaseStack::random(grid, 2, 1e-3, 13).unwrap();
        let set = random_set(grid, 2, 14);
        let grads = adjoint_gradient(&stack, &set, LossKind::Mae).unwrap();
        let h = 1e-5;
        for (layer, idx) in [(0, 17), (1, 100), (1, 200)] {
            let up = loss(&perturbed(&stack, layer, idx, h), &set, LossKind::Mae).unwrap();
            let down = loss(&perturbed(&stack, layer, idx, -h), &set, LossKind::Mae).unwrap();
            let fd = (up - down) / (2.0 * h);
            let ad = grads[layer].as_slice().unwrap()[idx];
            assert!((fd - ad).abs() <= 1e-5 * fd.abs().max(ad.abs()), "fd {fd:e} vs {ad:e}");
        }
    }

    #[test]
    fn empty_and_invalid_sets_are_rejected() {
        let grid = small_grid();
        let stack = PhaseStack::zeros(grid, 1, 1e-3).unwrap();
        let empty = TrainingSet::new(Vec::new()).unwrap();
        assert!(matches!(loss(&stack, &empty, LossKind::Mse), Err(Error::EmptyTrainingSet)));
        let f = random_set(grid, 1, 1).pairs()[0].clone();
        let weak = TrainingPair { target: f.target.scaled(Complex::new(0.5, 0.0)), ..f.clone() };
        assert!(TrainingSet::new(vec![weak]).is_err());
        let zero_weight = TrainingPair { weight: 0.0, ..f };
        assert!(TrainingSet::new(vec![zero_weight]).is_err());
        let set = random_set(grid, 1, 1);
        let config = TrainConfig { iterations: 0, ..TrainConfig::default() };
        assert!(matches!(train(&stack, &set, &config), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn training_descends_and_is_deterministic() {
        let grid = small_grid();
        let set = random_set(grid, 2, 21);
        let config = TrainConfig { iterations: 30, ..TrainConfig::default() };
        let stack = PhaseStack::random(grid, 2, 1e-3, 22).unwrap();
        let a = train(&stack, &set, &config).unwrap();
        let b = train(&stack, &set, &config).unwrap();
        assert_eq!(a.history, b.history);
        assert!(a.history.last().unwrap() < &a.history[0]);
    }

    fn gate_bases() -> (ModeBasis<f64>, ModeBasis<f64>) {
        let grid = GridSpec::new(64, 12.5e-6, 1550e-9).unwrap();
        let input = ModeBasis::input(grid, 0.06e-3).unwrap();
        let reference = make_reference_basis(&input, 0.01).unwrap();
        (input, reference)
    }

    fn close(a: &Field<f64>, b: &Field<f64>) -> bool {
        a.max_abs_diff(b).unwrap() <= 1e-12 * b.max_abs()
    }

    #[test]
    fn gate_training_sets_map_basis_modes() {
        let (input, reference) = gate_bases();
        let tof = build_gate_training_set(
            &OamGateTarget::new(GateKind::ToffoliCnot),
            &input,
            &reference,
            PairSelection::WithSuperpositions,
        )
        .unwrap();
        assert_eq!(tof.len(), 16);
        assert!(close(&tof.pairs()[3].input, input.mode(3)));
        assert!(close(&tof.pairs()[3].target, reference.mode(2)));

        let ccz =
            build_gate_training_set(&OamGateTarget::new(GateKind::Ccz), &input, &reference, PairSelection::BasisOnly)
                .unwrap();
        assert_eq!(ccz.len(), 4);
        for k in 0..3 {
            assert!(close(&ccz.pairs()[k].target, reference.mode(k)));
        }
        assert!(close(&ccz.pairs()[3].target, &reference.mode(3).scaled(Complex::new(-1.0, 0.0))));

        let fredkin = build_gate_training_set(
            &OamGateTarget::new(GateKind::FredkinSwap),
            &input,
            &reference,
            PairSelection::BasisOnly,
        )
        .unwrap();
        assert!(close(&fredkin.pairs()[1].target, reference.mode(2)));
        assert!(close(&fredkin.pairs()[2].target, reference.mode(1)));
    }

    #[test]
    fn gate_training_set_checks_basis_roles() {
        let (input, reference) = gate_bases();
        let target = OamGateTarget::new(GateKind::Ccz);
        assert!(build_gate_training_set(&target, &reference, &reference, PairSelection::BasisOnly).is_err());
        assert!(build_gate_training_set(&target, &input, &input, PairSelection::BasisOnly).is_err());
    }
}
