use nalgebra::DVector;
use num_complex::Complex;
use oamsim_core::dnn::{GateKind, PhaseStack};
use oamsim_core::gate::{
    apply_gate, compose_gate, extract_transfer_matrix, truth_table, v_path_transfer, EncodedState, GateOperator, Polarization,
    TransferMatrix, VPath,
};
use oamsim_core::linalg::{identity, max_abs_diff};
use oamsim_core::modes::{make_reference_basis, ModeBasis};
use oamsim_core::optics::GridSpec;
use oamsim_core::tomography::random_unitary;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const WAIST: f64 = 0.16e-3;
const SPACING: f64 = 0.01;

fn bases() -> (ModeBasis<f64>, ModeBasis<f64>) {
    let input = ModeBasis::input(GridSpec::default(), WAIST).unwrap();
    let reference = make_reference_basis(&input, 5.0 * SPACING).unwrap();
    (input, reference)
}

#[test]
fn zero_phase_stack_reads_out_as_identity() {
    let (input, reference) = bases();
    let stack = PhaseStack::zeros(GridSpec::default(), 4, SPACING).unwrap();
    let t = extract_transfer_matrix(&stack, &input, &reference).unwrap();
    assert!(max_abs_diff(t.entries(), &identity(4)) < 1e-6);
    assert!(t.unitarity_defect() < 1e-6);
    assert_eq!(t.path(), Polarization::H);
}

#[test]
fn propagated_v_path_matches_ideal() {
    let (input, reference) = bases();
    let t = v_path_transfer(VPath::Propagated, &input, &reference, 5.0 * SPACING).unwrap();
    assert_eq!(t.path(), Polarization::V);
    assert!(max_abs_diff(t.entries(), &identity(4)) < 1e-4);
    let ideal = v_path_transfer(VPath::Ideal, &input, &reference, 5.0 * SPACING).unwrap();
    assert_eq!(ideal, TransferMatrix::identity(Polarization::V));
}

#[test]
fn ideal_oam_cnot_composes_to_toffoli() {
    let t_h = TransferMatrix::<f64>::new(GateKind::ToffoliCnot.unitary(), Polarization::H).unwrap();
    let g = compose_gate(&t_h, &TransferMatrix::identity(Polarization::V)).unwrap();
    assert_eq!(g, GateOperator::ideal(GateKind::ToffoliCnot));
    let table = truth_table(&g, &g).unwrap();
    assert_eq!(table.probs[(6, 7)], 1.0);
    assert_eq!(table.probs[(7, 6)], 1.0);
    for j in 0..6 {
        assert_eq!(table.probs[(j, j)], 1.0);
    }
}

fn random_block(seed: u64, path: Polarization) -> TransferMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TransferMatrix::new(random_unitary(4, &mut rng), path).unwrap()
}

fn random_state(seed: u64) -> DVector<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    oamsim_core::tomography::random_pure_state(8, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarization_is_never_mixed(a in 0u64..10_000, b in 0u64..10_000) {
        let g = compose_gate(&random_block(a, Polarization::H), &random_block(b, Polarization::V)).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                if (r < 4) != (c < 4) {
                    prop_assert_eq!(g.matrix()[(r, c)], Complex::new(0.0, 0.0));
                }
            }
        }
        prop_assert!(g.unitarity_defect() < 1e-12);
    }

    #[test]
    fn gate_action_is_linear(a in 0u64..10_000, s1 in 0u64..10_000, s2 in 0u64..10_000, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let g = compose_gate(&random_block(a, Polarization::H), &random_block(a + 1, Polarization::V)).unwrap();
        let psi = random_state(s1);
        let phi = random_state(s2);
        let alpha = Complex::new(re, im);
        let n = (alpha.norm_sqr() + 1.0).sqrt();
        let (alpha, beta) = (alpha / n, Complex::new(1.0 / n, 0.0));
        let combo = &psi * alpha + &phi * beta;
        let norm = combo.norm();
        prop_assume!(norm > 1e-3);
        let lhs = apply_gate(&g, &EncodedState::new(&combo / Complex::new(norm, 0.0)).unwrap()).unwrap();
        let out_psi = apply_gate(&g, &EncodedState::new(psi).unwrap()).unwrap().state;
        let out_phi = apply_gate(&g, &EncodedState::new(phi).unwrap()).unwrap().state;
        let rhs = (out_psi.amplitudes() * alpha + out_phi.amplitudes() * beta) / Complex::new(norm, 0.0);
        prop_assert!((lhs.state.amplitudes() - rhs).norm() < 1e-12);
    }

    #[test]
    fn truth_table_rows_are_distributions(a in 0u64..10_000) {
        let g = compose_gate(&random_block(a, Polarization::H), &random_block(a + 1, Polarization::V)).unwrap();
        let t = truth_table(&g, &GateOperator::ideal(GateKind::ToffoliCnot)).unwrap();
        for j in 0..8 {
            let row = t.probs.row(j);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        prop_assert!(t.visibility >= 0.0 && t.visibility <= 1.0 + 1e-12);
    }
}
