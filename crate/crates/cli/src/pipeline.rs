//! Training and characterization stages shared by the subcommands.

use nalgebra::DMatrix;
use num_complex::Complex;
use oamsim_core::dnn::{build_gate_training_set, train, AdamConfig, GateKind, OamGateTarget, TrainConfig};
use oamsim_core::gate::{
    apply_gate, compose_gate, entangled_mappings, evolve_entangled_suite, evolve_suite, extract_transfer_matrix,
    toffoli_probe_mappings, truth_table, v_path_transfer, GateOperator, SuiteResult, TransferMatrix, TruthTable,
    ACCEPTANCE_DEFECT,
};
use oamsim_core::modes::{make_reference_basis, ModeBasis};
use oamsim_core::optics::GridSpec;
use oamsim_core::render;
use oamsim_core::states::parse_product_label;
use oamsim_core::tomography::{
    chi_from_choi, choi_from_unitary, io, monte_carlo_uncertainty, process_fidelity, qpt_mle, qst_mle,
    simulate_dataset, simulate_state_dataset, simulate_truth_table_dataset, state_fidelity, ChiMatrix, ChoiMatrix,
    DensityMatrix, ProbeBasis, QptResult, TomographyDataset,
};
use oamsim_core::PhaseStack64;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutputSet;
use crate::report::{
    real_rows, ComplexMatrixJson, EntangledReport, Literature, ProcessReport, QptReport, ReconstructionReport,
    Report, StateReport, ThresholdCheck, Timings, TrainingReport, TransferReport, TruthTableReport,
    UncertaintyReport, SCHEMA_VERSION,
};

/// A validated config with the mode bases it implies.
pub struct Setup {
    pub config: RunConfig,
    pub kind: GateKind,
    pub grid: GridSpec<f64>,
    pub input: ModeBasis<f64>,
    pub reference: ModeBasis<f64>,
}

impl Setup {
    pub fn new(config: &RunConfig) -> CliResult<Self> {
        config.validate()?;
        let grid = config.grid_spec()?;
        let input = ModeBasis::input(grid, config.modes.waist)?;
        let reference = make_reference_basis(&input, total_path(config))?;
        Ok(Self { config: config.clone(), kind: config.kind()?, grid, input, reference })
    }
}

fn total_path(config: &RunConfig) -> f64 {
    (config.stack.layers + 1) as f64 * config.stack.spacing
}

pub struct Trained {
    pub stack: PhaseStack64,
    pub history: Vec<f64>,
    pub transfer: TransferMatrix<f64>,
}

pub fn train_gate(setup: &Setup) -> CliResult<Trained> {
    let cfg = &setup.config;
    let stack = PhaseStack64::random(setup.grid, cfg.stack.layers, cfg.stack.spacing, cfg.training.seed)?;
    let target = OamGateTarget::new(setup.kind);
    let set = build_gate_training_set(&target, &setup.input, &setup.reference, cfg.pair_selection())?;
    let train_cfg = TrainConfig {
        iterations: cfg.training.iterations,
        adam: AdamConfig { learning_rate: cfg.training.learning_rate, ..AdamConfig::default() },
        loss: cfg.training.loss,
    };
    let outcome = train(&stack, &set, &train_cfg)?;
    let transfer = extract_transfer_matrix(&outcome.stack, &setup.input, &setup.reference)?;
    Ok(Trained { stack: outcome.stack, history: outcome.history, transfer })
}

/// Rejects a stack whose geometry differs from the config.
pub fn check_stack(setup: &Setup, stack: &PhaseStack64) -> CliResult<()> {
    let (g, c) = (stack.grid(), &setup.config);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if g.n() != c.grid.n || !close(g.pitch(), c.grid.pitch) || !close(g.wavelength(), c.grid.wavelength) {
        return Err(CliError::Config(format!("stack is on a {g}, config asks for {}", setup.grid)));
    }
    if stack.num_layers() != c.stack.layers || !close(stack.spacing(), c.stack.spacing) {
        return Err(CliError::Config(format!(
            "stack has {} layers at {:.4e} m spacing, config asks for {} at {:.4e} m",
            stack.num_layers(),
            stack.spacing(),
            c.stack.layers,
            c.stack.spacing
        )));
    }
    Ok(())
}

/// Gate built from the stack's H-path readout and the configured V path,
/// both rescaled to unit efficiency.
pub fn gate_from_transfer(
    setup: &Setup,
    t_h: &TransferMatrix<f64>,
) -> CliResult<(GateOperator<f64>, TransferReport)> {
    let t_v = v_path_transfer(setup.config.v_path, &setup.input, &setup.reference, total_path(&setup.config))?;
    let (h, v) = (t_h.normalized(), t_v.normalized());
    let gate = compose_gate(&h, &v)?;
    let report = TransferReport {
        h_raw: t_h.entries().into(),
        h: h.entries().into(),
        v: v.entries().into(),
        efficiency: t_h.efficiency(),
        captured_power: t_h.captured_power(),
        raw_unitarity_defect: t_h.unitarity_defect(),
    };
    Ok((gate, report))
}

pub fn gate_from_stack(setup: &Setup, stack: &PhaseStack64) -> CliResult<(GateOperator<f64>, TransferReport)> {
    check_stack(setup, stack)?;
    let t_h = extract_transfer_matrix(stack, &setup.input, &setup.reference)?;
    gate_from_transfer(setup, &t_h)
}

pub struct Characterization {
    pub report: Report,
    pub truth: TruthTable<f64>,
    pub choi: ChoiMatrix<f64>,
    pub chi: ChiMatrix<f64>,
    pub chi_ideal: ChiMatrix<f64>,
    pub timings: Timings,
}

fn truth_weights(d: &TomographyDataset) -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |j, k| d.row(j)[k])
}

/// Visibility on sampled truth-table counts, with its Monte Carlo spread.
pub fn visibility_uncertainty(
    gate: &GateOperator<f64>,
    ideal: &GateOperator<f64>,
    mean_total: f64,
    trials: usize,
    seed: u64,
) -> CliResult<UncertaintyReport> {
    let basis = ProbeBasis::<f64>::new();
    let data = simulate_truth_table_dataset(gate, &basis, mean_total, seed)?;
    let metric = |d: &TomographyDataset| Ok(TruthTable::from_weights(&truth_weights(d), ideal)?.visibility);
    let value = metric(&data)?;
    let u = monte_carlo_uncertainty(metric, &data, trials, seed.wrapping_add(1))?;
    Ok(UncertaintyReport::new(mean_total, value, u))
}

fn qpt_report(r: &QptResult<f64>, ideal: &ChiMatrix<f64>) -> (QptReport, ChiMatrix<f64>) {
    let chi = chi_from_choi(&r.choi);
    let f = process_fidelity(&chi, ideal);
    let report = QptReport {
        fidelity: f.value,
        raw_fidelity: f.raw,
        iterations: r.iterations,
        converged: r.converged,
        log_likelihood: r.log_likelihood,
        trace_defect: r.max_trace_defect,
        pseudo_inverse: r.pseudo_inverse,
    };
    (report, chi)
}

fn state_reports(results: &[SuiteResult<f64>]) -> Vec<StateReport> {
    results
        .iter()
        .map(|r| StateReport { label: r.label.clone(), fidelity: r.fidelity, norm: r.norm, reconstruction: None })
        .collect()
}

/// Runs every characterization stage on `gate`. Passing an ideal gate
/// exercises the pipeline against known answers.
pub fn characterize_gate(
    setup: &Setup,
    gate: &GateOperator<f64>,
    transfer: Option<TransferReport>,
    training: Option<TrainingReport>,
) -> CliResult<Characterization> {
    let cfg = &setup.config;
    let tomo = &cfg.tomography;
    let kind = setup.kind;
    let ideal = GateOperator::<f64>::ideal(kind);
    let basis = ProbeBasis::<f64>::new();
    let mut timings = Timings::default();

    let truth = truth_table(gate, &ideal)?;
    let sampled_visibility = timings.record("truth_table_monte_carlo", || {
        visibility_uncertainty(gate, &ideal, tomo.mean_total, tomo.trials, tomo.seed)
    })?;

    let mappings = toffoli_probe_mappings::<f64>()?;
    let probe_results = evolve_suite(gate, &ideal, &mappings)?;
    let mut probes = state_reports(&probe_results);
    timings.record("probe_state_tomography", || -> CliResult<()> {
        for (k, (m, (res, rep))) in mappings.iter().zip(probe_results.iter().zip(probes.iter_mut())).enumerate() {
            let expected = DensityMatrix::pure(apply_gate(&ideal, &m.input)?.state.amplitudes())?;
            let label = ProbeBasis::<f64>::index_of(parse_product_label(&m.label)?);
            let seed = tomo.seed.wrapping_add(100 + k as u64);
            let data = simulate_state_dataset(&res.output, &basis, label, tomo.mean_total, seed)?;
            let fit = qst_mle(&data, &basis, &tomo.qst)?;
            let metric = |d: &TomographyDataset| Ok(state_fidelity(&qst_mle(d, &basis, &tomo.qst)?.rho, &expected)?);
            let uncertainty = if tomo.tomography_trials > 0 {
                let u = monte_carlo_uncertainty(metric, &data, tomo.tomography_trials, seed.wrapping_add(1))?;
                Some(UncertaintyReport::new(tomo.mean_total, state_fidelity(&fit.rho, &expected)?, u))
            } else {
                None
            };
            rep.reconstruction = Some(ReconstructionReport {
                mean_total: tomo.mean_total,
                fidelity: state_fidelity(&fit.rho, &expected)?,
                iterations: fit.iterations,
                converged: fit.converged,
                uncertainty,
            });
        }
        Ok(())
    })?;

    let entangled = if kind == GateKind::ToffoliCnot {
        match evolve_entangled_suite(gate) {
            Ok(r) => entangled_report("listed", state_reports(&r), None),
            Err(e) => entangled_report("listed", Vec::new(), Some(e.to_string())),
        }
    } else {
        entangled_report("ideal-gate", state_reports(&evolve_suite(gate, &ideal, &entangled_mappings()?)?), None)
    };

    let chi_ideal = chi_from_choi(&choi_from_unitary(&ideal)?);
    let exact = timings.record("simulate_dataset", || simulate_dataset(gate, &basis, f64::INFINITY, 0))?;
    let fit = timings.record("qpt_noiseless", || qpt_mle(&exact, &basis, &tomo.qpt))?;
    let (noiseless, chi) = qpt_report(&fit, &chi_ideal);
    let noisy = simulate_dataset(gate, &basis, tomo.mean_total, tomo.seed.wrapping_add(200))?;
    let noisy_fit = timings.record("qpt_sampled", || qpt_mle(&noisy, &basis, &tomo.qpt))?;
    let (sampled, _) = qpt_report(&noisy_fit, &chi_ideal);
    let uncertainty = if tomo.tomography_trials > 0 {
        let metric = |d: &TomographyDataset| {
            Ok(process_fidelity(&chi_from_choi(&qpt_mle(d, &basis, &tomo.qpt)?.choi), &chi_ideal).value)
        };
        let u = timings.record("qpt_monte_carlo", || {
            monte_carlo_uncertainty(metric, &noisy, tomo.tomography_trials, tomo.seed.wrapping_add(201))
        })?;
        Some(UncertaintyReport::new(tomo.mean_total, sampled.fidelity, u))
    } else {
        None
    };

    let mut thresholds = vec![
        ThresholdCheck::new("visibility", Some(truth.visibility), tomo.thresholds.visibility),
        ThresholdCheck::new("process_fidelity", Some(noiseless.fidelity), cfg.process_threshold()?),
    ];
    if kind == GateKind::ToffoliCnot {
        thresholds.push(ThresholdCheck::new(
            "entangled_fidelity",
            entangled.min_fidelity,
            tomo.thresholds.entangled_fidelity,
        ));
    }

    let defect = gate.unitarity_defect();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        kind: "characterization".into(),
        gate: kind.name().into(),
        config: cfg.clone(),
        accepted: gate.is_accepted(),
        unitarity_defect: defect,
        acceptance_limit: ACCEPTANCE_DEFECT,
        training,
        transfer,
        truth_table: TruthTableReport {
            probs: real_rows(&truth.probs),
            row_visibility: truth.row_visibility.clone(),
            visibility: truth.visibility,
            sampled: sampled_visibility,
        },
        probes,
        entangled,
        process: ProcessReport { noiseless, mean_total: tomo.mean_total, sampled, uncertainty },
        thresholds,
        literature: Literature::default(),
    };
    Ok(Characterization { report, truth, choi: fit.choi, chi, chi_ideal, timings })
}

fn entangled_report(expected: &str, states: Vec<StateReport>, error: Option<String>) -> EntangledReport {
    let min_fidelity = if error.is_some() || states.is_empty() {
        None
    } else {
        Some(states.iter().map(|s| s.fidelity).fold(f64::INFINITY, f64::min))
    };
    EntangledReport { expected: expected.into(), states, min_fidelity, error }
}

fn abs(m: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    m.map(|z| z.norm())
}

/// Report, matrices and figures of one characterization.
pub fn characterization_outputs(c: &Characterization) -> CliResult<OutputSet> {
    let mut out = OutputSet::new();
    out.add_json("report.json", &c.report)?;
    out.add_with("truth_table.csv", |w| io::write_real_csv(w, &c.truth.probs))?;
    out.add("truth_table.png", render::encode_png(&render::bar_chart(&c.truth.probs))?);
    out.add_with("choi.csv", |w| io::write_matrix_csv(w, c.choi.matrix()))?;
    out.add_with("chi.csv", |w| io::write_matrix_csv(w, c.chi.matrix()))?;
    out.add_with("chi_ideal.csv", |w| io::write_matrix_csv(w, c.chi_ideal.matrix()))?;
    out.add("chi_abs.png", render::encode_png(&render::heatmap(&abs(c.chi.matrix()), 6, false))?);
    let diff = c.chi.matrix().map(|z| z.re) - c.chi_ideal.matrix().map(|z| z.re);
    out.add("chi_difference.png", render::encode_png(&render::heatmap(&diff, 6, true))?);
    if let Some(t) = &c.report.transfer {
        let to_matrix = |m: &ComplexMatrixJson| DMatrix::from_fn(4, 4, |r, k| Complex::new(m.re[r][k], m.im[r][k]));
        out.add_with("transfer_h.csv", |w| io::write_matrix_csv(w, &to_matrix(&t.h)))?;
        out.add_with("transfer_h_raw.csv", |w| io::write_matrix_csv(w, &to_matrix(&t.h_raw)))?;
        out.add_with("transfer_v.csv", |w| io::write_matrix_csv(w, &to_matrix(&t.v)))?;
    }
    Ok(out)
}
