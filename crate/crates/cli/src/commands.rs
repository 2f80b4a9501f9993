//! Subcommand bodies. Each one validates first, computes everything in
//! memory and writes its outputs only at the end.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use oamsim_core::dnn::GateKind;
use oamsim_core::gate::{apply_gate, EncodedState, GateOperator};
use oamsim_core::render;
use oamsim_core::states::{parse_product_label, product_state};
use oamsim_core::tomography::{
    chi_from_choi, choi_from_unitary, io, process_fidelity, qpt_mle, qst_mle, simulate_dataset,
    simulate_state_dataset, state_fidelity, ChiMatrix, DensityMatrix, ProbeBasis, TomographyDataset,
};
use oamsim_core::PhaseStack64;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutputSet;
use crate::pipeline::{
    characterization_outputs, characterize_gate, gate_from_stack, gate_from_transfer, train_gate, Setup, Trained,
};
use crate::report::{
    DemoRow, DemoSummary, Literature, Report, Timings, TomographyReport, TrainReport, TrainingReport,
    TransferReport, SCHEMA_VERSION,
};

fn say(quiet: bool, line: impl AsRef<str>) {
    if !quiet {
        println!("{}", line.as_ref());
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))
}

fn loss_csv(history: &[f64]) -> Vec<u8> {
    let mut s = String::from("iteration,loss\n");
    for (k, l) in history.iter().enumerate() {
        s.push_str(&format!("{k},{l}\n"));
    }
    s.into_bytes()
}

fn train_outputs(setup: &Setup, trained: &Trained, transfer: &TransferReport) -> CliResult<OutputSet> {
    let mut out = OutputSet::new();
    out.add_with("stack.oams", |w| trained.stack.write(w))?;
    out.add("loss.csv", loss_csv(&trained.history));
    for (k, layer) in trained.stack.layers().iter().enumerate() {
        out.add(format!("layer_{k}.png"), render::encode_png(&render::phase_layer(layer))?);
    }
    let summary = TrainingReport::from_history(&trained.history);
    out.add_json(
        "train.json",
        &TrainReport {
            schema_version: SCHEMA_VERSION,
            kind: "training".into(),
            gate: setup.kind.name().into(),
            config: setup.config.clone(),
            initial_loss: summary.initial_loss,
            final_loss: summary.final_loss,
            loss_ratio: summary.loss_ratio,
            transfer: transfer.clone(),
        },
    )?;
    Ok(out)
}

pub fn cmd_train(config: &RunConfig, quiet: bool) -> CliResult<()> {
    let setup = Setup::new(config)?;
    let mut timings = Timings::default();
    say(quiet, format!("training {} on a {}", setup.kind.name(), setup.grid));
    let trained = timings.record("train", || train_gate(&setup))?;
    let (_, transfer) = gate_from_transfer(&setup, &trained.transfer)?;
    let mut out = train_outputs(&setup, &trained, &transfer)?;
    out.add_json("timings.json", &timings)?;
    out.commit(&config.output)?;
    let s = TrainingReport::from_history(&trained.history);
    say(quiet, format!("loss {:.4e} -> {:.4e} (ratio {:.4})", s.initial_loss, s.final_loss, s.loss_ratio));
    say(quiet, format!("efficiency {:.4}, wrote {}", transfer.efficiency, config.output.display()));
    Ok(())
}

fn print_report(quiet: bool, r: &Report) {
    say(quiet, format!("gate {}: ACCEPTED={} (unitarity defect {:.4})", r.gate, r.accepted, r.unitarity_defect));
    say(quiet, format!("  visibility {:.5}", r.truth_table.visibility));
    say(quiet, format!("  process fidelity {:.5}", r.process.noiseless.fidelity));
    if let Some(m) = r.entangled.min_fidelity {
        say(quiet, format!("  entangled-input fidelity min {m:.5}"));
    }
    for t in &r.thresholds {
        say(quiet, format!("  threshold {} >= {}: {}", t.name, t.minimum, if t.passed { "pass" } else { "FAIL" }));
    }
}

/// Characterizes the stack at `stack_path`, or the ideal gate when `ideal`
/// is set.
pub fn cmd_characterize(config: &RunConfig, stack_path: Option<&Path>, ideal: bool, quiet: bool) -> CliResult<()> {
    let setup = Setup::new(config)?;
    let (gate, transfer) = if ideal {
        (GateOperator::ideal(setup.kind), None)
    } else {
        let path = stack_path.map(Path::to_path_buf).unwrap_or_else(|| config.output.join("stack.oams"));
        let stack = PhaseStack64::read(open(&path)?)?;
        let (gate, transfer) = gate_from_stack(&setup, &stack)?;
        (gate, Some(transfer))
    };
    let c = characterize_gate(&setup, &gate, transfer, None)?;
    let mut out = characterization_outputs(&c)?;
    out.add_json("timings.json", &c.timings)?;
    out.commit(&config.output)?;
    print_report(quiet, &c.report);
    for line in c.report.literature.lines() {
        say(quiet, line);
    }
    let failed = c.report.failed_thresholds();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Threshold(failed))
    }
}

/// Trains and characterizes all four gates.
pub fn cmd_demo(config: &RunConfig, quiet: bool) -> CliResult<()> {
    config.validate()?;
    let mut out = OutputSet::new();
    let mut timings = Timings::default();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    let published = Literature::default();
    for kind in GateKind::ALL {
        let mut cfg = config.clone();
        cfg.target = kind.name().into();
        let setup = Setup::new(&cfg)?;
        say(quiet, format!("training {}", kind.name()));
        let trained = timings.record(&format!("{}/train", kind.name()), || train_gate(&setup))?;
        let (gate, transfer) = gate_from_transfer(&setup, &trained.transfer)?;
        let mut gate_out = train_outputs(&setup, &trained, &transfer)?;
        let c = characterize_gate(&setup, &gate, Some(transfer), Some(TrainingReport::from_history(&trained.history)))?;
        print_report(quiet, &c.report);
        gate_out.nest("", characterization_outputs(&c)?);
        out.nest(kind.name(), gate_out);
        timings.extend_prefixed(kind.name(), c.timings);
        let gate_failures = c.report.failed_thresholds();
        let process = &c.report.thresholds[1];
        let simulated = published
            .simulated
            .iter()
            .find(|p| p.label == format!("{} process fidelity", short_name(kind)))
            .map_or(f64::NAN, |p| p.value);
        rows.push(DemoRow {
            gate: kind.name().into(),
            accepted: c.report.accepted,
            visibility: c.report.truth_table.visibility,
            process_fidelity: c.report.process.noiseless.fidelity,
            process_threshold: process.minimum,
            published_simulated: simulated,
            passed: gate_failures.is_empty(),
        });
        failed.extend(gate_failures.into_iter().map(|f| format!("{}: {f}", kind.name())));
    }
    say(quiet, "gate           visibility  process   published");
    for r in &rows {
        say(
            quiet,
            format!("{:<14} {:.5}     {:.5}   {:.4}", r.gate, r.visibility, r.process_fidelity, r.published_simulated),
        );
    }
    for line in published.lines() {
        say(quiet, line);
    }
    out.add_json(
        "demo.json",
        &DemoSummary { schema_version: SCHEMA_VERSION, config: config.clone(), gates: rows, literature: published },
    )?;
    out.add_json("timings.json", &timings)?;
    out.commit(&config.output)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Threshold(failed))
    }
}

fn short_name(kind: GateKind) -> &'static str {
    match kind {
        GateKind::ToffoliCnot => "toffoli",
        GateKind::Cch => "cch",
        GateKind::FredkinSwap => "fredkin",
        GateKind::Ccz => "ccz",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TomographyMode {
    State,
    Process,
}

pub struct TomographyArgs {
    pub dataset: PathBuf,
    pub sidecar: Option<PathBuf>,
    pub mode: TomographyMode,
    pub reference: Option<PathBuf>,
    /// Input row to reconstruct in state mode.
    pub input_row: Option<usize>,
}

fn read_dataset(csv: &Path, sidecar: Option<&Path>) -> CliResult<TomographyDataset> {
    let sidecar_path = sidecar.map(Path::to_path_buf).unwrap_or_else(|| csv.with_extension("json"));
    let meta = io::read_sidecar(open(&sidecar_path)?).map_err(|e| CliError::Config(format!("{}: {e}", sidecar_path.display())))?;
    io::read_dataset_csv(open(csv)?, &meta).map_err(|e| CliError::Config(format!("{}: {e}", csv.display())))
}

pub fn cmd_tomography(config: &RunConfig, args: &TomographyArgs, quiet: bool) -> CliResult<()> {
    config.validate()?;
    let dataset = read_dataset(&args.dataset, args.sidecar.as_deref())?;
    let reference = args.reference.as_deref().map(|p| io::read_matrix_csv(open(p)?).map_err(CliError::from)).transpose()?;
    let basis = ProbeBasis::<f64>::new();
    let mut out = OutputSet::new();
    let report = match args.mode {
        TomographyMode::State => {
            let data = match (dataset.inputs().len(), args.input_row) {
                (1, None) => dataset,
                (_, Some(j)) => dataset.single_input(j)?,
                (n, None) => {
                    return Err(CliError::Config(format!("dataset has {n} input rows; choose one with --input-row")))
                }
            };
            let fit = qst_mle(&data, &basis, &config.tomography.qst)?;
            out.add_with("rho.csv", |w| io::write_matrix_csv(w, fit.rho.matrix()))?;
            let fidelity = match reference {
                Some(m) => Some(state_fidelity(&fit.rho, &DensityMatrix::new(m)?)?),
                None => None,
            };
            TomographyReport {
                schema_version: SCHEMA_VERSION,
                kind: "state-tomography".into(),
                dataset: args.dataset.display().to_string(),
                iterations: fit.iterations,
                converged: fit.converged,
                log_likelihood: fit.log_likelihood,
                summary_value: fit.rho.purity(),
                fidelity,
            }
        }
        TomographyMode::Process => {
            let fit = qpt_mle(&dataset, &basis, &config.tomography.qpt)?;
            let chi = chi_from_choi(&fit.choi);
            out.add_with("choi.csv", |w| io::write_matrix_csv(w, fit.choi.matrix()))?;
            out.add_with("chi.csv", |w| io::write_matrix_csv(w, chi.matrix()))?;
            out.add("chi_abs.png", render::encode_png(&render::heatmap(&chi.matrix().map(|z| z.norm()), 6, false))?);
            let fidelity = match reference {
                Some(m) => Some(process_fidelity(&chi, &ChiMatrix::from_matrix(m)?).value),
                None => None,
            };
            TomographyReport {
                schema_version: SCHEMA_VERSION,
                kind: "process-tomography".into(),
                dataset: args.dataset.display().to_string(),
                iterations: fit.iterations,
                converged: fit.converged,
                log_likelihood: fit.log_likelihood,
                summary_value: chi.matrix()[(0, 0)].re,
                fidelity,
            }
        }
    };
    out.add_json("tomography.json", &report)?;
    out.commit(&config.output)?;
    say(quiet, format!("{}: {} iterations, converged {}", report.kind, report.iterations, report.converged));
    if let Some(f) = report.fidelity {
        say(quiet, format!("fidelity against reference {f:.6}"));
    }
    Ok(())
}

/// What `cmd_dataset` simulates.
pub struct DatasetArgs {
    /// `identity` or a gate target name.
    pub gate: String,
    /// Product-state label; set for a single-input state dataset.
    pub probe: Option<String>,
    /// Unset for exact probabilities.
    pub mean_total: Option<f64>,
}

fn named_gate(name: &str) -> CliResult<GateOperator<f64>> {
    if name == "identity" {
        return Ok(GateOperator::identity());
    }
    let kind: GateKind = name.parse().map_err(|_| CliError::Config(format!("unknown gate {name:?}")))?;
    Ok(GateOperator::ideal(kind))
}

/// Writes an ideal-gate dataset with its sidecar and reference matrix.
pub fn cmd_dataset(config: &RunConfig, args: &DatasetArgs, quiet: bool) -> CliResult<()> {
    config.validate()?;
    let gate = named_gate(&args.gate)?;
    let mean_total = args.mean_total.unwrap_or(f64::INFINITY);
    if !(mean_total > 0.0) {
        return Err(CliError::Config(format!("mean total must be positive, got {mean_total}")));
    }
    let basis = ProbeBasis::<f64>::new();
    let seed = config.tomography.seed;
    let mut out = OutputSet::new();
    let dataset = match &args.probe {
        Some(label) => {
            let qubits = parse_product_label(label).map_err(|e| CliError::Config(e.to_string()))?;
            let input = EncodedState::new(product_state(qubits)?)?;
            let rho = DensityMatrix::pure(apply_gate(&gate, &input)?.state.amplitudes())?;
            out.add_with("reference_rho.csv", |w| io::write_matrix_csv(w, rho.matrix()))?;
            simulate_state_dataset(&rho, &basis, ProbeBasis::<f64>::index_of(qubits), mean_total, seed)?
        }
        None => {
            let choi = choi_from_unitary(&gate)?;
            out.add_with("reference_choi.csv", |w| io::write_matrix_csv(w, choi.matrix()))?;
            out.add_with("reference_chi.csv", |w| io::write_matrix_csv(w, chi_from_choi(&choi).matrix()))?;
            simulate_dataset(&gate, &basis, mean_total, seed)?
        }
    };
    out.add_with("dataset.csv", |w| io::write_dataset_csv(w, &dataset))?;
    out.add_with("dataset.json", |w| io::write_sidecar(w, &dataset))?;
    out.commit(&config.output)?;
    say(quiet, format!("wrote {} rows of {} to {}", dataset.inputs().len(), args.gate, config.output.display()));
    Ok(())
}
