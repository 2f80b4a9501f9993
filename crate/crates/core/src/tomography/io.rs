//! Text formats: datasets as `input,projector,count` CSV plus a JSON
//! sidecar describing the conventions, and complex matrices as CSV grids
//! of `re,im` column pairs.

use std::collections::HashMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::basis::PROBE_COUNT;
use super::dataset::TomographyDataset;
use crate::error::{Error, Result};
use crate::states::QUBIT_LABELS;

pub const DATASET_SCHEMA_VERSION: u32 = 1;
pub const BASIS_NAME: &str = "pauli-eigenstates-3q";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub schema_version: u32,
    pub basis: String,
    pub qubit_states: Vec<String>,
    pub index_order: String,
    pub choi_ordering: String,
    pub vectorization: String,
    pub normalization: String,
    /// `null` when the entries are exact probabilities.
    pub mean_total: Option<f64>,
    pub inputs: Vec<usize>,
    pub projectors: Vec<usize>,
}

impl DatasetSidecar {
    pub fn describe(dataset: &TomographyDataset) -> Self {
        Self {
            schema_version: DATASET_SCHEMA_VERSION,
            basis: BASIS_NAME.into(),
            qubit_states: QUBIT_LABELS.iter().map(|s| s.to_string()).collect(),
            index_order: "36*q1 + 6*q2 + q3".into(),
            choi_ordering: "input (x) output".into(),
            vectorization: "column-stacking".into(),
            normalization: "per-input".into(),
            mean_total: if dataset.is_exact() { None } else { Some(dataset.mean_total()) },
            inputs: dataset.inputs().to_vec(),
            projectors: dataset.projectors().to_vec(),
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |line: usize, message: String| Err(Error::Schema { line, message });
        if self.schema_version != DATASET_SCHEMA_VERSION {
            return bad(0, format!("sidecar schema_version {} is not supported", self.schema_version));
        }
        if self.basis != BASIS_NAME {
            return bad(0, format!("sidecar basis {:?} is not {BASIS_NAME:?}", self.basis));
        }
        if self.qubit_states.iter().map(String::as_str).ne(QUBIT_LABELS) {
            return bad(0, format!("sidecar qubit_states {:?} do not match {:?}", self.qubit_states, QUBIT_LABELS));
        }
        Ok(())
    }
}

pub fn write_sidecar<W: Write>(w: W, dataset: &TomographyDataset) -> Result<()> {
    serde_json::to_writer_pretty(w, &DatasetSidecar::describe(dataset))
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

pub fn read_sidecar<R: Read>(r: R) -> Result<DatasetSidecar> {
    let sidecar: DatasetSidecar =
        serde_json::from_reader(r).map_err(|e| Error::Schema { line: e.line(), message: e.to_string() })?;
    sidecar.check()?;
    Ok(sidecar)
}

pub fn write_dataset_csv<W: Write>(w: W, dataset: &TomographyDataset) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["input", "projector", "count"]).map_err(csv_io)?;
    let width = dataset.projectors().len();
    for (j, &input) in dataset.inputs().iter().enumerate() {
        for (k, &proj) in dataset.projectors().iter().enumerate() {
            let count = dataset.counts()[j * width + k];
            out.write_record([input.to_string(), proj.to_string(), format!("{count:?}")]).map_err(csv_io)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Reads counts laid out as described by `sidecar`. Every (input,
/// projector) pair must appear exactly once.
pub fn read_dataset_csv<R: Read>(r: R, sidecar: &DatasetSidecar) -> Result<TomographyDataset> {
    let row_of: HashMap<usize, usize> = sidecar.inputs.iter().enumerate().map(|(i, &j)| (j, i)).collect();
    let col_of: HashMap<usize, usize> = sidecar.projectors.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let width = sidecar.projectors.len();
    let mut counts = vec![f64::NAN; sidecar.inputs.len() * width];
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers().map_err(|e| schema_from_csv(e, 1))?.clone();
    if header.iter().map(str::trim).ne(["input", "projector", "count"]) {
        return Err(Error::Schema { line: 1, message: format!("expected header input,projector,count, got {:?}", header) });
    }
    let mut last_line = 1;
    for record in reader.records() {
        let record = record.map_err(|e| schema_from_csv(e, last_line + 1))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(last_line + 1);
        last_line = line;
        let schema = |message: String| Error::Schema { line, message };
        if record.len() != 3 {
            return Err(schema(format!("expected 3 fields, got {}", record.len())));
        }
        let index = |field: &str, what: &str| -> Result<usize> {
            field.trim().parse::<usize>().map_err(|_| schema(format!("{what} {field:?} is not an index")))
        };
        let j = index(&record[0], "input")?;
        let k = index(&record[1], "projector")?;
        let count: f64 = record[2].trim().parse().map_err(|_| schema(format!("count {:?} is not a number", &record[2])))?;
        if !(count.is_finite() && count >= 0.0) {
            return Err(schema(format!("count {count} must be finite and non-negative")));
        }
        let (Some(&row), Some(&col)) = (row_of.get(&j), col_of.get(&k)) else {
            return Err(schema(format!("pair ({j}, {k}) is not declared in the sidecar")));
        };
        let slot = &mut counts[row * width + col];
        if !slot.is_nan() {
            return Err(schema(format!("pair ({j}, {k}) appears twice")));
        }
        *slot = count;
    }
    if let Some(missing) = counts.iter().position(|c| c.is_nan()) {
        return Err(Error::Schema {
            line: last_line,
            message: format!(
                "file ends before pair ({}, {}); {} of {} entries missing",
                sidecar.inputs[missing / width],
                sidecar.projectors[missing % width],
                counts.iter().filter(|c| c.is_nan()).count(),
                counts.len()
            ),
        });
    }
    if sidecar.inputs.iter().chain(&sidecar.projectors).any(|&i| i >= PROBE_COUNT) {
        return Err(Error::Schema { line: 0, message: "sidecar lists a probe index above 215".into() });
    }
    TomographyDataset::new(
        sidecar.inputs.clone(),
        sidecar.projectors.clone(),
        counts,
        sidecar.mean_total.unwrap_or(f64::INFINITY),
    )
}

fn schema_from_csv(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(fallback_line);
    Error::Schema { line, message: e.to_string() }
}

/// One CSV row per matrix row, columns `re_0,im_0,re_1,im_1,…`.
pub fn write_matrix_csv<W: Write>(w: W, m: &DMatrix<Complex<f64>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = (0..m.ncols()).flat_map(|c| [format!("re_{c}"), format!("im_{c}")]).collect();
    out.write_record(&header).map_err(csv_io)?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).flat_map(|c| [format!("{:?}", m[(r, c)].re), format!("{:?}", m[(r, c)].im)]).collect();
        out.write_record(&row).map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

/// Real matrix, one CSV row per matrix row with a `c_0,c_1,…` header.
pub fn write_real_csv<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = (0..m.ncols()).map(|c| format!("c_{c}")).collect();
    out.write_record(&header).map_err(csv_io)?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:?}", m[(r, c)])).collect();
        out.write_record(&row).map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DMatrix<Complex<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let width = reader.headers().map_err(|e| schema_from_csv(e, 1))?.len();
    if width == 0 || width % 2 != 0 {
        return Err(Error::Schema { line: 1, message: format!("expected re/im column pairs, got {width} columns") });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_from_csv(e, rows.len() + 2))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(rows.len() + 2);
        let values = record
            .iter()
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Schema { line, message: format!("{v:?} is not a number") }))
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    let cols = width / 2;
    if rows.len() != cols {
        return Err(Error::Schema { line: rows.len() + 1, message: format!("expected {cols} rows, got {}", rows.len()) });
    }
    Ok(DMatrix::from_fn(cols, cols, |r, c| Complex::new(rows[r][2 * c], rows[r][2 * c + 1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::GateKind;
    use crate::gate::GateOperator;
    use crate::tomography::{simulate_truth_table_dataset, ProbeBasis};

    fn sample() -> TomographyDataset {
        simulate_truth_table_dataset(&GateOperator::<f64>::ideal(GateKind::ToffoliCnot), &ProbeBasis::new(), 500.0, 2)
            .unwrap()
    }

    #[test]
    fn dataset_round_trip() {
        let d = sample();
        let mut csv = Vec::new();
        let mut side = Vec::new();
        write_dataset_csv(&mut csv, &d).unwrap();
        write_sidecar(&mut side, &d).unwrap();
        let sidecar = read_sidecar(&side[..]).unwrap();
        assert_eq!(read_dataset_csv(&csv[..], &sidecar).unwrap(), d);
    }

    #[test]
    fn truncated_and_corrupt_files_report_lines() {
        let d = sample();
        let mut csv = Vec::new();
        let mut side = Vec::new();
        write_dataset_csv(&mut csv, &d).unwrap();
        write_sidecar(&mut side, &d).unwrap();
        let sidecar = read_sidecar(&side[..]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..40].join("\n");
        match read_dataset_csv(truncated.as_bytes(), &sidecar) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 40),
            other => panic!("unexpected {other:?}"),
        }
        let mut bad = lines.clone();
        bad[5] = "0,0,abc";
        match read_dataset_csv(bad.join("\n").as_bytes(), &sidecar) {
            Err(Error::Schema { line, message }) => assert!(line == 6 && message.contains("abc")),
            other => panic!("unexpected {other:?}"),
        }
        let mut dup = lines.clone();
        dup[3] = dup[2];
        assert!(matches!(read_dataset_csv(dup.join("\n").as_bytes(), &sidecar), Err(Error::Schema { line: 4, .. })));
        assert!(read_sidecar(&b"{\"schema_version\": 1}"[..]).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_fn(3, 3, |r, c| Complex::new(r as f64 + 0.1, -(c as f64) / 3.0));
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_csv(&buf[..]).unwrap(), m);
        assert!(read_matrix_csv(&b"re_0,im_0\n1,2\n3,4\n"[..]).is_err());
    }
}
