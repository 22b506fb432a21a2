//! CSV form of sweep and noise-curve results.

use std::io::{Read, Write};

use crate::circuits::CircuitSpec;
use crate::error::{Error, Result};
use crate::noise::OpKind;

/// One circuit under one noise setting, aggregated over its repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub circuit_id: usize,
    pub spec: CircuitSpec,
    pub num_qubits: usize,
    pub depth: usize,
    pub num_cz_gates: usize,
    pub num_parameters: usize,
    pub dataset: String,
    pub pca_k: Option<usize>,
    pub noise_t1_ns: Option<f64>,
    pub noise_t2_ns: Option<f64>,
    pub cz_error: Option<f64>,
    pub measure_error: Option<f64>,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub wall_time_s: Option<f64>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn header(repeats: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "circuit_id",
        "spec",
        "num_qubits",
        "depth",
        "num_cz_gates",
        "num_parameters",
        "dataset",
        "pca_k",
        "noise_t1_ns",
        "noise_t2_ns",
        "cz_error",
        "measure_error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=repeats).map(|r| format!("acc_{r}")));
    h.extend(["mean_accuracy", "std_accuracy", "wall_time_s"].map(String::from));
    h
}

/// Writes records with a header row. Every record must carry the same
/// number of repeats.
pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let repeats = records.first().map_or(0, |r| r.accuracies.len());
    if records.iter().any(|r| r.accuracies.len() != repeats) {
        return Err(Error::Config(
            "records disagree on the number of repeats".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(repeats))?;
    for r in records {
        let mut row = vec![
            r.circuit_id.to_string(),
            r.spec.to_json(),
            r.num_qubits.to_string(),
            r.depth.to_string(),
            r.num_cz_gates.to_string(),
            r.num_parameters.to_string(),
            r.dataset.clone(),
            opt(r.pca_k),
            opt(r.noise_t1_ns),
            opt(r.noise_t2_ns),
            opt(r.cz_error),
            opt(r.measure_error),
        ];
        row.extend(r.accuracies.iter().map(f64::to_string));
        row.push(r.mean_accuracy.to_string());
        row.push(r.std_accuracy.to_string());
        row.push(opt(r.wall_time_s));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(field: &str, column: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: bad {column} value {field:?}")))
}

fn parse_opt<T: std::str::FromStr>(field: &str, column: &str, line: usize) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field, column, line).map(Some)
    }
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("results file lacks a {name} column")))
    };
    let idx = [
        "circuit_id",
        "spec",
        "num_qubits",
        "depth",
        "num_cz_gates",
        "num_parameters",
        "dataset",
        "pca_k",
        "noise_t1_ns",
        "noise_t2_ns",
        "cz_error",
        "measure_error",
        "mean_accuracy",
        "std_accuracy",
        "wall_time_s",
    ]
    .map(col);
    let [c_id, c_spec, c_q, c_depth, c_cz, c_np, c_ds, c_pca, c_t1, c_t2, c_cze, c_me, c_mean, c_std, c_wall] = {
        let mut out = [0usize; 15];
        for (o, i) in out.iter_mut().zip(idx) {
            *o = i?;
        }
        out
    };
    let acc_cols: Vec<usize> = (1..)
        .map_while(|r| headers.iter().position(|h| h == format!("acc_{r}")))
        .collect();

    let mut records = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = n + 2;
        let spec = CircuitSpec::from_json(&row[c_spec])?;
        records.push(ExperimentRecord {
            circuit_id: parse(&row[c_id], "circuit_id", line)?,
            spec,
            num_qubits: parse(&row[c_q], "num_qubits", line)?,
            depth: parse(&row[c_depth], "depth", line)?,
            num_cz_gates: parse(&row[c_cz], "num_cz_gates", line)?,
            num_parameters: parse(&row[c_np], "num_parameters", line)?,
            dataset: row[c_ds].to_string(),
            pca_k: parse_opt(&row[c_pca], "pca_k", line)?,
            noise_t1_ns: parse_opt(&row[c_t1], "noise_t1_ns", line)?,
            noise_t2_ns: parse_opt(&row[c_t2], "noise_t2_ns", line)?,
            cz_error: parse_opt(&row[c_cze], "cz_error", line)?,
            measure_error: parse_opt(&row[c_me], "measure_error", line)?,
            accuracies: acc_cols
                .iter()
                .map(|&c| parse(&row[c], "accuracy", line))
                .collect::<Result<_>>()?,
            mean_accuracy: parse(&row[c_mean], "mean_accuracy", line)?,
            std_accuracy: parse(&row[c_std], "std_accuracy", line)?,
            wall_time_s: parse_opt(&row[c_wall], "wall_time_s", line)?,
        });
    }
    Ok(records)
}

/// One row of a noise curve.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurveRow {
    pub circuit_id: usize,
    pub depth: usize,
    pub op_kind: OpKind,
    pub target_error: f64,
    pub estimated_error: f64,
    pub t1_ns: Option<f64>,
    pub t2_ns: Option<f64>,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// Writes `circuit_id,depth,op_kind,target_error,estimated_error,
/// mean_accuracy,std_accuracy` plus the chosen T1/T2 for reference.
pub fn write_noise_curve<W: Write>(out: W, rows: &[NoiseCurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "circuit_id",
        "depth",
        "op_kind",
        "target_error",
        "estimated_error",
        "mean_accuracy",
        "std_accuracy",
        "t1_ns",
        "t2_ns",
    ])?;
    for r in rows {
        w.write_record([
            r.circuit_id.to_string(),
            r.depth.to_string(),
            r.op_kind.to_string(),
            r.target_error.to_string(),
            r.estimated_error.to_string(),
            r.mean_accuracy.to_string(),
            r.std_accuracy.to_string(),
            opt(r.t1_ns),
            opt(r.t2_ns),
        ])?;
    }
    w.flush()?;
    Ok(())
}
