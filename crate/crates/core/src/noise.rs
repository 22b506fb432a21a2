//! Thermal-relaxation noise models and their effective error rates.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::simulator::{sample_counts, validate_relaxation, GateOp, QuantumState};

pub const CZ_DURATION_NS: f64 = 300.0;
pub const MEASURE_DURATION_NS: f64 = 1000.0;
pub const DEFAULT_T1_RANGE: (f64, f64) = (100.0, 80_000.0);
pub const DEFAULT_T2_RANGE: (f64, f64) = (100.0, 140_000.0);
pub const DEFAULT_ESTIMATION_SHOTS: u64 = 10_000;

/// How far outside the achievable error range a target may lie before
/// [`ErrorLookup::model_for_target`] refuses it.
pub const TARGET_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    pub t1: f64,
    pub t2: f64,
    pub duration: f64,
}

impl Relaxation {
    pub fn new(t1: f64, t2: f64, duration: f64) -> Result<Self> {
        validate_relaxation(t1, t2).map_err(|e| Error::Noise(e.to_string()))?;
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::Noise(format!("invalid gate duration {duration}")));
        }
        Ok(Self { t1, t2, duration })
    }

    fn gate(&self, qubit: usize) -> GateOp {
        GateOp::Relax {
            qubit,
            t1: self.t1,
            t2: self.t2,
            duration: self.duration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Cz,
    Measure,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Cz => "cz",
            OpKind::Measure => "measure",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cz" => Ok(OpKind::Cz),
            "measure" => Ok(OpKind::Measure),
            other => Err(Error::Config(format!("unknown operation kind {other:?}"))),
        }
    }
}

/// Relaxation attached to CZ gates and/or the terminal measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub cz: Option<Relaxation>,
    pub measure: Option<Relaxation>,
}

impl NoiseModel {
    /// The same `t1`/`t2` on both channels with the standard gate times.
    pub fn thermal(t1: f64, t2: f64) -> Result<Self> {
        Ok(Self {
            cz: Some(Relaxation::new(t1, t2, CZ_DURATION_NS)?),
            measure: Some(Relaxation::new(t1, t2, MEASURE_DURATION_NS)?),
        })
    }

    pub fn only(op: OpKind, t1: f64, t2: f64) -> Result<Self> {
        Ok(Self::thermal(t1, t2)?.restricted_to(op))
    }

    /// Keeps only the channel for `op`.
    pub fn restricted_to(&self, op: OpKind) -> Self {
        match op {
            OpKind::Cz => Self {
                cz: self.cz,
                measure: None,
            },
            OpKind::Measure => Self {
                cz: None,
                measure: self.measure,
            },
        }
    }

    pub fn channel(&self, op: OpKind) -> Option<Relaxation> {
        match op {
            OpKind::Cz => self.cz,
            OpKind::Measure => self.measure,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.cz.is_none() && self.measure.is_none()
    }

    /// `(t1, t2)` of the first present channel.
    pub fn times(&self) -> Option<(f64, f64)> {
        self.cz.or(self.measure).map(|r| (r.t1, r.t2))
    }

    /// Inserts relaxation after every CZ (on both qubits) and on every qubit
    /// right before the terminal measurement.
    pub fn instrument(&self, num_qubits: usize, gates: &[GateOp]) -> Vec<GateOp> {
        let mut out = Vec::with_capacity(gates.len() + 2 * gates.len() / 3 + num_qubits);
        for gate in gates {
            match *gate {
                GateOp::Cz(a, b) => {
                    out.push(*gate);
                    if let Some(r) = self.cz {
                        out.push(r.gate(a));
                        out.push(r.gate(b));
                    }
                }
                GateOp::MeasureAll => {
                    if let Some(r) = self.measure {
                        out.extend((0..num_qubits).map(|q| r.gate(q)));
                    }
                    out.push(*gate);
                }
                _ => out.push(*gate),
            }
        }
        out
    }
}

fn log_axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..steps)
        .map(|i| match i {
            0 => lo,
            _ if i == steps - 1 => hi,
            _ => (a + (b - a) * i as f64 / (steps - 1) as f64).exp(),
        })
        .collect()
}

/// Log-spaced `steps x steps` grid of thermal models, keeping only points
/// with `t2 <= 2 t1`. Points are ordered by `t1`, then `t2`.
pub fn grid(t1_range: (f64, f64), t2_range: (f64, f64), steps: usize) -> Result<Vec<NoiseModel>> {
    let ok = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
    if !ok(t1_range) || !ok(t2_range) {
        return Err(Error::Noise(format!(
            "grid ranges must be positive and ordered (t1 {t1_range:?}, t2 {t2_range:?})"
        )));
    }
    if steps < 2 {
        return Err(Error::Noise(format!(
            "grid needs at least 2 steps, got {steps}"
        )));
    }
    let t2s = log_axis(t2_range.0, t2_range.1, steps);
    let models: Vec<NoiseModel> = log_axis(t1_range.0, t1_range.1, steps)
        .into_iter()
        .flat_map(|t1| t2s.iter().map(move |&t2| (t1, t2)))
        .filter(|&(t1, t2)| t2 <= 2.0 * t1)
        .map(|(t1, t2)| NoiseModel::thermal(t1, t2))
        .collect::<Result<_>>()?;
    if models.is_empty() {
        return Err(Error::Noise("no grid point satisfies t2 <= 2 t1".into()));
    }
    Ok(models)
}

pub fn default_grid(steps: usize) -> Result<Vec<NoiseModel>> {
    grid(DEFAULT_T1_RANGE, DEFAULT_T2_RANGE, steps)
}

/// Input states of the estimation protocol, as statevectors.
fn protocol_inputs(op: OpKind) -> Vec<Vec<Complex64>> {
    let one = Complex64::ONE;
    let zero = Complex64::ZERO;
    match op {
        OpKind::Measure => vec![vec![one, zero], vec![zero, one]],
        OpKind::Cz => vec![
            vec![one, zero, zero, zero],
            vec![Complex64::new(0.5, 0.0); 4],
        ],
    }
}

/// Effective error rate of one noisy operation, estimated from `shots`
/// samples per input state.
///
/// * `Measure`: inputs `|0>` and `|1>`; the error is the mean fraction of
///   flipped outcomes.
/// * `Cz`: inputs `|00>` and `(|00>+|01>+|10>+|11>)/2`; the error is the
///   mean total-variation distance between the sampled histogram and the
///   ideal CZ output distribution.
pub fn estimate_error(op: OpKind, model: &NoiseModel, shots: u64, seed: u64) -> Result<f64> {
    let channel = model
        .channel(op)
        .ok_or_else(|| Error::Noise(format!("noise model has no {op} channel")))?;
    if shots == 0 {
        return Err(Error::Noise(
            "error estimation needs at least one shot".into(),
        ));
    }
    let only = NoiseModel {
        cz: (op == OpKind::Cz).then_some(channel),
        measure: (op == OpKind::Measure).then_some(channel),
    };
    let (num_qubits, circuit) = match op {
        OpKind::Cz => (2, vec![GateOp::Cz(0, 1), GateOp::MeasureAll]),
        OpKind::Measure => (1, vec![GateOp::MeasureAll]),
    };
    let ideal_gates = circuit.clone();
    let noisy_gates = only.instrument(num_qubits, &circuit);

    let inputs = protocol_inputs(op);
    let mut total = 0.0;
    for (i, amps) in inputs.iter().enumerate() {
        let mut ideal = QuantumState::from_amplitudes(amps.clone())?;
        ideal.apply_all(&ideal_gates)?;
        let ideal_p = ideal.probabilities();

        let mut noisy = QuantumState::from_amplitudes(amps.clone())?.to_mixed();
        noisy.apply_all(&noisy_gates)?;
        let mut rng = seed::derive_rng(seed, &[seed::stream::NOISE, op as u64, i as u64]);
        let counts = sample_counts(&noisy, shots, &mut rng);
        let n = shots as f64;
        let distance = match op {
            // Flip fraction: mass on the outcome the ideal circuit never produces.
            OpKind::Measure => {
                let expected = if ideal_p[0] > 0.5 { 0 } else { 1 };
                1.0 - counts.get(expected) as f64 / n
            }
            OpKind::Cz => {
                0.5 * ideal_p
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (counts.get(k) as f64 / n - p).abs())
                    .sum::<f64>()
            }
        };
        total += distance;
    }
    Ok((total / inputs.len() as f64).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub t1_ns: f64,
    pub t2_ns: f64,
    pub op_kind: OpKind,
    pub estimated_error: f64,
}

/// Estimated error of each grid model for each op kind. Output order is
/// grid order, then `ops` order; estimation runs in parallel.
pub fn error_surface(
    models: &[NoiseModel],
    ops: &[OpKind],
    shots: u64,
    seed: u64,
) -> Result<Vec<SurfacePoint>> {
    let tasks: Vec<(usize, NoiseModel, OpKind)> = models
        .iter()
        .enumerate()
        .flat_map(|(i, m)| ops.iter().map(move |&op| (i, *m, op)))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, model, op)| {
            let (t1, t2) = model
                .channel(op)
                .map(|r| (r.t1, r.t2))
                .ok_or_else(|| Error::Noise(format!("grid model has no {op} channel")))?;
            let est = estimate_error(op, &model, shots, seed::derive(seed, &[i as u64]))?;
            Ok(SurfacePoint {
                t1_ns: t1,
                t2_ns: t2,
                op_kind: op,
                estimated_error: est,
            })
        })
        .collect()
}

/// Writes the error surface as CSV: `t1_ns,t2_ns,op_kind,estimated_error`.
pub fn write_error_surface<W: Write>(out: W, points: &[SurfacePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t1_ns", "t2_ns", "op_kind", "estimated_error"])?;
    for p in points {
        w.write_record([
            p.t1_ns.to_string(),
            p.t2_ns.to_string(),
            p.op_kind.to_string(),
            p.estimated_error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Estimated errors of one operation over a search grid, computed once so
/// that many targets can be resolved consistently.
#[derive(Debug, Clone)]
pub struct ErrorLookup {
    pub op: OpKind,
    entries: Vec<(NoiseModel, f64)>,
}

impl ErrorLookup {
    pub fn build(op: OpKind, search_grid: &[NoiseModel], shots: u64, seed: u64) -> Result<Self> {
        let points = error_surface(search_grid, &[op], shots, seed)?;
        let entries = search_grid
            .iter()
            .zip(points)
            .map(|(m, p)| (m.restricted_to(op), p.estimated_error))
            .collect();
        Ok(Self { op, entries })
    }

    pub fn entries(&self) -> &[(NoiseModel, f64)] {
        &self.entries
    }

    pub fn range(&self) -> (f64, f64) {
        self.entries
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, e)| {
                (lo.min(e), hi.max(e))
            })
    }

    /// Grid model whose estimated error is nearest `target`; ties prefer
    /// the smaller estimated error.
    pub fn model_for_target(&self, target: f64) -> Result<(NoiseModel, f64)> {
        let (min, max) = self.range();
        if self.entries.is_empty()
            || !target.is_finite()
            || target < min - TARGET_SLACK
            || target > max + TARGET_SLACK
        {
            return Err(Error::UnreachableTarget { target, min, max });
        }
        let best = self
            .entries
            .iter()
            .min_by(|a, b| {
                let da = (a.1 - target).abs();
                let db = (b.1 - target).abs();
                da.total_cmp(&db).then(a.1.total_cmp(&b.1))
            })
            .expect("non-empty");
        Ok(*best)
    }
}

/// One-shot form of [`ErrorLookup::model_for_target`].
pub fn model_for_target_error(
    op: OpKind,
    target: f64,
    search_grid: &[NoiseModel],
    shots: u64,
    seed: u64,
) -> Result<(NoiseModel, f64)> {
    ErrorLookup::build(op, search_grid, shots, seed)?.model_for_target(target)
}
