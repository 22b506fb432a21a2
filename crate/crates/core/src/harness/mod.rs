//! Sweep runner: samples circuits, trains them under optional noise and
//! emits analysis-ready CSV.
//!
//! All randomness is derived from the configured base seed and the task
//! coordinates `(circuit_id, noise_index, repeat_index)`, and results are
//! merged in canonical order, so the output bytes do not depend on the
//! number of worker threads.

pub mod config;
pub mod records;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::circuits::{sample_circuit_seeded, CircuitSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::noise::{self, estimate_error, ErrorLookup, NoiseModel, OpKind, SurfacePoint};
use crate::seed::{self, stream};
use crate::training::{repeat_seed, run_repeat, HoldoutConfig, HoldoutSummary};

pub use config::{
    DataSource, ErrorSurfaceConfig, NoiseCurveConfig, NoiseOps, SweepConfig, SweepNoise,
};
pub use records::{
    read_records, write_noise_curve, write_records, ExperimentRecord, NoiseCurveRow,
};

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Samples `num_circuits` circuits; the qubit count of each is uniform over
/// the configured range.
pub fn sample_sweep_circuits(
    config: &SweepConfig,
    num_features: usize,
) -> Result<Vec<CircuitSpec>> {
    let (lo, hi) = config.qubit_range;
    (0..config.num_circuits)
        .map(|cid| {
            let mut rng = seed::derive_rng(config.base_seed, &[stream::CIRCUIT, cid as u64]);
            let qubits = rng.random_range(lo..=hi);
            let spec_seed = seed::derive(config.base_seed, &[stream::CIRCUIT, cid as u64, 1]);
            sample_circuit_seeded(
                qubits,
                num_features,
                config.repeat_features,
                config.all_pairs,
                spec_seed,
            )
        })
        .collect()
}

/// A noise setting together with its estimated per-operation errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePoint {
    pub model: Option<NoiseModel>,
    pub cz_error: Option<f64>,
    pub measure_error: Option<f64>,
}

impl NoisePoint {
    pub const NOISELESS: NoisePoint = NoisePoint {
        model: None,
        cz_error: None,
        measure_error: None,
    };

    fn times(&self) -> (Option<f64>, Option<f64>) {
        match self.model.and_then(|m| m.times()) {
            Some((t1, t2)) => (Some(t1), Some(t2)),
            None => (None, None),
        }
    }
}

/// Noise settings of a sweep, in noise-index order.
pub fn sweep_noise_points(config: &SweepConfig) -> Result<Vec<NoisePoint>> {
    let Some(setting) = &config.noise else {
        return Ok(vec![NoisePoint::NOISELESS]);
    };
    let noise_seed = seed::derive(config.base_seed, &[stream::NOISE]);
    match setting {
        SweepNoise::Grid { op, steps } => noise::default_grid(*steps)?
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let model = match op {
                    NoiseOps::Both => m,
                    NoiseOps::One(k) => m.restricted_to(*k),
                };
                let s = seed::derive(noise_seed, &[i as u64]);
                let est = |k: OpKind| {
                    model
                        .channel(k)
                        .map(|_| estimate_error(k, &model, config.noise_shots, s))
                        .transpose()
                };
                Ok(NoisePoint {
                    model: Some(model),
                    cz_error: est(OpKind::Cz)?,
                    measure_error: est(OpKind::Measure)?,
                })
            })
            .collect(),
        SweepNoise::Targets {
            op,
            targets,
            search_steps,
        } => {
            let lookup = ErrorLookup::build(
                *op,
                &noise::default_grid(*search_steps)?,
                config.noise_shots,
                noise_seed,
            )?;
            targets
                .iter()
                .map(|&t| {
                    if t == 0.0 {
                        return Ok(NoisePoint::NOISELESS);
                    }
                    let (model, est) = lookup.model_for_target(t)?;
                    Ok(NoisePoint {
                        model: Some(model),
                        cz_error: (*op == OpKind::Cz).then_some(est),
                        measure_error: (*op == OpKind::Measure).then_some(est),
                    })
                })
                .collect()
        }
    }
}

/// Seed of the record for `(circuit_id, noise_index)`.
pub fn record_seed(base_seed: u64, circuit_id: usize, noise_index: usize) -> u64 {
    seed::derive(base_seed, &[circuit_id as u64, noise_index as u64])
}

struct Job<'a> {
    circuit_id: usize,
    spec: &'a CircuitSpec,
    noise: Option<NoiseModel>,
    seed: u64,
}

/// Runs every repeat of every job in parallel and returns per-job
/// accuracies and summed task time, in job order.
fn run_jobs(
    jobs: &[Job<'_>],
    dataset: &Dataset,
    holdout: &HoldoutConfig,
    repeats: usize,
    workers: usize,
) -> Result<Vec<(HoldoutSummary, f64)>> {
    let tasks: Vec<(usize, usize)> = (0..jobs.len())
        .flat_map(|j| (0..repeats).map(move |r| (j, r)))
        .collect();
    let results: Vec<(Result<f64>, f64)> = with_pool(workers, || {
        tasks
            .par_iter()
            .map(|&(j, r)| {
                let job = &jobs[j];
                let start = Instant::now();
                let acc = run_repeat(
                    job.spec,
                    dataset,
                    holdout,
                    job.noise.as_ref(),
                    repeat_seed(job.seed, r),
                );
                (acc, start.elapsed().as_secs_f64())
            })
            .collect()
    })?;
    let mut out = Vec::with_capacity(jobs.len());
    let mut it = results.into_iter();
    for job in jobs {
        let mut accs = Vec::with_capacity(repeats);
        let mut time = 0.0;
        for (acc, t) in it.by_ref().take(repeats) {
            let acc = acc.map_err(|e| Error::Record {
                circuit_id: job.circuit_id,
                seed: job.seed,
                source: Box::new(e),
            })?;
            accs.push(acc);
            time += t;
        }
        out.push((HoldoutSummary::from_accuracies(accs), time));
    }
    Ok(out)
}

/// Runs a sweep on an already loaded dataset. Records are ordered by
/// circuit id, then noise index.
pub fn run_sweep_on(config: &SweepConfig, dataset: &Dataset) -> Result<Vec<ExperimentRecord>> {
    config.validate_for(dataset)?;
    let features = config.holdout.effective_features(dataset);
    let specs = sample_sweep_circuits(config, features)?;
    let points = sweep_noise_points(config)?;
    let jobs: Vec<Job> = specs
        .iter()
        .enumerate()
        .flat_map(|(cid, spec)| {
            points.iter().enumerate().map(move |(ni, p)| Job {
                circuit_id: cid,
                spec,
                noise: p.model,
                seed: record_seed(config.base_seed, cid, ni),
            })
        })
        .collect();
    let results = run_jobs(
        &jobs,
        dataset,
        &config.holdout,
        config.repeats,
        config.workers,
    )?;
    Ok(jobs
        .iter()
        .zip(results)
        .enumerate()
        .map(|(k, (job, (summary, time)))| {
            let point = &points[k % points.len()];
            let (t1, t2) = point.times();
            ExperimentRecord {
                circuit_id: job.circuit_id,
                spec: job.spec.clone(),
                num_qubits: job.spec.num_qubits,
                depth: job.spec.depth(),
                num_cz_gates: job.spec.num_cz_gates(),
                num_parameters: job.spec.num_parameters,
                dataset: dataset.name.clone(),
                pca_k: config.holdout.pca_components,
                noise_t1_ns: t1,
                noise_t2_ns: t2,
                cz_error: point.cz_error,
                measure_error: point.measure_error,
                accuracies: summary.accuracies,
                mean_accuracy: summary.mean,
                std_accuracy: summary.std,
                wall_time_s: config.record_wall_time.then_some(time),
            }
        })
        .collect())
}

/// Loads the dataset, runs the sweep and writes the CSV.
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<ExperimentRecord>, PathBuf)> {
    let dataset = config.source.load()?;
    let records = run_sweep_on(config, &dataset)?;
    let path = config.output_path();
    std::fs::create_dir_all(&config.output_dir)?;
    write_records(BufWriter::new(File::create(&path)?), &records)?;
    Ok((records, path))
}

fn best_by(
    records: &[ExperimentRecord],
    key: impl Fn(&ExperimentRecord) -> usize,
) -> Vec<(usize, f64)> {
    let mut best: BTreeMap<usize, f64> = BTreeMap::new();
    for r in records {
        best.entry(key(r))
            .and_modify(|b| *b = b.max(r.mean_accuracy))
            .or_insert(r.mean_accuracy);
    }
    best.into_iter().collect()
}

/// Best mean accuracy per exact depth, ascending by depth.
pub fn aggregate_best_by_depth(records: &[ExperimentRecord]) -> Vec<(usize, f64)> {
    best_by(records, |r| r.depth)
}

/// Best mean accuracy per qubit count, ascending by qubit count.
pub fn aggregate_best_by_qubits(records: &[ExperimentRecord]) -> Vec<(usize, f64)> {
    best_by(records, |r| r.num_qubits)
}

/// Inputs of a noise-curve run with the circuits already at hand.
#[derive(Debug, Clone)]
pub struct NoiseCurveSetup<'a> {
    pub dataset: &'a Dataset,
    pub holdout: HoldoutConfig,
    pub circuits: Vec<(usize, CircuitSpec)>,
    pub op: OpKind,
    pub targets: Vec<f64>,
    pub search_grid: Vec<NoiseModel>,
    pub noise_shots: u64,
    pub repeats: usize,
    pub base_seed: u64,
    pub workers: usize,
}

/// Trains fixed circuits under a series of target error rates.
///
/// A 0-error row (noiseless training) is always included first. All
/// targets of one circuit share the seeds of its noiseless sweep record, so
/// accuracy differences come from the noise alone and the baseline row
/// matches a noiseless sweep run with the same base seed.
pub fn noise_curve(setup: &NoiseCurveSetup<'_>) -> Result<Vec<NoiseCurveRow>> {
    let mut targets = setup.targets.clone();
    if !targets.contains(&0.0) {
        targets.insert(0, 0.0);
    }
    let lookup = ErrorLookup::build(
        setup.op,
        &setup.search_grid,
        setup.noise_shots,
        seed::derive(setup.base_seed, &[stream::NOISE]),
    )?;
    let resolved: Vec<(f64, Option<(NoiseModel, f64)>)> = targets
        .iter()
        .map(|&t| {
            Ok((
                t,
                if t == 0.0 {
                    None
                } else {
                    Some(lookup.model_for_target(t)?)
                },
            ))
        })
        .collect::<Result<_>>()?;

    for (_, spec) in &setup.circuits {
        if spec.num_features != setup.holdout.effective_features(setup.dataset) {
            return Err(Error::Config(format!(
                "circuit expects {} features, dataset provides {}",
                spec.num_features,
                setup.holdout.effective_features(setup.dataset)
            )));
        }
    }
    let jobs: Vec<Job> = setup
        .circuits
        .iter()
        .flat_map(|(cid, spec)| {
            resolved.iter().map(move |(_, m)| Job {
                circuit_id: *cid,
                spec,
                noise: m.map(|(model, _)| model),
                seed: record_seed(setup.base_seed, *cid, 0),
            })
        })
        .collect();
    let results = run_jobs(
        &jobs,
        setup.dataset,
        &setup.holdout,
        setup.repeats,
        setup.workers,
    )?;
    Ok(jobs
        .iter()
        .zip(results)
        .enumerate()
        .map(|(k, (job, (summary, _)))| {
            let (target, chosen) = resolved[k % resolved.len()];
            let times = chosen.and_then(|(m, _)| m.times());
            NoiseCurveRow {
                circuit_id: job.circuit_id,
                depth: job.spec.depth(),
                op_kind: setup.op,
                target_error: target,
                estimated_error: chosen.map_or(0.0, |(_, e)| e),
                t1_ns: times.map(|t| t.0),
                t2_ns: times.map(|t| t.1),
                accuracies: summary.accuracies,
                mean_accuracy: summary.mean,
                std_accuracy: summary.std,
            }
        })
        .collect())
}

/// Loads circuits from a previous sweep's CSV and runs the noise curve.
pub fn run_noise_curve(config: &NoiseCurveConfig) -> Result<(Vec<NoiseCurveRow>, PathBuf)> {
    let dataset = config.source.load()?;
    let records = read_records(File::open(&config.specs_csv)?)?;
    let circuits = config
        .circuit_ids
        .iter()
        .map(|&id| {
            records
                .iter()
                .find(|r| r.circuit_id == id)
                .map(|r| (id, r.spec.clone()))
                .ok_or_else(|| {
                    Error::Config(format!(
                        "circuit {id} not found in {}",
                        config.specs_csv.display()
                    ))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let setup = NoiseCurveSetup {
        dataset: &dataset,
        holdout: config.holdout.clone(),
        circuits,
        op: config.op,
        targets: config.targets.clone(),
        search_grid: noise::default_grid(config.search_steps)?,
        noise_shots: config.noise_shots,
        repeats: config.repeats,
        base_seed: config.base_seed,
        workers: config.workers,
    };
    let rows = noise_curve(&setup)?;
    let path = config.output_path();
    std::fs::create_dir_all(&config.output_dir)?;
    write_noise_curve(BufWriter::new(File::create(&path)?), &rows)?;
    Ok((rows, path))
}

/// Estimates the error surface over a T1/T2 grid and writes it as CSV.
pub fn run_error_surface(config: &ErrorSurfaceConfig) -> Result<(Vec<SurfacePoint>, PathBuf)> {
    let grid = noise::grid(config.t1_range, config.t2_range, config.steps)?;
    let points = noise::error_surface(&grid, &config.ops, config.shots, config.seed)?;
    let path = config.output_path();
    std::fs::create_dir_all(&config.output_dir)?;
    noise::write_error_surface(BufWriter::new(File::create(&path)?), &points)?;
    Ok((points, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::sample_circuit_seeded;

    fn record(depth: usize, qubits: usize, mean: f64) -> ExperimentRecord {
        let spec = sample_circuit_seeded(2, 4, false, false, 1).unwrap();
        ExperimentRecord {
            circuit_id: 0,
            num_parameters: spec.num_parameters,
            spec,
            num_qubits: qubits,
            depth,
            num_cz_gates: 1,
            dataset: "t".into(),
            pca_k: None,
            noise_t1_ns: None,
            noise_t2_ns: None,
            cz_error: None,
            measure_error: None,
            accuracies: vec![mean],
            mean_accuracy: mean,
            std_accuracy: 0.0,
            wall_time_s: None,
        }
    }

    #[test]
    fn depth_aggregation() {
        assert_eq!(
            aggregate_best_by_depth(&[record(8, 2, 0.9)]),
            vec![(8, 0.9)]
        );
        assert_eq!(
            aggregate_best_by_depth(&[record(8, 2, 0.6), record(8, 3, 0.7)]),
            vec![(8, 0.7)]
        );
        assert_eq!(
            aggregate_best_by_depth(&[record(12, 2, 0.6), record(8, 3, 0.7)]),
            vec![(8, 0.7), (12, 0.6)]
        );
    }

    #[test]
    fn qubit_aggregation() {
        assert_eq!(
            aggregate_best_by_qubits(&[record(8, 2, 0.9)]),
            vec![(2, 0.9)]
        );
        assert_eq!(
            aggregate_best_by_qubits(&[record(8, 4, 0.6), record(9, 4, 0.8)]),
            vec![(4, 0.8)]
        );
        let out = aggregate_best_by_qubits(&[record(8, 4, 0.6), record(9, 2, 0.8)]);
        assert_eq!(out, vec![(2, 0.8), (4, 0.6)]);
        assert!(!out.iter().any(|(q, _)| *q == 3));
    }

    #[test]
    fn records_round_trip_through_csv() {
        let mut r = record(8, 2, 0.75);
        r.accuracies = vec![0.5, 1.0];
        r.std_accuracy = 0.5f64.sqrt() / 2.0 * 2.0f64.sqrt();
        r.cz_error = Some(0.125);
        r.noise_t1_ns = Some(100.0);
        r.noise_t2_ns = Some(150.5);
        let mut buf = Vec::new();
        write_records(&mut buf, &[r.clone()]).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back, vec![r]);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("circuit_id,spec,num_qubits,depth,num_cz_gates,num_parameters,dataset,pca_k,noise_t1_ns,noise_t2_ns,cz_error,measure_error,acc_1,acc_2,mean_accuracy,std_accuracy,wall_time_s\n"));
    }
}
