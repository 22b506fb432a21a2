//! Output mapping, loss, optimization and holdout evaluation.

pub mod cobyla;

use std::cell::RefCell;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{bind, CircuitSpec};
use crate::data::{self, Dataset, EncodingParams};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::seed::{self, stream};
use crate::simulator::{sample_counts, QuantumState};

pub use cobyla::{cobyla_minimize, CobylaResult, CobylaStatus};

/// Partition of the `2^n` basis indices into `K` equal contiguous ranges.
/// Indices at or beyond `K * block_size` are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputMapping {
    pub num_qubits: usize,
    pub num_classes: usize,
    pub block_size: usize,
}

impl OutputMapping {
    pub fn new(num_qubits: usize, num_classes: usize) -> Result<Self> {
        if num_classes == 0
            || num_qubits >= usize::BITS as usize
            || (1usize << num_qubits) < num_classes
        {
            return Err(Error::Constraint(format!(
                "{num_qubits} qubits cannot represent {num_classes} classes"
            )));
        }
        Ok(Self {
            num_qubits,
            num_classes,
            block_size: (1usize << num_qubits) / num_classes,
        })
    }

    /// Class probabilities from a (possibly unnormalized) distribution over
    /// basis indices. Falls back to uniform when no mass is retained.
    pub fn class_probabilities(&self, dist: &[f64]) -> Vec<f64> {
        let mut p: Vec<f64> = (0..self.num_classes)
            .map(|k| {
                dist[k * self.block_size..(k + 1) * self.block_size]
                    .iter()
                    .sum()
            })
            .collect();
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|x| *x /= total);
        } else {
            p.fill(1.0 / self.num_classes as f64);
        }
        p
    }
}

pub fn class_probabilities(dist: &[f64], mapping: &OutputMapping) -> Vec<f64> {
    mapping.class_probabilities(dist)
}

/// Negative log of the softmax of the class probabilities at `y`.
pub fn nll_loss(p: &[f64], y: usize) -> f64 {
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = max + p.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    log_sum - p[y]
}

/// Lowest class index among the maxima.
pub fn argmax(p: &[f64]) -> usize {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
            if x > best.1 {
                (i, x)
            } else {
                best
            }
        })
        .0
}

/// Samples with features already mapped to rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSet {
    pub angles: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl EncodedSet {
    pub fn encode(dataset: &Dataset, params: &EncodingParams) -> Self {
        Self {
            angles: dataset
                .features
                .iter()
                .map(|r| data::encode_row(r, params))
                .collect(),
            labels: dataset.labels.clone(),
            num_classes: dataset.num_classes,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Shot count used from epoch `1` up to and including `until_epoch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotStage {
    pub until_epoch: usize,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub rho_begin: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub init_range: (f64, f64),
    pub shot_schedule: Vec<ShotStage>,
    pub test_shots: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rho_begin: 1.0,
            tolerance: 0.0002,
            max_epochs: 200,
            init_range: (-PI, PI),
            shot_schedule: vec![
                ShotStage {
                    until_epoch: 20,
                    shots: 250,
                },
                ShotStage {
                    until_epoch: 50,
                    shots: 500,
                },
                ShotStage {
                    until_epoch: 200,
                    shots: 750,
                },
            ],
            test_shots: 300,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.rho_begin > 0.0) || !(self.tolerance > 0.0) || self.tolerance > self.rho_begin {
            return bad(format!(
                "need 0 < tolerance <= rho_begin (got {}, {})",
                self.tolerance, self.rho_begin
            ));
        }
        if self.max_epochs == 0 || self.test_shots == 0 {
            return bad("max_epochs and test_shots must be positive".into());
        }
        if !(self.init_range.0 <= self.init_range.1) {
            return bad(format!("init_range {:?} is empty", self.init_range));
        }
        let mut prev = 0;
        for stage in &self.shot_schedule {
            if stage.shots == 0 || stage.until_epoch <= prev {
                return bad("shot schedule stages must be increasing with positive shots".into());
            }
            prev = stage.until_epoch;
        }
        if prev < self.max_epochs {
            return bad(format!(
                "shot schedule covers {prev} of {} epochs",
                self.max_epochs
            ));
        }
        Ok(())
    }

    /// Shots for the 1-based `epoch`.
    pub fn shots_for_epoch(&self, epoch: usize) -> u64 {
        self.shot_schedule
            .iter()
            .find(|s| epoch <= s.until_epoch)
            .or(self.shot_schedule.last())
            .map_or(self.test_shots, |s| s.shots)
    }
}

/// Per-sample simulation of a bound circuit.
fn simulate(
    spec: &CircuitSpec,
    angles: &[f64],
    params: &[f64],
    noise: Option<&NoiseModel>,
) -> Result<QuantumState> {
    let gates = bind(spec, angles, params)?;
    match noise.filter(|m| !m.is_noiseless()) {
        Some(model) => {
            let mut state = QuantumState::zero_state(spec.num_qubits, true)?;
            state.apply_all(&model.instrument(spec.num_qubits, &gates))?;
            Ok(state)
        }
        None => {
            let mut state = QuantumState::zero_state(spec.num_qubits, false)?;
            state.apply_all(&gates)?;
            Ok(state)
        }
    }
}

/// Class probabilities of one sample estimated from `shots` measurements.
pub fn predict_proba<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    mapping: &OutputMapping,
    angles: &[f64],
    params: &[f64],
    shots: u64,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let state = simulate(spec, angles, params, noise)?;
    let counts = sample_counts(&state, shots, rng);
    Ok(mapping.class_probabilities(&counts.to_distribution()))
}

/// Mean loss over `train_set` at `params`, estimated with `shots`
/// measurements per sample. The random stream of sample `i` is derived from
/// `(seed, epoch, i)`.
pub fn objective(
    params: &[f64],
    spec: &CircuitSpec,
    train_set: &EncodedSet,
    shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
    epoch: usize,
) -> Result<f64> {
    if train_set.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mapping = OutputMapping::new(spec.num_qubits, train_set.num_classes)?;
    let mut total = 0.0;
    for (i, (angles, &y)) in train_set.angles.iter().zip(&train_set.labels).enumerate() {
        let mut rng = seed::derive_rng(seed, &[stream::TRAIN, epoch as u64, i as u64]);
        let p = predict_proba(spec, &mapping, angles, params, shots, noise, &mut rng)?;
        total += nll_loss(&p, y);
    }
    Ok(total / train_set.len() as f64)
}

/// The infinite-shot objective, from exact outcome probabilities.
pub fn exact_objective(
    params: &[f64],
    spec: &CircuitSpec,
    train_set: &EncodedSet,
    noise: Option<&NoiseModel>,
) -> Result<f64> {
    let mapping = OutputMapping::new(spec.num_qubits, train_set.num_classes)?;
    let mut total = 0.0;
    for (angles, &y) in train_set.angles.iter().zip(&train_set.labels) {
        let state = simulate(spec, angles, params, noise)?;
        total += nll_loss(&mapping.class_probabilities(&state.probabilities()), y);
    }
    Ok(total / train_set.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: CircuitSpec,
    pub parameters: Vec<f64>,
    /// Mean training loss of every objective evaluation, in order.
    pub loss_history: Vec<f64>,
    pub epochs_used: usize,
    pub status: CobylaStatus,
}

impl TrainedModel {
    pub fn best_loss(&self) -> Option<f64> {
        self.loss_history.iter().copied().min_by(f64::total_cmp)
    }
}

/// Trains the circuit parameters with COBYLA. One epoch is one objective
/// evaluation; its shot count follows `config.shot_schedule`.
pub fn train(
    spec: &CircuitSpec,
    train_set: &EncodedSet,
    config: &TrainConfig,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<TrainedModel> {
    config.validate()?;
    check_width(spec, train_set)?;
    OutputMapping::new(spec.num_qubits, train_set.num_classes)?;
    if spec.num_parameters == 0 {
        return Ok(TrainedModel {
            spec: spec.clone(),
            parameters: Vec::new(),
            loss_history: Vec::new(),
            epochs_used: 0,
            status: CobylaStatus::Converged,
        });
    }
    let mut init_rng = seed::derive_rng(seed, &[stream::INIT]);
    let (lo, hi) = config.init_range;
    let x0: Vec<f64> = (0..spec.num_parameters)
        .map(|_| {
            if lo < hi {
                init_rng.random_range(lo..hi)
            } else {
                lo
            }
        })
        .collect();

    let train_seed = seed::derive(seed, &[stream::TRAIN]);
    let history = RefCell::new(Vec::with_capacity(config.max_epochs));
    let failure = RefCell::new(None);
    let result = cobyla_minimize(
        |params| {
            let epoch = history.borrow().len() + 1;
            let shots = config.shots_for_epoch(epoch);
            match objective(params, spec, train_set, shots, noise, train_seed, epoch) {
                Ok(loss) => {
                    history.borrow_mut().push(loss);
                    loss
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &x0,
        config.rho_begin,
        config.tolerance,
        config.max_epochs,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let loss_history = history.into_inner();
    Ok(TrainedModel {
        spec: spec.clone(),
        parameters: result.x,
        epochs_used: loss_history.len(),
        loss_history,
        status: result.status,
    })
}

fn check_width(spec: &CircuitSpec, set: &EncodedSet) -> Result<()> {
    if let Some(row) = set.angles.iter().find(|r| r.len() != spec.num_features) {
        return Err(Error::Binding(format!(
            "circuit expects {} features, sample has {}",
            spec.num_features,
            row.len()
        )));
    }
    Ok(())
}

/// Class predictions for `test_set` from `shots` measurements per sample.
pub fn predict(
    model: &TrainedModel,
    test_set: &EncodedSet,
    shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<Vec<usize>> {
    check_width(&model.spec, test_set)?;
    let mapping = OutputMapping::new(model.spec.num_qubits, test_set.num_classes)?;
    test_set
        .angles
        .iter()
        .enumerate()
        .map(|(i, angles)| {
            let mut rng = seed::derive_rng(seed, &[stream::TEST, i as u64]);
            let p = predict_proba(
                &model.spec,
                &mapping,
                angles,
                &model.parameters,
                shots,
                noise,
                &mut rng,
            )?;
            Ok(argmax(&p))
        })
        .collect()
}

/// Fraction of `test_set` classified correctly.
pub fn evaluate(
    model: &TrainedModel,
    test_set: &EncodedSet,
    test_shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<f64> {
    if test_set.is_empty() {
        return Err(Error::Training("empty test set".into()));
    }
    let predictions = predict(model, test_set, test_shots, noise, seed)?;
    let correct = predictions
        .iter()
        .zip(&test_set.labels)
        .filter(|(p, y)| p == y)
        .count();
    Ok(correct as f64 / test_set.len() as f64)
}

/// Data preparation and training settings for one holdout run.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutConfig {
    pub train_size: usize,
    pub test_size: usize,
    pub pca_components: Option<usize>,
    pub encoding: EncodingParams,
    pub train: TrainConfig,
}

impl HoldoutConfig {
    /// Number of features the circuits see after preprocessing.
    pub fn effective_features(&self, dataset: &Dataset) -> usize {
        self.pca_components
            .unwrap_or_else(|| dataset.num_features())
    }
}

/// Split, standardize, optionally project onto principal components (then
/// standardize the components), and encode both splits.
pub fn prepare_split(
    dataset: &Dataset,
    config: &HoldoutConfig,
    seed: u64,
) -> Result<(EncodedSet, EncodedSet)> {
    let (train, test) = data::split(dataset, config.train_size, config.test_size, seed)?;
    let (mut train, mut test, _, _) = data::standardize_fit_apply(&train, &test)?;
    if let Some(k) = config.pca_components {
        let model = data::pca_fit(&train.features, k)?;
        let (tr, te, _, _) = data::standardize_fit_apply(
            &data::pca_transform(&model, &train),
            &data::pca_transform(&model, &test),
        )?;
        train = tr;
        test = te;
    }
    Ok((
        EncodedSet::encode(&train, &config.encoding),
        EncodedSet::encode(&test, &config.encoding),
    ))
}

/// Split, train and test once. Returns the test accuracy.
pub fn run_repeat(
    spec: &CircuitSpec,
    dataset: &Dataset,
    config: &HoldoutConfig,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<f64> {
    let (train_set, test_set) = prepare_split(dataset, config, seed)?;
    let model = train(spec, &train_set, &config.train, noise, seed)?;
    evaluate(&model, &test_set, config.train.test_shots, noise, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutSummary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
    pub accuracies: Vec<f64>,
}

impl HoldoutSummary {
    pub fn from_accuracies(accuracies: Vec<f64>) -> Self {
        let n = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / n;
        let std = if accuracies.len() > 1 {
            (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            accuracies,
        }
    }
}

/// Seed of repeat `index` under `base_seed`.
pub fn repeat_seed(base_seed: u64, index: usize) -> u64 {
    seed::derive(base_seed, &[index as u64])
}

/// Repeats the holdout experiment `repeats` times with derived seeds.
pub fn holdout_repeat(
    spec: &CircuitSpec,
    dataset: &Dataset,
    repeats: usize,
    config: &HoldoutConfig,
    noise: Option<&NoiseModel>,
    base_seed: u64,
) -> Result<HoldoutSummary> {
    if repeats == 0 {
        return Err(Error::Training("at least one repeat is required".into()));
    }
    let accuracies = (0..repeats)
        .map(|r| run_repeat(spec, dataset, config, noise, repeat_seed(base_seed, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HoldoutSummary::from_accuracies(accuracies))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_examples() {
        let m = OutputMapping::new(1, 2).unwrap();
        assert_eq!(m.class_probabilities(&[0.3, 0.7]), vec![0.3, 0.7]);
        let m = OutputMapping::new(2, 3).unwrap();
        let p = m.class_probabilities(&[0.25; 4]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(
            m.class_probabilities(&[0.0, 0.0, 0.0, 1.0]),
            vec![1.0 / 3.0; 3]
        );
        assert!(OutputMapping::new(2, 5).is_err());
    }

    #[test]
    fn loss_examples() {
        assert!((nll_loss(&[1.0 / 3.0; 3], 1) - 3f64.ln()).abs() < 1e-12);
        assert!((nll_loss(&[1.0, 0.0], 0) - (1.0 + (-1f64).exp()).ln()).abs() < 1e-12);
        assert!((nll_loss(&[0.0, 1.0], 0) - (1.0 + 1f64.exp()).ln()).abs() < 1e-12);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[1.0 / 3.0; 3]), 0);
    }

    #[test]
    fn schedule_lookup() {
        let c = TrainConfig::default();
        c.validate().unwrap();
        assert_eq!(c.shots_for_epoch(1), 250);
        assert_eq!(c.shots_for_epoch(20), 250);
        assert_eq!(c.shots_for_epoch(21), 500);
        assert_eq!(c.shots_for_epoch(50), 500);
        assert_eq!(c.shots_for_epoch(51), 750);
        assert_eq!(c.shots_for_epoch(200), 750);
        let mut short = c.clone();
        short.shot_schedule.truncate(2);
        assert!(short.validate().is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = HoldoutSummary::from_accuracies(vec![0.5]);
        assert_eq!(s.std, 0.0);
        let s = HoldoutSummary::from_accuracies(vec![0.5, 0.7, 0.9]);
        assert!((s.mean - 0.7).abs() < 1e-15);
        assert!((s.std - 0.2).abs() < 1e-15);
    }
}
