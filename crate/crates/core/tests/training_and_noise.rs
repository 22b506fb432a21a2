use std::f64::consts::PI;

use proptest::prelude::*;

use vqc_bench::circuits::{sample_circuit_seeded, CircuitSpec, Layout};
use vqc_bench::data::{load_dataset, EncodingParams, Schema};
use vqc_bench::noise::{default_grid, estimate_error, ErrorLookup, NoiseModel, OpKind};
use vqc_bench::training::{
    cobyla_minimize, evaluate, exact_objective, holdout_repeat, objective, prepare_split, train,
    EncodedSet, HoldoutConfig, OutputMapping, TrainConfig,
};

fn quick_config(max_epochs: usize) -> TrainConfig {
    TrainConfig {
        max_epochs,
        ..TrainConfig::default()
    }
}

/// Two qubits, layers F, CZ(0,1), P. Qubit 0 always sees angle pi and so
/// stays in |0>, leaving the CZ inert; qubit 1 carries the class in the
/// sign of a +-pi/2 angle, which a parameter of pi/2 rotates onto |0>/|1>.
fn toy_problem() -> (CircuitSpec, EncodedSet) {
    let spec =
        CircuitSpec::from_layout(2, 2, false, false, Layout::default(), vec![vec![(0, 1)]], 0)
            .unwrap();
    let set = EncodedSet {
        angles: vec![
            vec![PI, PI / 2.0],
            vec![PI, -PI / 2.0],
            vec![PI, PI / 2.0],
            vec![PI, -PI / 2.0],
        ],
        labels: vec![0, 1, 0, 1],
        num_classes: 2,
    };
    (spec, set)
}

#[test]
fn toy_problem_has_a_perfect_solution_and_training_finds_it() {
    let (spec, set) = toy_problem();
    let steps = 16;
    let grid = (0..steps).map(|i| -PI + 2.0 * PI * i as f64 / steps as f64);
    let (best_loss, best) = grid
        .clone()
        .flat_map(|a| grid.clone().map(move |b| vec![a, b]))
        .map(|p| (exact_objective(&p, &spec, &set, None).unwrap(), p))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .unwrap();
    // Perfect separation: loss of a one-hot prediction, ln(1 + e^-1).
    assert!(
        (best_loss - (1.0 + (-1.0f64).exp()).ln()).abs() < 1e-9,
        "{best_loss} at {best:?}"
    );
    assert!(((best[1].abs()) - PI / 2.0).abs() < 1e-12);

    let model = train(&spec, &set, &quick_config(60), None, 3).unwrap();
    assert_eq!(model.parameters.len(), spec.num_parameters);
    assert_eq!(evaluate(&model, &set, 300, None, 3).unwrap(), 1.0);
}

#[test]
fn sampled_objective_converges_to_exact_objective() {
    let iris = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &Schema::csv_with_header(),
    )
    .unwrap();
    let cfg = HoldoutConfig {
        train_size: 30,
        test_size: 30,
        pca_components: None,
        encoding: EncodingParams::default(),
        train: quick_config(10),
    };
    let (train_set, _) = prepare_split(&iris, &cfg, 9).unwrap();
    let spec = sample_circuit_seeded(3, 4, false, false, 12).unwrap();
    let params: Vec<f64> = (0..spec.num_parameters).map(|i| (i as f64).sin()).collect();
    let exact = exact_objective(&params, &spec, &train_set, None).unwrap();
    let sampled = objective(&params, &spec, &train_set, 100_000, None, 1, 1).unwrap();
    assert!((exact - sampled).abs() < 0.01, "{exact} vs {sampled}");

    let noise = NoiseModel::thermal(5000.0, 4000.0).unwrap();
    let exact = exact_objective(&params, &spec, &train_set, Some(&noise)).unwrap();
    let sampled = objective(&params, &spec, &train_set, 100_000, Some(&noise), 1, 1).unwrap();
    assert!((exact - sampled).abs() < 0.01, "{exact} vs {sampled}");
}

#[test]
fn holdout_is_reproducible() {
    let iris = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &Schema::csv_with_header(),
    )
    .unwrap();
    let cfg = HoldoutConfig {
        train_size: 60,
        test_size: 30,
        pca_components: Some(2),
        encoding: EncodingParams::default(),
        train: quick_config(25),
    };
    let spec = sample_circuit_seeded(2, 2, false, false, 4).unwrap();
    let noise = NoiseModel::only(OpKind::Cz, 2000.0, 2000.0).unwrap();
    let a = holdout_repeat(&spec, &iris, 3, &cfg, Some(&noise), 77).unwrap();
    let b = holdout_repeat(&spec, &iris, 3, &cfg, Some(&noise), 77).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.accuracies.len(), 3);
    let mean = a.accuracies.iter().sum::<f64>() / 3.0;
    assert!((a.mean - mean).abs() < 1e-12);
}

#[test]
fn training_respects_the_epoch_budget() {
    let (spec, set) = toy_problem();
    let model = train(&spec, &set, &quick_config(7), None, 1).unwrap();
    assert!(model.epochs_used <= 7);
    assert_eq!(model.loss_history.len(), model.epochs_used);
}

#[test]
fn measure_error_matches_amplitude_damping() {
    let model = NoiseModel::only(OpKind::Measure, 1000.0, 1000.0).unwrap();
    let shots = 10_000u64;
    let est = estimate_error(OpKind::Measure, &model, shots, 5).unwrap();
    // |0> never flips; |1> flips with probability 1 - e^-1.
    let flip = 1.0 - (-1.0f64).exp();
    let sigma = (flip * (1.0 - flip) / shots as f64).sqrt() / 2.0;
    assert!((est - flip / 2.0).abs() <= 3.0 * sigma, "{est}");
}

#[test]
fn errors_do_not_grow_with_coherence_time() {
    for op in [OpKind::Cz, OpKind::Measure] {
        let errors: Vec<f64> = [100.0, 300.0, 1000.0, 3000.0, 10_000.0, 80_000.0]
            .iter()
            .map(|&t1| {
                estimate_error(op, &NoiseModel::thermal(t1, 1.5 * t1).unwrap(), 10_000, 2).unwrap()
            })
            .collect();
        assert!(
            errors.windows(2).all(|w| w[1] <= w[0] + 0.01),
            "{op}: {errors:?}"
        );
        assert!(errors.iter().all(|e| (0.0..=1.0).contains(e)));
    }
}

#[test]
fn target_lookup_is_monotone_and_bounded() {
    let lookup = ErrorLookup::build(OpKind::Cz, &default_grid(12).unwrap(), 10_000, 4).unwrap();
    let targets = [0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.35];
    let chosen: Vec<f64> = targets
        .iter()
        .map(|&t| lookup.model_for_target(t).unwrap().1)
        .collect();
    assert!(chosen.windows(2).all(|w| w[0] <= w[1]), "{chosen:?}");
    let (corner, _) = lookup.model_for_target(0.35).unwrap();
    assert!(corner.times().unwrap().0 <= 200.0);
    assert!(lookup.model_for_target(0.9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cobyla_never_worse_than_start(
        centre in prop::collection::vec(-5.0f64..5.0, 1..6),
        x0_seed in prop::collection::vec(-5.0f64..5.0, 6),
        scale in 0.1f64..10.0,
    ) {
        let n = centre.len();
        let f = |x: &[f64]| -> f64 {
            x.iter().zip(&centre).enumerate().map(|(i, (a, c))| scale * (1.0 + i as f64) * (a - c).powi(2)).sum()
        };
        let x0 = &x0_seed[..n];
        let r = cobyla_minimize(f, x0, 1.0, 1e-4, 50 * (n + 1)).unwrap();
        prop_assert!(r.f <= f(x0));
        prop_assert!(r.evals <= 50 * (n + 1));
    }

    #[test]
    fn class_probabilities_are_scale_invariant(raw in prop::collection::vec(0.0f64..1.0, 16), k in 2usize..=8, scale in 0.1f64..100.0) {
        let mapping = OutputMapping::new(4, k).unwrap();
        let p = mapping.class_probabilities(&raw);
        let scaled: Vec<f64> = raw.iter().map(|x| x * scale).collect();
        let q = mapping.class_probabilities(&scaled);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(vqc_bench::training::argmax(&p), vqc_bench::training::argmax(&q));
    }
}
