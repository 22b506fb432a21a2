// Trains one sampled circuit on Iris, noiseless and under CZ noise.
//
// ```bash
// cargo run --release --example train_iris
// ```

use vqc_bench::circuits::sample_circuit_seeded;
use vqc_bench::data::{load_dataset, EncodingParams, Schema};
use vqc_bench::noise::NoiseModel;
use vqc_bench::training::{evaluate, prepare_split, train, HoldoutConfig, TrainConfig};

pub fn run() -> vqc_bench::Result<()> {
    let iris = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &Schema::csv_with_header(),
    )?;
    let cfg = HoldoutConfig {
        train_size: 90,
        test_size: 60,
        pca_components: None,
        encoding: EncodingParams::default(),
        train: TrainConfig::default(),
    };
    let spec = sample_circuit_seeded(4, 4, false, false, 101)?;
    println!(
        "circuit: {} qubits, depth {}, {} parameters",
        spec.num_qubits,
        spec.depth(),
        spec.num_parameters
    );

    let (train_set, test_set) = prepare_split(&iris, &cfg, 5)?;
    let noisy = NoiseModel::thermal(2000.0, 2000.0)?.restricted_to(vqc_bench::OpKind::Cz);
    for (label, noise) in [
        ("noiseless", None),
        ("CZ noise (T1 = T2 = 2 us)", Some(&noisy)),
    ] {
        let model = train(&spec, &train_set, &cfg.train, noise, 5)?;
        let acc = evaluate(&model, &test_set, cfg.train.test_shots, noise, 5)?;
        let first = model.loss_history.first().copied().unwrap_or(f64::NAN);
        println!(
            "{label}: {} epochs ({:?}), loss {first:.4} -> {:.4}, test accuracy {acc:.3}",
            model.epochs_used,
            model.status,
            model.best_loss().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
