// Accuracy of a shallow and a deep Iris circuit as the CZ error grows.
//
// ```bash
// cargo run --release --example noise_curve
// ```

use vqc_bench::circuits::sample_circuit_seeded;
use vqc_bench::data::{load_dataset, EncodingParams, Schema};
use vqc_bench::harness::{noise_curve, NoiseCurveSetup};
use vqc_bench::noise::{default_grid, OpKind};
use vqc_bench::training::{HoldoutConfig, TrainConfig};

pub fn run() -> vqc_bench::Result<()> {
    let iris = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &Schema::csv_with_header(),
    )?;
    let shallow = sample_circuit_seeded(4, 4, false, false, 101)?;
    let deep = (0..)
        .map(|s| sample_circuit_seeded(3, 4, true, true, s))
        .find(|c| c.as_ref().map_or(true, |c| c.depth() >= 40))
        .expect("unbounded search")?;
    let setup = NoiseCurveSetup {
        dataset: &iris,
        holdout: HoldoutConfig {
            train_size: 90,
            test_size: 60,
            pca_components: None,
            encoding: EncodingParams::default(),
            train: TrainConfig {
                max_epochs: 80,
                ..TrainConfig::default()
            },
        },
        circuits: vec![(0, shallow), (1, deep)],
        op: OpKind::Cz,
        targets: vec![0.05, 0.15, 0.35],
        search_grid: default_grid(12)?,
        noise_shots: 4000,
        repeats: 2,
        base_seed: 3,
        workers: 0,
    };
    for row in noise_curve(&setup)? {
        println!(
            "circuit {} (depth {:>2}): target {:.2} (estimated {:.3}) -> accuracy {:.3}",
            row.circuit_id, row.depth, row.target_error, row.estimated_error, row.mean_accuracy
        );
    }
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
