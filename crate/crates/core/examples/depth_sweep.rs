// A small noiseless design-space sweep on Iris, aggregated by depth and by
// qubit count.
//
// ```bash
// cargo run --release --example depth_sweep
// ```

use vqc_bench::data::{EncodingParams, Schema};
use vqc_bench::harness::{
    aggregate_best_by_depth, aggregate_best_by_qubits, run_sweep_on, DataSource, SweepConfig,
};
use vqc_bench::training::{HoldoutConfig, TrainConfig};

pub fn run() -> vqc_bench::Result<()> {
    let cfg = SweepConfig {
        source: DataSource {
            name: "iris".into(),
            path: concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv").into(),
            schema: Schema::csv_with_header(),
        },
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
        qubit_range: (2, 4),
        num_circuits: 8,
        repeat_features: false,
        all_pairs: false,
        repeats: 3,
        noise: None,
        noise_shots: 10_000,
        base_seed: 7,
        output_dir: std::env::temp_dir(),
        workers: 0,
        record_wall_time: false,
    };
    let dataset = cfg.source.load()?;
    let records = run_sweep_on(&cfg, &dataset)?;
    for r in &records {
        println!(
            "circuit {}: {} qubits, depth {:>2}, mean accuracy {:.3} +- {:.3}",
            r.circuit_id, r.num_qubits, r.depth, r.mean_accuracy, r.std_accuracy
        );
    }
    println!("best by depth:  {:?}", aggregate_best_by_depth(&records));
    println!("best by qubits: {:?}", aggregate_best_by_qubits(&records));
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
