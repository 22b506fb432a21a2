// Reduces Wine's 13 features to principal components and trains a
// 4-qubit circuit on the first four.
//
// ```bash
// cargo run --release --example wine_pca
// ```

use vqc_bench::circuits::sample_circuit_seeded;
use vqc_bench::data::{
    load_dataset, pca_fit, split, standardize_fit_apply, EncodingParams, Schema,
};
use vqc_bench::training::{holdout_repeat, HoldoutConfig, TrainConfig};

pub fn run() -> vqc_bench::Result<()> {
    let wine = load_dataset(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/wine.csv"),
        &Schema::csv_with_header(),
    )?;
    let (train, test) = split(&wine, 108, 70, 1)?;
    let (train, _, _, _) = standardize_fit_apply(&train, &test)?;
    let pca = pca_fit(&train.features, 6)?;
    let mut cumulative = 0.0;
    for (i, r) in pca.explained_variance_ratio.iter().enumerate() {
        cumulative += r;
        println!(
            "pc{}: {:.3} of variance (cumulative {cumulative:.3})",
            i + 1,
            r
        );
    }

    let cfg = HoldoutConfig {
        train_size: 108,
        test_size: 70,
        pca_components: Some(4),
        encoding: EncodingParams::default(),
        train: TrainConfig {
            max_epochs: 100,
            ..TrainConfig::default()
        },
    };
    let spec = sample_circuit_seeded(4, 4, false, false, 3)?;
    let summary = holdout_repeat(&spec, &wine, 3, &cfg, None, 8)?;
    println!(
        "depth {} circuit on 4 PCs: mean accuracy {:.3} +- {:.3} over {:?}",
        spec.depth(),
        summary.mean,
        summary.std,
        summary.accuracies
    );
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
