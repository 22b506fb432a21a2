use std::fs;
use std::path::Path;

use vqc_bench::harness::{
    aggregate_best_by_depth, read_records, record_seed, run_noise_curve, run_sweep,
    NoiseCurveConfig, SweepConfig,
};
use vqc_bench::training::holdout_repeat;

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/iris.csv");
    let body = body.replace("IRIS", &data.display().to_string());
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL_SWEEP: &str = r#"
dataset = "iris"
dataset_path = "IRIS"
train_size = 45
test_size = 30
qubit_range = [2, 4]
num_circuits = 3
repeats = 2
max_epochs = 30
base_seed = 99
output_dir = "out"
"#;

#[test]
fn small_sweep_has_one_row_per_circuit_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::from_file(write_config(dir.path(), "sweep.toml", SMALL_SWEEP)).unwrap();
    let (records, path) = run_sweep(&cfg).unwrap();
    let first = fs::read(&path).unwrap();
    assert_eq!(records.len(), 3);
    assert!(records
        .iter()
        .all(|r| (2..=4).contains(&r.num_qubits) && r.accuracies.len() == 2));
    assert_eq!(read_records(&first[..]).unwrap(), records);

    let (_, path) = run_sweep(&cfg).unwrap();
    assert_eq!(fs::read(path).unwrap(), first);

    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text
        .lines()
        .next()
        .unwrap()
        .contains(",acc_1,acc_2,mean_accuracy,"));

    // Any record can be recomputed from its serialized spec and derived seed.
    let iris = cfg.source.load().unwrap();
    let r = &records[1];
    let again = holdout_repeat(
        &r.spec,
        &iris,
        2,
        &cfg.holdout,
        None,
        record_seed(cfg.base_seed, 1, 0),
    )
    .unwrap();
    assert_eq!(again.accuracies, r.accuracies);

    let by_depth = aggregate_best_by_depth(&records);
    assert!(by_depth.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn grid_noise_multiplies_rows() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_SWEEP
        .replace("num_circuits = 3", "num_circuits = 2")
        .replace("repeats = 2", "repeats = 1")
        + "noise_op = \"cz\"\nnoise_grid_steps = 2\nnoise_shots = 2000\n";
    let cfg = SweepConfig::from_file(write_config(dir.path(), "noisy.toml", &body)).unwrap();
    let (records, _) = run_sweep(&cfg).unwrap();
    // A 2x2 grid keeps 3 physical points: (100,100), (80000,100), (80000,140000).
    assert_eq!(records.len(), 2 * 3);
    assert!(records
        .iter()
        .all(|r| r.cz_error.is_some() && r.measure_error.is_none()));
    assert!(records
        .windows(2)
        .all(|w| w[0].circuit_id <= w[1].circuit_id));
}

#[test]
fn noise_curve_baseline_matches_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::from_file(write_config(dir.path(), "sweep.toml", SMALL_SWEEP)).unwrap();
    let (records, csv) = run_sweep(&cfg).unwrap();
    let body = format!(
        r#"
dataset = "iris"
dataset_path = "IRIS"
train_size = 45
test_size = 30
max_epochs = 30
specs_csv = "{}"
circuit_ids = [0, 2]
noise_op = "measure"
noise_targets = [0.2]
noise_search_steps = 6
noise_shots = 2000
repeats = 2
base_seed = 99
output_dir = "curves"
"#,
        csv.display()
    );
    let nc = NoiseCurveConfig::from_file(write_config(dir.path(), "curve.toml", &body)).unwrap();
    let (rows, path) = run_noise_curve(&nc).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(path.ends_with("iris_noise_curve_measure.csv"));
    let baseline: Vec<_> = rows.iter().filter(|r| r.target_error == 0.0).collect();
    assert_eq!(baseline.len(), 2);
    for b in baseline {
        assert_eq!(b.accuracies, records[b.circuit_id].accuracies);
    }
    let header = fs::read_to_string(path).unwrap();
    assert!(header.starts_with(
        "circuit_id,depth,op_kind,target_error,estimated_error,mean_accuracy,std_accuracy"
    ));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_SWEEP.to_string() + "num_circuit = 4\n";
    let err = SweepConfig::from_file(write_config(dir.path(), "typo.toml", &body)).unwrap_err();
    assert!(err.to_string().contains("num_circuit"), "{err}");
}

#[test]
fn cli_runs_sweep_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SMALL_SWEEP);
    let bin = env!("CARGO_BIN_EXE_vqc-bench");
    let status = std::process::Command::new(bin)
        .args(["sweep", config.to_str().unwrap(), "--workers", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = dir.path().join("out/iris_sweep.csv");
    let records = read_records(fs::File::open(&csv).unwrap()).unwrap();

    let out = std::process::Command::new(bin)
        .args(["aggregate", csv.to_str().unwrap(), "--by", "depth"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("depth,best_mean_accuracy"));
    let expected: Vec<String> = aggregate_best_by_depth(&records)
        .iter()
        .map(|(d, a)| format!("{d},{a}"))
        .collect();
    assert_eq!(lines.map(String::from).collect::<Vec<_>>(), expected);

    let bad = std::process::Command::new(bin)
        .args(["aggregate", csv.to_str().unwrap(), "--by", "width"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
