//! TOML run configurations. Unknown keys are rejected; relative paths are
//! resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::data::{self, Dataset, Delimiter, EncodingParams, LabelColumn, Schema};
use crate::error::{Error, Result};
use crate::noise::{OpKind, DEFAULT_ESTIMATION_SHOTS, DEFAULT_T1_RANGE, DEFAULT_T2_RANGE};
use crate::training::{HoldoutConfig, TrainConfig};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum LabelKey {
    Named(String),
    Index(usize),
}

/// Where a dataset lives and how its columns are laid out.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSource {
    pub name: String,
    pub path: PathBuf,
    pub schema: Schema,
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        let mut d = data::load_dataset(&self.path, &self.schema)?;
        d.name = self.name.clone();
        Ok(d)
    }
}

fn schema_from(
    has_header: Option<bool>,
    label_column: Option<&LabelKey>,
    delimiter: Option<Delimiter>,
    ignore_columns: &[usize],
) -> Result<Schema> {
    let label_column = match label_column {
        None => LabelColumn::Last,
        Some(LabelKey::Index(i)) => LabelColumn::Index(*i),
        Some(LabelKey::Named(s)) if s == "last" => LabelColumn::Last,
        Some(LabelKey::Named(s)) if s == "first" => LabelColumn::First,
        Some(LabelKey::Named(s)) => {
            return Err(Error::Config(format!(
                "label_column must be \"first\", \"last\" or a column index, got {s:?}"
            )))
        }
    };
    Ok(Schema {
        delimiter: delimiter.unwrap_or_default(),
        has_header: has_header.unwrap_or(true),
        label_column,
        ignore_columns: ignore_columns.to_vec(),
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, dir))
}

fn holdout_from(
    train_size: usize,
    test_size: usize,
    pca_components: Option<usize>,
    max_epochs: Option<usize>,
    alpha: Option<f64>,
    q: Option<f64>,
) -> Result<HoldoutConfig> {
    let defaults = EncodingParams::default();
    let encoding = EncodingParams::new(alpha.unwrap_or(defaults.alpha), q.unwrap_or(defaults.q))?;
    let mut train = TrainConfig::default();
    if let Some(m) = max_epochs {
        train.max_epochs = m;
    }
    train.validate()?;
    Ok(HoldoutConfig {
        train_size,
        test_size,
        pca_components,
        encoding,
        train,
    })
}

/// Noise applied to every circuit of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepNoise {
    /// Every point of a `steps x steps` log grid over the default T1/T2 ranges.
    Grid { op: NoiseOps, steps: usize },
    /// Grid models whose estimated error is nearest each target.
    Targets {
        op: OpKind,
        targets: Vec<f64>,
        search_steps: usize,
    },
}

/// Channels a grid sweep attaches noise to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseOps {
    One(OpKind),
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub source: DataSource,
    pub holdout: HoldoutConfig,
    pub qubit_range: (usize, usize),
    pub num_circuits: usize,
    pub repeat_features: bool,
    pub all_pairs: bool,
    pub repeats: usize,
    pub noise: Option<SweepNoise>,
    pub noise_shots: u64,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub record_wall_time: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    dataset: String,
    dataset_path: PathBuf,
    has_header: Option<bool>,
    label_column: Option<LabelKey>,
    delimiter: Option<Delimiter>,
    #[serde(default)]
    ignore_columns: Vec<usize>,
    train_size: usize,
    test_size: usize,
    pca_components: Option<usize>,
    qubit_range: (usize, usize),
    num_circuits: usize,
    #[serde(default)]
    repeat_features: bool,
    #[serde(default)]
    all_pairs: bool,
    repeats: Option<usize>,
    noise_op: Option<String>,
    noise_grid_steps: Option<usize>,
    noise_targets: Option<Vec<f64>>,
    noise_search_steps: Option<usize>,
    noise_shots: Option<u64>,
    base_seed: u64,
    output_dir: PathBuf,
    workers: Option<usize>,
    #[serde(default)]
    record_wall_time: bool,
    max_epochs: Option<usize>,
    encoding_alpha: Option<f64>,
    encoding_q: Option<f64>,
}

impl SweepConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let (f, dir): (SweepFile, _) = read_toml(path.as_ref())?;
        let noise = match (&f.noise_op, f.noise_grid_steps, &f.noise_targets) {
            (None, None, None) => None,
            (Some(op), Some(steps), None) => Some(SweepNoise::Grid {
                op: if op == "both" {
                    NoiseOps::Both
                } else {
                    NoiseOps::One(op.parse()?)
                },
                steps,
            }),
            (Some(op), None, Some(targets)) => Some(SweepNoise::Targets {
                op: op.parse()?,
                targets: targets.clone(),
                search_steps: f.noise_search_steps.unwrap_or(10),
            }),
            _ => {
                return Err(Error::Config(
                    "noise needs noise_op plus exactly one of noise_grid_steps / noise_targets"
                        .into(),
                ))
            }
        };
        let cfg = SweepConfig {
            source: DataSource {
                name: f.dataset,
                path: resolve(&dir, &f.dataset_path),
                schema: schema_from(
                    f.has_header,
                    f.label_column.as_ref(),
                    f.delimiter,
                    &f.ignore_columns,
                )?,
            },
            holdout: holdout_from(
                f.train_size,
                f.test_size,
                f.pca_components,
                f.max_epochs,
                f.encoding_alpha,
                f.encoding_q,
            )?,
            qubit_range: f.qubit_range,
            num_circuits: f.num_circuits,
            repeat_features: f.repeat_features,
            all_pairs: f.all_pairs,
            repeats: f.repeats.unwrap_or(10),
            noise,
            noise_shots: f.noise_shots.unwrap_or(DEFAULT_ESTIMATION_SHOTS),
            base_seed: f.base_seed,
            output_dir: resolve(&dir, &f.output_dir),
            workers: f.workers.unwrap_or(0),
            record_wall_time: f.record_wall_time,
        };
        cfg.validate_basic()?;
        Ok(cfg)
    }

    /// Checks that do not need the dataset.
    pub fn validate_basic(&self) -> Result<()> {
        let (lo, hi) = self.qubit_range;
        if lo < 2 || hi < lo {
            return Err(Error::Config(format!(
                "qubit_range [{lo}, {hi}] is invalid"
            )));
        }
        if self.num_circuits == 0 || self.repeats == 0 {
            return Err(Error::Config(
                "num_circuits and repeats must be positive".into(),
            ));
        }
        if self.noise_shots == 0 {
            return Err(Error::Config("noise_shots must be positive".into()));
        }
        Ok(())
    }

    /// Checks that the qubit range fits the effective feature count.
    pub fn validate_for(&self, dataset: &Dataset) -> Result<()> {
        self.validate_basic()?;
        let features = self.holdout.effective_features(dataset);
        if self.qubit_range.1 > features {
            return Err(Error::Config(format!(
                "qubit_range max {} exceeds the {features} features of {}",
                self.qubit_range.1, self.source.name
            )));
        }
        Ok(())
    }

    pub fn output_path(&self) -> PathBuf {
        self.output_dir
            .join(format!("{}_sweep.csv", self.source.name))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurveConfig {
    pub source: DataSource,
    pub holdout: HoldoutConfig,
    pub specs_csv: PathBuf,
    pub circuit_ids: Vec<usize>,
    pub op: OpKind,
    pub targets: Vec<f64>,
    pub search_steps: usize,
    pub noise_shots: u64,
    pub repeats: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub workers: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseCurveFile {
    dataset: String,
    dataset_path: PathBuf,
    has_header: Option<bool>,
    label_column: Option<LabelKey>,
    delimiter: Option<Delimiter>,
    #[serde(default)]
    ignore_columns: Vec<usize>,
    train_size: usize,
    test_size: usize,
    pca_components: Option<usize>,
    specs_csv: PathBuf,
    circuit_ids: Vec<usize>,
    noise_op: String,
    noise_targets: Vec<f64>,
    noise_search_steps: Option<usize>,
    noise_shots: Option<u64>,
    repeats: Option<usize>,
    base_seed: u64,
    output_dir: PathBuf,
    workers: Option<usize>,
    max_epochs: Option<usize>,
    encoding_alpha: Option<f64>,
    encoding_q: Option<f64>,
}

impl NoiseCurveConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let (f, dir): (NoiseCurveFile, _) = read_toml(path.as_ref())?;
        let cfg = NoiseCurveConfig {
            source: DataSource {
                name: f.dataset,
                path: resolve(&dir, &f.dataset_path),
                schema: schema_from(
                    f.has_header,
                    f.label_column.as_ref(),
                    f.delimiter,
                    &f.ignore_columns,
                )?,
            },
            holdout: holdout_from(
                f.train_size,
                f.test_size,
                f.pca_components,
                f.max_epochs,
                f.encoding_alpha,
                f.encoding_q,
            )?,
            specs_csv: resolve(&dir, &f.specs_csv),
            circuit_ids: f.circuit_ids,
            op: f.noise_op.parse()?,
            targets: f.noise_targets,
            search_steps: f.noise_search_steps.unwrap_or(10),
            noise_shots: f.noise_shots.unwrap_or(DEFAULT_ESTIMATION_SHOTS),
            repeats: f.repeats.unwrap_or(10),
            base_seed: f.base_seed,
            output_dir: resolve(&dir, &f.output_dir),
            workers: f.workers.unwrap_or(0),
        };
        if cfg.circuit_ids.is_empty() || cfg.targets.is_empty() || cfg.repeats == 0 {
            return Err(Error::Config(
                "circuit_ids, noise_targets and repeats must be non-empty".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn output_path(&self) -> PathBuf {
        self.output_dir
            .join(format!("{}_noise_curve_{}.csv", self.source.name, self.op))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSurfaceConfig {
    pub t1_range: (f64, f64),
    pub t2_range: (f64, f64),
    pub steps: usize,
    pub shots: u64,
    pub ops: Vec<OpKind>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ErrorSurfaceFile {
    t1_range: Option<(f64, f64)>,
    t2_range: Option<(f64, f64)>,
    steps: usize,
    shots: Option<u64>,
    ops: Option<Vec<String>>,
    seed: u64,
    output_dir: PathBuf,
}

impl ErrorSurfaceConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let (f, dir): (ErrorSurfaceFile, _) = read_toml(path.as_ref())?;
        let ops = match f.ops {
            None => vec![OpKind::Cz, OpKind::Measure],
            Some(list) => list.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        };
        Ok(Self {
            t1_range: f.t1_range.unwrap_or(DEFAULT_T1_RANGE),
            t2_range: f.t2_range.unwrap_or(DEFAULT_T2_RANGE),
            steps: f.steps,
            shots: f.shots.unwrap_or(DEFAULT_ESTIMATION_SHOTS),
            ops,
            seed: f.seed,
            output_dir: resolve(&dir, &f.output_dir),
        })
    }

    pub fn output_path(&self) -> PathBuf {
        self.output_dir.join("error_surface.csv")
    }
}
