//! Design-space workbench for variational quantum classifiers.
//!
//! The crate is organised as a pipeline:
//!
//! - [`simulator`]: statevector and density-matrix simulation of the
//!   native gate set `{Rx(pi/2), Rz(theta), CZ}` plus thermal relaxation,
//!   with multinomial shot sampling.
//! - [`circuits`]: random sampling of circuit architectures, parameter
//!   binding and depth computation.
//! - [`data`]: dataset ingestion, stratified splits, standardisation,
//!   PCA and angle encoding.
//! - [`training`]: output mapping, loss, a COBYLA optimizer and the
//!   shot-scheduled training loop.
//! - [`noise`]: thermal-relaxation noise models, error estimation and the
//!   target-error lookup.
//! - [`harness`]: config-driven sweeps and CSV output.
//!
//! ```
//! use vqc_bench::circuits::{bind, sample_circuit_seeded};
//! use vqc_bench::simulator::QuantumState;
//!
//! let spec = sample_circuit_seeded(3, 4, false, false, 42).unwrap();
//! let params = vec![0.1; spec.num_parameters];
//! let gates = bind(&spec, &[0.2, -0.4, 0.6, 0.0], &params).unwrap();
//! let mut state = QuantumState::zero_state(3, false).unwrap();
//! state.apply_all(&gates).unwrap();
//! let total: f64 = state.probabilities().iter().sum();
//! assert!((total - 1.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuits;
pub mod data;
pub mod error;
pub mod harness;
pub mod noise;
pub mod seed;
pub mod simulator;
pub mod training;

pub use circuits::{bind, circuit_depth, sample_circuit, sample_circuit_seeded, CircuitSpec};
pub use data::{load_dataset, Dataset, EncodingParams, Schema};
pub use error::{Error, Result};
pub use noise::{NoiseModel, OpKind};
pub use simulator::{sample_counts, Counts, GateOp, QuantumState};
pub use training::{train, HoldoutConfig, TrainConfig, TrainedModel};
