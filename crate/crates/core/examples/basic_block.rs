// The native gate set on its own: one basic block, an entangling CZ,
// shot sampling, and thermal relaxation on a density matrix.
//
// ```bash
// cargo run --example basic_block
// ```

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqc_bench::simulator::{sample_counts, GateOp, QuantumState};

fn block(qubit: usize, angle: f64) -> [GateOp; 3] {
    [
        GateOp::RxHalfPi(qubit),
        GateOp::Rz(qubit, angle),
        GateOp::RxHalfPi(qubit),
    ]
}

pub fn run() -> vqc_bench::Result<()> {
    for angle in [0.0, PI / 2.0, PI] {
        let mut s = QuantumState::zero_state(1, false)?;
        s.apply_all(&block(0, angle))?;
        println!(
            "block({angle:.4}) |0>  ->  P(1) = {:.4}",
            s.probabilities()[1]
        );
    }

    // Bell-like state: |+> on both qubits, then CZ, then rotate qubit 1 back.
    let mut s = QuantumState::zero_state(2, false)?;
    s.apply_all(&block(0, PI / 2.0))?;
    s.apply_all(&block(1, PI / 2.0))?;
    s.apply(&GateOp::Cz(0, 1))?;
    s.apply_all(&block(1, PI / 2.0))?;
    let counts = sample_counts(&s, 1000, &mut ChaCha8Rng::seed_from_u64(1));
    println!(
        "entangled pair, 1000 shots: {:?}",
        counts.to_bitstring_map()
    );

    // |1> decays towards |0> under relaxation.
    let mut s = QuantumState::zero_state(1, true)?;
    s.apply_all(&block(0, 0.0))?;
    for _ in 0..3 {
        s.apply(&GateOp::Relax {
            qubit: 0,
            t1: 1000.0,
            t2: 1500.0,
            duration: 500.0,
        })?;
        println!(
            "after 500 ns more: P(1) = {:.4}, trace = {:.12}",
            s.probabilities()[1],
            s.trace()
        );
    }
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
