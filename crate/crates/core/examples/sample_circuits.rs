// Draws random circuit architectures and prints their structure and depth.
//
// ```bash
// cargo run --example sample_circuits
// ```

use vqc_bench::circuits::{sample_circuit_seeded, Layer, RotationKind, Slot};

fn describe(layer: &Layer) -> String {
    match layer {
        Layer::Rotation(r) => {
            let slots: Vec<String> = r
                .slots
                .iter()
                .map(|s| match s {
                    Slot::Feature(f) => format!("f{f}"),
                    Slot::Parameter(p) => format!("p{p}"),
                })
                .collect();
            let kind = if r.kind == RotationKind::Feature {
                "F"
            } else {
                "P"
            };
            format!("{kind}[{}]", slots.join(" "))
        }
        Layer::Entangler(e) => {
            let pairs: Vec<String> = e.pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            format!("CZ[{}]", pairs.join(" "))
        }
    }
}

pub fn run() -> vqc_bench::Result<()> {
    for (qubits, features, repeat, all_pairs) in [
        (4, 4, false, false),
        (3, 7, false, false),
        (3, 4, true, true),
    ] {
        for seed in 0..3 {
            let spec = sample_circuit_seeded(qubits, features, repeat, all_pairs, seed)?;
            let layers: Vec<String> = spec.layers.iter().map(describe).collect();
            println!(
                "q={qubits} f={features} repeat={repeat} all_pairs={all_pairs} seed={seed}: depth {:>2}, {} params, {} CZ  {}",
                spec.depth(),
                spec.num_parameters,
                spec.num_cz_gates(),
                layers.join(" ")
            );
        }
    }
    let spec = sample_circuit_seeded(4, 4, false, false, 0)?;
    println!("serialized: {}", spec.to_json());
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
