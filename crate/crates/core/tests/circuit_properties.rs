use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vqc_bench::circuits::{
    bind, min_feature_layers, sample_circuit, sample_circuit_seeded, CircuitSpec, Layer,
    RotationKind, Slot,
};
use vqc_bench::simulator::GateOp;

/// Independent restatement of the structural invariants.
fn check_invariants(spec: &CircuitSpec) -> Result<(), String> {
    let q = spec.num_qubits;
    if q > spec.num_features {
        return Err("more qubits than features".into());
    }
    let mut feature_uses = vec![0; spec.num_features];
    let mut kinds = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        match (i % 2, layer) {
            (0, Layer::Rotation(r)) => {
                if r.slots.len() != q {
                    return Err(format!("layer {i} has {} slots", r.slots.len()));
                }
                for s in &r.slots {
                    match (r.kind, s) {
                        (RotationKind::Parameter, Slot::Feature(_)) => {
                            return Err("feature in parameter layer".into())
                        }
                        (_, Slot::Feature(f)) => feature_uses[*f] += 1,
                        _ => {}
                    }
                }
                kinds.push(r.kind);
            }
            (1, Layer::Entangler(e)) => {
                let all = q * (q - 1) / 2;
                let n = e.pairs.len();
                if spec.all_pairs && n != all || !spec.all_pairs && !(1..=all.min(3)).contains(&n) {
                    return Err(format!("layer {i} has {n} pairs"));
                }
                for (k, p) in e.pairs.iter().enumerate() {
                    for other in &e.pairs[k + 1..] {
                        let same = (p.0 == other.0 && p.1 == other.1)
                            || (p.0 == other.1 && p.1 == other.0);
                        if same {
                            return Err(format!("duplicate pair {p:?} in layer {i}"));
                        }
                    }
                }
            }
            _ => return Err(format!("layer {i} breaks rotation/entangler alternation")),
        }
    }
    if !matches!(spec.layers.last(), Some(Layer::Rotation(_))) {
        return Err("circuit ends with an entangler".into());
    }
    if kinds.windows(2).any(|w| w[0] == w[1]) {
        return Err("rotation kinds do not alternate".into());
    }
    let want = if spec.repeat_features { 2 } else { 1 };
    if feature_uses.iter().any(|&c| c != want) {
        return Err(format!("feature use counts {feature_uses:?}"));
    }
    Ok(())
}

/// Longest path in the full gate dependency DAG, by depth-first search from
/// every node.
fn dfs_depth(num_qubits: usize, gates: &[GateOp]) -> usize {
    let support: Vec<Vec<usize>> = gates
        .iter()
        .filter_map(|g| match *g {
            GateOp::RxHalfPi(q) | GateOp::Rz(q, _) => Some(vec![q]),
            GateOp::Cz(a, b) => Some(vec![a, b]),
            GateOp::MeasureAll => Some((0..num_qubits).collect()),
            GateOp::Relax { .. } => None,
        })
        .collect();
    let n = support.len();
    let successors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (i + 1..n)
                .filter(|&j| support[i].iter().any(|q| support[j].contains(q)))
                .collect()
        })
        .collect();
    let mut memo = vec![0usize; n];
    for i in (0..n).rev() {
        memo[i] = 1 + successors[i].iter().map(|&j| memo[j]).max().unwrap_or(0);
    }
    memo.into_iter().max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sampled_specs_satisfy_invariants(seed in any::<u64>(), q in 2usize..=10, extra in 0usize..=6, repeat in any::<bool>(), all_pairs in any::<bool>()) {
        let f = (q + extra).min(16);
        let spec = sample_circuit_seeded(q, f, repeat, all_pairs, seed).unwrap();
        prop_assert_eq!(check_invariants(&spec), Ok(()));
        prop_assert_eq!(&spec, &sample_circuit_seeded(q, f, repeat, all_pairs, seed).unwrap());
        prop_assert_eq!(CircuitSpec::from_json(&spec.to_json()).unwrap(), spec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn depth_matches_dag_longest_path(seed in any::<u64>(), q in 2usize..=6, extra in 0usize..=5, repeat in any::<bool>()) {
        let spec = sample_circuit(q, q + extra, repeat, false, seed, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let gates = bind(&spec, &vec![0.1; spec.num_features], &vec![0.2; spec.num_parameters]).unwrap();
        prop_assert_eq!(spec.depth(), dfs_depth(q, &gates));

        let rotation_layers = spec.layers.iter().filter(|l| matches!(l, Layer::Rotation(_))).count();
        if rotation_layers > 1 {
            let lower = 3 * 2 * min_feature_layers(spec.num_features, q) - 3 + 1 + 1;
            prop_assert!(spec.depth() >= lower, "depth {} below {}", spec.depth(), lower);
        }
    }
}

#[test]
fn feature_rows_follow_figure_layout() {
    // 7 features on 3 qubits: [f0 f1 f2], [f3 f4 f5], [f6 p p].
    let spec = sample_circuit_seeded(3, 7, false, false, 5).unwrap();
    let features: Vec<Vec<Slot>> = spec
        .layers
        .iter()
        .filter_map(|l| match l {
            Layer::Rotation(r) if r.kind == RotationKind::Feature => Some(r.slots.clone()),
            _ => None,
        })
        .collect();
    assert_eq!(features.len(), 3);
    assert_eq!(
        features[0],
        vec![Slot::Feature(0), Slot::Feature(1), Slot::Feature(2)]
    );
    assert_eq!(
        features[1],
        vec![Slot::Feature(3), Slot::Feature(4), Slot::Feature(5)]
    );
    assert_eq!(features[2][0], Slot::Feature(6));
    assert!(matches!(features[2][1], Slot::Parameter(_)));
    assert!(matches!(features[2][2], Slot::Parameter(_)));
}
