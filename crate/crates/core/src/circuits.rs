//! Circuit design space: sampling, depth and parameter binding.
//!
//! A circuit is a sequence of rotation layers separated by CZ entangler
//! layers. Each rotation layer puts one basic block
//! `Rx(pi/2) Rz(value) Rx(pi/2)` on every qubit, where the `Rz` angle comes
//! either from an encoded feature or from a trainable parameter.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{GateOp, MAX_QUBITS};

/// Source of the `Rz` angle of one basic block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "f")]
    Feature(usize),
    #[serde(rename = "p")]
    Parameter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationKind {
    #[serde(rename = "feature")]
    Feature,
    #[serde(rename = "parameter")]
    Parameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationLayer {
    pub kind: RotationKind,
    /// One slot per qubit, indexed by qubit.
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglerLayer {
    /// CZ pairs in application order, each stored as `(low, high)`.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    #[serde(rename = "rot")]
    Rotation(RotationLayer),
    #[serde(rename = "ent")]
    Entangler(EntanglerLayer),
}

/// Structural choices that `sample_circuit` draws at random.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Layout {
    pub leading_parameters: bool,
    pub trailing_parameters: bool,
}

/// A sampled circuit. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub num_features: usize,
    pub num_parameters: usize,
    pub repeat_features: bool,
    pub all_pairs: bool,
    pub seed: u64,
    pub layers: Vec<Layer>,
}

pub fn min_feature_layers(num_features: usize, num_qubits: usize) -> usize {
    num_features.div_ceil(num_qubits)
}

fn num_pairs(num_qubits: usize) -> usize {
    num_qubits * num_qubits.saturating_sub(1) / 2
}

/// All unordered pairs in lexicographic order.
pub fn all_qubit_pairs(num_qubits: usize) -> Vec<(usize, usize)> {
    (0..num_qubits)
        .flat_map(|a| (a + 1..num_qubits).map(move |b| (a, b)))
        .collect()
}

impl CircuitSpec {
    /// Lays out the rotation layers for `layout` and interleaves the given
    /// entangler layers. `entanglers` must hold one pair list per gap between
    /// rotation layers; see [`CircuitSpec::rotation_layer_count`].
    pub fn from_layout(
        num_qubits: usize,
        num_features: usize,
        repeat_features: bool,
        all_pairs: bool,
        layout: Layout,
        entanglers: Vec<Vec<(usize, usize)>>,
        seed: u64,
    ) -> Result<Self> {
        check_sizes(num_qubits, num_features)?;
        let passes = if repeat_features { 2 } else { 1 };
        let sequence: Vec<usize> = (0..passes).flat_map(|_| 0..num_features).collect();
        let feature_layers = sequence.len().div_ceil(num_qubits);

        let mut next_param = 0usize;
        let mut fresh = || {
            next_param += 1;
            Slot::Parameter(next_param - 1)
        };
        let mut rotations = Vec::new();
        let kinds = rotation_kinds(feature_layers, layout);
        let mut feature_layer = 0usize;
        for kind in kinds {
            let slots = match kind {
                RotationKind::Parameter => (0..num_qubits).map(|_| fresh()).collect(),
                RotationKind::Feature => {
                    let start = feature_layer * num_qubits;
                    feature_layer += 1;
                    (0..num_qubits)
                        .map(|q| match sequence.get(start + q) {
                            Some(&f) => Slot::Feature(f),
                            None => fresh(),
                        })
                        .collect()
                }
            };
            rotations.push(RotationLayer { kind, slots });
        }

        if entanglers.len() + 1 != rotations.len() {
            return Err(Error::Constraint(format!(
                "{} rotation layers need {} entangler layers, got {}",
                rotations.len(),
                rotations.len() - 1,
                entanglers.len()
            )));
        }
        let mut layers = Vec::with_capacity(2 * rotations.len());
        let mut entanglers = entanglers.into_iter();
        for (i, rot) in rotations.into_iter().enumerate() {
            if i > 0 {
                let pairs = entanglers
                    .next()
                    .expect("length checked above")
                    .into_iter()
                    .map(|(a, b)| (a.min(b), a.max(b)))
                    .collect();
                layers.push(Layer::Entangler(EntanglerLayer { pairs }));
            }
            layers.push(Layer::Rotation(rot));
        }

        let spec = Self {
            num_qubits,
            num_features,
            num_parameters: next_param,
            repeat_features,
            all_pairs,
            seed,
            layers,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Number of rotation layers `from_layout` produces.
    pub fn rotation_layer_count(
        num_qubits: usize,
        num_features: usize,
        repeat_features: bool,
        layout: Layout,
    ) -> usize {
        let passes = if repeat_features { 2 } else { 1 };
        rotation_kinds((num_features * passes).div_ceil(num_qubits), layout).len()
    }

    pub fn rotation_layers(&self) -> impl Iterator<Item = &RotationLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Rotation(r) => Some(r),
            Layer::Entangler(_) => None,
        })
    }

    pub fn entangler_layers(&self) -> impl Iterator<Item = &EntanglerLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Entangler(e) => Some(e),
            Layer::Rotation(_) => None,
        })
    }

    pub fn num_cz_gates(&self) -> usize {
        self.entangler_layers().map(|e| e.pairs.len()).sum()
    }

    /// Total number of basic blocks (one `Rz` each).
    pub fn num_slots(&self) -> usize {
        self.rotation_layers().map(|r| r.slots.len()).sum()
    }

    pub fn depth(&self) -> usize {
        circuit_depth(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit specs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks every structural invariant of a circuit.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Constraint(msg));
        let q = self.num_qubits;
        if q == 0 || q > MAX_QUBITS {
            return fail(format!("{q} qubits outside 1..={MAX_QUBITS}"));
        }
        if q > self.num_features {
            return fail(format!(
                "{q} qubits exceed the {} available features",
                self.num_features
            ));
        }
        match (self.layers.first(), self.layers.last()) {
            (Some(Layer::Rotation(_)), Some(Layer::Rotation(_))) => {}
            _ => return fail("circuit must start and end with a rotation layer".into()),
        }
        let mut feature_uses = vec![0usize; self.num_features];
        let mut param_uses = vec![0usize; self.num_parameters];
        let mut prev_kind: Option<RotationKind> = None;
        let max_pairs = num_pairs(q);
        for (i, layer) in self.layers.iter().enumerate() {
            let expect_rotation = i % 2 == 0;
            match layer {
                Layer::Rotation(rot) => {
                    if !expect_rotation {
                        return fail(format!("layer {i}: two rotation layers in a row"));
                    }
                    if rot.slots.len() != q {
                        return fail(format!(
                            "layer {i}: {} slots for {q} qubits",
                            rot.slots.len()
                        ));
                    }
                    if prev_kind == Some(rot.kind) {
                        return fail(format!(
                            "layer {i}: feature and parameter layers must alternate"
                        ));
                    }
                    prev_kind = Some(rot.kind);
                    let mut has_feature = false;
                    for slot in &rot.slots {
                        match *slot {
                            Slot::Feature(f) => {
                                if rot.kind == RotationKind::Parameter {
                                    return fail(format!(
                                        "layer {i}: feature slot in a parameter layer"
                                    ));
                                }
                                if f >= self.num_features {
                                    return fail(format!(
                                        "layer {i}: feature index {f} out of range"
                                    ));
                                }
                                has_feature = true;
                                feature_uses[f] += 1;
                            }
                            Slot::Parameter(p) => {
                                if p >= self.num_parameters {
                                    return fail(format!(
                                        "layer {i}: parameter index {p} out of range"
                                    ));
                                }
                                param_uses[p] += 1;
                            }
                        }
                    }
                    if rot.kind == RotationKind::Feature && !has_feature {
                        return fail(format!("layer {i}: feature layer holds only padding"));
                    }
                }
                Layer::Entangler(ent) => {
                    if expect_rotation {
                        return fail(format!("layer {i}: two entangler layers in a row"));
                    }
                    let n = ent.pairs.len();
                    let ok = if self.all_pairs {
                        n == max_pairs
                    } else {
                        (1..=max_pairs.min(3)).contains(&n)
                    };
                    if !ok {
                        return fail(format!(
                            "layer {i}: {n} CZ gates is outside the allowed range"
                        ));
                    }
                    for (k, &(a, b)) in ent.pairs.iter().enumerate() {
                        if a >= b || b >= q {
                            return fail(format!("layer {i}: invalid CZ pair ({a}, {b})"));
                        }
                        if ent.pairs[..k].contains(&(a, b)) {
                            return fail(format!("layer {i}: duplicate CZ pair ({a}, {b})"));
                        }
                    }
                }
            }
        }
        let want = if self.repeat_features { 2 } else { 1 };
        if let Some(f) = feature_uses.iter().position(|&c| c != want) {
            return fail(format!(
                "feature {f} used {} times, expected {want}",
                feature_uses[f]
            ));
        }
        if let Some(p) = param_uses.iter().position(|&c| c != 1) {
            return fail(format!("parameter {p} used {} times", param_uses[p]));
        }
        Ok(())
    }
}

fn check_sizes(num_qubits: usize, num_features: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Constraint(format!(
            "{num_qubits} qubits outside 1..={MAX_QUBITS}"
        )));
    }
    if num_qubits > num_features {
        return Err(Error::Constraint(format!(
            "{num_qubits} qubits exceed the {num_features} available features"
        )));
    }
    Ok(())
}

/// Rotation layer kinds: feature layers with a parameter layer between each
/// consecutive pair, plus the optional outer parameter layers. A circuit with
/// a single feature layer and no outer layer gets a trailing parameter layer
/// so that it has something to train.
fn rotation_kinds(feature_layers: usize, layout: Layout) -> Vec<RotationKind> {
    let mut kinds = Vec::with_capacity(2 * feature_layers + 1);
    if layout.leading_parameters {
        kinds.push(RotationKind::Parameter);
    }
    for i in 0..feature_layers {
        if i > 0 {
            kinds.push(RotationKind::Parameter);
        }
        kinds.push(RotationKind::Feature);
    }
    let no_parameter_layer = !kinds.contains(&RotationKind::Parameter);
    if layout.trailing_parameters || no_parameter_layer {
        kinds.push(RotationKind::Parameter);
    }
    kinds
}

/// Draws a circuit from the design space.
///
/// The outer parameter layers are each included with probability 1/2. Every
/// entangler layer holds a uniform number of CZ gates in
/// `1..=min(3, C(Q, 2))` on distinct random pairs, or every pair when
/// `all_pairs` is set.
pub fn sample_circuit<R: Rng + ?Sized>(
    num_qubits: usize,
    num_features: usize,
    repeat_features: bool,
    all_pairs: bool,
    seed: u64,
    rng: &mut R,
) -> Result<CircuitSpec> {
    if num_qubits < 2 {
        return Err(Error::Constraint(format!(
            "sampled circuits need at least 2 qubits, got {num_qubits}"
        )));
    }
    check_sizes(num_qubits, num_features)?;
    let layout = Layout {
        leading_parameters: rng.random_bool(0.5),
        trailing_parameters: rng.random_bool(0.5),
    };
    let gaps =
        CircuitSpec::rotation_layer_count(num_qubits, num_features, repeat_features, layout) - 1;
    let candidates = all_qubit_pairs(num_qubits);
    let max_pairs = candidates.len().min(3);
    let entanglers = (0..gaps)
        .map(|_| {
            if all_pairs {
                candidates.clone()
            } else {
                let count = rng.random_range(1..=max_pairs);
                index::sample(rng, candidates.len(), count)
                    .into_iter()
                    .map(|i| candidates[i])
                    .collect()
            }
        })
        .collect();
    CircuitSpec::from_layout(
        num_qubits,
        num_features,
        repeat_features,
        all_pairs,
        layout,
        entanglers,
        seed,
    )
}

/// Seeds a private generator from `seed` and samples a circuit.
pub fn sample_circuit_seeded(
    num_qubits: usize,
    num_features: usize,
    repeat_features: bool,
    all_pairs: bool,
    seed: u64,
) -> Result<CircuitSpec> {
    let mut rng = crate::seed::rng_from(seed);
    sample_circuit(
        num_qubits,
        num_features,
        repeat_features,
        all_pairs,
        seed,
        &mut rng,
    )
}

/// Longest dependency path of a gate list, one time step per gate.
///
/// `Relax` is instantaneous noise and does not add a step. `MeasureAll`
/// measures every qubit in one step.
pub fn gate_list_depth(num_qubits: usize, gates: &[GateOp]) -> usize {
    let mut level = vec![0usize; num_qubits];
    for gate in gates {
        match *gate {
            GateOp::RxHalfPi(q) | GateOp::Rz(q, _) => level[q] += 1,
            GateOp::Cz(a, b) => {
                let t = level[a].max(level[b]) + 1;
                level[a] = t;
                level[b] = t;
            }
            GateOp::Relax { .. } => {}
            GateOp::MeasureAll => level.iter_mut().for_each(|l| *l += 1),
        }
    }
    level.into_iter().max().unwrap_or(0)
}

pub fn circuit_depth(spec: &CircuitSpec) -> usize {
    let gates = bind(
        spec,
        &vec![0.0; spec.num_features],
        &vec![0.0; spec.num_parameters],
    )
    .expect("zero vectors of the right length always bind");
    gate_list_depth(spec.num_qubits, &gates)
}

/// Expands a spec into simulator gates with concrete angles.
pub fn bind(
    spec: &CircuitSpec,
    encoded_features: &[f64],
    parameters: &[f64],
) -> Result<Vec<GateOp>> {
    if encoded_features.len() != spec.num_features {
        return Err(Error::Binding(format!(
            "expected {} encoded features, got {}",
            spec.num_features,
            encoded_features.len()
        )));
    }
    if parameters.len() != spec.num_parameters {
        return Err(Error::Binding(format!(
            "expected {} parameters, got {}",
            spec.num_parameters,
            parameters.len()
        )));
    }
    let mut gates = Vec::with_capacity(3 * spec.num_slots() + spec.num_cz_gates() + 1);
    for layer in &spec.layers {
        match layer {
            Layer::Rotation(rot) => {
                for (q, slot) in rot.slots.iter().enumerate() {
                    let value = match *slot {
                        Slot::Feature(f) => encoded_features[f],
                        Slot::Parameter(p) => parameters[p],
                    };
                    gates.push(GateOp::RxHalfPi(q));
                    gates.push(GateOp::Rz(q, value));
                    gates.push(GateOp::RxHalfPi(q));
                }
            }
            Layer::Entangler(ent) => {
                gates.extend(ent.pairs.iter().map(|&(a, b)| GateOp::Cz(a, b)));
            }
        }
    }
    gates.push(GateOp::MeasureAll);
    Ok(gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn min_feature_layers_examples() {
        assert_eq!(min_feature_layers(4, 4), 1);
        assert_eq!(min_feature_layers(5, 3), 2);
        assert_eq!(min_feature_layers(13, 4), 4);
    }

    #[test]
    fn five_features_on_three_qubits() {
        let spec = sample_circuit_seeded(3, 5, false, false, 11).unwrap();
        let features: Vec<_> = spec
            .rotation_layers()
            .filter(|r| r.kind == RotationKind::Feature)
            .collect();
        assert_eq!(features.len(), 2);
        assert_eq!(
            features[0].slots,
            vec![Slot::Feature(0), Slot::Feature(1), Slot::Feature(2)]
        );
        assert_eq!(features[1].slots[..2], [Slot::Feature(3), Slot::Feature(4)]);
        assert!(matches!(features[1].slots[2], Slot::Parameter(_)));
    }

    #[test]
    fn minimal_four_by_four_circuit() {
        let spec =
            CircuitSpec::from_layout(4, 4, false, false, Layout::default(), vec![vec![(0, 1)]], 0)
                .unwrap();
        let kinds: Vec<_> = spec.rotation_layers().map(|r| r.kind).collect();
        assert_eq!(kinds, vec![RotationKind::Feature, RotationKind::Parameter]);
        assert_eq!(spec.entangler_layers().count(), 1);
        assert_eq!(circuit_depth(&spec), 8);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_circuit_seeded(5, 9, true, false, 42).unwrap();
        let b = sample_circuit_seeded(5, 9, true, false, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn too_many_qubits_is_a_constraint_error() {
        let err = sample_circuit(5, 4, false, false, 0, &mut rng_from(0)).unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }

    #[test]
    fn all_pairs_regime() {
        let spec = sample_circuit_seeded(4, 6, false, true, 3).unwrap();
        for e in spec.entangler_layers() {
            assert_eq!(e.pairs, all_qubit_pairs(4));
        }
    }

    #[test]
    fn bind_single_block() {
        let spec = CircuitSpec {
            num_qubits: 1,
            num_features: 1,
            num_parameters: 0,
            repeat_features: false,
            all_pairs: false,
            seed: 0,
            layers: vec![Layer::Rotation(RotationLayer {
                kind: RotationKind::Feature,
                slots: vec![Slot::Feature(0)],
            })],
        };
        spec.validate().unwrap();
        let gates = bind(&spec, &[0.0], &[]).unwrap();
        assert_eq!(
            gates,
            vec![
                GateOp::RxHalfPi(0),
                GateOp::Rz(0, 0.0),
                GateOp::RxHalfPi(0),
                GateOp::MeasureAll
            ]
        );
        assert!(matches!(
            bind(&spec, &[0.0, 1.0], &[]),
            Err(Error::Binding(_))
        ));
        assert!(matches!(
            bind(&spec, &[0.0], &[1.0]),
            Err(Error::Binding(_))
        ));
    }

    #[test]
    fn repeated_features_reuse_encoded_values() {
        let spec = sample_circuit_seeded(2, 3, true, false, 5).unwrap();
        let feats = [0.1, 0.2, 0.3];
        let params = vec![9.0; spec.num_parameters];
        let gates = bind(&spec, &feats, &params).unwrap();
        for f in feats {
            let uses = gates
                .iter()
                .filter(|g| matches!(g, GateOp::Rz(_, v) if *v == f))
                .count();
            assert_eq!(uses, 2);
        }
    }

    #[test]
    fn json_round_trip_validates() {
        let spec = sample_circuit_seeded(3, 5, false, false, 1).unwrap();
        assert_eq!(CircuitSpec::from_json(&spec.to_json()).unwrap(), spec);
        let mut broken = spec.clone();
        broken.num_parameters += 1;
        assert!(CircuitSpec::from_json(&broken.to_json()).is_err());
    }
}
