//! Dense simulation of the classifier gate set.
//!
//! Noiseless circuits run on a statevector; noisy circuits run on a full
//! density matrix so that thermal relaxation is applied exactly. Qubit 0 is
//! the least significant bit of a computational-basis index.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts. A 12-qubit density matrix is
/// 4096 x 4096 complex doubles (256 MiB).
pub const MAX_QUBITS: usize = 12;

const NORM_TOLERANCE: f64 = 1e-10;

/// Gates understood by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    /// Fixed `Rx(pi/2)`.
    RxHalfPi(usize),
    /// `Rz(angle)` = diag(e^{-i angle/2}, e^{i angle/2}).
    Rz(usize, f64),
    /// Controlled-Z. Symmetric in its two qubits.
    Cz(usize, usize),
    /// Thermal relaxation of one qubit over `duration` nanoseconds.
    Relax {
        qubit: usize,
        t1: f64,
        t2: f64,
        duration: f64,
    },
    /// Terminal measurement marker. Sampling is done by [`sample_counts`].
    MeasureAll,
}

impl GateOp {
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < num_qubits {
                Ok(())
            } else {
                Err(Error::Bounds {
                    index: q,
                    num_qubits,
                })
            }
        };
        match *self {
            GateOp::RxHalfPi(q) => check(q),
            GateOp::Rz(q, angle) => {
                check(q)?;
                if !angle.is_finite() {
                    return Err(Error::InvalidGate(format!(
                        "Rz angle {angle} is not finite"
                    )));
                }
                Ok(())
            }
            GateOp::Cz(a, b) => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::InvalidGate(format!(
                        "CZ control and target are both qubit {a}"
                    )));
                }
                Ok(())
            }
            GateOp::Relax {
                qubit,
                t1,
                t2,
                duration,
            } => {
                check(qubit)?;
                validate_relaxation(t1, t2)?;
                if !(duration >= 0.0) || (duration.is_infinite() && t1.is_infinite()) {
                    return Err(Error::InvalidGate(format!(
                        "relaxation duration {duration} is invalid"
                    )));
                }
                Ok(())
            }
            GateOp::MeasureAll => Ok(()),
        }
    }
}

/// Checks `0 < t1`, `0 < t2 <= 2 t1`, the condition for a physical channel.
pub fn validate_relaxation(t1: f64, t2: f64) -> Result<()> {
    if !(t1 > 0.0) || !(t2 > 0.0) || !(t2 <= 2.0 * t1) {
        return Err(Error::InvalidGate(format!(
            "relaxation times must satisfy 0 < t1, 0 < t2 <= 2 t1 (got t1={t1}, t2={t2})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Representation {
    Pure(Vec<Complex64>),
    /// Row-major `2^n x 2^n`.
    Mixed(Vec<Complex64>),
}

/// A pure statevector or a density matrix over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    repr: Representation,
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Resource(format!(
            "{num_qubits} qubits requested, supported range is 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn register_size(len: usize) -> Option<usize> {
    (len >= 2 && len.is_power_of_two()).then(|| len.trailing_zeros() as usize)
}

impl QuantumState {
    /// `|0...0>` as a statevector, or as a projector when `noisy` is set.
    pub fn zero_state(num_qubits: usize, noisy: bool) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        let repr = if noisy {
            let mut rho = vec![Complex64::ZERO; dim * dim];
            rho[0] = Complex64::ONE;
            Representation::Mixed(rho)
        } else {
            let mut amps = vec![Complex64::ZERO; dim];
            amps[0] = Complex64::ONE;
            Representation::Pure(amps)
        };
        Ok(Self { num_qubits, repr })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = register_size(amplitudes.len()).ok_or_else(|| {
            Error::InvalidState(format!(
                "amplitude vector length {} is not a power of two >= 2",
                amplitudes.len()
            ))
        })?;
        check_register(num_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("statevector norm is {norm}")));
        }
        Ok(Self {
            num_qubits,
            repr: Representation::Pure(amplitudes),
        })
    }

    /// Builds a mixed state from a row-major density matrix.
    pub fn from_density_matrix(rho: Vec<Complex64>) -> Result<Self> {
        let dim = (rho.len() as f64).sqrt().round() as usize;
        if dim * dim != rho.len() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let num_qubits = register_size(dim)
            .ok_or_else(|| Error::InvalidState(format!("dimension {dim} is not 2^n")))?;
        check_register(num_qubits)?;
        let state = Self {
            num_qubits,
            repr: Representation::Mixed(rho),
        };
        if state.hermiticity_error() > NORM_TOLERANCE {
            return Err(Error::InvalidState(
                "density matrix is not Hermitian".into(),
            ));
        }
        let trace = state.trace();
        if (trace - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "density matrix trace is {trace}"
            )));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self.repr, Representation::Mixed(_))
    }

    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match &self.repr {
            Representation::Pure(a) => Some(a),
            Representation::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Option<&[Complex64]> {
        match &self.repr {
            Representation::Pure(_) => None,
            Representation::Mixed(r) => Some(r),
        }
    }

    /// Returns the density-matrix form `|psi><psi|` of this state.
    pub fn to_mixed(&self) -> Self {
        match &self.repr {
            Representation::Mixed(_) => self.clone(),
            Representation::Pure(a) => {
                let dim = a.len();
                let mut rho = vec![Complex64::ZERO; dim * dim];
                for (i, ai) in a.iter().enumerate() {
                    for (j, aj) in a.iter().enumerate() {
                        rho[i * dim + j] = ai * aj.conj();
                    }
                }
                Self {
                    num_qubits: self.num_qubits,
                    repr: Representation::Mixed(rho),
                }
            }
        }
    }

    /// Squared norm for a statevector, trace for a density matrix.
    pub fn trace(&self) -> f64 {
        match &self.repr {
            Representation::Pure(a) => a.iter().map(|x| x.norm_sqr()).sum(),
            Representation::Mixed(r) => {
                let dim = self.dim();
                (0..dim).map(|i| r[i * dim + i].re).sum()
            }
        }
    }

    /// Largest `|rho_ij - conj(rho_ji)|`; zero for statevectors.
    pub fn hermiticity_error(&self) -> f64 {
        match &self.repr {
            Representation::Pure(_) => 0.0,
            Representation::Mixed(r) => {
                let dim = self.dim();
                let mut worst: f64 = 0.0;
                for i in 0..dim {
                    for j in i..dim {
                        worst = worst.max((r[i * dim + j] - r[j * dim + i].conj()).norm());
                    }
                }
                worst
            }
        }
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let dim = self.dim();
        match (*gate, &mut self.repr) {
            (GateOp::MeasureAll, _) => {}
            (GateOp::RxHalfPi(q), Representation::Pure(a)) => pure_rx_half_pi(a, q),
            (GateOp::RxHalfPi(q), Representation::Mixed(r)) => mixed_rx_half_pi(r, dim, q),
            (GateOp::Rz(q, angle), Representation::Pure(a)) => {
                let (lo, hi) = rz_phases(angle);
                let mask = 1 << q;
                for (i, amp) in a.iter_mut().enumerate() {
                    *amp *= if i & mask == 0 { lo } else { hi };
                }
            }
            (GateOp::Rz(q, angle), Representation::Mixed(r)) => {
                // rho_ij picks up d_i conj(d_j); only mixed-bit entries change.
                let (lo, hi) = rz_phases(angle);
                let up = lo * hi.conj();
                let down = up.conj();
                let mask = 1 << q;
                for i in 0..dim {
                    let bi = i & mask != 0;
                    for j in 0..dim {
                        let bj = j & mask != 0;
                        match (bi, bj) {
                            (false, true) => r[i * dim + j] *= up,
                            (true, false) => r[i * dim + j] *= down,
                            _ => {}
                        }
                    }
                }
            }
            (GateOp::Cz(a, b), Representation::Pure(amps)) => {
                let mask = (1 << a) | (1 << b);
                for (i, amp) in amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            (GateOp::Cz(a, b), Representation::Mixed(r)) => {
                let mask = (1 << a) | (1 << b);
                for i in 0..dim {
                    let si = i & mask == mask;
                    for j in 0..dim {
                        if si != (j & mask == mask) {
                            r[i * dim + j] = -r[i * dim + j];
                        }
                    }
                }
            }
            (GateOp::Relax { .. }, Representation::Pure(_)) => {
                return Err(Error::Mode(
                    "thermal relaxation requires a density-matrix state".into(),
                ))
            }
            (
                GateOp::Relax {
                    qubit,
                    t1,
                    t2,
                    duration,
                },
                Representation::Mixed(r),
            ) => relax(r, dim, qubit, t1, t2, duration),
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    /// Outcome probabilities of a computational-basis measurement.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Pure(a) => a.iter().map(|x| x.norm_sqr().clamp(0.0, 1.0)).collect(),
            Representation::Mixed(r) => {
                let dim = self.dim();
                (0..dim)
                    .map(|i| r[i * dim + i].re.clamp(0.0, 1.0))
                    .collect()
            }
        }
    }
}

/// Functional form of [`QuantumState::apply`].
pub fn apply_gate(mut state: QuantumState, gate: GateOp) -> Result<QuantumState> {
    state.apply(&gate)?;
    Ok(state)
}

pub fn exact_probabilities(state: &QuantumState) -> Vec<f64> {
    state.probabilities()
}

fn rz_phases(angle: f64) -> (Complex64, Complex64) {
    let half = angle / 2.0;
    (
        Complex64::from_polar(1.0, -half),
        Complex64::from_polar(1.0, half),
    )
}

// (1/sqrt2) [[1, -i], [-i, 1]]
fn pure_rx_half_pi(amps: &mut [Complex64], q: usize) {
    let mask = 1usize << q;
    let s = FRAC_1_SQRT_2;
    for i in 0..amps.len() {
        if i & mask == 0 {
            let a0 = amps[i];
            let a1 = amps[i | mask];
            amps[i] = Complex64::new(s * (a0.re + a1.im), s * (a0.im - a1.re));
            amps[i | mask] = Complex64::new(s * (a1.re + a0.im), s * (a1.im - a0.re));
        }
    }
}

fn mixed_rx_half_pi(rho: &mut [Complex64], dim: usize, q: usize) {
    let mask = 1usize << q;
    let s = FRAC_1_SQRT_2;
    let mi = Complex64::new(0.0, -1.0);
    // Left multiplication by U on row pairs.
    for i in 0..dim {
        if i & mask != 0 {
            continue;
        }
        let (r0, r1) = (i * dim, (i | mask) * dim);
        for c in 0..dim {
            let x0 = rho[r0 + c];
            let x1 = rho[r1 + c];
            rho[r0 + c] = (x0 + mi * x1) * s;
            rho[r1 + c] = (mi * x0 + x1) * s;
        }
    }
    // Right multiplication by U^dagger on column pairs.
    let pi = Complex64::new(0.0, 1.0);
    for r in 0..dim {
        let row = r * dim;
        for j in 0..dim {
            if j & mask != 0 {
                continue;
            }
            let x0 = rho[row + j];
            let x1 = rho[row + (j | mask)];
            rho[row + j] = (x0 + pi * x1) * s;
            rho[row + (j | mask)] = (pi * x0 + x1) * s;
        }
    }
}

/// Amplitude damping toward |0> combined with dephasing, acting on one qubit
/// of a density matrix.
fn relax(rho: &mut [Complex64], dim: usize, q: usize, t1: f64, t2: f64, duration: f64) {
    let keep = (-duration / t1).exp();
    let coherence = (-duration / t2).exp();
    let mask = 1usize << q;
    for i in 0..dim {
        let bi = i & mask != 0;
        for j in 0..dim {
            let bj = j & mask != 0;
            let idx = i * dim + j;
            match (bi, bj) {
                (true, true) => {
                    let v = rho[idx];
                    rho[idx] = v * keep;
                    rho[(i ^ mask) * dim + (j ^ mask)] += v * (1.0 - keep);
                }
                (true, false) | (false, true) => rho[idx] *= coherence,
                (false, false) => {}
            }
        }
    }
}

/// Measurement histogram indexed by computational-basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    num_qubits: usize,
    counts: Vec<u64>,
}

impl Counts {
    pub fn new(num_qubits: usize, counts: Vec<u64>) -> Self {
        debug_assert_eq!(counts.len(), 1 << num_qubits);
        Self { num_qubits, counts }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    /// Counts converted to `f64` (unnormalized).
    pub fn to_distribution(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Bitstring keyed histogram with qubit `n-1` leftmost; zero bins omitted.
    pub fn to_bitstring_map(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (format!("{:0width$b}", i, width = self.num_qubits), c))
            .collect()
    }
}

/// Multinomial draw of `shots` outcomes from `probs`, by successive
/// conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = probs.iter().sum();
    let last = probs.iter().rposition(|&p| p > 0.0);
    for (i, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if Some(i) == last {
            out[i] = remaining_shots;
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let cond = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let k = Binomial::new(remaining_shots, cond)
            .expect("conditional probability lies in [0, 1]")
            .sample(rng);
        out[i] = k;
        remaining_shots -= k;
        remaining_mass -= p;
    }
    out
}

/// Samples `shots` terminal measurements of `state`.
pub fn sample_counts<R: Rng + ?Sized>(state: &QuantumState, shots: u64, rng: &mut R) -> Counts {
    let probs = state.probabilities();
    Counts::new(state.num_qubits(), sample_multinomial(&probs, shots, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_states() {
        let s = QuantumState::zero_state(1, false).unwrap();
        assert_eq!(s.amplitudes().unwrap(), &[Complex64::ONE, Complex64::ZERO]);
        let m = QuantumState::zero_state(2, true).unwrap();
        let rho = m.density_matrix().unwrap();
        assert_eq!(rho[0], Complex64::ONE);
        assert!(rho[1..].iter().all(|x| *x == Complex64::ZERO));
        let s3 = QuantumState::zero_state(3, false).unwrap();
        assert_eq!(s3.amplitudes().unwrap().len(), 8);
        assert_eq!(s3.amplitudes().unwrap()[0], Complex64::ONE);
    }

    #[test]
    fn register_guard() {
        assert!(matches!(
            QuantumState::zero_state(0, false),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            QuantumState::zero_state(13, true),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn rx_half_pi_twice_flips_zero() {
        // Scalar oracle: (1/2)[[1,-i],[-i,1]]^2 = [[0,-i],[-i,0]], so |0> -> -i|1>.
        let u = [[c(1.0, 0.0), c(0.0, -1.0)], [c(0.0, -1.0), c(1.0, 0.0)]];
        let mut sq = [[Complex64::ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    sq[i][j] += u[i][k] * u[k][j] * 0.5;
                }
            }
        }
        let oracle_p1 = sq[1][0].norm_sqr();
        assert!((oracle_p1 - 1.0).abs() < 1e-12);

        for noisy in [false, true] {
            let mut s = QuantumState::zero_state(1, noisy).unwrap();
            s.apply(&GateOp::RxHalfPi(0)).unwrap();
            s.apply(&GateOp::RxHalfPi(0)).unwrap();
            let p = s.probabilities();
            assert!((p[1] - oracle_p1).abs() < 1e-10, "noisy={noisy}: {p:?}");
        }
    }

    #[test]
    fn cz_leaves_product_with_zero_unchanged() {
        let h = FRAC_1_SQRT_2;
        let amps = vec![c(h, 0.0), c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let s = QuantumState::from_amplitudes(amps.clone()).unwrap();
        let s = apply_gate(s, GateOp::Cz(0, 1)).unwrap();
        assert_eq!(s.amplitudes().unwrap(), &amps[..]);
    }

    #[test]
    fn full_relaxation_reaches_ground_state() {
        let h = FRAC_1_SQRT_2;
        let s = QuantumState::from_amplitudes(vec![c(0.3, 0.0), c(0.0, (1.0f64 - 0.09).sqrt())])
            .unwrap()
            .to_mixed();
        let plus = QuantumState::from_amplitudes(vec![c(h, 0.0), c(0.0, h)])
            .unwrap()
            .to_mixed();
        for mut st in [s, plus] {
            st.apply(&GateOp::Relax {
                qubit: 0,
                t1: 100.0,
                t2: 200.0,
                duration: 1e6,
            })
            .unwrap();
            let rho = st.density_matrix().unwrap();
            assert!((rho[0] - Complex64::ONE).norm() < 1e-12);
            assert!(rho[1..].iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn relax_on_pure_state_is_a_mode_error() {
        let mut s = QuantumState::zero_state(1, false).unwrap();
        let err = s
            .apply(&GateOp::Relax {
                qubit: 0,
                t1: 1.0,
                t2: 1.0,
                duration: 1.0,
            })
            .unwrap_err();
        assert!(matches!(err, Error::Mode(_)));
    }

    #[test]
    fn gate_validation() {
        let mut s = QuantumState::zero_state(2, true).unwrap();
        assert!(matches!(
            s.apply(&GateOp::RxHalfPi(2)),
            Err(Error::Bounds { index: 2, .. })
        ));
        assert!(matches!(
            s.apply(&GateOp::Cz(1, 1)),
            Err(Error::InvalidGate(_))
        ));
        let bad = GateOp::Relax {
            qubit: 0,
            t1: 100.0,
            t2: 201.0,
            duration: 10.0,
        };
        assert!(matches!(s.apply(&bad), Err(Error::InvalidGate(_))));
    }

    #[test]
    fn probabilities_examples() {
        let s = QuantumState::from_amplitudes(vec![Complex64::ONE, Complex64::ZERO]).unwrap();
        assert_eq!(exact_probabilities(&s), vec![1.0, 0.0]);
        let h = FRAC_1_SQRT_2;
        let s = QuantumState::from_amplitudes(vec![c(h, 0.0), c(0.0, -h)]).unwrap();
        let p = exact_probabilities(&s);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let m = QuantumState::from_density_matrix(vec![
            c(0.3, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.7, 0.0),
        ])
        .unwrap();
        assert_eq!(exact_probabilities(&m), vec![0.3, 0.7]);
    }

    #[test]
    fn sampling_examples() {
        let s = QuantumState::zero_state(1, false).unwrap();
        let counts = sample_counts(&s, 300, &mut rng_from(123));
        assert_eq!(
            counts.to_bitstring_map(),
            BTreeMap::from([("0".to_string(), 300)])
        );

        let h = FRAC_1_SQRT_2;
        let s = QuantumState::from_amplitudes(vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let shots = 100_000u64;
        let counts = sample_counts(&s, shots, &mut rng_from(7));
        let bound = 3.0 * (0.25 * shots as f64).sqrt();
        for k in 0..2 {
            assert!((counts.get(k) as f64 - 0.5 * shots as f64).abs() <= bound);
        }
        assert_eq!(counts.shots(), shots);
        let again = sample_counts(&s, shots, &mut rng_from(7));
        assert_eq!(counts, again);
    }

    #[test]
    fn bitstring_keys_put_highest_qubit_first() {
        let mut s = QuantumState::zero_state(3, false).unwrap();
        s.apply(&GateOp::RxHalfPi(0)).unwrap();
        s.apply(&GateOp::RxHalfPi(0)).unwrap();
        let map = sample_counts(&s, 10, &mut rng_from(1)).to_bitstring_map();
        assert_eq!(map, BTreeMap::from([("001".to_string(), 10)]));
    }

    #[test]
    fn multinomial_skips_zero_bins() {
        let counts = sample_multinomial(&[0.0, 0.5, 0.0, 0.5, 0.0], 1000, &mut rng_from(3));
        assert_eq!(counts.iter().sum::<u64>(), 1000);
        assert_eq!(counts[0] + counts[2] + counts[4], 0);
    }
}
