//! The quantum layer of the protocol: labeled qubits, Bell pairs, Weyl
//! rotations and Bell / computational-basis measurements.
//!
//! Two interchangeable backends implement [`Backend`]:
//!
//! * [`ExactBackend`] keeps the full amplitude vector of all live qubits.
//! * [`SymbolicBackend`] keeps every live qubit either in a Bell pair
//!   annotated with a [`PhasedLabel`] or in a computational basis state.
//!
//! Every measurement draws exactly one uniform `u ∈ [0, 1)` and selects the
//! outcome by inverse CDF over the outcome order `(0,0), (0,1), (1,0), (1,1)`
//! (Bell) or `0, 1` (basis). Both backends compute the same probability
//! vectors on the protocol fragment, so identical seeds give identical
//! outcomes on either backend.

mod exact;
mod symbolic;
pub mod weyl;

pub use exact::{ExactBackend, MAX_EXACT_QUBITS};
pub use symbolic::SymbolicBackend;

use std::fmt;
use std::ops::Add;

use rand::Rng;
use thiserror::Error;

use crate::field::Gf4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error("qubit {0} is already allocated")]
    DuplicateQubit(QubitId),
    #[error("qubit {0} is not live")]
    DeadQubit(QubitId),
    #[error("both measured qubits are {0}")]
    SameQubit(QubitId),
    #[error("exact backend limited to {limit} live qubits")]
    TooManyQubits { limit: usize },
    #[error("two-sum precondition violated: pair ({0}, {1}) is not a fresh |Φ⟩")]
    NotFreshPair(QubitId, QubitId),
    #[error("operation not supported by the symbolic backend: {0}")]
    Unsupported(&'static str),
}

/// Qubit identifier; unique within a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitId(pub u32);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// A label `(a, b) ∈ F_2²` selecting the Weyl operator `Z^a X^b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylLabel {
    a: bool,
    b: bool,
}

impl WeylLabel {
    pub const IDENTITY: WeylLabel = WeylLabel { a: false, b: false };

    pub fn new(a: bool, b: bool) -> WeylLabel {
        WeylLabel { a, b }
    }

    /// Label with index `2a + b`, `index < 4`.
    pub fn from_index(index: usize) -> WeylLabel {
        assert!(index < 4, "Weyl label index out of range");
        WeylLabel { a: index & 2 != 0, b: index & 1 != 0 }
    }

    pub fn index(self) -> usize {
        2 * self.a as usize + self.b as usize
    }

    pub fn a(self) -> bool {
        self.a
    }

    pub fn b(self) -> bool {
        self.b
    }

    pub fn all() -> impl Iterator<Item = WeylLabel> {
        (0..4).map(WeylLabel::from_index)
    }
}

impl Add for WeylLabel {
    type Output = WeylLabel;
    fn add(self, rhs: WeylLabel) -> WeylLabel {
        WeylLabel { a: self.a ^ rhs.a, b: self.b ^ rhs.b }
    }
}

/// The GF(4) symbol `c0 + c1·α` maps to the label `(c0, c1)`.
impl From<Gf4> for WeylLabel {
    fn from(s: Gf4) -> WeylLabel {
        let (a, b) = s.bits();
        WeylLabel { a, b }
    }
}

impl From<WeylLabel> for Gf4 {
    fn from(w: WeylLabel) -> Gf4 {
        Gf4::from_bits(w.a, w.b)
    }
}

impl fmt::Display for WeylLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a as u8, self.b as u8)
    }
}

/// A Weyl label together with a sign bit: `(−1)^phase · W(label)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PhasedLabel {
    pub label: WeylLabel,
    pub phase: bool,
}

impl PhasedLabel {
    /// Left-composes `W(w)`: `W(w) · W(self) = (−1)^{self.a · w.b} W(w + self)`.
    pub fn compose_left(self, w: WeylLabel) -> PhasedLabel {
        PhasedLabel { label: w + self.label, phase: self.phase ^ (self.label.a & w.b) }
    }

    /// Right-composes `W(w)`: `W(self) · W(w) = (−1)^{w.a · self.b} W(self + w)`.
    pub fn compose_right(self, w: WeylLabel) -> PhasedLabel {
        PhasedLabel { label: self.label + w, phase: self.phase ^ (w.a & self.label.b) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Exact,
    Symbolic,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Exact => "exact",
            BackendKind::Symbolic => "symbolic",
        })
    }
}

/// State-manipulation interface shared by the two backends. Measurements take
/// the uniform variate `u` drawn by the caller.
pub trait Backend: Send {
    fn kind(&self) -> BackendKind;
    fn is_live(&self, q: QubitId) -> bool;
    fn live_count(&self) -> usize;
    /// Allocates `q1, q2` in `|Φ⟩`, independent of every other qubit.
    fn new_bell_pair(&mut self, q1: QubitId, q2: QubitId) -> Result<(), QuantumError>;
    /// Allocates `q` in the computational basis state `|bit⟩`.
    fn new_qubit(&mut self, q: QubitId, bit: bool) -> Result<(), QuantumError>;
    fn apply_weyl(&mut self, q: QubitId, w: WeylLabel) -> Result<(), QuantumError>;
    fn bell_measure(&mut self, q1: QubitId, q2: QubitId, u: f64) -> Result<WeylLabel, QuantumError>;
    fn basis_measure(&mut self, q: QubitId, u: f64) -> Result<bool, QuantumError>;
    /// True when `(q1, q2)` is known to be in `|Φ⟩` exactly (up to global phase).
    fn is_fresh_pair(&self, q1: QubitId, q2: QubitId) -> Result<bool, QuantumError>;
}

/// Probabilities within this distance of 0, ¼, ½ or 1 are snapped.
pub const SNAP_TOLERANCE: f64 = 1e-9;

pub(crate) fn snap(p: f64) -> f64 {
    for v in [0.0, 0.25, 0.5, 1.0] {
        if (p - v).abs() <= SNAP_TOLERANCE {
            return v;
        }
    }
    p
}

/// Inverse-CDF selection; zero-probability outcomes are never chosen.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if p > 0.0 && u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).expect("some outcome has positive probability")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    BellPair(QubitId, QubitId),
    Prepare(QubitId, bool),
    Weyl(QubitId, WeylLabel),
    BellMeasure(QubitId, QubitId, WeylLabel),
    BasisMeasure(QubitId, bool),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::BellPair(a, b) => write!(f, "bell_pair {a} {b}"),
            TraceEvent::Prepare(q, bit) => write!(f, "prepare {q} {}", *bit as u8),
            TraceEvent::Weyl(q, w) => write!(f, "weyl {q} {w}"),
            TraceEvent::BellMeasure(a, b, w) => write!(f, "bell_measure {a} {b} -> {w}"),
            TraceEvent::BasisMeasure(q, bit) => write!(f, "basis_measure {q} -> {}", *bit as u8),
        }
    }
}

/// A register of labeled qubits on one backend, with an optional trace log.
pub struct QuantumRegister {
    backend: Box<dyn Backend>,
    trace: Option<Vec<TraceEvent>>,
}

impl QuantumRegister {
    pub fn new(kind: BackendKind) -> QuantumRegister {
        let backend: Box<dyn Backend> = match kind {
            BackendKind::Exact => Box::new(ExactBackend::new()),
            BackendKind::Symbolic => Box::new(SymbolicBackend::new()),
        };
        QuantumRegister { backend, trace: None }
    }

    pub fn with_trace(mut self) -> QuantumRegister {
        self.trace = Some(Vec::new());
        self
    }

    pub fn kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn is_live(&self, q: QubitId) -> bool {
        self.backend.is_live(q)
    }

    pub fn live_count(&self) -> usize {
        self.backend.live_count()
    }

    fn log(&mut self, e: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(e);
        }
    }

    pub fn new_bell_pair(&mut self, q1: QubitId, q2: QubitId) -> Result<(), QuantumError> {
        self.backend.new_bell_pair(q1, q2)?;
        self.log(TraceEvent::BellPair(q1, q2));
        Ok(())
    }

    pub fn new_qubit(&mut self, q: QubitId, bit: bool) -> Result<(), QuantumError> {
        self.backend.new_qubit(q, bit)?;
        self.log(TraceEvent::Prepare(q, bit));
        Ok(())
    }

    pub fn apply_weyl(&mut self, q: QubitId, w: WeylLabel) -> Result<(), QuantumError> {
        self.backend.apply_weyl(q, w)?;
        self.log(TraceEvent::Weyl(q, w));
        Ok(())
    }

    pub fn bell_measure<R: Rng + ?Sized>(
        &mut self,
        q1: QubitId,
        q2: QubitId,
        rng: &mut R,
    ) -> Result<WeylLabel, QuantumError> {
        let u: f64 = rng.gen();
        let w = self.backend.bell_measure(q1, q2, u)?;
        self.log(TraceEvent::BellMeasure(q1, q2, w));
        Ok(w)
    }

    pub fn basis_measure<R: Rng + ?Sized>(&mut self, q: QubitId, rng: &mut R) -> Result<bool, QuantumError> {
        let u: f64 = rng.gen();
        let bit = self.backend.basis_measure(q, u)?;
        self.log(TraceEvent::BasisMeasure(q, bit));
        Ok(bit)
    }

    /// Two-sum transmission over the shared pair `(q_a, q_b)`: `W(a)` on
    /// `q_a`, `W(b)` on `q_b`, then a Bell measurement returning `a + b`.
    pub fn two_sum_transmit<R: Rng + ?Sized>(
        &mut self,
        q_a: QubitId,
        q_b: QubitId,
        a: WeylLabel,
        b: WeylLabel,
        rng: &mut R,
    ) -> Result<WeylLabel, QuantumError> {
        if !self.backend.is_fresh_pair(q_a, q_b)? {
            return Err(QuantumError::NotFreshPair(q_a, q_b));
        }
        self.apply_weyl(q_a, a)?;
        self.apply_weyl(q_b, b)?;
        self.bell_measure(q_a, q_b, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const Q: [QubitId; 8] =
        [QubitId(0), QubitId(1), QubitId(2), QubitId(3), QubitId(4), QubitId(5), QubitId(6), QubitId(7)];

    fn both() -> [QuantumRegister; 2] {
        [QuantumRegister::new(BackendKind::Exact), QuantumRegister::new(BackendKind::Symbolic)]
    }

    #[test]
    fn label_index_roundtrip_and_gf4_map() {
        for i in 0..4 {
            assert_eq!(WeylLabel::from_index(i).index(), i);
        }
        assert_eq!(WeylLabel::from(Gf4::ONE), WeylLabel::new(true, false));
        assert_eq!(WeylLabel::from(Gf4::ALPHA), WeylLabel::new(false, true));
        for s in Gf4::all() {
            assert_eq!(Gf4::from(WeylLabel::from(s)), s);
            for t in Gf4::all() {
                assert_eq!(WeylLabel::from(s + t), WeylLabel::from(s) + WeylLabel::from(t));
            }
        }
    }

    #[test]
    fn fresh_pair_measures_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mut reg in both() {
            reg.new_bell_pair(Q[0], Q[1]).unwrap();
            assert_eq!(reg.bell_measure(Q[0], Q[1], &mut rng).unwrap(), WeylLabel::IDENTITY);
            assert_eq!(reg.live_count(), 0);
        }
    }

    #[test]
    fn rotated_pair_measures_its_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for w in WeylLabel::all() {
            for mut reg in both() {
                reg.new_bell_pair(Q[0], Q[1]).unwrap();
                reg.apply_weyl(Q[0], w).unwrap();
                assert_eq!(reg.bell_measure(Q[0], Q[1], &mut rng).unwrap(), w);
                // measuring in the opposite order gives the same label
                reg.new_bell_pair(Q[2], Q[3]).unwrap();
                reg.apply_weyl(Q[3], w).unwrap();
                assert_eq!(reg.bell_measure(Q[3], Q[2], &mut rng).unwrap(), w);
            }
        }
    }

    #[test]
    fn identity_weyl_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for mut reg in both() {
            reg.new_bell_pair(Q[0], Q[1]).unwrap();
            reg.apply_weyl(Q[1], WeylLabel::IDENTITY).unwrap();
            assert_eq!(reg.bell_measure(Q[0], Q[1], &mut rng).unwrap(), WeylLabel::IDENTITY);
        }
    }

    #[test]
    fn two_sum_all_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for a in WeylLabel::all() {
            for b in WeylLabel::all() {
                for mut reg in both() {
                    reg.new_bell_pair(Q[0], Q[1]).unwrap();
                    assert_eq!(reg.two_sum_transmit(Q[0], Q[1], a, b, &mut rng).unwrap(), a + b);
                }
            }
        }
        let mut reg = QuantumRegister::new(BackendKind::Exact);
        reg.new_bell_pair(Q[0], Q[1]).unwrap();
        let out = reg
            .two_sum_transmit(Q[0], Q[1], WeylLabel::new(true, false), WeylLabel::new(false, true), &mut rng)
            .unwrap();
        assert_eq!(out, WeylLabel::new(true, true));
        reg.new_bell_pair(Q[0], Q[1]).unwrap();
        let out = reg
            .two_sum_transmit(Q[0], Q[1], WeylLabel::new(true, true), WeylLabel::IDENTITY, &mut rng)
            .unwrap();
        assert_eq!(out, WeylLabel::new(true, true));
    }

    #[test]
    fn two_sum_rejects_used_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mut reg in both() {
            reg.new_bell_pair(Q[0], Q[1]).unwrap();
            reg.apply_weyl(Q[0], WeylLabel::new(false, true)).unwrap();
            assert_eq!(
                reg.two_sum_transmit(Q[0], Q[1], WeylLabel::IDENTITY, WeylLabel::IDENTITY, &mut rng),
                Err(QuantumError::NotFreshPair(Q[0], Q[1]))
            );
        }
    }

    #[test]
    fn basis_states_measure_deterministically() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for mut reg in both() {
            reg.new_qubit(Q[0], false).unwrap();
            assert!(!reg.basis_measure(Q[0], &mut rng).unwrap());
            reg.new_qubit(Q[1], false).unwrap();
            reg.apply_weyl(Q[1], WeylLabel::new(false, true)).unwrap();
            assert!(reg.basis_measure(Q[1], &mut rng).unwrap());
        }
    }

    #[test]
    fn error_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mut reg in both() {
            reg.new_bell_pair(Q[0], Q[1]).unwrap();
            assert_eq!(reg.new_bell_pair(Q[1], Q[2]), Err(QuantumError::DuplicateQubit(Q[1])));
            assert_eq!(reg.new_bell_pair(Q[3], Q[3]), Err(QuantumError::DuplicateQubit(Q[3])));
            assert_eq!(reg.apply_weyl(Q[5], WeylLabel::IDENTITY), Err(QuantumError::DeadQubit(Q[5])));
            assert_eq!(reg.bell_measure(Q[0], Q[0], &mut rng), Err(QuantumError::SameQubit(Q[0])));
            assert_eq!(reg.basis_measure(Q[6], &mut rng), Err(QuantumError::DeadQubit(Q[6])));
            reg.bell_measure(Q[0], Q[1], &mut rng).unwrap();
            assert_eq!(reg.apply_weyl(Q[0], WeylLabel::IDENTITY), Err(QuantumError::DeadQubit(Q[0])));
        }
    }

    #[test]
    fn trace_records_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut reg = QuantumRegister::new(BackendKind::Symbolic).with_trace();
        reg.new_bell_pair(Q[0], Q[1]).unwrap();
        reg.apply_weyl(Q[0], WeylLabel::new(true, true)).unwrap();
        reg.bell_measure(Q[0], Q[1], &mut rng).unwrap();
        let lines: Vec<String> = reg.trace().unwrap().iter().map(|e| e.to_string()).collect();
        assert_eq!(lines, ["bell_pair q0 q1", "weyl q0 (1,1)", "bell_measure q0 q1 -> (1,1)"]);
    }

    #[test]
    fn sampling_skips_zero_probabilities() {
        assert_eq!(sample_index(&[0.0, 1.0, 0.0, 0.0], 0.0), 1);
        assert_eq!(sample_index(&[0.5, 0.0, 0.5, 0.0], 0.5), 2);
        assert_eq!(sample_index(&[0.25; 4], 0.999), 3);
        assert_eq!(sample_index(&[0.0, 0.0, 1.0, 0.0], 0.9999999), 2);
    }
}
