//! Pair-tracking backend: every live qubit is either half of a Bell pair
//! `(−1)^φ W_first(w) |Φ⟩` or a computational basis state.
//!
//! The update rules below are checked against [`super::ExactBackend`] by
//! exhaustive enumeration in the tests, including the tracked signs.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{sample_index, Backend, BackendKind, PhasedLabel, QuantumError, QubitId, WeylLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pair {
    first: QubitId,
    second: QubitId,
    state: PhasedLabel,
}

impl Pair {
    fn partner(&self, q: QubitId) -> QubitId {
        if q == self.first {
            self.second
        } else {
            self.first
        }
    }

    /// Swaps the roles of the two qubits; `W_1(w)|Φ⟩ = (−1)^{ab} W_2(w)|Φ⟩`.
    fn reoriented(self) -> Pair {
        let w = self.state.label;
        Pair {
            first: self.second,
            second: self.first,
            state: PhasedLabel { label: w, phase: self.state.phase ^ (w.a() & w.b()) },
        }
    }

    fn with_first(self, q: QubitId) -> Pair {
        if self.first == q {
            self
        } else {
            self.reoriented()
        }
    }

    fn with_second(self, q: QubitId) -> Pair {
        if self.second == q {
            self
        } else {
            self.reoriented()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Paired(usize),
    Basis(bool),
}

#[derive(Clone, Debug, Default)]
pub struct SymbolicBackend {
    slots: HashMap<QubitId, Slot>,
    pairs: Vec<Option<Pair>>,
    /// Sign collected from basis-state rotations and measurement collapses.
    sign: bool,
}

impl SymbolicBackend {
    pub fn new() -> SymbolicBackend {
        SymbolicBackend::default()
    }

    fn slot(&self, q: QubitId) -> Result<Slot, QuantumError> {
        self.slots.get(&q).copied().ok_or(QuantumError::DeadQubit(q))
    }

    fn pair(&self, idx: usize) -> Pair {
        self.pairs[idx].expect("slot points at a live pair")
    }

    fn insert_pair(&mut self, pair: Pair) {
        let idx = self.pairs.len();
        self.pairs.push(Some(pair));
        self.slots.insert(pair.first, Slot::Paired(idx));
        self.slots.insert(pair.second, Slot::Paired(idx));
    }

    fn remove_pair(&mut self, idx: usize) -> Pair {
        let pair = self.pairs[idx].take().expect("live pair");
        self.slots.remove(&pair.first);
        self.slots.remove(&pair.second);
        pair
    }

    /// The pair containing `q` as `(first, second, phased label)`.
    pub fn pair_of(&self, q: QubitId) -> Option<(QubitId, QubitId, PhasedLabel)> {
        match self.slots.get(&q)? {
            Slot::Paired(idx) => {
                let p = self.pair(*idx);
                Some((p.first, p.second, p.state))
            }
            Slot::Basis(_) => None,
        }
    }

    /// Full amplitude vector with `order[i]` on bit `i`, for cross-checking
    /// against the exact backend. `order` must list exactly the live qubits.
    pub fn amplitudes(&self, order: &[QubitId]) -> Vec<Complex64> {
        assert_eq!(order.len(), self.slots.len(), "order must cover the live qubits");
        let pos: HashMap<QubitId, usize> = order.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let global = if self.sign { -1.0 } else { 1.0 };
        (0..1usize << order.len())
            .map(|idx| {
                let bit = |q: QubitId| (idx >> pos[&q]) & 1 == 1;
                let mut amp = global;
                for pair in self.pairs.iter().flatten() {
                    let (x, y) = (bit(pair.first), bit(pair.second));
                    let w = pair.state.label;
                    if x != (y ^ w.b()) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let neg = pair.state.phase ^ (w.a() & x);
                    amp *= if neg { -h } else { h };
                }
                for (&q, slot) in &self.slots {
                    if let Slot::Basis(b) = slot {
                        if bit(q) != *b {
                            return Complex64::new(0.0, 0.0);
                        }
                    }
                }
                Complex64::new(amp, 0.0)
            })
            .collect()
    }
}

impl Backend for SymbolicBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Symbolic
    }

    fn is_live(&self, q: QubitId) -> bool {
        self.slots.contains_key(&q)
    }

    fn live_count(&self) -> usize {
        self.slots.len()
    }

    fn new_bell_pair(&mut self, q1: QubitId, q2: QubitId) -> Result<(), QuantumError> {
        for q in [q1, q2] {
            if self.slots.contains_key(&q) {
                return Err(QuantumError::DuplicateQubit(q));
            }
        }
        if q1 == q2 {
            return Err(QuantumError::DuplicateQubit(q1));
        }
        self.insert_pair(Pair { first: q1, second: q2, state: PhasedLabel::default() });
        Ok(())
    }

    fn new_qubit(&mut self, q: QubitId, bit: bool) -> Result<(), QuantumError> {
        if self.slots.contains_key(&q) {
            return Err(QuantumError::DuplicateQubit(q));
        }
        self.slots.insert(q, Slot::Basis(bit));
        Ok(())
    }

    fn apply_weyl(&mut self, q: QubitId, c: WeylLabel) -> Result<(), QuantumError> {
        match self.slot(q)? {
            Slot::Paired(idx) => {
                let mut pair = self.pair(idx);
                pair.state = if pair.first == q {
                    pair.state.compose_left(c)
                } else {
                    // W_2(c) = (−1)^{ab} W_1(c) on |Φ⟩, and W_2 commutes with W_1
                    let moved = pair.state.compose_right(c);
                    PhasedLabel { label: moved.label, phase: moved.phase ^ (c.a() & c.b()) }
                };
                self.pairs[idx] = Some(pair);
            }
            Slot::Basis(j) => {
                // W(c)|j⟩ = (−1)^{a(j+b)} |j+b⟩
                let out = j ^ c.b();
                self.sign ^= c.a() & out;
                self.slots.insert(q, Slot::Basis(out));
            }
        }
        Ok(())
    }

    fn bell_measure(&mut self, q1: QubitId, q2: QubitId, u: f64) -> Result<WeylLabel, QuantumError> {
        if q1 == q2 {
            return Err(QuantumError::SameQubit(q1));
        }
        match (self.slot(q1)?, self.slot(q2)?) {
            (Slot::Paired(i1), Slot::Paired(i2)) if i1 == i2 => {
                let pair = self.remove_pair(i1).with_first(q1);
                self.sign ^= pair.state.phase;
                Ok(pair.state.label)
            }
            (Slot::Paired(i1), Slot::Paired(i2)) => {
                // entanglement swap: (x, q1) ⊗ (q2, z) → (x, z)
                let a = self.remove_pair(i1).with_second(q1);
                let b = self.remove_pair(i2).with_first(q2);
                let g = WeylLabel::from_index(sample_index(&[0.25; 4], u));
                let (uu, v) = (a.state.label, b.state.label);
                let phase = a.state.phase
                    ^ b.state.phase
                    ^ (g.a() & uu.b())
                    ^ (v.a() & (uu.b() ^ g.b()));
                self.insert_pair(Pair {
                    first: a.first,
                    second: b.second,
                    state: PhasedLabel { label: uu + g + v, phase },
                });
                Ok(g)
            }
            (Slot::Basis(j), Slot::Basis(k)) => {
                let gb = j ^ k;
                let mut probs = [0.0; 4];
                probs[WeylLabel::new(false, gb).index()] = 0.5;
                probs[WeylLabel::new(true, gb).index()] = 0.5;
                let g = WeylLabel::from_index(sample_index(&probs, u));
                self.sign ^= g.a() & j;
                self.slots.remove(&q1);
                self.slots.remove(&q2);
                Ok(g)
            }
            _ => Err(QuantumError::Unsupported("Bell measurement of a paired and a basis qubit")),
        }
    }

    fn basis_measure(&mut self, q: QubitId, u: f64) -> Result<bool, QuantumError> {
        match self.slot(q)? {
            Slot::Basis(j) => {
                self.slots.remove(&q);
                Ok(j)
            }
            Slot::Paired(idx) => {
                let pair = self.remove_pair(idx);
                let w = pair.state.label;
                let i = sample_index(&[0.5, 0.5], u) == 1;
                let (partner_bit, sign) = if pair.first == q {
                    (i ^ w.b(), pair.state.phase ^ (w.a() & i))
                } else {
                    (i ^ w.b(), pair.state.phase ^ (w.a() & (i ^ w.b())))
                };
                self.sign ^= sign;
                self.slots.insert(pair.partner(q), Slot::Basis(partner_bit));
                Ok(i)
            }
        }
    }

    fn is_fresh_pair(&self, q1: QubitId, q2: QubitId) -> Result<bool, QuantumError> {
        if q1 == q2 {
            return Err(QuantumError::SameQubit(q1));
        }
        match (self.slot(q1)?, self.slot(q2)?) {
            (Slot::Paired(i1), Slot::Paired(i2)) if i1 == i2 => {
                Ok(self.pair(i1).state == PhasedLabel::default())
            }
            _ => Ok(false),
        }
    }
}
