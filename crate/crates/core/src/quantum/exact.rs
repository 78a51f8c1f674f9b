//! State-vector backend over the live qubits.

use num_complex::Complex64;

use super::weyl::{bell_vector, phi_plus};
use super::{sample_index, snap, Backend, BackendKind, QuantumError, QubitId, WeylLabel};

/// Largest number of simultaneously live qubits the exact backend accepts.
pub const MAX_EXACT_QUBITS: usize = 22;

/// Amplitudes over the joint computational basis; live qubit `i` in
/// `order` is bit `i` of the amplitude index.
#[derive(Clone, Debug)]
pub struct ExactBackend {
    order: Vec<QubitId>,
    amps: Vec<Complex64>,
}

impl Default for ExactBackend {
    fn default() -> Self {
        ExactBackend::new()
    }
}

impl ExactBackend {
    pub fn new() -> ExactBackend {
        ExactBackend { order: Vec::new(), amps: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Live qubits in bit order of [`ExactBackend::amplitudes`].
    pub fn qubit_order(&self) -> &[QubitId] {
        &self.order
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn position(&self, q: QubitId) -> Result<usize, QuantumError> {
        self.order.iter().position(|&x| x == q).ok_or(QuantumError::DeadQubit(q))
    }

    fn check_new(&self, ids: &[QubitId]) -> Result<(), QuantumError> {
        for (i, &q) in ids.iter().enumerate() {
            if self.order.contains(&q) || ids[..i].contains(&q) {
                return Err(QuantumError::DuplicateQubit(q));
            }
        }
        if self.order.len() + ids.len() > MAX_EXACT_QUBITS {
            return Err(QuantumError::TooManyQubits { limit: MAX_EXACT_QUBITS });
        }
        Ok(())
    }

    /// Tensors a factor on `ids` (first id on the lowest new bit).
    fn append(&mut self, ids: &[QubitId], factor: &[Complex64]) {
        let mut out = Vec::with_capacity(self.amps.len() * factor.len());
        for &f in factor {
            out.extend(self.amps.iter().map(|&a| a * f));
        }
        self.amps = out;
        self.order.extend_from_slice(ids);
    }

    /// Contracts the qubits at `positions` against `bra` (indexed with the
    /// first position on the high bit) and drops them from the register.
    fn project_out(&self, positions: &[usize], bra: &[Complex64]) -> Vec<Complex64> {
        let kept: Vec<usize> = (0..self.order.len()).filter(|i| !positions.contains(i)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << kept.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let local = positions.iter().fold(0usize, |acc, &p| (acc << 1) | ((idx >> p) & 1));
            let c = bra[local];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let rest = kept.iter().enumerate().fold(0usize, |acc, (j, &p)| acc | (((idx >> p) & 1) << j));
            out[rest] += c.conj() * a;
        }
        out
    }

    fn measure(&mut self, positions: &[usize], basis: &[Vec<Complex64>], u: f64) -> usize {
        let branches: Vec<Vec<Complex64>> = basis.iter().map(|b| self.project_out(positions, b)).collect();
        let probs: Vec<f64> =
            branches.iter().map(|v| snap(v.iter().map(|a| a.norm_sqr()).sum())).collect();
        let i = sample_index(&probs, u);
        let raw: f64 = branches[i].iter().map(|a| a.norm_sqr()).sum();
        let scale = 1.0 / raw.sqrt();
        self.amps = branches[i].iter().map(|a| a * scale).collect();
        let mut order = Vec::with_capacity(self.order.len() - positions.len());
        for (j, &q) in self.order.iter().enumerate() {
            if !positions.contains(&j) {
                order.push(q);
            }
        }
        self.order = order;
        i
    }
}

impl Backend for ExactBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Exact
    }

    fn is_live(&self, q: QubitId) -> bool {
        self.order.contains(&q)
    }

    fn live_count(&self) -> usize {
        self.order.len()
    }

    fn new_bell_pair(&mut self, q1: QubitId, q2: QubitId) -> Result<(), QuantumError> {
        self.check_new(&[q1, q2])?;
        // factor index: bit 0 = q1, bit 1 = q2; |Φ⟩ is symmetric
        let phi = phi_plus();
        self.append(&[q1, q2], &phi);
        Ok(())
    }

    fn new_qubit(&mut self, q: QubitId, bit: bool) -> Result<(), QuantumError> {
        self.check_new(&[q])?;
        let mut v = [Complex64::new(0.0, 0.0); 2];
        v[bit as usize] = Complex64::new(1.0, 0.0);
        self.append(&[q], &v);
        Ok(())
    }

    fn apply_weyl(&mut self, q: QubitId, w: WeylLabel) -> Result<(), QuantumError> {
        let pos = self.position(q)?;
        let mask = 1usize << pos;
        if w.b() {
            for idx in 0..self.amps.len() {
                if idx & mask == 0 {
                    self.amps.swap(idx, idx | mask);
                }
            }
        }
        if w.a() {
            for (idx, a) in self.amps.iter_mut().enumerate() {
                if idx & mask != 0 {
                    *a = -*a;
                }
            }
        }
        Ok(())
    }

    fn bell_measure(&mut self, q1: QubitId, q2: QubitId, u: f64) -> Result<WeylLabel, QuantumError> {
        if q1 == q2 {
            return Err(QuantumError::SameQubit(q1));
        }
        let positions = [self.position(q1)?, self.position(q2)?];
        let basis: Vec<Vec<Complex64>> = WeylLabel::all().map(|w| bell_vector(w).to_vec()).collect();
        Ok(WeylLabel::from_index(self.measure(&positions, &basis, u)))
    }

    fn basis_measure(&mut self, q: QubitId, u: f64) -> Result<bool, QuantumError> {
        let pos = self.position(q)?;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Ok(self.measure(&[pos], &[vec![one, zero], vec![zero, one]], u) == 1)
    }

    fn is_fresh_pair(&self, q1: QubitId, q2: QubitId) -> Result<bool, QuantumError> {
        if q1 == q2 {
            return Err(QuantumError::SameQubit(q1));
        }
        let positions = [self.position(q1)?, self.position(q2)?];
        let rest = self.project_out(&positions, &phi_plus());
        let overlap: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        Ok((overlap - 1.0).abs() <= 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::weyl::{apply4, identity2, kron, weyl_matrix};

    const Q0: QubitId = QubitId(0);
    const Q1: QubitId = QubitId(1);

    #[test]
    fn bell_pair_amplitudes() {
        let mut b = ExactBackend::new();
        b.new_bell_pair(Q0, Q1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in b.amplitudes().iter().zip(expect) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn weyl_sum_on_amplitudes() {
        // applying W(w1) then W(w2) gives W(w2)W(w1) = (−1)^{a1 b2} W(w1 + w2)
        for w1 in WeylLabel::all() {
            for w2 in WeylLabel::all() {
                let mut b = ExactBackend::new();
                b.new_bell_pair(Q0, Q1).unwrap();
                b.apply_weyl(Q0, w1).unwrap();
                b.apply_weyl(Q0, w2).unwrap();
                let sign = if w1.a() & w2.b() { -1.0 } else { 1.0 };
                // q0 is the low index bit, i.e. the second kron factor
                let v = apply4(&kron(&identity2(), &weyl_matrix(w1 + w2)), &phi_plus());
                for (i, a) in b.amplitudes().iter().enumerate() {
                    assert!((a - v[i] * sign).norm() < 1e-12, "{w1} {w2}");
                }
            }
        }
    }

    #[test]
    fn normalization_preserved() {
        let mut b = ExactBackend::new();
        for i in 0..4 {
            b.new_bell_pair(QubitId(2 * i), QubitId(2 * i + 1)).unwrap();
        }
        b.apply_weyl(QubitId(1), WeylLabel::new(true, true)).unwrap();
        b.bell_measure(QubitId(1), QubitId(2), 0.3).unwrap();
        assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
        b.basis_measure(QubitId(0), 0.7).unwrap();
        assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
        b.bell_measure(QubitId(4), QubitId(7), 0.9).unwrap();
        assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(b.live_count(), 3);
    }

    #[test]
    fn qubit_limit() {
        let mut b = ExactBackend::new();
        for i in 0..(MAX_EXACT_QUBITS as u32 / 2) {
            b.new_bell_pair(QubitId(2 * i), QubitId(2 * i + 1)).unwrap();
        }
        assert_eq!(
            b.new_qubit(QubitId(1000), false),
            Err(QuantumError::TooManyQubits { limit: MAX_EXACT_QUBITS })
        );
    }
}
