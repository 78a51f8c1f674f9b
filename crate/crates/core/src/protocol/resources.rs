use std::fmt;

use num_rational::Ratio;

use super::{DssConfig, OddMode};

/// Qubit and communication accounting of one retrieval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceReport {
    /// Qubits prepared by the servers.
    pub q_in: u64,
    /// Entangled pairs shared among the servers.
    pub q_ent: u64,
    /// Qubits downloaded by the user.
    pub q_out: u64,
    /// Retrieved information `2kLβ` in bits.
    pub info_bits: u64,
    /// Query upload `k·m·n·2L` in bits.
    pub upload_bits: u64,
}

impl ResourceReport {
    /// `info_bits / q_out`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.info_bits, self.q_out)
    }

    /// Component-wise sum (independent runs).
    pub fn combine(&self, other: &ResourceReport) -> ResourceReport {
        ResourceReport {
            q_in: self.q_in + other.q_in,
            q_ent: self.q_ent + other.q_ent,
            q_out: self.q_out + other.q_out,
            info_bits: self.info_bits + other.info_bits,
            upload_bits: self.upload_bits + other.upload_bits,
        }
    }
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q_in {} q_ent {} q_out {} info_bits {} upload_bits {} rate {}",
            self.q_in,
            self.q_ent,
            self.q_out,
            self.info_bits,
            self.upload_bits,
            self.rate()
        )
    }
}

/// Closed-form resources for a configuration. In [`OddMode::Basis`] the
/// auxiliary pair is not entangled, so `q_ent` drops by `kLβ`.
pub fn expected_resources(cfg: &DssConfig) -> ResourceReport {
    let (n, k, l, beta, m) =
        (cfg.n() as u64, cfg.k() as u64, cfg.degree() as u64, cfg.beta() as u64, cfg.m() as u64);
    let slices = k * l * beta;
    let (q_in, mut q_ent, q_out) = if n % 2 == 0 {
        (slices * (3 * n - 4), slices * (3 * n - 4) / 2, slices * n)
    } else {
        (3 * slices * (n - 1), 3 * slices * (n - 1) / 2, slices * (n + 1))
    };
    if n % 2 == 1 && cfg.odd_mode() == OddMode::Basis {
        q_ent -= slices;
    }
    ResourceReport { q_in, q_ent, q_out, info_bits: 2 * slices, upload_bits: k * m * n * 2 * l }
}

/// `2/(k+t)` for even `k+t`, else `2/(k+t+1)`.
pub fn rate(k: usize, t: usize) -> Ratio<u64> {
    let n = (k + t) as u64;
    if n % 2 == 0 {
        Ratio::new(2, n)
    } else {
        Ratio::new(2, n + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{example_rs_4_2, parity_check_3_2, LinearCode};
    use crate::field::Field;

    #[test]
    fn worked_examples() {
        let r = expected_resources(&DssConfig::new(parity_check_3_2(), 1, 2, 1).unwrap());
        assert_eq!((r.q_in, r.q_ent, r.q_out), (12, 6, 8));
        assert_eq!(r.rate(), Ratio::new(1, 2));
        let r = expected_resources(&DssConfig::new(example_rs_4_2(), 2, 2, 1).unwrap());
        assert_eq!((r.q_in, r.q_ent, r.q_out), (16, 8, 8));
        assert_eq!(r.rate(), Ratio::new(1, 2));
    }

    #[test]
    fn six_three_two_stripes() {
        // n = 6 needs L = 2, which doubles kβ(3n − 4) = 84
        let code = LinearCode::grs_default(Field::for_length(6).unwrap(), 6, 3).unwrap();
        let r = expected_resources(&DssConfig::new(code, 3, 1, 2).unwrap());
        assert_eq!((r.q_in, r.q_ent, r.q_out), (168, 84, 72));
    }

    #[test]
    fn closed_form_rates() {
        assert_eq!(rate(2, 2), Ratio::new(1, 2));
        assert_eq!(rate(1, 2), Ratio::new(1, 2));
        assert_eq!(rate(3, 3), Ratio::new(1, 3));
        assert_eq!(rate(2, 1), Ratio::new(1, 2));
    }

    #[test]
    fn upload_share_shrinks_with_beta() {
        let mut last = None;
        for beta in [1, 10, 100] {
            let r = expected_resources(&DssConfig::new(example_rs_4_2(), 2, 3, beta).unwrap());
            let share = Ratio::new(r.upload_bits, r.info_bits);
            if let Some(prev) = last {
                assert!(share < prev);
            }
            last = Some(share);
        }
    }
}
