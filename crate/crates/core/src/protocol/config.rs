use std::fmt;

use crate::codes::{LinearCode, Matrix};
use crate::field::Field;

use super::ProtocolError;

/// How server `n − 1` delivers `G_{n−1}` when `n` is odd.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OddMode {
    /// Degenerate two-sum `G_{n−1} + (0,0)` over an extra Bell pair.
    #[default]
    Quantum,
    /// The two qubits are prepared in the basis state `|G_{n−1}⟩` and read out
    /// by basis measurements; no entanglement is consumed.
    Basis,
}

impl fmt::Display for OddMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OddMode::Quantum => "quantum",
            OddMode::Basis => "basis",
        })
    }
}

/// A distributed storage system and the working servers the protocol runs on.
///
/// Storage is coded with `code` over all `n′ = code.n()` physical servers. The
/// protocol uses `n = k + t` of them (`working`, lowest indices by default);
/// `k` is the dimension of the code punctured to the working positions, and
/// pieces `p ∈ 0..k` are the first `k` working positions.
#[derive(Clone, Debug)]
pub struct DssConfig {
    code: LinearCode,
    working: Vec<usize>,
    working_code: LinearCode,
    dual: Matrix,
    t: usize,
    m: usize,
    beta: usize,
    odd_mode: OddMode,
}

impl DssConfig {
    /// Runs on the lowest `k + t` servers.
    pub fn new(code: LinearCode, t: usize, m: usize, beta: usize) -> Result<DssConfig, ProtocolError> {
        let n = code.k() + t;
        if n > code.n() {
            return Err(ProtocolError::InvalidConfig(format!(
                "k + t = {n} exceeds the {} storage servers",
                code.n()
            )));
        }
        DssConfig::with_working(code, (0..n).collect(), t, m, beta)
    }

    /// Runs on the given working servers; `working.len()` must equal the
    /// dimension of the punctured code plus `t`.
    pub fn with_working(
        code: LinearCode,
        working: Vec<usize>,
        t: usize,
        m: usize,
        beta: usize,
    ) -> Result<DssConfig, ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::InvalidConfig(msg));
        if m == 0 || beta == 0 {
            return bad(format!("m and beta must be positive (m={m}, beta={beta})"));
        }
        let mut sorted = working.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != working.len() {
            return bad("working servers must be distinct".into());
        }
        let working_code = code.restrict(&working)?;
        let (n, k) = (working.len(), working_code.k());
        if n != k + t {
            return bad(format!("working set of {n} servers does not equal k + t = {k} + {t}"));
        }
        if n < 2 {
            return bad(format!("the protocol needs at least 2 working servers, got {n}"));
        }
        if !is_mds(&working_code) {
            return bad(format!("the storage code on servers {working:?} is not MDS"));
        }
        let dual = working_code.dual().generator().clone();
        Ok(DssConfig { code, working, working_code, dual, t, m, beta, odd_mode: OddMode::Quantum })
    }

    pub fn with_odd_mode(mut self, mode: OddMode) -> DssConfig {
        self.odd_mode = mode;
        self
    }

    /// The storage code over all physical servers.
    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    /// The storage code punctured to the working servers.
    pub fn working_code(&self) -> &LinearCode {
        &self.working_code
    }

    /// Generator of the dual of the working code, `(n − k) × n`.
    pub fn dual_generator(&self) -> &Matrix {
        &self.dual
    }

    /// Physical indices of the working servers.
    pub fn working(&self) -> &[usize] {
        &self.working
    }

    /// Physical positions of the `k` pieces.
    pub fn piece_positions(&self) -> &[usize] {
        &self.working[..self.k()]
    }

    pub fn field(&self) -> Field {
        self.code.field()
    }

    pub fn degree(&self) -> usize {
        self.field().degree() as usize
    }

    /// Number of working servers, `k + t`.
    pub fn n(&self) -> usize {
        self.working.len()
    }

    pub fn k(&self) -> usize {
        self.working_code.k()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn odd_mode(&self) -> OddMode {
        self.odd_mode
    }

    /// Number of physical servers n′.
    pub fn server_count_total(&self) -> usize {
        self.code.n()
    }

    /// True when the pieces determine the stored files, i.e. the working
    /// positions carry the full message.
    pub fn decodes_files(&self) -> bool {
        self.k() == self.code.k()
    }
}

/// Every `k`-subset of positions is an information set.
fn is_mds(code: &LinearCode) -> bool {
    let (n, k) = (code.n(), code.k());
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if code.generator().select_columns(&subset).rank() < k {
            return false;
        }
        // next k-combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            return true;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}
