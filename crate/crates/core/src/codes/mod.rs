//! Linear codes over GF(4^L): generalized Reed-Solomon codes, duals,
//! encoding, brute-force distance, information sets and restriction.

mod lrc;
mod matrix;

pub use lrc::{lrc_field, lrc_generator, singleton_like_bound, LrcProfile};
pub use matrix::Matrix;

use std::fmt::Write as _;

use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError, Gf4};

/// Largest `k·L` accepted by [`LinearCode::min_distance`]; the enumeration
/// visits `4^(kL)` codewords.
pub const DISTANCE_BUDGET_KL: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("evaluation point {0} is repeated")]
    RepeatedEvalPoint(FieldElement),
    #[error("column multiplier at position {0} is zero")]
    ZeroMultiplier(usize),
    #[error("generator matrix has rank {rank} but {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("position {index} out of range for length {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("positions {0:?} do not form an information set")]
    NotInformationSet(Vec<usize>),
    #[error("distance enumeration needs k·L = {kl} > {limit}")]
    EnumerationBudget { kl: usize, limit: usize },
    #[error("the zero code has no minimum distance")]
    ZeroCode,
    #[error("code description, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An `[n, k]` linear code given by a full-rank `k × n` generator matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    generator: Matrix,
}

impl LinearCode {
    /// Wraps a generator matrix, rejecting rank-deficient ones.
    pub fn from_generator(generator: Matrix) -> Result<LinearCode, CodeError> {
        let rank = generator.rank();
        if rank != generator.rows() {
            return Err(CodeError::RankDeficient { rank, rows: generator.rows() });
        }
        Ok(LinearCode { generator })
    }

    /// Builds a code from arbitrary spanning rows, keeping a basis.
    pub fn from_spanning_rows(rows: Matrix) -> LinearCode {
        LinearCode { generator: rows.rref().0.nonzero_rows() }
    }

    /// Generalized Reed-Solomon code: `G[i][j] = v_j · a_j^i`.
    pub fn grs(
        field: Field,
        n: usize,
        k: usize,
        eval_points: &[FieldElement],
        col_multipliers: &[FieldElement],
    ) -> Result<LinearCode, CodeError> {
        if k > n {
            return Err(CodeError::InvalidParameters(format!("k = {k} exceeds n = {n}")));
        }
        if n > field.order() {
            return Err(CodeError::InvalidParameters(format!(
                "n = {n} exceeds the field size {}",
                field.order()
            )));
        }
        for (name, v) in [("evaluation points", eval_points), ("multipliers", col_multipliers)] {
            if v.len() != n {
                return Err(CodeError::InvalidParameters(format!(
                    "{} {name} given for n = {n}",
                    v.len()
                )));
            }
            if let Some(e) = v.iter().find(|e| e.field() != field) {
                return Err(FieldError::Mismatch { left: field.degree(), right: e.field().degree() }.into());
            }
        }
        for (i, a) in eval_points.iter().enumerate() {
            if eval_points[..i].contains(a) {
                return Err(CodeError::RepeatedEvalPoint(*a));
            }
        }
        if let Some(j) = col_multipliers.iter().position(|v| v.is_zero()) {
            return Err(CodeError::ZeroMultiplier(j));
        }
        let rows = (0..k)
            .map(|i| {
                eval_points
                    .iter()
                    .zip(col_multipliers)
                    .map(|(&a, &v)| v * a.pow(i as u64))
                    .collect()
            })
            .collect();
        LinearCode::from_generator(Matrix::from_rows(field, rows, n))
    }

    /// GRS code on the first `n` field elements with unit multipliers.
    pub fn grs_default(field: Field, n: usize, k: usize) -> Result<LinearCode, CodeError> {
        if n > field.order() {
            return Err(CodeError::InvalidParameters(format!(
                "n = {n} exceeds the field size {}",
                field.order()
            )));
        }
        let points: Vec<FieldElement> = field.elements().take(n).collect();
        LinearCode::grs(field, n, k, &points, &vec![field.one(); n])
    }

    pub fn field(&self) -> Field {
        self.generator.field()
    }

    pub fn n(&self) -> usize {
        self.generator.cols()
    }

    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// The dual code, generated by the nullspace of `G` in reduced row
    /// echelon form.
    pub fn dual(&self) -> LinearCode {
        LinearCode { generator: self.generator.nullspace() }
    }

    /// `c = m · G`.
    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>, CodeError> {
        self.generator
            .left_mul(message)
            .ok_or(CodeError::LengthMismatch { expected: self.k(), got: message.len() })
    }

    /// True when both generators span the same space.
    pub fn same_code(&self, other: &LinearCode) -> bool {
        self.n() == other.n()
            && self.k() == other.k()
            && self.generator.rref().0 == other.generator.rref().0
    }

    /// Minimum Hamming weight over nonzero codewords, by enumerating all
    /// `4^(kL)` messages.
    pub fn min_distance(&self) -> Result<usize, CodeError> {
        let k = self.k();
        if k == 0 {
            return Err(CodeError::ZeroCode);
        }
        let kl = k * self.field().degree() as usize;
        if kl > DISTANCE_BUDGET_KL {
            return Err(CodeError::EnumerationBudget { kl, limit: DISTANCE_BUDGET_KL });
        }
        let q = self.field().order();
        let n = self.n();
        // multiples[i][v] = v · row_i as packed bytes
        let multiples: Vec<Vec<Vec<u8>>> = (0..k)
            .map(|i| {
                self.field()
                    .elements()
                    .map(|v| self.generator.row(i).iter().map(|&g| (v * g).value()).collect())
                    .collect()
            })
            .collect();
        let mut best = n + 1;
        let mut acc = vec![vec![0u8; n]; k + 1];
        enumerate_weights(&multiples, q, 0, &mut acc, true, &mut best);
        Ok(best)
    }

    pub fn is_information_set(&self, positions: &[usize]) -> Result<bool, CodeError> {
        if positions.len() != self.k() {
            return Err(CodeError::LengthMismatch { expected: self.k(), got: positions.len() });
        }
        self.check_positions(positions)?;
        Ok(self.generator.select_columns(positions).rank() == self.k())
    }

    /// The code punctured to `positions` (in the given order). Its dimension
    /// is the rank of the selected columns.
    pub fn restrict(&self, positions: &[usize]) -> Result<LinearCode, CodeError> {
        self.check_positions(positions)?;
        Ok(LinearCode::from_spanning_rows(self.generator.select_columns(positions)))
    }

    /// `M` with `G_I · M = I_k`, so that `x = y_I · M` for `y = x · G`.
    pub fn invert_on_information_set(&self, positions: &[usize]) -> Result<Matrix, CodeError> {
        if !self.is_information_set(positions)? {
            return Err(CodeError::NotInformationSet(positions.to_vec()));
        }
        self.generator
            .select_columns(positions)
            .inverse()
            .ok_or_else(|| CodeError::NotInformationSet(positions.to_vec()))
    }

    /// Recovers the message from the codeword symbols at an information set.
    pub fn decode_from(&self, positions: &[usize], symbols: &[FieldElement]) -> Result<Vec<FieldElement>, CodeError> {
        let m = self.invert_on_information_set(positions)?;
        m.left_mul(symbols)
            .ok_or(CodeError::LengthMismatch { expected: positions.len(), got: symbols.len() })
    }

    fn check_positions(&self, positions: &[usize]) -> Result<(), CodeError> {
        match positions.iter().find(|&&p| p >= self.n()) {
            Some(&index) => Err(CodeError::IndexOutOfRange { index, n: self.n() }),
            None => Ok(()),
        }
    }

    /// Line-oriented text description: field, modulus, then one `row` line
    /// per generator row with two-digit hex coefficients.
    pub fn to_text(&self) -> String {
        let f = self.field();
        let modulus: Vec<String> = f.modulus().iter().map(|c| c.value().to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "code v1");
        let _ = writeln!(out, "field L={} modulus={}", f.degree(), modulus.join(","));
        let _ = writeln!(out, "n {}", self.n());
        let _ = writeln!(out, "k {}", self.k());
        for r in 0..self.k() {
            let row: Vec<String> = self.generator.row(r).iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "row {}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<LinearCode, CodeError> {
        let err = |line: usize, msg: &str| CodeError::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or_else(|| err(1, "empty description"))?;
        if header != "code v1" {
            return Err(err(ln, "expected header `code v1`"));
        }
        let (ln, field_line) = lines.next().ok_or_else(|| err(ln, "missing field line"))?;
        let degree = field_line
            .strip_prefix("field L=")
            .and_then(|rest| rest.split_whitespace().next())
            .and_then(|d| d.parse::<u8>().ok())
            .ok_or_else(|| err(ln, "expected `field L=<degree> ...`"))?;
        let field = Field::new(degree).map_err(|e| err(ln, &e.to_string()))?;
        if let Some(m) = field_line.split("modulus=").nth(1) {
            let given: Vec<&str> = m.trim().split(',').collect();
            let expected: Vec<String> = field.modulus().iter().map(|c: &Gf4| c.value().to_string()).collect();
            if given != expected {
                return Err(err(ln, "modulus differs from the fixed modulus for this degree"));
            }
        }
        let mut read_usize = |key: &str| -> Result<usize, CodeError> {
            let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing `{key}` line")))?;
            l.strip_prefix(key)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| err(ln, &format!("expected `{key} <int>`")))
        };
        let n = read_usize("n")?;
        let k = read_usize("k")?;
        let mut rows = Vec::with_capacity(k);
        for (ln, l) in lines {
            let body = l.strip_prefix("row ").ok_or_else(|| err(ln, "expected `row ...`"))?;
            let row = body
                .split_whitespace()
                .map(|h| {
                    u16::from_str_radix(h, 16)
                        .map_err(|_| err(ln, &format!("bad hex symbol `{h}`")))
                        .and_then(|v| field.element(v).map_err(|e| err(ln, &e.to_string())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != n {
                return Err(err(ln, &format!("row has {} symbols, expected {n}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != k {
            return Err(err(0, &format!("found {} rows, expected {k}", rows.len())));
        }
        LinearCode::from_generator(Matrix::from_rows(field, rows, n))
    }
}

fn enumerate_weights(
    multiples: &[Vec<Vec<u8>>],
    q: usize,
    depth: usize,
    acc: &mut Vec<Vec<u8>>,
    all_zero: bool,
    best: &mut usize,
) {
    if depth == multiples.len() {
        if !all_zero {
            let w = acc[depth].iter().filter(|&&b| b != 0).count();
            *best = (*best).min(w);
        }
        return;
    }
    for v in 0..q {
        let (lo, hi) = acc.split_at_mut(depth + 1);
        for ((o, &a), &m) in hi[0].iter_mut().zip(&lo[depth]).zip(&multiples[depth][v]) {
            *o = a ^ m;
        }
        enumerate_weights(multiples, q, depth + 1, acc, all_zero && v == 0, best);
    }
}

/// The storage code of the `[4, 2]` Reed-Solomon worked example over GF(4):
/// `G = [[1, 0, α², α], [0, 1, α, α²]]`, which is self-dual.
pub fn example_rs_4_2() -> LinearCode {
    let f = Field::new(1).expect("degree 1");
    let (o, z, a, a2) = (f.one(), f.zero(), f.alpha(), f.alpha() * f.alpha());
    LinearCode::from_generator(Matrix::from_rows(f, vec![vec![o, z, a2, a], vec![z, o, a, a2]], 4))
        .expect("full rank")
}

/// The `[3, 2]` single parity check code over GF(4): `y = (x1, x2, x1 + x2)`.
pub fn parity_check_3_2() -> LinearCode {
    let f = Field::new(1).expect("degree 1");
    let (o, z) = (f.one(), f.zero());
    LinearCode::from_generator(Matrix::from_rows(f, vec![vec![o, z, o], vec![z, o, o]], 3))
        .expect("full rank")
}
