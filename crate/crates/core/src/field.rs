//! Arithmetic over GF(4) and its extensions GF(4^L) for L in 1..=4.
//!
//! GF(4) = F_2[α]/(α² + α + 1). A symbol is stored in two bits: bit 0 is the
//! coefficient of 1 and bit 1 the coefficient of α, so `1 = 0b01`, `α = 0b10`
//! and `α² = α + 1 = 0b11`.
//!
//! GF(4^L) = GF(4)[x]/(f_L) with the fixed primitive moduli
//!
//! | L | modulus f_L              |
//! |---|--------------------------|
//! | 1 | x + α                    |
//! | 2 | x² + x + α               |
//! | 3 | x³ + x² + x + α          |
//! | 4 | x⁴ + x³ + x² + α         |
//!
//! An element is the coefficient vector over the polynomial basis
//! `1, x, …, x^(L-1)`, packed two bits per coefficient (coefficient of `x^l`
//! in bits `2l..2l+2`). With that packing, addition is XOR of the packed
//! bytes and [`FieldElement::phi`] is a plain view of the packed coefficients.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("unsupported extension degree {0} (supported: 1..=4)")]
    UnsupportedDegree(u8),
    #[error("field mismatch: GF(4^{left}) vs GF(4^{right})")]
    Mismatch { left: u8, right: u8 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected {expected} symbols, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("value {value:#04x} is not an element of GF(4^{degree})")]
    OutOfRange { value: u16, degree: u8 },
    #[error("no supported field has at least {0} elements")]
    TooLarge(usize),
}

/// An element of GF(4), i.e. a pair of bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf4(u8);

const GF4_MUL: [[u8; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
const GF4_INV: [u8; 4] = [0, 1, 3, 2];

impl Gf4 {
    pub const ZERO: Gf4 = Gf4(0);
    pub const ONE: Gf4 = Gf4(1);
    pub const ALPHA: Gf4 = Gf4(2);
    pub const ALPHA_SQ: Gf4 = Gf4(3);

    pub fn new(value: u8) -> Option<Gf4> {
        (value < 4).then_some(Gf4(value))
    }

    /// Builds the symbol `c0 + c1·α` from its two coordinate bits.
    pub fn from_bits(c0: bool, c1: bool) -> Gf4 {
        Gf4(c0 as u8 | (c1 as u8) << 1)
    }

    /// Coordinates `(c0, c1)` of `c0 + c1·α`.
    pub fn bits(self) -> (bool, bool) {
        (self.0 & 1 == 1, self.0 & 2 == 2)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn inv(self) -> Result<Gf4, FieldError> {
        if self.0 == 0 {
            Err(FieldError::DivisionByZero)
        } else {
            Ok(Gf4(GF4_INV[self.0 as usize]))
        }
    }

    pub fn all() -> impl Iterator<Item = Gf4> {
        (0..4).map(Gf4)
    }
}

impl Add for Gf4 {
    type Output = Gf4;
    fn add(self, rhs: Gf4) -> Gf4 {
        Gf4(self.0 ^ rhs.0)
    }
}

impl Mul for Gf4 {
    type Output = Gf4;
    fn mul(self, rhs: Gf4) -> Gf4 {
        Gf4(GF4_MUL[self.0 as usize][rhs.0 as usize])
    }
}

impl fmt::Display for Gf4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("0"),
            1 => f.write_str("1"),
            2 => f.write_str("a"),
            _ => f.write_str("a^2"),
        }
    }
}

/// Moduli as GF(4) coefficient values, lowest degree first, monic.
const MODULI: [&[u8]; 4] = [&[2, 1], &[2, 1, 1], &[2, 1, 1, 1], &[2, 0, 1, 1, 1]];

/// The field GF(4^L) with its fixed modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    degree: u8,
}

struct Tables {
    mul: Vec<u8>,
    inv: Vec<u8>,
}

fn tables(degree: u8) -> &'static Tables {
    static TABLES: [OnceLock<Tables>; 4] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    TABLES[degree as usize - 1].get_or_init(|| build_tables(degree))
}

fn unpack(value: u8, degree: u8) -> Vec<Gf4> {
    (0..degree).map(|l| Gf4((value >> (2 * l)) & 3)).collect()
}

fn pack(coeffs: &[Gf4]) -> u8 {
    coeffs
        .iter()
        .enumerate()
        .fold(0, |acc, (l, c)| acc | c.0 << (2 * l))
}

fn poly_mul_mod(a: &[Gf4], b: &[Gf4], modulus: &[Gf4]) -> Vec<Gf4> {
    let degree = modulus.len() - 1;
    let mut prod = vec![Gf4::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = prod[i + j] + x * y;
        }
    }
    for top in (degree..prod.len()).rev() {
        let c = prod[top];
        if !c.is_zero() {
            // modulus is monic: subtract c·x^(top-degree)·f
            for (j, &m) in modulus.iter().enumerate() {
                prod[top - degree + j] = prod[top - degree + j] + c * m;
            }
        }
    }
    prod.truncate(degree);
    prod
}

fn build_tables(degree: u8) -> Tables {
    let order = 1usize << (2 * degree);
    let modulus: Vec<Gf4> = MODULI[degree as usize - 1].iter().map(|&c| Gf4(c)).collect();
    let mut mul = vec![0u8; order * order];
    for a in 0..order {
        let pa = unpack(a as u8, degree);
        for b in a..order {
            let v = pack(&poly_mul_mod(&pa, &unpack(b as u8, degree), &modulus));
            mul[a * order + b] = v;
            mul[b * order + a] = v;
        }
    }
    let mut inv = vec![0u8; order];
    for a in 1..order {
        inv[a] = (1..order)
            .find(|&b| mul[a * order + b] == 1)
            .expect("modulus is irreducible") as u8;
    }
    Tables { mul, inv }
}

impl Field {
    pub fn new(degree: u8) -> Result<Field, FieldError> {
        if (1..=MAX_DEGREE).contains(&degree) {
            Ok(Field { degree })
        } else {
            Err(FieldError::UnsupportedDegree(degree))
        }
    }

    /// Smallest supported field with at least `n` elements, i.e.
    /// `L = min { l : 4^l >= n }` (and at least 1).
    pub fn for_length(n: usize) -> Result<Field, FieldError> {
        (1..=MAX_DEGREE)
            .find(|&l| (1usize << (2 * l)) >= n)
            .map(|degree| Field { degree })
            .ok_or(FieldError::TooLarge(n))
    }

    /// Extension degree L over GF(4).
    pub fn degree(self) -> u8 {
        self.degree
    }

    /// Number of elements, 4^L.
    pub fn order(self) -> usize {
        1 << (2 * self.degree)
    }

    /// Bits carried by one element, 2L.
    pub fn bits(self) -> u32 {
        2 * self.degree as u32
    }

    /// Modulus coefficients, lowest degree first; the leading 1 is included.
    pub fn modulus(self) -> Vec<Gf4> {
        MODULI[self.degree as usize - 1].iter().map(|&c| Gf4(c)).collect()
    }

    pub fn zero(self) -> FieldElement {
        FieldElement { degree: self.degree, value: 0 }
    }

    pub fn one(self) -> FieldElement {
        FieldElement { degree: self.degree, value: 1 }
    }

    /// The GF(4) primitive element α embedded as a constant.
    pub fn alpha(self) -> FieldElement {
        FieldElement { degree: self.degree, value: 2 }
    }

    /// A primitive element: α for L = 1, the class of x otherwise.
    pub fn primitive(self) -> FieldElement {
        let value = if self.degree == 1 { 2 } else { 4 };
        FieldElement { degree: self.degree, value }
    }

    /// Element with packed representation `value`.
    pub fn element(self, value: u16) -> Result<FieldElement, FieldError> {
        if (value as usize) < self.order() {
            Ok(FieldElement { degree: self.degree, value: value as u8 })
        } else {
            Err(FieldError::OutOfRange { value, degree: self.degree })
        }
    }

    /// Embeds a GF(4) symbol as a constant.
    pub fn from_gf4(self, s: Gf4) -> FieldElement {
        FieldElement { degree: self.degree, value: s.0 }
    }

    /// All elements in packed-value order `0, 1, …, 4^L − 1`.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        let degree = self.degree;
        (0..self.order()).map(move |v| FieldElement { degree, value: v as u8 })
    }

    /// Inverse of [`FieldElement::phi`].
    pub fn phi_inv(self, symbols: &[Gf4]) -> Result<FieldElement, FieldError> {
        if symbols.len() != self.degree as usize {
            return Err(FieldError::Shape { expected: self.degree as usize, got: symbols.len() });
        }
        Ok(FieldElement { degree: self.degree, value: pack(symbols) })
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(4^{})", self.degree)
    }
}

/// An element of GF(4^L). The field is part of the value so that mixing
/// elements of different fields is detectable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    degree: u8,
    value: u8,
}

impl FieldElement {
    pub fn field(self) -> Field {
        Field { degree: self.degree }
    }

    /// Packed coefficient representation.
    pub fn value(self) -> u8 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: FieldElement) -> Result<(), FieldError> {
        if self.degree == other.degree {
            Ok(())
        } else {
            Err(FieldError::Mismatch { left: self.degree, right: other.degree })
        }
    }

    pub fn try_add(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(rhs)?;
        Ok(FieldElement { degree: self.degree, value: self.value ^ rhs.value })
    }

    pub fn try_mul(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(rhs)?;
        let order = 1usize << (2 * self.degree);
        let t = tables(self.degree);
        Ok(FieldElement {
            degree: self.degree,
            value: t.mul[self.value as usize * order + rhs.value as usize],
        })
    }

    pub fn inv(self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(FieldElement { degree: self.degree, value: tables(self.degree).inv[self.value as usize] })
    }

    pub fn pow(self, mut exp: u64) -> FieldElement {
        let mut base = self;
        let mut acc = self.field().one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Coordinates over the polynomial basis: `L` GF(4) symbols, the `l`-th
    /// being the coefficient of `x^l`.
    pub fn phi(self) -> Vec<Gf4> {
        unpack(self.value, self.degree)
    }

    /// `l`-th coordinate of [`phi`](Self::phi).
    pub fn component(self, l: usize) -> Gf4 {
        Gf4((self.value >> (2 * l)) & 3)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    /// Panics when the operands live in different fields; use
    /// [`FieldElement::try_add`] for a checked version.
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.try_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self + rhs
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: FieldElement) {
        *self = *self + rhs;
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    /// Panics when the operands live in different fields; use
    /// [`FieldElement::try_mul`] for a checked version.
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.try_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: FieldElement) {
        *self = *self * rhs;
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: GF(4) as F_2[y]/(y²+y+1) on raw bits, GF(4^L) as
    // schoolbook polynomial product followed by long division.
    fn gf4_oracle_mul(a: u8, b: u8) -> u8 {
        // carry-less product then reduce y² = y + 1
        let mut p = 0u8;
        for i in 0..2 {
            if b >> i & 1 == 1 {
                p ^= a << i;
            }
        }
        if p & 4 != 0 {
            p ^= 0b111;
        }
        p
    }

    fn oracle_mul(a: u8, b: u8, degree: u8) -> u8 {
        let d = degree as usize;
        let ca: Vec<u8> = (0..d).map(|l| (a >> (2 * l)) & 3).collect();
        let cb: Vec<u8> = (0..d).map(|l| (b >> (2 * l)) & 3).collect();
        let mut prod = vec![0u8; 2 * d - 1];
        for i in 0..d {
            for j in 0..d {
                prod[i + j] ^= gf4_oracle_mul(ca[i], cb[j]);
            }
        }
        let modulus = MODULI[d - 1];
        for top in (d..prod.len()).rev() {
            let c = prod[top];
            for j in 0..=d {
                prod[top - d + j] ^= gf4_oracle_mul(c, modulus[j]);
            }
        }
        (0..d).fold(0, |acc, l| acc | prod[l] << (2 * l))
    }

    fn gf16() -> Field {
        Field::new(2).unwrap()
    }

    #[test]
    fn gf4_alpha_rules() {
        assert_eq!(Gf4::ALPHA + Gf4::ALPHA, Gf4::ZERO);
        assert_eq!(Gf4::ALPHA + Gf4::ONE, Gf4::ALPHA_SQ);
        assert_eq!(Gf4::ALPHA * Gf4::ALPHA, Gf4::ALPHA + Gf4::ONE);
        assert_eq!(Gf4::ALPHA.inv().unwrap(), Gf4::ALPHA_SQ);
        assert_eq!(Gf4::ONE.inv().unwrap(), Gf4::ONE);
        assert_eq!(Gf4::ZERO.inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn extension_field_alpha_rules() {
        let f = Field::new(1).unwrap();
        let a = f.alpha();
        assert!((a + a).is_zero());
        assert_eq!(a + f.one(), a * a);
        assert_eq!(a.inv().unwrap(), a * a);
        assert_eq!(f.one().inv().unwrap(), f.one());
    }

    #[test]
    fn gf16_tables_match_oracle() {
        let f = gf16();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!((a + b).value(), a.value() ^ b.value());
                assert_eq!((a * b).value(), oracle_mul(a.value(), b.value(), 2), "{a}*{b}");
            }
        }
    }

    #[test]
    fn all_degrees_match_oracle_on_samples() {
        for degree in 1..=4 {
            let f = Field::new(degree).unwrap();
            let order = f.order() as u16;
            for a in (0..order).step_by(3) {
                for b in (0..order).step_by(5) {
                    let x = f.element(a).unwrap();
                    let y = f.element(b).unwrap();
                    assert_eq!((x * y).value(), oracle_mul(a as u8, b as u8, degree));
                }
            }
        }
    }

    #[test]
    fn inverse_matches_exhaustive_search() {
        let f = gf16();
        for x in f.elements().skip(1) {
            let found = f.elements().find(|&y| (x * y) == f.one()).unwrap();
            assert_eq!(x.inv().unwrap(), found);
        }
        assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for degree in 1..=2 {
            let f = Field::new(degree).unwrap();
            for a in f.elements() {
                assert!((a + a).is_zero());
                assert_eq!(a * f.one(), a);
                assert_eq!(a + f.zero(), a);
                for b in f.elements() {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    for c in f.elements() {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!((a * b) * c, a * (b * c));
                        assert_eq!(a * (b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    #[test]
    fn moduli_are_irreducible() {
        // Degree ≤ 3: no roots suffices. Degree 4: additionally no monic
        // quadratic factor. Both checked by exhaustive search over GF(4).
        for degree in 1..=4usize {
            let m: Vec<u8> = MODULI[degree - 1].to_vec();
            let eval = |x: u8| {
                m.iter().rev().fold(0u8, |acc, &c| gf4_oracle_mul(acc, x) ^ c)
            };
            if degree > 1 {
                assert!((0..4).all(|x| eval(x) != 0), "degree {degree} has a root");
            }
            if degree == 4 {
                for c0 in 0..4u8 {
                    for c1 in 0..4u8 {
                        let q = [c0, c1, 1u8];
                        // long division remainder of m by q
                        let mut r = m.clone();
                        for top in (2..r.len()).rev() {
                            let c = r[top];
                            for j in 0..3 {
                                r[top - 2 + j] ^= gf4_oracle_mul(c, q[j]);
                            }
                        }
                        assert!(r[0] != 0 || r[1] != 0, "x^2+{c1}x+{c0} divides");
                    }
                }
            }
        }
    }

    #[test]
    fn primitive_element_generates_group() {
        for degree in 1..=4 {
            let f = Field::new(degree).unwrap();
            let g = f.primitive();
            let order = f.order() as u64 - 1;
            let mut seen = std::collections::HashSet::new();
            for e in 0..order {
                seen.insert(g.pow(e));
            }
            assert_eq!(seen.len() as u64, order);
            assert_eq!(g.pow(order), f.one());
        }
    }

    #[test]
    fn element_count_is_four_to_the_l() {
        for degree in 1..=4 {
            let f = Field::new(degree).unwrap();
            assert_eq!(f.elements().count(), 4usize.pow(degree as u32));
        }
    }

    #[test]
    fn phi_basics() {
        let f = Field::new(3).unwrap();
        assert_eq!(f.zero().phi(), vec![Gf4::ZERO; 3]);
        let f1 = Field::new(1).unwrap();
        assert_eq!(f1.alpha().phi(), vec![Gf4::ALPHA]);
        assert_eq!(f1.phi_inv(&[Gf4::ALPHA]).unwrap(), f1.alpha());
        assert_eq!(f.phi_inv(&[Gf4::ZERO; 3]).unwrap(), f.zero());
        assert_eq!(
            f.phi_inv(&[Gf4::ONE]),
            Err(FieldError::Shape { expected: 3, got: 1 })
        );
    }

    #[test]
    fn phi_roundtrip_and_additive_gf16() {
        let f = gf16();
        for a in f.elements() {
            assert_eq!(f.phi_inv(&a.phi()).unwrap(), a);
            for b in f.elements() {
                let lhs = (a + b).phi();
                let rhs: Vec<Gf4> = a.phi().iter().zip(b.phi()).map(|(&x, y)| x + y).collect();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = Field::new(1).unwrap().one();
        let b = Field::new(2).unwrap().one();
        assert_eq!(a.try_add(b), Err(FieldError::Mismatch { left: 1, right: 2 }));
        assert_eq!(a.try_mul(b), Err(FieldError::Mismatch { left: 1, right: 2 }));
    }

    #[test]
    fn field_sizing() {
        assert_eq!(Field::for_length(3).unwrap().degree(), 1);
        assert_eq!(Field::for_length(4).unwrap().degree(), 1);
        assert_eq!(Field::for_length(5).unwrap().degree(), 2);
        assert_eq!(Field::for_length(17).unwrap().degree(), 3);
        assert_eq!(Field::for_length(256).unwrap().degree(), 4);
        assert!(Field::for_length(257).is_err());
        assert!(Field::new(0).is_err());
        assert!(Field::new(5).is_err());
    }
}
