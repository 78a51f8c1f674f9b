//! Optimal locally repairable codes with disjoint repair groups.
//!
//! The construction evaluates the polynomials `x^i · P(x)^j`, `i < r`,
//! `j < k/r`, where `P` is constant on every repair group. On one group the
//! code is then a Reed-Solomon `[r+ρ−1, r]` code, and the largest degree
//! `(r−1) + (k/r−1)(r+ρ−1)` gives `d = n − k + 1 − (k/r − 1)(ρ − 1)`.
//!
//! Two group shapes are supported:
//! * additive cosets `c·2^j + H` of `H = {0, …, 2^j − 1}` (an F_2-subspace in
//!   the packed representation), with `P(x) = ∏_{h∈H} (x − h)`, when the
//!   group size is a power of two;
//! * multiplicative cosets of the order-`g` subgroup with `P(x) = x^g`, when
//!   `g` divides `4^L − 1`.

use crate::field::{Field, FieldElement};

use super::{CodeError, LinearCode, Matrix};

/// Locality data of an LRC: repair groups of size `r + ρ − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LrcProfile {
    pub r: usize,
    pub rho: usize,
    pub groups: Vec<Vec<usize>>,
}

impl LrcProfile {
    pub fn group_size(&self) -> usize {
        self.r + self.rho - 1
    }

    /// Number of repair groups μ.
    pub fn mu(&self) -> usize {
        self.groups.len()
    }
}

/// `n − k + 1 − (⌈k/r⌉ − 1)(ρ − 1)`, saturating at zero.
pub fn singleton_like_bound(n: usize, k: usize, r: usize, rho: usize) -> usize {
    let groups = k.div_ceil(r);
    (n + 1).saturating_sub(k + (groups - 1) * (rho - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GroupShape {
    Additive,
    Multiplicative,
}

fn shape_for(field: Field, n: usize, group: usize) -> Option<GroupShape> {
    let q = field.order();
    if group.is_power_of_two() && n <= q {
        Some(GroupShape::Additive)
    } else if (q - 1) % group == 0 && n < q {
        Some(GroupShape::Multiplicative)
    } else {
        None
    }
}

/// Smallest supported field in which [`lrc_generator`] can build a code of
/// length `n` with repair groups of size `group`.
pub fn lrc_field(n: usize, group: usize) -> Result<Field, CodeError> {
    (1..=crate::field::MAX_DEGREE)
        .map(|d| Field::new(d).expect("supported degree"))
        .find(|&f| shape_for(f, n, group).is_some())
        .ok_or_else(|| {
            CodeError::InvalidParameters(format!(
                "no supported field admits {n} positions in groups of {group}"
            ))
        })
}

fn eval_poly(coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs.iter().rev().fold(x.field().zero(), |acc, &c| acc * x + c)
}

/// Builds an optimal `[n, k]` LRC with `(r, ρ)`-locality over `field`.
/// Repair group `l` occupies positions `l·(r+ρ−1) .. (l+1)·(r+ρ−1)`.
pub fn lrc_generator(
    field: Field,
    n: usize,
    k: usize,
    r: usize,
    rho: usize,
) -> Result<(LinearCode, LrcProfile), CodeError> {
    let bad = |msg: String| Err(CodeError::InvalidParameters(msg));
    if r == 0 || rho == 0 || k == 0 {
        return bad(format!("k, r and rho must be positive (k={k}, r={r}, rho={rho})"));
    }
    if k % r != 0 {
        return bad(format!("r = {r} does not divide k = {k}"));
    }
    let g = r + rho - 1;
    if n % g != 0 {
        return bad(format!("group size r+rho-1 = {g} does not divide n = {n}"));
    }
    let mu = n / g;
    if mu < k / r {
        return bad(format!("{mu} repair groups cannot carry k/r = {} message blocks", k / r));
    }
    let Some(shape) = shape_for(field, n, g) else {
        return bad(format!("{field} is too small for {mu} groups of size {g}"));
    };

    let (points, good_poly): (Vec<FieldElement>, Vec<FieldElement>) = match shape {
        GroupShape::Additive => {
            let points = field.elements().take(n).collect();
            // ∏_{h < g} (x − h), coefficients lowest first
            let mut poly = vec![field.one()];
            for h in field.elements().take(g) {
                let mut next = vec![field.zero(); poly.len() + 1];
                for (i, &c) in poly.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] += c * h;
                }
                poly = next;
            }
            (points, poly)
        }
        GroupShape::Multiplicative => {
            let gamma = field.primitive();
            let step = ((field.order() - 1) / g) as u64;
            let points = (0..mu as u64)
                .flat_map(|c| (0..g as u64).map(move |h| gamma.pow(c + h * step)))
                .collect();
            let mut poly = vec![field.zero(); g + 1];
            poly[g] = field.one();
            (points, poly)
        }
    };

    let mut rows = Vec::with_capacity(k);
    for j in 0..k / r {
        for i in 0..r {
            rows.push(
                points
                    .iter()
                    .map(|&x| x.pow(i as u64) * eval_poly(&good_poly, x).pow(j as u64))
                    .collect(),
            );
        }
    }
    let code = LinearCode::from_generator(Matrix::from_rows(field, rows, n))?;
    let groups = (0..mu).map(|l| (l * g..(l + 1) * g).collect()).collect();
    Ok((code, LrcProfile { r, rho, groups }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_optimal(n: usize, k: usize, r: usize, rho: usize) -> (LinearCode, LrcProfile) {
        let field = lrc_field(n, r + rho - 1).unwrap();
        let (code, profile) = lrc_generator(field, n, k, r, rho).unwrap();
        assert_eq!((code.n(), code.k()), (n, k));
        let bound = singleton_like_bound(n, k, r, rho);
        assert_eq!(code.min_distance().unwrap(), bound, "[{n},{k}] r={r} rho={rho}");
        let mut seen = vec![false; n];
        for grp in &profile.groups {
            assert_eq!(grp.len(), r + rho - 1);
            for &p in grp {
                assert!(!seen[p]);
                seen[p] = true;
            }
            let local = code.restrict(grp).unwrap();
            assert_eq!(local.k(), r);
            assert_eq!(local.min_distance().unwrap(), rho);
        }
        assert!(seen.iter().all(|&s| s));
        (code, profile)
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(singleton_like_bound(8, 4, 2, 3), 3);
        assert_eq!(singleton_like_bound(12, 4, 2, 3), 7);
        assert_eq!(singleton_like_bound(6, 2, 2, 1), 5);
    }

    #[test]
    fn optimal_8_4_2_3() {
        let (code, profile) = check_optimal(8, 4, 2, 3);
        assert_eq!(profile.mu(), 2);
        assert_eq!(code.field().degree(), 2);
    }

    #[test]
    fn optimal_with_dependent_groups() {
        check_optimal(12, 4, 2, 3);
        check_optimal(9, 2, 2, 2);
        check_optimal(10, 4, 2, 4);
        check_optimal(6, 2, 1, 2);
    }

    #[test]
    fn trivial_locality_is_mds() {
        let (code, _) = check_optimal(6, 2, 2, 1);
        assert_eq!(code.min_distance().unwrap(), 6 - 2 + 1);
    }

    #[test]
    fn groups_minus_rho_minus_one_are_information_sets() {
        let (code, profile) = check_optimal(8, 4, 2, 3);
        // drop any rho-1 = 2 positions from each of the two groups
        let pairs: Vec<(usize, usize)> =
            (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        for &(a0, b0) in &pairs {
            for &(a1, b1) in &pairs {
                let keep0 = profile.groups[0].iter().enumerate().filter(|(i, _)| *i != a0 && *i != b0);
                let keep1 = profile.groups[1].iter().enumerate().filter(|(i, _)| *i != a1 && *i != b1);
                let set: Vec<usize> = keep0.chain(keep1).map(|(_, &p)| p).collect();
                assert!(code.is_information_set(&set).unwrap(), "{set:?}");
            }
        }
    }

    #[test]
    fn too_many_positions_in_one_group_is_not_information_set() {
        let (code, profile) = check_optimal(8, 4, 2, 3);
        // three positions of a dimension-2 local code plus one elsewhere
        let set = vec![profile.groups[0][0], profile.groups[0][1], profile.groups[0][2], profile.groups[1][0]];
        let rank = code.generator().select_columns(&set).rank();
        assert!(rank < 4);
        assert!(!code.is_information_set(&set).unwrap());
    }

    #[test]
    fn restriction_to_information_groups_has_distance_rho() {
        let (code, profile) = check_optimal(12, 4, 2, 3);
        let union: Vec<usize> = profile.groups[..2].concat();
        assert_eq!(code.restrict(&union).unwrap().min_distance().unwrap(), 3);
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = Field::new(2).unwrap();
        assert!(lrc_generator(f, 8, 3, 2, 3).is_err());
        assert!(lrc_generator(f, 7, 4, 2, 3).is_err());
        assert!(lrc_generator(f, 4, 4, 2, 3).is_err());
        assert!(lrc_generator(Field::new(1).unwrap(), 8, 4, 2, 3).is_err());
    }
}
