use rand::Rng;

use crate::field::FieldElement;

use super::{DssConfig, ProtocolError};

/// Queries for all pieces. `q[p][s]` is the length-`m` query to working
/// server `s` for piece `p`; `z[p][j]` the random vector `Z_j` behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySet {
    pub file: usize,
    pub q: Vec<Vec<Vec<FieldElement>>>,
    pub z: Vec<Vec<Vec<FieldElement>>>,
}

/// `[Q_1 … Q_n] = [Z_1 … Z_t] · G^⊥ + ξ_{K,p}` for one piece, where the
/// `i`-th entry of `Q_s` is the `(i, s)` entry of the `m × n` product.
pub fn queries_from_randomness(
    cfg: &DssConfig,
    file: usize,
    piece: usize,
    z: &[Vec<FieldElement>],
) -> Result<Vec<Vec<FieldElement>>, ProtocolError> {
    if file >= cfg.m() {
        return Err(ProtocolError::FileIndex { index: file, m: cfg.m() });
    }
    if piece >= cfg.k() {
        return Err(ProtocolError::InvalidConfig(format!("piece {piece} out of range for k = {}", cfg.k())));
    }
    let t = cfg.dual_generator().rows();
    if z.len() != t || z.iter().any(|v| v.len() != cfg.m()) {
        return Err(ProtocolError::InvalidConfig(format!("expected {t} random vectors of length {}", cfg.m())));
    }
    let field = cfg.field();
    let d = cfg.dual_generator();
    let mut q = vec![vec![field.zero(); cfg.m()]; cfg.n()];
    for (s, qs) in q.iter_mut().enumerate() {
        for (i, e) in qs.iter_mut().enumerate() {
            for (j, zj) in z.iter().enumerate() {
                *e += zj[i] * d.get(j, s);
            }
        }
    }
    q[piece][file] += field.one();
    Ok(q)
}

/// Draws `Z_1, …, Z_t` uniformly for every piece (in the order piece, `j`,
/// file entry) and builds the queries. The same queries serve every stripe.
pub fn generate_queries<R: Rng + ?Sized>(cfg: &DssConfig, file: usize, rng: &mut R) -> Result<QuerySet, ProtocolError> {
    if file >= cfg.m() {
        return Err(ProtocolError::FileIndex { index: file, m: cfg.m() });
    }
    let field = cfg.field();
    let order = field.order() as u16;
    let t = cfg.dual_generator().rows();
    let mut q = Vec::with_capacity(cfg.k());
    let mut z_all = Vec::with_capacity(cfg.k());
    for p in 0..cfg.k() {
        let z: Vec<Vec<FieldElement>> = (0..t)
            .map(|_| (0..cfg.m()).map(|_| field.element(rng.gen_range(0..order)).expect("in range")).collect())
            .collect();
        q.push(queries_from_randomness(cfg, file, p, &z)?);
        z_all.push(z);
    }
    Ok(QuerySet { file, q, z: z_all })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::example_rs_4_2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_randomness_gives_unit_query() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 3, 1).unwrap();
        let f = cfg.field();
        let z = vec![vec![f.zero(); 3]; 2];
        let q = queries_from_randomness(&cfg, 1, 0, &z).unwrap();
        for (s, qs) in q.iter().enumerate() {
            for (i, &e) in qs.iter().enumerate() {
                let expect = if s == 0 && i == 1 { f.one() } else { f.zero() };
                assert_eq!(e, expect);
            }
        }
    }

    #[test]
    fn third_query_is_alpha_sq_z1_plus_alpha_z2() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 2, 1).unwrap();
        let f = cfg.field();
        let (a, a2) = (f.alpha(), f.alpha() * f.alpha());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let qs = generate_queries(&cfg, 0, &mut rng).unwrap();
            for p in 0..2 {
                let z = &qs.z[p];
                for i in 0..2 {
                    assert_eq!(qs.q[p][2][i], a2 * z[0][i] + a * z[1][i]);
                }
            }
        }
    }

    #[test]
    fn query_rows_minus_unit_are_dual_codewords() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 3, 1).unwrap();
        let g = cfg.working_code().generator().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let file = rng.gen_range(0..3);
            let qs = generate_queries(&cfg, file, &mut rng).unwrap();
            for p in 0..2 {
                for i in 0..3 {
                    let mut row: Vec<FieldElement> = (0..4).map(|s| qs.q[p][s][i]).collect();
                    if i == file {
                        row[p] += cfg.field().one();
                    }
                    let syndrome = g.mul(&crate::codes::Matrix::from_rows(cfg.field(), vec![row], 4).transpose());
                    assert!(syndrome.unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn file_index_checked() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            generate_queries(&cfg, 2, &mut rng).unwrap_err(),
            ProtocolError::FileIndex { index: 2, m: 2 }
        );
    }
}
